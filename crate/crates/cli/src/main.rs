mod record;
mod study;
mod task;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hypersmc::checker::{brute_force_check, check, CheckResult, CheckTask, DEFAULT_MAX_SAMPLES};
use hypersmc::dtmc::{parse_model, Dtmc, ModelSampler};
use hypersmc::logic::{parse_closed_formula, Formula};
use hypersmc::sprt::{ErrorBudget, Outcome};

use record::{verdict_name, BenchRow, Format, OracleRow, RunRecord, Sink};
use study::{Model, Prepared, Study};
use task::TaskFile;

/// Statistical model checking of HyperPCTL* formulas on Markov chains.
///
/// Exit status of `check` and `casestudy`: 0 when the property is asserted
/// to hold, 1 when it is asserted to fail, 2 when the sample cap was hit,
/// and 3 on errors. `oracle` exits with 0 or 1 for the exact truth value.
#[derive(Debug, Parser)]
#[command(name = "hypersmc", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Probability of asserting the property when it fails [default: 0.01]
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Probability of asserting a failure when the property holds [default: 0.01]
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Indifference margin around every decision boundary [default: 0.01]
    #[arg(long, global = true)]
    margin: Option<f64>,
    /// Cut-off for unbounded untils
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// Draws between two termination checks [default: 1]
    #[arg(long, global = true)]
    batch: Option<u64>,
    /// Draws per source before giving up [default: 1000000]
    #[arg(long, global = true)]
    max_samples: Option<u64>,
    /// Seed of all random streams [default: 0]
    #[arg(long, global = true, env = "HYPERSMC_SEED")]
    seed: Option<u64>,
    /// Threads drawing samples [default: 1]
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Leave wall-clock columns empty so output is reproducible byte for byte
    #[arg(long, global = true)]
    no_time: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a formula on an explicit model
    Check(CheckArgs),
    /// Evaluate a formula exactly by path enumeration
    Oracle(OracleArgs),
    /// Repeat a check with consecutive seeds and score it against a reference
    Bench(BenchArgs),
    /// Check one of the built-in case studies
    Casestudy {
        #[command(subcommand)]
        study: Study,
    },
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Task file with `key = value` lines; flags take precedence
    #[arg(long)]
    task: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Formula text, or a file containing it
    #[arg(long)]
    formula: Option<String>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    model: PathBuf,
    /// Formula text, or a file containing it
    #[arg(long)]
    formula: String,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(subcommand)]
    target: BenchTarget,
    /// Number of seeded repetitions
    #[arg(long, global = true, default_value_t = 100)]
    runs: u64,
    /// Skip computing the reference verdict
    #[arg(long, global = true, value_enum)]
    reference: Option<Reference>,
}

#[derive(Debug, Subcommand)]
enum BenchTarget {
    #[command(flatten)]
    Study(Study),
    /// An explicit model, scored against the exact oracle
    Model(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Reference {
    Holds,
    Fails,
}

/// Flags, task file and defaults merged.
#[derive(Debug, Clone)]
struct Settings {
    alpha: f64,
    beta: f64,
    margin: f64,
    horizon: Option<usize>,
    batch: u64,
    max_samples: u64,
    seed: u64,
    workers: usize,
    timed: bool,
}

impl Settings {
    fn resolve(g: &Global, t: &TaskFile) -> Self {
        Settings {
            alpha: g.alpha.or(t.alpha).unwrap_or(0.01),
            beta: g.beta.or(t.beta).unwrap_or(0.01),
            margin: g.margin.or(t.margin).unwrap_or(0.01),
            horizon: g.horizon.or(t.horizon),
            batch: g.batch.or(t.batch).unwrap_or(1),
            max_samples: g.max_samples.or(t.max_samples).unwrap_or(DEFAULT_MAX_SAMPLES),
            seed: g.seed.or(t.seed).unwrap_or(0),
            workers: g.workers.or(t.workers).unwrap_or(1),
            timed: !g.no_time,
        }
    }

    fn task<'m, M>(&self, model: &'m M, formula: &Formula, seed: u64) -> Result<CheckTask<'m, M>> {
        let mut task = CheckTask::new(
            model,
            formula.clone(),
            ErrorBudget::new(self.alpha, self.beta)?,
            self.margin,
        );
        task.horizon = self.horizon;
        task.batch = self.batch;
        task.max_samples = self.max_samples;
        task.seed = seed;
        task.workers = self.workers;
        Ok(task)
    }

    fn record(&self, command: &str, target: String, formula: &Formula, r: &CheckResult) -> RunRecord {
        RunRecord {
            command: command.into(),
            target,
            formula: formula.to_string(),
            alpha: self.alpha,
            beta: self.beta,
            margin: self.margin,
            horizon: self.horizon,
            batch: self.batch,
            max_samples: self.max_samples,
            seed: self.seed,
            workers: self.workers,
            verdict: verdict_name(r.verdict.outcome),
            samples: r.verdict.samples_used,
            llr: r.verdict.llr,
            seconds: self.timed.then(|| r.elapsed.as_secs_f64()),
        }
    }
}

fn exit_for(outcome: Outcome) -> ExitCode {
    ExitCode::from(match outcome {
        Outcome::AssertH1 => 0,
        Outcome::AssertH0 => 1,
        Outcome::Undecided => 2,
    })
}

fn formula_arg(arg: &str) -> Result<String> {
    let path = Path::new(arg);
    if path.is_file() {
        Ok(std::fs::read_to_string(path)?.trim().to_string())
    } else {
        Ok(arg.to_string())
    }
}

fn load_model(path: &Path) -> Result<Dtmc> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read model {}", path.display()))?;
    parse_model(&text).with_context(|| format!("in model {}", path.display()))
}

fn parse(text: &str) -> Result<Formula> {
    parse_closed_formula(text).map_err(|e| anyhow::anyhow!("formula: {e}"))
}

fn cmd_check<W: Write>(g: &Global, a: &CheckArgs, sink: &mut Sink<W>) -> Result<ExitCode> {
    let file = a.task.as_deref().map(TaskFile::load).transpose()?.unwrap_or_default();
    let s = Settings::resolve(g, &file);
    let model_path = a.model.clone().or(file.model).context("no model given (use --model or a task file)")?;
    let text = match &a.formula {
        Some(f) => formula_arg(f)?,
        None => file.formula.context("no formula given (use --formula or a task file)")?,
    };
    let dtmc = load_model(&model_path)?;
    let formula = parse(&text)?;
    let sampler = dtmc.sampler();
    let r = check(&s.task(&sampler, &formula, s.seed)?)?;
    sink.write(&s.record("check", model_path.display().to_string(), &formula, &r))?;
    Ok(exit_for(r.verdict.outcome))
}

fn cmd_oracle<W: Write>(g: &Global, a: &OracleArgs, sink: &mut Sink<W>) -> Result<ExitCode> {
    let dtmc = load_model(&a.model)?;
    let formula = parse(&formula_arg(&a.formula)?)?;
    let r = brute_force_check(&dtmc, &formula, g.horizon)?;
    for (term, value) in &r.probabilities {
        sink.write(&OracleRow { kind: "probability", term: term.to_string(), value: value.to_string() })?;
    }
    for c in &r.comparisons {
        sink.write(&OracleRow { kind: "lhs", term: c.lhs.to_string(), value: c.lhs_value.to_string() })?;
        sink.write(&OracleRow { kind: "rhs", term: c.rhs.to_string(), value: c.rhs_value.to_string() })?;
    }
    sink.write(&OracleRow { kind: "holds", term: formula.to_string(), value: r.holds.to_string() })?;
    Ok(ExitCode::from(if r.holds { 0 } else { 1 }))
}

fn check_study<M: ModelSampler>(m: &M, p: &Prepared, s: &Settings, seed: u64) -> Result<CheckResult> {
    let mut s = s.clone();
    s.horizon = s.horizon.or(p.horizon);
    Ok(check(&s.task(m, &p.formula, seed)?)?)
}

fn run_study(p: &Prepared, s: &Settings, seed: u64) -> Result<CheckResult> {
    match &p.model {
        Model::Dining(m) => check_study(m, p, s, seed),
        Model::Threads(m) => check_study(m, p, s, seed),
        Model::Cache(m) => check_study(m, p, s, seed),
        Model::Timing(m) => check_study(m, p, s, seed),
    }
}

fn cmd_casestudy<W: Write>(g: &Global, study: &Study, sink: &mut Sink<W>) -> Result<ExitCode> {
    let s = Settings::resolve(g, &TaskFile::default());
    let p = study.prepare()?;
    let r = run_study(&p, &s, s.seed)?;
    let mut s = s;
    s.horizon = s.horizon.or(p.horizon);
    sink.write(&s.record("casestudy", format!("{} {}", p.name, p.params), &p.formula, &r))?;
    Ok(exit_for(r.verdict.outcome))
}

/// Budget of the statistical reference run.
const REFERENCE_ERROR: f64 = 1e-4;

fn cmd_bench<W: Write>(g: &Global, a: &BenchArgs, sink: &mut Sink<W>) -> Result<ExitCode> {
    let s = Settings::resolve(g, &TaskFile::default());
    let given = a.reference.map(|r| r == Reference::Holds);
    let (study, params, reference, source, results) = match &a.target {
        BenchTarget::Study(study) => {
            let p = study.prepare()?;
            let (reference, source) = match given {
                Some(r) => (r, "given"),
                None => {
                    let mut strict = s.clone();
                    strict.alpha = REFERENCE_ERROR;
                    strict.beta = REFERENCE_ERROR;
                    let r = run_study(&p, &strict, u64::MAX - s.seed)?;
                    match r.holds() {
                        Some(h) => (h, "statistical"),
                        None => bail!("reference run hit the sample cap; pass --reference"),
                    }
                }
            };
            let results = (0..a.runs)
                .map(|i| run_study(&p, &s, s.seed.wrapping_add(i)))
                .collect::<Result<Vec<_>>>()?;
            (p.name.to_string(), p.params, reference, source, results)
        }
        BenchTarget::Model(m) => {
            let dtmc = load_model(&m.model)?;
            let formula = parse(&formula_arg(&m.formula)?)?;
            let (reference, source) = match given {
                Some(r) => (r, "given"),
                None => (brute_force_check(&dtmc, &formula, s.horizon)?.holds, "exact"),
            };
            let sampler = dtmc.sampler();
            let results = (0..a.runs)
                .map(|i| Ok(check(&s.task(&sampler, &formula, s.seed.wrapping_add(i))?)?))
                .collect::<Result<Vec<_>>>()?;
            (m.model.display().to_string(), formula.to_string(), reference, source, results)
        }
    };
    let runs = results.len().max(1) as f64;
    let correct = results.iter().filter(|r| r.holds() == Some(reference)).count();
    let undecided = results.iter().filter(|r| r.holds().is_none()).count();
    let samples: u64 = results.iter().map(|r| r.verdict.samples_used).sum();
    let seconds: f64 = results.iter().map(|r| r.elapsed.as_secs_f64()).sum();
    sink.write(&BenchRow {
        study,
        params,
        alpha: s.alpha,
        beta: s.beta,
        margin: s.margin,
        runs: a.runs,
        reference: if reference { "holds" } else { "fails" },
        reference_source: source,
        accuracy: correct as f64 / runs,
        undecided: undecided as u64,
        mean_samples: samples as f64 / runs,
        mean_seconds: s.timed.then_some(seconds / runs),
    })?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let stdout = std::io::stdout().lock();
    let mut sink = Sink::new(cli.global.format, stdout);
    let result = match &cli.command {
        Command::Check(a) => cmd_check(&cli.global, a, &mut sink),
        Command::Oracle(a) => cmd_oracle(&cli.global, a, &mut sink),
        Command::Bench(a) => cmd_bench(&cli.global, a, &mut sink),
        Command::Casestudy { study } => cmd_casestudy(&cli.global, study, &mut sink),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
