//! End-to-end acceptance run.
//!
//! Prints one `pass` or `FAIL` line per criterion and exits non-zero when
//! any criterion fails. A substring argument runs only matching criteria,
//! e.g. `cargo test --test acceptance -- oracle`.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value as Json;

use hypersmc::casestudies::{StepDistribution, TimingConfig, TimingModel};
use hypersmc::checker::{brute_force_check, check, CheckTask};
use hypersmc::dtmc::{Dtmc, Edge, StateId};
use hypersmc::logic::{parse_closed_formula, translate_pctls, Interval, PathVar, PctlPath, PctlState, Value};
use hypersmc::sprt::{
    kl_divergence, log_likelihood, log_likelihood_gradient, project_q_max_likelihood,
    project_r_min_kl, run_sequential, Direction, ErrorBudget, Expr, Indifference1D, Outcome,
    PartitionedTest, SampleCounts, Test, TestRegion,
};

type Report = Result<String, String>;

const FIG3: &str = "P[p1,p2]((ap1@p1 & ap1@p2) & F<=2 (ap2@p1 & ap2@p2)) > 1/6";
const FIG5: &str = "P[p1](init@p1 => F (ap1@p1 & ap2@p1)) / P[p2](init@p2 => F ap2@p2) = 1/2";

fn main() -> ExitCode {
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [(&str, &str, fn() -> Report); 11] = [
        ("1", "fig3 oracle and seeded checks", fig3),
        ("2", "fig5 oracle ratio", fig5),
        ("3", "threads bench n=20", threads_bench),
        ("4", "dining bench n=100", dining_bench),
        ("5", "cache bench T=10", cache_bench),
        ("6", "error rates on 2-D regions", error_rates),
        ("7", "projections vs grid search", projections),
        ("8", "one-sample counter-example", counter_example),
        ("9", "PCTL* translation soundness", pctl_soundness),
        ("10", "oracle vs statistical agreement", oracle_agreement),
        ("T", "timing separation 0.9 vs 0.7", timing_separation),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let label = format!("criterion {id}: {name}");
        if filter.as_ref().is_some_and(|f| !label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("pass  {label} ({detail}; {secs:.1} s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {label} ({detail}; {secs:.1} s)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Runs the binary and parses its JSON-lines output.
fn cli(args: &[&str]) -> Result<Vec<Json>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hypersmc"))
        .args(args)
        .args(["--format", "jsonl"])
        .current_dir(root())
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.code() == Some(3) {
        return Err(String::from_utf8_lossy(&out.stderr).trim().to_string());
    }
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).map_err(|e| e.to_string()))
        .collect()
}

fn field<'a>(row: &'a Json, key: &str) -> &'a Json {
    &row[key]
}

fn ensure(ok: bool, detail: String) -> Report {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_value(rows: &[Json], kind: &str) -> Option<String> {
    rows.iter()
        .find(|r| field(r, "kind") == kind)
        .and_then(|r| field(r, "value").as_str().map(str::to_string))
}

fn fig3() -> Report {
    let rows = cli(&["oracle", "--model", "models/fig3.dtmc", "--formula", FIG3])?;
    let p = oracle_value(&rows, "probability").unwrap_or_default();
    let mut h1 = 0;
    let mut slowest = 0.0f64;
    for seed in 0..100 {
        let rows = cli(&["check", "--task", "models/fig3.task", "--seed", &seed.to_string()])?;
        let row = rows.first().ok_or("no output")?;
        h1 += (field(row, "verdict") == "AssertH1") as u32;
        slowest = slowest.max(field(row, "seconds").as_f64().unwrap_or(f64::INFINITY));
    }
    ensure(
        p == "1/4" && h1 >= 98 && slowest < 1.0,
        format!("probability {p}, {h1}/100 AssertH1, slowest run {slowest:.4} s"),
    )
}

fn fig5() -> Report {
    let rows = cli(&["oracle", "--model", "models/fig5.dtmc", "--formula", FIG5, "--horizon", "3"])?;
    let ratio = oracle_value(&rows, "lhs").unwrap_or_default();
    ensure(ratio == "1/2", format!("ratio {ratio}"))
}

/// Runs `bench` and checks accuracy and mean samples against a published count.
fn bench(args: &[&str], published: f64, limit_secs: Option<f64>) -> Report {
    let start = Instant::now();
    let mut full = vec!["bench", "--runs", "100", "--margin", "0.01"];
    full.extend_from_slice(args);
    let rows = cli(&full)?;
    let secs = start.elapsed().as_secs_f64();
    let row = rows.first().ok_or("no output")?;
    let accuracy = field(row, "accuracy").as_f64().unwrap_or(0.0);
    let mean = field(row, "mean_samples").as_f64().unwrap_or(f64::NAN);
    let within = mean >= published / 3.0 && mean <= published * 3.0;
    let fast = limit_secs.is_none_or(|l| secs < l);
    ensure(
        accuracy >= 0.95 && within && fast,
        format!(
            "accuracy {accuracy}, mean samples {mean:.0} vs {published:.0} (x3 band), total {secs:.0} s"
        ),
    )
}

fn threads_bench() -> Report {
    bench(&["--reference", "fails", "threads", "--n", "20"], 770.0, Some(300.0))
}

fn dining_bench() -> Report {
    bench(&["--reference", "holds", "dining", "--n", "100", "--eps", "0.1"], 520.0, None)
}

fn cache_bench() -> Report {
    bench(&["--reference", "holds", "cache", "--T", "10", "--eps", "0.05"], 110.0, None)
}

fn c(v: f64) -> Expr {
    Expr::Const(v)
}

fn x(i: usize) -> Expr {
    Expr::var(i)
}

fn disc(r: f64) -> Expr {
    let sq = |e: Expr| Expr::Pow(Box::new(e), Box::new(c(2.0)));
    sq(x(0) - c(0.5)) + sq(x(1) - c(0.5)) - c(r * r)
}

fn error_rates() -> Report {
    let budget = ErrorBudget::new(0.05, 0.05).map_err(|e| e.to_string())?;
    let margin = |f: Expr| TestRegion::with_margin(2, f, 0.05).map_err(|e| e.to_string());
    let sum = margin(x(0) + x(1) - c(1.0))?;
    let diagonal = margin(x(0) - x(1))?;
    let round = TestRegion::new(2, disc(0.2), disc(0.3)).map_err(|e| e.to_string())?;
    // (region, true point, point lies in D0)
    let configs = [
        (&sum, [0.4, 0.45], true),
        (&sum, [0.6, 0.5], false),
        (&diagonal, [0.4, 0.55], true),
        (&diagonal, [0.55, 0.4], false),
        (&round, [0.55, 0.45], true),
        (&round, [0.85, 0.5], false),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut undecided = 0;
    let mut rates = Vec::new();
    for (region, p, inside) in configs {
        assert_eq!(region.in_d0(&p), inside);
        assert!(inside || !region.in_d1(&p));
        let mut wrong = 0;
        for _ in 0..500 {
            let mut test = PartitionedTest::new(vec![Test::Multi(region.clone())], &budget);
            let v = run_sequential(&mut test, 2, 1, 1_000_000, |o| {
                o[0] = rng.random::<f64>() < p[0];
                o[1] = rng.random::<f64>() < p[1];
            })
            .map_err(|e| e.to_string())?;
            match (v.outcome, inside) {
                (Outcome::Undecided, _) => undecided += 1,
                (Outcome::AssertH1, true) | (Outcome::AssertH0, false) => wrong += 1,
                _ => {}
            }
        }
        let rate = wrong as f64 / 500.0;
        worst = worst.max(rate);
        rates.push(format!("{rate:.3}"));
    }
    ensure(
        worst <= 0.08 && undecided == 0,
        format!("error rates [{}], {undecided} undecided", rates.join(", ")),
    )
}

/// Minimizes `obj` on `{a . x = b}` inside the unit square by walking the line in steps of `step`.
fn grid_on_line(a: [f64; 2], b: f64, step: f64, obj: impl Fn(&[f64]) -> f64) -> Option<Vec<f64>> {
    let norm = (a[0] * a[0] + a[1] * a[1]).sqrt();
    let base = [a[0] * b / (norm * norm), a[1] * b / (norm * norm)];
    let dir = [-a[1] / norm, a[0] / norm];
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..2 {
        if dir[i].abs() < 1e-12 {
            if !(0.0..=1.0).contains(&base[i]) {
                return None;
            }
            continue;
        }
        let (t0, t1) = ((0.0 - base[i]) / dir[i], (1.0 - base[i]) / dir[i]);
        lo = lo.max(t0.min(t1));
        hi = hi.min(t0.max(t1));
    }
    if lo > hi {
        return None;
    }
    let steps = ((hi - lo) / step).ceil() as usize;
    (0..=steps)
        .map(|k| {
            let t = (lo + k as f64 * step).min(hi);
            vec![base[0] + t * dir[0], base[1] + t * dir[1]]
        })
        .filter(|p| p.iter().all(|v| *v > 0.0 && *v < 1.0))
        .min_by(|p, q| obj(p).total_cmp(&obj(q)))
}

/// Relative residual of `g` after removing its component along `normal`.
fn residual(g: &[f64], normal: &[f64]) -> f64 {
    let nn: f64 = normal.iter().map(|v| v * v).sum();
    let k: f64 = g.iter().zip(normal).map(|(a, b)| a * b).sum::<f64>() / nn;
    let res: f64 = g.iter().zip(normal).map(|(a, b)| (a - k * b).powi(2)).sum::<f64>().sqrt();
    res / g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0)
}

fn projections() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_gap, mut worst_res) = (0.0f64, 0.0f64);
    let mut done = 0;
    while done < 20 {
        let a: [f64; 2] = [rng.random_range(0.2..2.0), rng.random_range(-2.0..2.0)];
        let mid = rng.random_range(0.3..0.7) * (a[0] + a[1].max(0.0)) + a[1].min(0.0) * 0.5;
        let f = |off: f64| c(a[0]) * x(0) + c(a[1]) * x(1) - c(mid + off);
        let Ok(region) = TestRegion::new(2, f(-0.05), f(0.05)) else { continue };
        let n = rng.random_range(10..400u64);
        let t = [rng.random_range(1..n), rng.random_range(1..n)];
        let counts = SampleCounts::from_parts(n, t.to_vec()).map_err(|e| e.to_string())?;
        let (Some(q_grid), Ok(q)) = (
            grid_on_line(a, mid + 0.05, 1e-4, |p| -log_likelihood(&counts, p)),
            project_q_max_likelihood(&counts, &region),
        ) else {
            continue;
        };
        let Ok(r) = project_r_min_kl(&q, &region) else { continue };
        let Some(r_grid) = grid_on_line(a, mid - 0.05, 1e-4, |p| kl_divergence(p, &q)) else { continue };
        for (got, want) in [(&q, &q_grid), (&r, &r_grid)] {
            for (g, w) in got.iter().zip(want) {
                worst_gap = worst_gap.max((g - w).abs());
            }
        }
        let kl_grad: Vec<f64> = r
            .iter()
            .zip(&q)
            .map(|(ri, qi)| (ri / qi).ln() - ((1.0 - ri) / (1.0 - qi)).ln())
            .collect();
        worst_res = worst_res
            .max(residual(&log_likelihood_gradient(&counts, &q), &a))
            .max(residual(&kl_grad, &a));
        done += 1;
    }
    ensure(
        worst_gap <= 1e-3 && worst_res < 1e-6,
        format!("largest coordinate gap {worst_gap:.2e}, largest residual {worst_res:.2e}"),
    )
}

fn counter_example() -> Report {
    let budget = ErrorBudget::new(0.49, 0.49).map_err(|e| e.to_string())?;
    let spec = Indifference1D::new(0.2, 0.1, Direction::Above).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut wrong = 0;
    let mut longest = 0;
    for _ in 0..10_000 {
        let mut test = PartitionedTest::new(vec![Test::Scalar { source: 0, spec }], &budget);
        let v = run_sequential(&mut test, 1, 1, 1_000_000, |o| o[0] = rng.random::<f64>() < 0.5)
            .map_err(|e| e.to_string())?;
        longest = longest.max(v.samples_used);
        wrong += (v.outcome == Outcome::AssertH0) as u32;
    }
    let rate = wrong as f64 / 10_000.0;
    ensure(
        (rate - 0.5).abs() <= 0.02 && longest == 1,
        format!("false negatives {rate:.4}, longest run {longest} samples"),
    )
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Random chain with propositions `a` and `b`.
fn random_dtmc(rng: &mut ChaCha8Rng, max_states: usize) -> Dtmc {
    let n = rng.random_range(1..=max_states);
    let rows = (0..n)
        .map(|_| {
            let k = rng.random_range(1..=3.min(n));
            let mut targets: Vec<StateId> = (0..n).collect();
            for i in 0..k {
                let j = rng.random_range(i..n);
                targets.swap(i, j);
            }
            let weights: Vec<i64> = (0..k).map(|_| rng.random_range(1..=4)).collect();
            let total: i64 = weights.iter().sum();
            targets[..k]
                .iter()
                .zip(&weights)
                .map(|(&target, &w)| Edge { target, prob: ratio(w, total) })
                .collect()
        })
        .collect();
    let labels = (0..n)
        .map(|_| {
            ["a", "b"].iter().filter(|_| rng.random_bool(0.5)).map(|s| s.to_string()).collect()
        })
        .collect();
    Dtmc::new(0, rows, vec!["a".into(), "b".into()], labels).expect("generated chain is valid")
}

fn random_state(rng: &mut ChaCha8Rng, depth: u32, horizon: usize) -> PctlState {
    let pick = if depth == 0 { rng.random_range(0..2) } else { rng.random_range(0..6) };
    match pick {
        0 => PctlState::Atom(if rng.random_bool(0.5) { "a" } else { "b" }.into()),
        1 if depth == 0 => PctlState::True,
        1 => PctlState::Not(Box::new(random_state(rng, depth - 1, horizon))),
        2 => PctlState::And(
            Box::new(random_state(rng, depth - 1, horizon)),
            Box::new(random_state(rng, depth - 1, horizon)),
        ),
        _ => {
            let cuts = [ratio(0, 1), ratio(1, 4), ratio(1, 3), ratio(1, 2), ratio(2, 3), ratio(3, 4), ratio(1, 1)];
            let i = rng.random_range(0..cuts.len());
            let j = rng.random_range(i..cuts.len());
            let interval = Interval {
                lo: cuts[i].clone(),
                lo_closed: rng.random_bool(0.5),
                hi: cuts[j].clone(),
                hi_closed: rng.random_bool(0.5),
            };
            PctlState::Prob(interval, Box::new(random_path(rng, depth - 1, horizon)))
        }
    }
}

fn random_path(rng: &mut ChaCha8Rng, depth: u32, horizon: usize) -> PctlPath {
    let pick = if depth == 0 { 0 } else { rng.random_range(0..5) };
    match pick {
        1 => PctlPath::Not(Box::new(random_path(rng, depth - 1, horizon))),
        2 => PctlPath::And(
            Box::new(random_path(rng, depth - 1, horizon)),
            Box::new(random_path(rng, depth - 1, horizon)),
        ),
        3 if horizon >= 1 => PctlPath::Next(Box::new(random_path(rng, depth - 1, horizon - 1))),
        4 if horizon >= 1 => {
            let k = rng.random_range(1..=horizon.min(2));
            PctlPath::Until(
                Box::new(random_path(rng, depth - 1, horizon - k)),
                Box::new(random_path(rng, depth - 1, horizon - k)),
                k,
            )
        }
        _ => PctlPath::State(Box::new(random_state(rng, depth.saturating_sub(1), horizon))),
    }
}

/// Direct PCTL* semantics with exact path probabilities.
struct Pctl<'a> {
    dtmc: &'a Dtmc,
}

impl Pctl<'_> {
    fn state(&self, s: StateId, f: &PctlState) -> bool {
        match f {
            PctlState::True => true,
            PctlState::Atom(ap) => self.dtmc.label_names(s).contains(&ap.as_str()),
            PctlState::Not(a) => !self.state(s, a),
            PctlState::And(a, b) => self.state(s, a) && self.state(s, b),
            PctlState::Prob(interval, body) => interval.contains(&self.prob(s, body)),
        }
    }

    fn prob(&self, s: StateId, f: &PctlPath) -> BigRational {
        let mut total = BigRational::zero();
        self.extend(&mut vec![s], BigRational::one(), horizon(f), f, &mut total);
        total
    }

    fn extend(&self, path: &mut Vec<StateId>, p: BigRational, left: usize, f: &PctlPath, total: &mut BigRational) {
        if left == 0 {
            if self.path(path, 0, f) {
                *total += p;
            }
            return;
        }
        let last = *path.last().unwrap();
        for edge in self.dtmc.successors(last) {
            path.push(edge.target);
            self.extend(path, &p * &edge.prob, left - 1, f, total);
            path.pop();
        }
    }

    fn path(&self, path: &[StateId], i: usize, f: &PctlPath) -> bool {
        match f {
            PctlPath::State(s) => self.state(path[i], s),
            PctlPath::Not(a) => !self.path(path, i, a),
            PctlPath::And(a, b) => self.path(path, i, a) && self.path(path, i, b),
            PctlPath::Next(a) => self.path(path, i + 1, a),
            PctlPath::Until(a, b, k) => {
                for j in i..=i + k {
                    if self.path(path, j, b) {
                        return true;
                    }
                    if !self.path(path, j, a) {
                        return false;
                    }
                }
                false
            }
        }
    }
}

fn horizon(f: &PctlPath) -> usize {
    match f {
        PctlPath::State(_) => 0,
        PctlPath::Next(a) => 1 + horizon(a),
        PctlPath::Not(a) => horizon(a),
        PctlPath::And(a, b) => horizon(a).max(horizon(b)),
        PctlPath::Until(a, b, k) => k + horizon(a).max(horizon(b)),
    }
}

fn pctl_soundness() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut agree = 0;
    let mut probs = 0;
    for _ in 0..20 {
        let dtmc = random_dtmc(&mut rng, 6);
        let f = loop {
            let f = random_state(&mut rng, 4, 4);
            if matches!(f, PctlState::Prob(..) | PctlState::Not(_) | PctlState::And(..)) {
                break f;
            }
        };
        probs += matches!(f, PctlState::Prob(..)) as u32;
        let direct = Pctl { dtmc: &dtmc }.state(dtmc.initial(), &f);
        let translated = translate_pctls(&f, &PathVar::new("p"));
        let exact = brute_force_check(&dtmc, &translated, None).map_err(|e| e.to_string())?;
        if exact.holds == direct {
            agree += 1;
        } else {
            return Err(format!("disagreement on {translated}"));
        }
    }
    ensure(agree == 20, format!("{agree}/20 agree, {probs} rooted at a probability operator"))
}

fn random_body(rng: &mut ChaCha8Rng, pvs: &[&str], horizon: usize, depth: u32) -> String {
    let pick = if depth == 0 { 0 } else { rng.random_range(0..7) };
    let sub = |rng: &mut ChaCha8Rng, h: usize| random_body(rng, pvs, h, depth - 1);
    match pick {
        1 => format!("!({})", sub(rng, horizon)),
        2 => format!("({} & {})", sub(rng, horizon), sub(rng, horizon)),
        3 => format!("({} | {})", sub(rng, horizon), sub(rng, horizon)),
        4 if horizon >= 1 => format!("X ({})", sub(rng, horizon - 1)),
        5 if horizon >= 1 => {
            let k = rng.random_range(1..=horizon);
            format!("F<={k} ({})", sub(rng, horizon - k))
        }
        6 if horizon >= 1 => {
            let k = rng.random_range(1..=horizon);
            format!("({} U<={k} {})", sub(rng, horizon - k), sub(rng, horizon - k))
        }
        _ => {
            let ap = if rng.random_bool(0.5) { "a" } else { "b" };
            format!("{ap}@{}", pvs[rng.random_range(0..pvs.len())])
        }
    }
}

/// A random unnested formula and the Euclidean norm of its linear form.
fn random_formula(rng: &mut ChaCha8Rng) -> (String, f64) {
    let rel = if rng.random_bool(0.5) { ">" } else { "<" };
    let k = rng.random_range(2..=18);
    match rng.random_range(0..4) {
        0 => (format!("P[p]({}) {rel} {k}/20", random_body(rng, &["p"], 3, 3)), 1.0),
        1 => (format!("P[p1,p2]({}) {rel} {k}/20", random_body(rng, &["p1", "p2"], 3, 3)), 1.0),
        kind => loop {
            let a = random_body(rng, &["p1"], 3, 3);
            let b = random_body(rng, &["p2"], 3, 3);
            if a.replace("p1", "p2") == b {
                continue;
            }
            break if kind == 2 {
                (format!("P[p1]({a}) {rel} P[p2]({b})"), 2f64.sqrt())
            } else {
                (format!("P[p1]({a}) + P[p2]({b}) {rel} {}/10", k / 2), 2f64.sqrt())
            };
        },
    }
}

fn exact(v: &Value) -> f64 {
    match v {
        Value::Exact(r) => hypersmc::numeric::to_f64(r),
        Value::Approx(x) => *x,
    }
}

fn oracle_agreement() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let budget = ErrorBudget::new(0.05, 0.05).map_err(|e| e.to_string())?;
    let (mut runs, mut agree) = (0, 0);
    let mut shapes: HashMap<u64, u32> = HashMap::new();
    for chain in 0..30u64 {
        let dtmc = random_dtmc(&mut rng, 5);
        let sampler = dtmc.sampler();
        let mut kept = 0;
        while kept < 5 {
            let (text, norm) = random_formula(&mut rng);
            let formula = parse_closed_formula(&text).map_err(|e| format!("{text}: {e}"))?;
            let truth = brute_force_check(&dtmc, &formula, None).map_err(|e| e.to_string())?;
            let cmp = &truth.comparisons[0];
            if (exact(&cmp.lhs_value) - exact(&cmp.rhs_value)).abs() / norm <= 0.05 + 1e-9 {
                continue;
            }
            let mut task = CheckTask::new(&sampler, formula, budget, 0.05);
            task.seed = chain * 100 + kept;
            let got = check(&task).map_err(|e| format!("{text}: {e}"))?;
            *shapes.entry(got.counts.dim() as u64).or_default() += 1;
            runs += 1;
            agree += (got.holds() == Some(truth.holds)) as u32;
            kept += 1;
        }
    }
    let rate = agree as f64 / runs as f64;
    let mut dims: Vec<_> = shapes.into_iter().collect();
    dims.sort();
    ensure(
        rate >= 0.93,
        format!("{agree}/{runs} agree ({rate:.3}), runs by dimension {dims:?}"),
    )
}

fn timing_separation() -> Report {
    // 0.9 of the first and 0.7 of the second distribution end by step 10.
    let mut first = vec![0.0; 21];
    let mut second = vec![0.0; 21];
    first[5] = 0.9;
    first[20] = 0.1;
    second[5] = 0.7;
    second[20] = 0.3;
    let cfg = TimingConfig {
        first: StepDistribution::from_weights(first).map_err(|e| e.to_string())?,
        second: StepDistribution::from_weights(second).map_err(|e| e.to_string())?,
        tau: 10,
    };
    let model = TimingModel::new(cfg).map_err(|e| e.to_string())?;
    let formula = model.formula(0.1);
    let budget = ErrorBudget::new(0.01, 0.01).map_err(|e| e.to_string())?;
    let mut h0 = 0;
    for seed in 0..100 {
        let mut task = CheckTask::new(&model, formula.clone(), budget, 0.05);
        task.seed = seed;
        h0 += (check(&task).map_err(|e| e.to_string())?.verdict.outcome == Outcome::AssertH0) as u32;
    }
    ensure(h0 >= 95, format!("{h0}/100 AssertH0"))
}
