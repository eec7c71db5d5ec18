//! Case-study flags and model construction.

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};

use hypersmc::casestudies::{
    AccessDistribution, CacheConfig, CacheModel, DiningConfig, DiningModel, Payer,
    StepDistribution, ThreadsConfig, ThreadsModel, TimingConfig, TimingModel,
};
use hypersmc::logic::Formula;

#[derive(Debug, Clone, Subcommand)]
pub enum Study {
    /// Anonymity of the paying cryptographer
    Dining(DiningArgs),
    /// Noninterference of a multithreaded program
    Threads(ThreadsArgs),
    /// Hit windows of a randomly replaced cache
    Cache(CacheArgs),
    /// Termination-time side channel
    Timing(TimingArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DiningArgs {
    /// Number of cryptographers
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// `nsa`, `uniform`, or the 1-based seat of the payer
    #[arg(long, default_value = "uniform")]
    pub payer: String,
    /// 1-based seats of the neighbors whose shared coin is observed
    #[arg(long, default_value = "1,2")]
    pub pair: String,
}

#[derive(Debug, Clone, Args)]
pub struct ThreadsArgs {
    /// Number of threads
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 0.001)]
    pub eps: f64,
    /// Final value of `l` whose probability is compared
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub observe: u8,
}

#[derive(Debug, Clone, Args)]
pub struct CacheArgs {
    #[arg(long, default_value_t = 256)]
    pub lines: usize,
    #[arg(long, default_value_t = 1024)]
    pub blocks: usize,
    /// Accesses before the window [default: 2 * lines]
    #[arg(long)]
    pub warmup: Option<usize>,
    /// Window length
    #[arg(long = "T", default_value_t = 10)]
    pub window: usize,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    /// Standard deviation of the accessed block [default: sqrt(lines / 2)]
    #[arg(long, conflicts_with = "uniform")]
    pub sd: Option<f64>,
    /// Access blocks uniformly instead
    #[arg(long)]
    pub uniform: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TimingArgs {
    /// Comma-separated termination weights for steps 0, 1, 2, ... under the first secret
    #[arg(long, default_value = "0,1,1,1,1,1,1,1,1,1,1")]
    pub first: String,
    /// Same for the second secret
    #[arg(long, default_value = "0,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1")]
    pub second: String,
    /// Observer deadline in steps
    #[arg(long, default_value_t = 10)]
    pub tau: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
}

pub enum Model {
    Dining(DiningModel),
    Threads(ThreadsModel),
    Cache(CacheModel),
    Timing(TimingModel),
}

pub struct Prepared {
    pub name: &'static str,
    pub params: String,
    pub model: Model,
    pub formula: Formula,
    /// Horizon long enough for the unbounded operators of the formula.
    pub horizon: Option<usize>,
}

fn weights(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|w| w.trim().parse::<f64>().with_context(|| format!("bad weight `{w}`")))
        .collect()
}

impl Study {
    pub fn prepare(&self) -> Result<Prepared> {
        Ok(match self {
            Study::Dining(a) => {
                let mut cfg = DiningConfig::new(a.n);
                cfg.payer = match a.payer.as_str() {
                    "nsa" => Payer::Nsa,
                    "uniform" => Payer::Uniform,
                    seat => match seat.parse::<usize>() {
                        Ok(k) if k >= 1 => Payer::Fixed(k - 1),
                        _ => bail!("payer must be `nsa`, `uniform` or a seat from 1"),
                    },
                };
                let seats: Vec<usize> = a
                    .pair
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<Result<_, _>>()
                    .context("pair must be two seats like `1,2`")?;
                let [i, j] = seats[..] else { bail!("pair must be two seats like `1,2`") };
                if i == 0 || j == 0 {
                    bail!("seats are numbered from 1");
                }
                cfg.secret_pair = (i - 1, j - 1);
                let model = DiningModel::new(cfg)?;
                Prepared {
                    name: "dining",
                    params: format!("n={} eps={} payer={} pair={}", a.n, a.eps, a.payer, a.pair),
                    formula: model.formula(a.eps),
                    horizon: Some(model.horizon()),
                    model: Model::Dining(model),
                }
            }
            Study::Threads(a) => {
                let model = ThreadsModel::new(ThreadsConfig::new(a.n))?;
                Prepared {
                    name: "threads",
                    params: format!("n={} eps={} observe={}", a.n, a.eps, a.observe),
                    formula: model.formula(a.eps, a.observe == 1),
                    horizon: Some(model.horizon()),
                    model: Model::Threads(model),
                }
            }
            Study::Cache(a) => {
                let mut cfg = CacheConfig::with_size(a.lines, a.blocks);
                if let Some(w) = a.warmup {
                    cfg.warmup = w;
                }
                cfg.window = a.window;
                if a.uniform {
                    cfg.access = AccessDistribution::Uniform;
                } else if let Some(sd) = a.sd {
                    cfg.access = AccessDistribution::Normal { mean: a.blocks as f64 / 2.0, std_dev: sd };
                }
                let params = format!(
                    "lines={} blocks={} warmup={} T={} eps={} access={}",
                    a.lines,
                    a.blocks,
                    cfg.warmup,
                    a.window,
                    a.eps,
                    match &cfg.access {
                        AccessDistribution::Normal { std_dev, .. } => format!("normal(sd={std_dev:.4})"),
                        _ => "uniform".into(),
                    }
                );
                let model = CacheModel::new(cfg)?;
                Prepared {
                    name: "cache",
                    params,
                    formula: model.formula(a.eps),
                    horizon: None,
                    model: Model::Cache(model),
                }
            }
            Study::Timing(a) => {
                let cfg = TimingConfig {
                    first: StepDistribution::from_weights(weights(&a.first)?)?,
                    second: StepDistribution::from_weights(weights(&a.second)?)?,
                    tau: a.tau,
                };
                let params = format!(
                    "tau={} eps={} cdf=({:.4},{:.4})",
                    a.tau,
                    a.eps,
                    cfg.first.cdf(a.tau),
                    cfg.second.cdf(a.tau)
                );
                let model = TimingModel::new(cfg)?;
                Prepared {
                    name: "timing",
                    params,
                    formula: model.formula(a.eps),
                    horizon: None,
                    model: Model::Timing(model),
                }
            }
        })
    }
}
