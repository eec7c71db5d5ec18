use rand::{Rng, RngCore};
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Normal};

use super::{decimal, formula, invalid, ConfigError, Props};
use crate::dtmc::{LabelSet, ModelSampler};
use crate::logic::Formula;

/// Distribution of the accessed block id.
#[derive(Debug, Clone, PartialEq)]
pub enum AccessDistribution {
    Uniform,
    /// Normal draw rounded to the nearest id and clipped to the program.
    Normal { mean: f64, std_dev: f64 },
    /// Unnormalized weight per block id.
    Weights(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CacheConfig {
    pub lines: usize,
    pub blocks: usize,
    pub access: AccessDistribution,
    /// Accesses before the observation window.
    pub warmup: usize,
    /// Length of the observation window.
    pub window: usize,
}

impl Default for CacheConfig {
    fn default() -> Self {
        Self::with_size(256, 1024)
    }
}

impl CacheConfig {
    /// Normal accesses around the middle of the program with variance
    /// `lines / 2`, a warmup of `2 * lines` accesses and a window of 10.
    pub fn with_size(lines: usize, blocks: usize) -> Self {
        Self {
            lines,
            blocks,
            access: AccessDistribution::Normal {
                mean: blocks as f64 / 2.0,
                std_dev: (lines as f64 / 2.0).sqrt(),
            },
            warmup: 2 * lines,
            window: 10,
        }
    }
}

#[derive(Debug, Clone)]
enum Access {
    Uniform(usize),
    Normal(Normal<f64>, usize),
    Weighted(WeightedAliasIndex<f64>),
}

impl Access {
    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> usize {
        let mut rng = rng;
        match self {
            Access::Uniform(n) => rng.random_range(0..*n),
            Access::Normal(d, n) => {
                let x = d.sample(&mut rng).round();
                x.clamp(0.0, (*n - 1) as f64) as usize
            }
            Access::Weighted(table) => table.sample(&mut rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheState {
    lines: Vec<u32>,
    present: Vec<bool>,
    /// Outcome of the latest access, `None` before the first one.
    hit: Option<bool>,
}

impl CacheState {
    pub fn cached(&self) -> &[u32] {
        &self.lines
    }

    pub fn contains(&self, block: usize) -> bool {
        self.present[block]
    }

    pub fn last_hit(&self) -> Option<bool> {
        self.hit
    }
}

/// Fully associative cache with random replacement, fed by random
/// accesses. States after an access are labeled `H` or `M`; the empty
/// initial cache is labeled `B`.
#[derive(Debug, Clone)]
pub struct CacheModel {
    cfg: CacheConfig,
    access: Access,
    props: Props,
}

const HIT: u32 = 0;
const MISS: u32 = 1;
const BLANK: u32 = 2;

impl CacheModel {
    pub fn new(cfg: CacheConfig) -> Result<Self, ConfigError> {
        if cfg.lines == 0 {
            return invalid("the cache needs at least one line");
        }
        if cfg.blocks < cfg.lines {
            return invalid(format!(
                "program of {} blocks is smaller than the {} cache lines",
                cfg.blocks, cfg.lines
            ));
        }
        if cfg.window == 0 {
            return invalid("the observation window must be at least one access");
        }
        let access = match &cfg.access {
            AccessDistribution::Uniform => Access::Uniform(cfg.blocks),
            AccessDistribution::Normal { mean, std_dev } => match Normal::new(*mean, *std_dev) {
                Ok(d) if mean.is_finite() => Access::Normal(d, cfg.blocks),
                _ => return invalid(format!("bad normal access parameters ({mean}, {std_dev})")),
            },
            AccessDistribution::Weights(w) => {
                if w.len() != cfg.blocks {
                    return invalid(format!("{} access weights for {} blocks", w.len(), cfg.blocks));
                }
                match WeightedAliasIndex::new(w.clone()) {
                    Ok(t) => Access::Weighted(t),
                    Err(e) => return invalid(format!("bad access weights: {e}")),
                }
            }
        };
        Ok(Self {
            cfg,
            access,
            props: Props::new(["H", "M", "B"].map(String::from).to_vec()),
        })
    }

    pub fn config(&self) -> &CacheConfig {
        &self.cfg
    }

    /// Performs one access to `block` and returns whether it hit.
    pub fn access<R: RngCore + ?Sized>(&self, state: &mut CacheState, block: usize, rng: &mut R) -> bool {
        let hit = state.present[block];
        if !hit {
            if state.lines.len() < self.cfg.lines {
                state.lines.push(block as u32);
            } else {
                let victim = rng.random_range(0..state.lines.len());
                state.present[state.lines[victim] as usize] = false;
                state.lines[victim] = block as u32;
            }
            state.present[block] = true;
        }
        state.hit = Some(hit);
        hit
    }

    /// After the warmup, all accesses of the window hit is likelier, by
    /// more than `eps`, than exactly one miss among the first `window`
    /// accesses.
    pub fn formula(&self, eps: f64) -> Formula {
        let n = self.cfg.warmup;
        let t = self.cfg.window;
        let skip = |j: usize| if j == 0 { String::new() } else { format!("X^{j} ") };
        let one_miss: Vec<String> = (0..t)
            .map(|i| {
                let conj: Vec<String> = (0..t)
                    .map(|j| format!("{}{}@p2", skip(j), if i == j { "M" } else { "H" }))
                    .collect();
                format!("({})", conj.join(" & "))
            })
            .collect();
        formula(&format!(
            "P[p1]({}G<={t} H@p1) > P[p2]({}({})) + {}",
            skip(n),
            skip(n),
            one_miss.join(" | "),
            decimal(eps)
        ))
    }
}

impl ModelSampler for CacheModel {
    type State = CacheState;

    fn initial_state(&self) -> CacheState {
        CacheState {
            lines: Vec::with_capacity(self.cfg.lines),
            present: vec![false; self.cfg.blocks],
            hit: None,
        }
    }

    fn advance<R: RngCore + ?Sized>(&self, state: &mut CacheState, rng: &mut R) {
        let block = self.access.sample(rng);
        self.access(state, block, rng);
    }

    fn labels(&self, state: &CacheState) -> LabelSet {
        let id = match state.hit {
            None => BLANK,
            Some(true) => HIT,
            Some(false) => MISS,
        };
        std::iter::once(id).collect()
    }

    fn propositions(&self) -> &[String] {
        &self.props.names
    }
}
