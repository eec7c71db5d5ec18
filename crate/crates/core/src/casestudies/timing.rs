use rand::{Rng, RngCore};
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use super::{decimal, formula, invalid, labels, ConfigError, Props};
use crate::dtmc::{LabelSet, ModelSampler};
use crate::logic::Formula;

/// Distribution over the step at which a run terminates. Entry `d` of the
/// weights is the unnormalized probability of terminating at step `d`, so
/// entry 0 must be zero: the secret is only chosen at step 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDistribution {
    weights: Vec<f64>,
}

impl StepDistribution {
    pub fn from_weights(weights: Vec<f64>) -> Result<Self, ConfigError> {
        if weights.first().is_some_and(|w| *w != 0.0) {
            return invalid("runs cannot terminate before the secret is chosen at step 1");
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return invalid("termination weights must be finite and non-negative");
        }
        if !weights.iter().any(|w| *w > 0.0) {
            return invalid("termination weights are all zero");
        }
        Ok(Self { weights })
    }

    /// Terminates at `step` with probability one.
    pub fn point(step: usize) -> Result<Self, ConfigError> {
        let mut w = vec![0.0; step + 1];
        w[step] = 1.0;
        Self::from_weights(w)
    }

    pub fn max_step(&self) -> usize {
        self.weights.len() - 1
    }

    /// Probability of terminating at or before `step`.
    pub fn cdf(&self, step: usize) -> f64 {
        let total: f64 = self.weights.iter().sum();
        let upto: f64 = self.weights.iter().take(step + 1).sum();
        upto / total
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingConfig {
    pub first: StepDistribution,
    pub second: StepDistribution,
    /// Deadline of the observer, in steps.
    pub tau: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimingState {
    step: usize,
    /// `Some(false)` for the first secret, `Some(true)` for the second.
    secret: Option<bool>,
    end: usize,
}

impl TimingState {
    pub fn terminated(&self) -> bool {
        self.secret.is_some() && self.step >= self.end
    }
}

/// Program whose running time depends on a secret bit chosen uniformly at
/// step 1. States carry `S1` or `S2` once the bit is chosen and `Fin` from
/// the termination step on.
#[derive(Debug, Clone)]
pub struct TimingModel {
    cfg: TimingConfig,
    tables: [WeightedAliasIndex<f64>; 2],
    props: Props,
}

const S1: u32 = 0;
const FIN: u32 = 2;

impl TimingModel {
    pub fn new(cfg: TimingConfig) -> Result<Self, ConfigError> {
        let table = |d: &StepDistribution| {
            WeightedAliasIndex::new(d.weights.clone()).map_err(|e| ConfigError(e.to_string()))
        };
        Ok(Self {
            tables: [table(&cfg.first)?, table(&cfg.second)?],
            props: Props::new(["S1", "S2", "Fin"].map(String::from).to_vec()),
            cfg,
        })
    }

    pub fn config(&self) -> &TimingConfig {
        &self.cfg
    }

    /// Whether the run terminated by the deadline reveals the secret by no
    /// more than `eps`.
    pub fn formula(&self, eps: f64) -> Formula {
        let k = self.cfg.tau;
        let e = decimal(eps);
        formula(&format!(
            "P[p1](X S1@p1 => F<={k} Fin@p1) ~[{e}] P[p2](X S2@p2 => F<={k} Fin@p2)"
        ))
    }
}

impl ModelSampler for TimingModel {
    type State = TimingState;

    fn initial_state(&self) -> TimingState {
        TimingState {
            step: 0,
            secret: None,
            end: 0,
        }
    }

    fn advance<R: RngCore + ?Sized>(&self, state: &mut TimingState, rng: &mut R) {
        if state.secret.is_none() {
            let second = rng.random::<bool>();
            let mut rng = rng;
            state.secret = Some(second);
            state.end = self.tables[usize::from(second)].sample(&mut rng);
        }
        if state.step < state.end {
            state.step += 1;
        }
    }

    fn labels(&self, state: &TimingState) -> LabelSet {
        let mut ids = Vec::with_capacity(2);
        if let Some(second) = state.secret {
            ids.push(S1 + u32::from(second));
        }
        if state.terminated() {
            ids.push(FIN);
        }
        labels(ids)
    }

    fn propositions(&self) -> &[String] {
        &self.props.names
    }
}
