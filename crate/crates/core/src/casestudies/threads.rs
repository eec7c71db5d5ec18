use rand::{Rng, RngCore};

use super::{decimal, formula, invalid, labels, ConfigError, Props};
use crate::dtmc::{LabelSet, ModelSampler};
use crate::logic::Formula;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThreadsConfig {
    pub threads: usize,
}

impl ThreadsConfig {
    pub fn new(threads: usize) -> Self {
        Self { threads }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreadsState {
    h: Option<bool>,
    /// `(thread, iterations left)` for every unfinished thread.
    running: Vec<(u32, u32)>,
    l: bool,
}

impl ThreadsState {
    pub fn h(&self) -> Option<bool> {
        self.h
    }

    pub fn l(&self) -> bool {
        self.l
    }

    pub fn finished(&self) -> bool {
        self.h.is_some() && self.running.is_empty()
    }
}

/// `n` threads where thread `k` runs `(h + 1) * k` iterations of
/// `l <- k mod 2`, scheduled uniformly among the unfinished ones.
///
/// The first step draws `h` uniformly. Every later step runs one iteration
/// of a thread, and the state reached when all threads are done is
/// absorbing and labeled `Fin`. States carry `H0`/`H1` once `h` is set and
/// always one of `L0`/`L1`.
#[derive(Debug, Clone)]
pub struct ThreadsModel {
    cfg: ThreadsConfig,
    props: Props,
}

const H0: u32 = 0;
const L0: u32 = 2;
const FIN: u32 = 4;

impl ThreadsModel {
    pub fn new(cfg: ThreadsConfig) -> Result<Self, ConfigError> {
        if cfg.threads == 0 {
            return invalid("need at least one thread");
        }
        let names = ["H0", "H1", "L0", "L1", "Fin"].map(String::from).to_vec();
        Ok(Self {
            cfg,
            props: Props::new(names),
        })
    }

    pub fn config(&self) -> &ThreadsConfig {
        &self.cfg
    }

    /// Steps until every run has terminated, whatever `h` is.
    pub fn horizon(&self) -> usize {
        let n = self.cfg.threads;
        1 + n * (n + 1)
    }

    /// Noninterference for the final value `l = observed`: terminating with
    /// that value is about as likely under either secret.
    pub fn formula(&self, eps: f64, observed: bool) -> Formula {
        let l = if observed { "L1" } else { "L0" };
        let e = decimal(eps);
        formula(&format!(
            "P[p1](X H0@p1 => F (Fin@p1 & {l}@p1)) ~[{e}] P[p2](X H1@p2 => F (Fin@p2 & {l}@p2))"
        ))
    }
}

impl ModelSampler for ThreadsModel {
    type State = ThreadsState;

    fn initial_state(&self) -> ThreadsState {
        ThreadsState {
            h: None,
            running: Vec::new(),
            l: false,
        }
    }

    fn advance<R: RngCore + ?Sized>(&self, state: &mut ThreadsState, rng: &mut R) {
        if state.h.is_none() {
            let h = rng.random::<bool>();
            let rounds = if h { 2 } else { 1 };
            state.h = Some(h);
            state.running = (1..=self.cfg.threads as u32).map(|k| (k, rounds * k)).collect();
            return;
        }
        if state.running.is_empty() {
            return;
        }
        let i = rng.random_range(0..state.running.len());
        let (k, left) = &mut state.running[i];
        state.l = *k % 2 == 1;
        *left -= 1;
        if *left == 0 {
            state.running.swap_remove(i);
        }
    }

    fn labels(&self, state: &ThreadsState) -> LabelSet {
        let mut ids = Vec::with_capacity(3);
        if let Some(h) = state.h {
            ids.push(H0 + u32::from(h));
        }
        ids.push(L0 + u32::from(state.l));
        if state.finished() {
            ids.push(FIN);
        }
        labels(ids)
    }

    fn propositions(&self) -> &[String] {
        &self.props.names
    }
}
