//! Generative models for the security and performance examples.
//!
//! Each model implements [`ModelSampler`](crate::dtmc::ModelSampler) directly
//! and never builds its state space. Every model also knows the formula it
//! is checked against and a horizon long enough for its unbounded
//! eventualities to be decided.
//!
//! | model | property |
//! |---|---|
//! | [`DiningModel`] | which neighbor paid cannot be told from their shared coin |
//! | [`ThreadsModel`] | the last writer of `l` does not reveal `h` |
//! | [`CacheModel`] | a window of hits is likelier than a window with one miss |
//! | [`TimingModel`] | termination before a deadline does not reveal the secret |
//!
//! Proposition names avoid the formula keywords, so termination is labeled
//! `Fin` and the dining result `Paid`.

mod cache;
mod dining;
mod threads;
mod timing;

pub use cache::{AccessDistribution, CacheConfig, CacheModel, CacheState};
pub use dining::{announcements, DiningConfig, DiningModel, DiningState, Payer};
pub use threads::{ThreadsConfig, ThreadsModel, ThreadsState};
pub use timing::{StepDistribution, TimingConfig, TimingModel, TimingState};

use thiserror::Error;

use crate::dtmc::LabelSet;
use crate::logic::{parse_closed_formula, Formula};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Proposition table with id lookup by name.
#[derive(Debug, Clone)]
struct Props {
    names: Vec<String>,
}

impl Props {
    fn new(names: Vec<String>) -> Self {
        Self { names }
    }

    #[cfg(test)]
    fn id(&self, name: &str) -> u32 {
        self.names
            .iter()
            .position(|n| n == name)
            .unwrap_or_else(|| panic!("unknown proposition {name}")) as u32
    }
}

fn labels(ids: impl IntoIterator<Item = u32>) -> LabelSet {
    ids.into_iter().collect()
}

fn formula(text: &str) -> Formula {
    parse_closed_formula(text).unwrap_or_else(|e| panic!("generated formula does not parse: {e}"))
}

/// Formats a tolerance so the formula parser reads it back exactly.
fn decimal(x: f64) -> String {
    let s = format!("{x}");
    if s.contains('e') {
        format!("{x:.12}")
    } else {
        s
    }
}
