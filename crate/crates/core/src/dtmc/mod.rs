//! Labeled discrete-time Markov chains.
//!
//! Two representations are supported. [`Dtmc`] is an explicit chain with a
//! stored transition relation and exact rational probabilities, loaded from
//! the text format handled by [`parse_model`]. [`ModelSampler`] is the
//! generative interface the checker actually samples through; explicit chains
//! are adapted to it by [`ExplicitSampler`], and the case-study models
//! implement it directly without ever materializing their state space.

mod enumerate;
mod labels;
mod parse;
mod sampler;

pub use enumerate::{enumerate_paths, enumerate_paths_from, EnumerateError, DEFAULT_PATH_CAP};
pub use labels::LabelSet;
pub use parse::parse_model;
pub use sampler::{
    sample_path, sample_path_from, sample_path_tuple, sample_trace_from, ExplicitSampler,
    ModelSampler, Path,
};

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::numeric::to_f64;

/// Absolute tolerance on outgoing probability mass per state.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

pub type StateId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: state {state} is not declared (model has {count} states)")]
    DanglingState {
        line: usize,
        col: usize,
        state: usize,
        count: usize,
    },
    #[error("{line}:{col}: duplicate declaration of {what}")]
    Duplicate {
        line: usize,
        col: usize,
        what: String,
    },
    #[error("outgoing probabilities of state {state} sum to {sum}, expected 1")]
    RowSum { state: StateId, sum: f64 },
    #[error("state {state} has a transition with non-positive probability")]
    NonPositive { state: StateId },
    #[error("state {state} is labeled with undeclared proposition `{prop}`")]
    UnknownProposition { state: StateId, prop: String },
    #[error("invalid model: {0}")]
    Invalid(String),
}

/// One outgoing transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub target: StateId,
    pub prob: BigRational,
}

/// An explicit labeled DTMC with dense state ids `0..num_states()`.
#[derive(Debug, Clone)]
pub struct Dtmc {
    initial: StateId,
    rows: Vec<Vec<Edge>>,
    propositions: Vec<String>,
    labels: Vec<LabelSet>,
}

impl Dtmc {
    /// Builds and validates a chain. `labels[s]` lists proposition names of state `s`.
    pub fn new(
        initial: StateId,
        rows: Vec<Vec<Edge>>,
        propositions: Vec<String>,
        labels: Vec<Vec<String>>,
    ) -> Result<Self, ModelError> {
        let count = rows.len();
        if count == 0 {
            return Err(ModelError::Invalid("a chain needs at least one state".into()));
        }
        if initial >= count {
            return Err(ModelError::Invalid(format!(
                "initial state {initial} is out of range"
            )));
        }
        if labels.len() > count {
            return Err(ModelError::Invalid("more label rows than states".into()));
        }
        for (state, row) in rows.iter().enumerate() {
            let mut sum = 0.0;
            for edge in row {
                if edge.target >= count {
                    return Err(ModelError::Invalid(format!(
                        "state {state} has a transition to undeclared state {}",
                        edge.target
                    )));
                }
                if edge.prob <= BigRational::zero() {
                    return Err(ModelError::NonPositive { state });
                }
                sum += to_f64(&edge.prob);
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(ModelError::RowSum { state, sum });
            }
        }
        let mut label_sets = vec![LabelSet::new(); count];
        for (state, names) in labels.into_iter().enumerate() {
            for name in names {
                let id = propositions.iter().position(|p| *p == name).ok_or_else(|| {
                    ModelError::UnknownProposition {
                        state,
                        prop: name.clone(),
                    }
                })?;
                label_sets[state].insert(id as u32);
            }
        }
        Ok(Self {
            initial,
            rows,
            propositions,
            labels: label_sets,
        })
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn successors(&self, state: StateId) -> &[Edge] {
        &self.rows[state]
    }

    pub fn propositions(&self) -> &[String] {
        &self.propositions
    }

    pub fn labels(&self, state: StateId) -> &LabelSet {
        &self.labels[state]
    }

    /// Proposition names holding in `state`, in declaration order.
    pub fn label_names(&self, state: StateId) -> Vec<&str> {
        self.labels[state]
            .iter()
            .map(|id| self.propositions[id as usize].as_str())
            .collect()
    }

    /// Alias-table sampler over this chain.
    pub fn sampler(&self) -> ExplicitSampler<'_> {
        ExplicitSampler::new(self)
    }
}
