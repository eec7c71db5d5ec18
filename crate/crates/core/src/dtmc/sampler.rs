use rand::{Rng, RngCore, SeedableRng};
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use super::{Dtmc, LabelSet, StateId};
use crate::numeric::to_f64;
use crate::stream::StreamRng;

/// A generative Markov chain: an initial state, a successor sampler and a
/// labeling. Implementations must draw successors only from `rng`.
pub trait ModelSampler: Sync {
    type State: Clone + Send + Sync + std::fmt::Debug;

    fn initial_state(&self) -> Self::State;

    /// Replaces `state` by a successor drawn from `rng`.
    fn advance<R: RngCore + ?Sized>(&self, state: &mut Self::State, rng: &mut R);

    fn step<R: RngCore + ?Sized>(&self, state: &Self::State, rng: &mut R) -> Self::State {
        let mut next = state.clone();
        self.advance(&mut next, rng);
        next
    }

    fn labels(&self, state: &Self::State) -> LabelSet;

    /// Proposition names; label ids index into this slice.
    fn propositions(&self) -> &[String];

    fn proposition_id(&self, name: &str) -> Option<u32> {
        self.propositions()
            .iter()
            .position(|p| p == name)
            .map(|i| i as u32)
    }
}

/// A finite path prefix with its cached label trace.
///
/// Traces sampled for label-only evaluation keep just the start state, so
/// [`Path::state`] may return `None` past position 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Path<S> {
    pub states: Vec<S>,
    pub labels: Vec<LabelSet>,
}

impl<S> Path<S> {
    /// Number of positions (horizon + 1).
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn state(&self, i: usize) -> Option<&S> {
        self.states.get(i)
    }

    pub fn last_state(&self) -> Option<&S> {
        if self.states.len() == self.labels.len() {
            self.states.last()
        } else {
            None
        }
    }
}

/// Samples a path of `horizon` steps from the initial state.
pub fn sample_path<M: ModelSampler, R: RngCore + ?Sized>(
    model: &M,
    rng: &mut R,
    horizon: usize,
) -> Path<M::State> {
    sample_path_from(model, model.initial_state(), rng, horizon)
}

pub fn sample_path_from<M: ModelSampler, R: RngCore + ?Sized>(
    model: &M,
    start: M::State,
    rng: &mut R,
    horizon: usize,
) -> Path<M::State> {
    let mut states = Vec::with_capacity(horizon + 1);
    let mut labels = Vec::with_capacity(horizon + 1);
    let mut current = start;
    labels.push(model.labels(&current));
    for _ in 0..horizon {
        let next = model.step(&current, rng);
        labels.push(model.labels(&next));
        states.push(current);
        current = next;
    }
    states.push(current);
    Path { states, labels }
}

/// Like [`sample_path_from`] but keeps only the start state.
pub fn sample_trace_from<M: ModelSampler, R: RngCore + ?Sized>(
    model: &M,
    start: M::State,
    rng: &mut R,
    horizon: usize,
) -> Path<M::State> {
    let mut labels = Vec::with_capacity(horizon + 1);
    let mut current = start.clone();
    labels.push(model.labels(&current));
    for _ in 0..horizon {
        model.advance(&mut current, rng);
        labels.push(model.labels(&current));
    }
    Path {
        states: vec![start],
        labels,
    }
}

/// Samples `n` independent paths, each from its own generator seeded by `rng`.
pub fn sample_path_tuple<M: ModelSampler, R: RngCore + ?Sized>(
    model: &M,
    n: usize,
    rng: &mut R,
    horizon: usize,
) -> Vec<Path<M::State>> {
    (0..n)
        .map(|_| {
            let mut sub = StreamRng::seed_from_u64(rng.random());
            sample_path(model, &mut sub, horizon)
        })
        .collect()
}

/// Alias-table sampler over an explicit [`Dtmc`].
#[derive(Debug, Clone)]
pub struct ExplicitSampler<'a> {
    dtmc: &'a Dtmc,
    rows: Vec<RowSampler>,
}

#[derive(Debug, Clone)]
enum RowSampler {
    Fixed(StateId),
    Alias(WeightedAliasIndex<f64>),
}

impl<'a> ExplicitSampler<'a> {
    pub fn new(dtmc: &'a Dtmc) -> Self {
        let rows = (0..dtmc.num_states())
            .map(|s| {
                let edges = dtmc.successors(s);
                if edges.len() == 1 {
                    RowSampler::Fixed(edges[0].target)
                } else {
                    let weights = edges.iter().map(|e| to_f64(&e.prob)).collect();
                    RowSampler::Alias(
                        WeightedAliasIndex::new(weights).expect("validated rows have positive weights"),
                    )
                }
            })
            .collect();
        Self { dtmc, rows }
    }

    pub fn dtmc(&self) -> &'a Dtmc {
        self.dtmc
    }
}

impl ModelSampler for ExplicitSampler<'_> {
    type State = StateId;

    fn initial_state(&self) -> StateId {
        self.dtmc.initial()
    }

    fn advance<R: RngCore + ?Sized>(&self, state: &mut StateId, rng: &mut R) {
        *state = match &self.rows[*state] {
            RowSampler::Fixed(t) => *t,
            RowSampler::Alias(table) => {
                let mut rng = rng;
                self.dtmc.successors(*state)[table.sample(&mut rng)].target
            }
        };
    }

    fn labels(&self, state: &StateId) -> LabelSet {
        self.dtmc.labels(*state).clone()
    }

    fn propositions(&self) -> &[String] {
        self.dtmc.propositions()
    }
}
