use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use super::{Dtmc, Path, StateId};

pub const DEFAULT_PATH_CAP: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("path enumeration exceeds the cap of {cap} paths")]
pub struct EnumerateError {
    pub cap: usize,
}

/// All paths of `horizon` steps from the initial state, with exact probabilities.
pub fn enumerate_paths(
    dtmc: &Dtmc,
    horizon: usize,
    cap: usize,
) -> Result<Vec<(Path<StateId>, BigRational)>, EnumerateError> {
    enumerate_paths_from(dtmc, dtmc.initial(), horizon, cap)
}

pub fn enumerate_paths_from(
    dtmc: &Dtmc,
    start: StateId,
    horizon: usize,
    cap: usize,
) -> Result<Vec<(Path<StateId>, BigRational)>, EnumerateError> {
    let mut frontier: Vec<(Vec<StateId>, BigRational)> = vec![(vec![start], BigRational::one())];
    for _ in 0..horizon {
        let width: usize = frontier
            .iter()
            .map(|(p, _)| dtmc.successors(*p.last().unwrap()).len())
            .sum();
        if width > cap {
            return Err(EnumerateError { cap });
        }
        let mut next = Vec::with_capacity(width);
        for (prefix, prob) in frontier {
            let last = *prefix.last().unwrap();
            for edge in dtmc.successors(last) {
                let mut path = prefix.clone();
                path.push(edge.target);
                next.push((path, &prob * &edge.prob));
            }
        }
        frontier = next;
    }
    if frontier.len() > cap {
        return Err(EnumerateError { cap });
    }
    Ok(frontier
        .into_iter()
        .map(|(states, prob)| {
            let labels = states.iter().map(|s| dtmc.labels(*s).clone()).collect();
            (Path { states, labels }, prob)
        })
        .collect())
}
