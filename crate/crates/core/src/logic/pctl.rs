use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Bound, Formula, PathVar, ProbTerm, Rel};

/// PCTL* state formula.
#[derive(Debug, Clone, PartialEq)]
pub enum PctlState {
    True,
    Atom(String),
    Not(Box<PctlState>),
    And(Box<PctlState>, Box<PctlState>),
    Prob(Interval, Box<PctlPath>),
}

/// PCTL* path formula.
#[derive(Debug, Clone, PartialEq)]
pub enum PctlPath {
    State(Box<PctlState>),
    Not(Box<PctlPath>),
    And(Box<PctlPath>, Box<PctlPath>),
    Next(Box<PctlPath>),
    Until(Box<PctlPath>, Box<PctlPath>, usize),
}

/// Probability interval with rational bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub lo_closed: bool,
    pub hi: BigRational,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: BigRational, hi: BigRational) -> Self {
        Self {
            lo,
            lo_closed: true,
            hi,
            hi_closed: true,
        }
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        let above = if self.lo_closed { *x >= self.lo } else { *x > self.lo };
        let below = if self.hi_closed { *x <= self.hi } else { *x < self.hi };
        above && below
    }
}

/// Translates a PCTL* state formula into HyperPCTL*, naming its implicit path `pv`.
pub fn translate_pctls(f: &PctlState, pv: &PathVar) -> Formula {
    let mut fresh = 0;
    state(f, pv, &mut fresh)
}

fn state(f: &PctlState, pv: &PathVar, fresh: &mut usize) -> Formula {
    match f {
        PctlState::True => Formula::True,
        PctlState::Atom(ap) => Formula::Atom {
            ap: ap.clone(),
            pv: pv.clone(),
        },
        PctlState::Not(a) => Formula::not(state(a, pv, fresh)),
        PctlState::And(a, b) => Formula::and(state(a, pv, fresh), state(b, pv, fresh)),
        PctlState::Prob(interval, body) => {
            *fresh += 1;
            let inner = PathVar(format!("{}_{}", pv.0, fresh));
            let prob = ProbTerm::Prob {
                pvs: vec![inner.clone()],
                body: super::ProbBody::Path(Box::new(path(body, &inner, fresh))),
            };
            Formula::Assoc(Box::new(in_interval(prob, interval)), pv.clone())
        }
    }
}

fn path(f: &PctlPath, pv: &PathVar, fresh: &mut usize) -> Formula {
    match f {
        PctlPath::State(s) => state(s, pv, fresh),
        PctlPath::Not(a) => Formula::not(path(a, pv, fresh)),
        PctlPath::And(a, b) => Formula::and(path(a, pv, fresh), path(b, pv, fresh)),
        PctlPath::Next(a) => Formula::next(path(a, pv, fresh)),
        PctlPath::Until(a, b, k) => {
            Formula::until(path(a, pv, fresh), path(b, pv, fresh), Bound::Steps(*k))
        }
    }
}

fn in_interval(prob: ProbTerm, j: &Interval) -> Formula {
    let lower = (!(j.lo.is_zero() && j.lo_closed)).then(|| {
        let rel = if j.lo_closed { Rel::Ge } else { Rel::Gt };
        Formula::compare(prob.clone(), rel, ProbTerm::Const(j.lo.clone()))
    });
    let upper = (!(j.hi.is_one() && j.hi_closed)).then(|| {
        let rel = if j.hi_closed { Rel::Le } else { Rel::Lt };
        Formula::compare(prob.clone(), rel, ProbTerm::Const(j.hi.clone()))
    });
    match (lower, upper) {
        (Some(l), Some(u)) => Formula::and(l, u),
        (Some(l), None) => l,
        (None, Some(u)) => u,
        (None, None) => Formula::compare(prob, Rel::Ge, ProbTerm::Const(BigRational::zero())),
    }
}
