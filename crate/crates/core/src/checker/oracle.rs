use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::dtmc::{enumerate_paths_from, Dtmc, EnumerateError, Path, StateId, DEFAULT_PATH_CAP};
use crate::logic::{
    eval_path_formula, eval_term_with, free_vars, required_horizon, truncate_unbounded, Assignment,
    CompareOracle, EvalError, Formula, Func, ProbBody, ProbTerm, Rel, Value,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
    #[error("formula has an unbounded until and no horizon was given")]
    UnboundedHorizon,
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

/// Exact truth value together with the outermost probabilities it used.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub holds: bool,
    /// Each distinct outermost probability operator with its value.
    pub probabilities: Vec<(ProbTerm, Value)>,
    /// Outermost comparisons in evaluation order.
    pub comparisons: Vec<Comparison>,
}

/// An evaluated outermost comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub lhs: ProbTerm,
    pub rel: Rel,
    pub rhs: ProbTerm,
    pub lhs_value: Value,
    pub rhs_value: Value,
    pub holds: bool,
}

/// Evaluates `formula` on `dtmc` by enumerating every bounded path tuple.
///
/// Free path variables are bound to the one-position path at the initial
/// state, so state formulas can be checked directly. Unbounded untils are
/// cut at `horizon`.
pub fn brute_force_check(
    dtmc: &Dtmc,
    formula: &Formula,
    horizon: Option<usize>,
) -> Result<OracleResult, OracleError> {
    brute_force_check_capped(dtmc, formula, horizon, DEFAULT_PATH_CAP)
}

/// [`brute_force_check`] with an explicit cap on enumerated paths and tuples.
pub fn brute_force_check_capped(
    dtmc: &Dtmc,
    formula: &Formula,
    horizon: Option<usize>,
    cap: usize,
) -> Result<OracleResult, OracleError> {
    let formula = match required_horizon(formula) {
        Some(_) => formula.clone(),
        None => truncate_unbounded(formula, horizon.ok_or(OracleError::UnboundedHorizon)?),
    };
    let exact = Exact {
        dtmc,
        cap,
        paths: RefCell::new(HashMap::new()),
        memo: RefCell::new(HashMap::new()),
        failure: RefCell::new(None),
        top: RefCell::new(Vec::new()),
        comparisons: RefCell::new(Vec::new()),
    };
    let root = Path {
        states: vec![dtmc.initial()],
        labels: vec![dtmc.labels(dtmc.initial()).clone()],
    };
    let names: Vec<String> = free_vars(&formula).into_iter().map(|v| v.0).collect();
    let mut v = Assignment::new();
    for name in &names {
        v.bind(name, &root);
    }
    let mut oracle = ExactOracle { exact: &exact, top: true };
    let holds = match eval_path_formula(&formula, &v, dtmc.propositions(), &mut oracle) {
        Ok(b) => b,
        Err(e) => return Err(exact.failure.take().unwrap_or(OracleError::Eval(e))),
    };
    Ok(OracleResult {
        holds,
        probabilities: exact.top.into_inner(),
        comparisons: exact.comparisons.into_inner(),
    })
}

type PathList = Rc<Vec<(Path<StateId>, BigRational)>>;

struct Exact<'d> {
    dtmc: &'d Dtmc,
    cap: usize,
    paths: RefCell<HashMap<(StateId, usize), PathList>>,
    // Probabilities of operators without outside references, by node and start states.
    memo: RefCell<HashMap<(usize, Vec<StateId>), Value>>,
    failure: RefCell<Option<OracleError>>,
    top: RefCell<Vec<(ProbTerm, Value)>>,
    comparisons: RefCell<Vec<Comparison>>,
}

impl Exact<'_> {
    fn paths_from(&self, start: StateId, horizon: usize) -> Result<PathList, OracleError> {
        if let Some(p) = self.paths.borrow().get(&(start, horizon)) {
            return Ok(p.clone());
        }
        let list = Rc::new(enumerate_paths_from(self.dtmc, start, horizon, self.cap)?);
        self.paths.borrow_mut().insert((start, horizon), list.clone());
        Ok(list)
    }

    fn prob(&self, term: &ProbTerm, v: &Assignment<'_, StateId>, shift: usize) -> Result<Value, OracleError> {
        let ProbTerm::Prob { pvs, body } = term else {
            unreachable!("only probability operators are delegated");
        };
        let mut starts = Vec::with_capacity(pvs.len());
        for pv in pvs {
            starts.push(v.state_at(pv.as_str(), shift)?.copied().unwrap_or(self.dtmc.initial()));
        }
        let closed = is_closed(term);
        let key = (term as *const ProbTerm as usize, starts.clone());
        if closed {
            if let Some(val) = self.memo.borrow().get(&key) {
                return Ok(val.clone());
            }
        }
        let horizon = match body {
            ProbBody::Path(f) => required_horizon(f),
            ProbBody::Term(t) => crate::logic::term_horizon(t),
        }
        .expect("untils are bounded after truncation");
        let lists = starts
            .iter()
            .map(|&s| self.paths_from(s, horizon))
            .collect::<Result<Vec<_>, _>>()?;
        let tuples = lists.iter().try_fold(1usize, |acc, l| acc.checked_mul(l.len()));
        if tuples.is_none_or(|t| t > self.cap) {
            return Err(EnumerateError { cap: self.cap }.into());
        }
        let base = v.shifted(shift);
        let mut total = Value::Exact(BigRational::zero());
        let mut index = vec![0usize; pvs.len()];
        'tuples: loop {
            let mut w = base.clone();
            let mut weight = BigRational::from_integer(1.into());
            for ((pv, list), &i) in pvs.iter().zip(&lists).zip(&index) {
                w.bind(pv.as_str(), &list[i].0);
                weight *= &list[i].1;
            }
            let contribution = match body {
                ProbBody::Path(f) => {
                    let mut oracle = ExactOracle { exact: self, top: false };
                    let holds = match eval_path_formula(f, &w, self.dtmc.propositions(), &mut oracle) {
                        Ok(b) => b,
                        Err(e) => return Err(self.failure.take().unwrap_or(OracleError::Eval(e))),
                    };
                    holds.then(|| Value::Exact(weight))
                }
                ProbBody::Term(t) => {
                    let inner = self.term(t, &w, 0)?;
                    Some(Value::apply(Func::Mul, &[Value::Exact(weight), inner]))
                }
            };
            if let Some(c) = contribution {
                total = Value::apply(Func::Add, &[total, c]);
            }
            for k in (0..index.len()).rev() {
                index[k] += 1;
                if index[k] < lists[k].len() {
                    continue 'tuples;
                }
                index[k] = 0;
            }
            break;
        }
        if closed {
            self.memo.borrow_mut().insert(key, total.clone());
        }
        Ok(total)
    }

    fn term(&self, t: &ProbTerm, v: &Assignment<'_, StateId>, shift: usize) -> Result<Value, OracleError> {
        eval_term_with(t, &mut |p| self.prob(p, v, shift))
    }
}

fn is_closed(term: &ProbTerm) -> bool {
    free_vars(&Formula::Compare { lhs: term.clone(), rel: Rel::Gt, rhs: ProbTerm::ratio(0, 1) }).is_empty()
}

struct ExactOracle<'e, 'd> {
    exact: &'e Exact<'d>,
    top: bool,
}

impl ExactOracle<'_, '_> {
    fn value(&self, t: &ProbTerm, v: &Assignment<'_, StateId>, shift: usize) -> Result<Value, OracleError> {
        self.exact.term(t, v, shift)
    }

    fn record(&self, t: &ProbTerm, v: &Assignment<'_, StateId>, shift: usize) -> Result<(), OracleError> {
        match t {
            ProbTerm::Const(_) => Ok(()),
            ProbTerm::Func(_, args) => args.iter().try_for_each(|a| self.record(a, v, shift)),
            ProbTerm::Prob { .. } => {
                if self.exact.top.borrow().iter().any(|(p, _)| p == t) {
                    return Ok(());
                }
                let val = self.exact.prob(t, v, shift)?;
                self.exact.top.borrow_mut().push((t.clone(), val));
                Ok(())
            }
        }
    }
}

impl CompareOracle<StateId> for ExactOracle<'_, '_> {
    fn compare(
        &mut self,
        lhs: &ProbTerm,
        rel: Rel,
        rhs: &ProbTerm,
        v: &Assignment<'_, StateId>,
        shift: usize,
    ) -> Result<bool, EvalError> {
        let run = || -> Result<bool, OracleError> {
            if self.top {
                self.record(lhs, v, shift)?;
                self.record(rhs, v, shift)?;
            }
            let a = self.value(lhs, v, shift)?;
            let b = self.value(rhs, v, shift)?;
            let holds = a.compare(rel, &b);
            if self.top {
                self.exact.comparisons.borrow_mut().push(Comparison {
                    lhs: lhs.clone(),
                    rel,
                    rhs: rhs.clone(),
                    lhs_value: a,
                    rhs_value: b,
                    holds,
                });
            }
            Ok(holds)
        };
        run().map_err(|e| {
            let msg = e.to_string();
            *self.exact.failure.borrow_mut() = Some(e);
            EvalError::Oracle(msg)
        })
    }
}
