use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use super::{Bound, Formula, Func, PathVar, ProbTerm, Rel};
use crate::dtmc::Path;
use crate::numeric::to_f64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("path variable `{0}` is not assigned")]
    Unbound(String),
    #[error("path of {len} positions is too short: position {pos} was read")]
    PathTooShort { pos: usize, len: usize },
    #[error("unbounded until cannot be evaluated on a finite path; truncate it first")]
    Unbounded,
    #[error("comparison of probabilities needs an oracle")]
    UnresolvedCompare,
    #[error("state at position {0} of a label-only trace is not available")]
    StateUnavailable(usize),
    #[error("{0}")]
    Oracle(String),
}

#[derive(Debug)]
enum Entry<'a, S> {
    Bind {
        var: &'a str,
        path: &'a Path<S>,
        offset: usize,
    },
    // Association: every variable looked up below this entry reads `target`.
    Wild {
        target: Option<(&'a Path<S>, usize)>,
    },
}

impl<S> Clone for Entry<'_, S> {
    fn clone(&self) -> Self {
        match self {
            Entry::Bind { var, path, offset } => Entry::Bind {
                var,
                path,
                offset: *offset,
            },
            Entry::Wild { target } => Entry::Wild { target: *target },
        }
    }
}

/// Path assignment: maps path variables to paths, each read from an offset.
#[derive(Debug)]
pub struct Assignment<'a, S> {
    entries: Vec<Entry<'a, S>>,
}

impl<S> Clone for Assignment<'_, S> {
    fn clone(&self) -> Self {
        Self {
            entries: self.entries.clone(),
        }
    }
}

impl<S> Default for Assignment<'_, S> {
    fn default() -> Self {
        Self {
            entries: Vec::new(),
        }
    }
}

impl<'a, S> Assignment<'a, S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, var: &'a str, path: &'a Path<S>) {
        self.entries.push(Entry::Bind {
            var,
            path,
            offset: 0,
        });
    }

    pub fn with(mut self, var: &'a PathVar, path: &'a Path<S>) -> Self {
        self.bind(var.as_str(), path);
        self
    }

    /// The path assigned to `var` and the offset it is read from.
    pub fn lookup(&self, var: &str) -> Option<(&'a Path<S>, usize)> {
        for entry in self.entries.iter().rev() {
            match entry {
                Entry::Bind { var: v, path, offset } if *v == var => return Some((path, *offset)),
                Entry::Bind { .. } => {}
                Entry::Wild { target } => return *target,
            }
        }
        None
    }

    /// The i-shift of this assignment.
    pub fn shifted(&self, by: usize) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|e| match e {
                Entry::Bind { var, path, offset } => Entry::Bind {
                    var,
                    path,
                    offset: offset + by,
                },
                Entry::Wild { target } => Entry::Wild {
                    target: target.map(|(p, o)| (p, o + by)),
                },
            })
            .collect();
        Self { entries }
    }

    fn associated(&self, var: &str) -> Self {
        let mut next = self.clone();
        next.entries.push(Entry::Wild {
            target: self.lookup(var),
        });
        next
    }

    /// State of `var` at position `shift`, if `var` is assigned.
    pub fn state_at(&self, var: &str, shift: usize) -> Result<Option<&'a S>, EvalError> {
        match self.lookup(var) {
            None => Ok(None),
            Some((path, offset)) => {
                let pos = offset + shift;
                if pos >= path.len() {
                    return Err(EvalError::PathTooShort {
                        pos,
                        len: path.len(),
                    });
                }
                path.state(pos)
                    .map(Some)
                    .ok_or(EvalError::StateUnavailable(pos))
            }
        }
    }
}

/// Resolves comparisons of probability terms during evaluation.
pub trait CompareOracle<S> {
    /// Decides `lhs rel rhs` under `v` shifted by `shift`.
    fn compare(
        &mut self,
        lhs: &ProbTerm,
        rel: Rel,
        rhs: &ProbTerm,
        v: &Assignment<'_, S>,
        shift: usize,
    ) -> Result<bool, EvalError>;
}

/// Oracle for pure path formulas; fails on any comparison it is asked about.
pub struct NoOracle;

impl<S> CompareOracle<S> for NoOracle {
    fn compare(
        &mut self,
        _: &ProbTerm,
        _: Rel,
        _: &ProbTerm,
        _: &Assignment<'_, S>,
        _: usize,
    ) -> Result<bool, EvalError> {
        Err(EvalError::UnresolvedCompare)
    }
}

/// Evaluates a path formula. `props` maps label ids of the paths to names.
pub fn eval_path_formula<S, O: CompareOracle<S> + ?Sized>(
    f: &Formula,
    v: &Assignment<'_, S>,
    props: &[String],
    oracle: &mut O,
) -> Result<bool, EvalError> {
    eval_at(f, v, 0, props, oracle)
}

pub(crate) fn eval_at<S, O: CompareOracle<S> + ?Sized>(
    f: &Formula,
    v: &Assignment<'_, S>,
    shift: usize,
    props: &[String],
    oracle: &mut O,
) -> Result<bool, EvalError> {
    match f {
        Formula::True => Ok(true),
        Formula::Atom { ap, pv } => {
            let (path, offset) = v
                .lookup(pv.as_str())
                .ok_or_else(|| EvalError::Unbound(pv.0.clone()))?;
            let pos = offset + shift;
            let labels = path.labels.get(pos).ok_or(EvalError::PathTooShort {
                pos,
                len: path.len(),
            })?;
            Ok(labels
                .iter()
                .any(|id| props.get(id as usize).is_some_and(|n| n == ap)))
        }
        Formula::Assoc(body, pv) => {
            let inner = v.associated(pv.as_str());
            eval_at(body, &inner, shift, props, oracle)
        }
        Formula::Not(a) => Ok(!eval_at(a, v, shift, props, oracle)?),
        Formula::And(a, b) => {
            Ok(eval_at(a, v, shift, props, oracle)? && eval_at(b, v, shift, props, oracle)?)
        }
        Formula::Next(a) => eval_at(a, v, shift + 1, props, oracle),
        Formula::Until { lhs, rhs, bound } => {
            let Bound::Steps(k) = *bound else {
                return Err(EvalError::Unbounded);
            };
            for i in 0..=k {
                if eval_at(rhs, v, shift + i, props, oracle)? {
                    return Ok(true);
                }
                if i == k || !eval_at(lhs, v, shift + i, props, oracle)? {
                    return Ok(false);
                }
            }
            Ok(false)
        }
        Formula::Compare { lhs, rel, rhs } => {
            if let (Some(a), Some(b)) = (const_value(lhs), const_value(rhs)) {
                return Ok(a.compare(*rel, &b));
            }
            oracle.compare(lhs, *rel, rhs, v, shift)
        }
    }
}

/// A term value: exact where every input and operation allowed it.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Approx(f64),
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Exact(q) => write!(f, "{q}"),
            Value::Approx(x) => write!(f, "{x}"),
        }
    }
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(q) => to_f64(q),
            Value::Approx(x) => *x,
        }
    }

    pub fn compare(&self, rel: Rel, other: &Value) -> bool {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => rel.holds(a, b),
            _ => rel.holds(&self.to_f64(), &other.to_f64()),
        }
    }

    pub fn apply(op: Func, args: &[Value]) -> Value {
        let exact: Option<Vec<&BigRational>> = args
            .iter()
            .map(|a| match a {
                Value::Exact(q) => Some(q),
                Value::Approx(_) => None,
            })
            .collect();
        if let Some(q) = exact {
            if let Some(v) = exact_apply(op, &q) {
                return Value::Exact(v);
            }
        }
        let xs: Vec<f64> = args.iter().map(Value::to_f64).collect();
        Value::Approx(op.apply(&xs))
    }
}

fn exact_apply(op: Func, q: &[&BigRational]) -> Option<BigRational> {
    match op {
        Func::Add => Some(q[0] + q[1]),
        Func::Sub => Some(q[0] - q[1]),
        Func::Mul => Some(q[0] * q[1]),
        Func::Div => (!q[1].is_zero()).then(|| q[0] / q[1]),
        Func::Pow => {
            if !q[1].is_integer() {
                return None;
            }
            let e = q[1].to_integer().to_i32()?;
            if e.abs() > 64 || (e < 0 && q[0].is_zero()) {
                return None;
            }
            let base = if e < 0 { q[0].recip() } else { q[0].clone() };
            Some(num_traits::pow(base, e.unsigned_abs() as usize))
        }
        Func::Exp => q[0].is_zero().then(BigRational::one),
        Func::Ln => q[0].is_one().then(BigRational::zero),
    }
}

/// Value of a term without probability operators.
pub fn const_value(t: &ProbTerm) -> Option<Value> {
    match t {
        ProbTerm::Const(c) => Some(Value::Exact(c.clone())),
        ProbTerm::Func(op, args) => {
            let vals: Option<Vec<Value>> = args.iter().map(const_value).collect();
            Some(Value::apply(*op, &vals?))
        }
        ProbTerm::Prob { .. } => None,
    }
}

/// Evaluates a term, delegating every probability operator to `prob`.
pub fn eval_term_with<E>(
    t: &ProbTerm,
    prob: &mut impl FnMut(&ProbTerm) -> Result<Value, E>,
) -> Result<Value, E> {
    match t {
        ProbTerm::Const(c) => Ok(Value::Exact(c.clone())),
        ProbTerm::Func(op, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(eval_term_with(a, prob)?);
            }
            Ok(Value::apply(*op, &vals))
        }
        ProbTerm::Prob { .. } => prob(t),
    }
}



#[cfg(test)]
mod tests {
    use super::super::parse_formula;
    use super::*;
    use crate::dtmc::fixtures::FIG3;
    use crate::dtmc::{enumerate_paths, parse_model, DEFAULT_PATH_CAP};

    fn fig3_path(states: &[usize]) -> (Vec<String>, Path<usize>) {
        let m = parse_model(FIG3).unwrap();
        let labels = states.iter().map(|s| m.labels(*s).clone()).collect();
        (
            m.propositions().to_vec(),
            Path {
                states: states.to_vec(),
                labels,
            },
        )
    }

    fn holds(text: &str, path: &Path<usize>, props: &[String]) -> Result<bool, EvalError> {
        let f = parse_formula(text).unwrap();
        let pv = PathVar::new("p1");
        let v = Assignment::new().with(&pv, path);
        eval_path_formula(&f, &v, props, &mut NoOracle)
    }

    #[test]
    fn fig3_path_formulas() {
        let (props, path) = fig3_path(&[0, 1, 3]);
        assert_eq!(holds("ap1@p1", &path, &props), Ok(true));
        assert_eq!(holds("X ap2@p1", &path, &props), Ok(false));
        assert_eq!(holds("F<=2 ap2@p1", &path, &props), Ok(true));
        assert_eq!(holds("ap1@p1 & !ap1@p1", &path, &props), Ok(false));
        assert_eq!(holds("(ap1@q)@p1", &path, &props), Ok(true));
    }

    #[test]
    fn errors() {
        let (props, path) = fig3_path(&[0, 1, 3]);
        assert_eq!(
            holds("X X X ap2@p1", &path, &props),
            Err(EvalError::PathTooShort { pos: 3, len: 3 })
        );
        assert_eq!(holds("F ap2@p1", &path, &props), Err(EvalError::Unbounded));
        assert_eq!(
            holds("P[q](ap1@q) > 0.5", &path, &props),
            Err(EvalError::UnresolvedCompare)
        );
        assert_eq!(holds("1/2 < 2/3", &path, &props), Ok(true));
        assert_eq!(
            holds("ap1@p2", &path, &props),
            Err(EvalError::Unbound("p2".into()))
        );
    }

    fn reads_past_end(f: &Formula, chain: &crate::dtmc::Dtmc, horizon: usize) -> bool {
        let pv = PathVar::new("p1");
        let props = chain.propositions().to_vec();
        enumerate_paths(chain, horizon, DEFAULT_PATH_CAP)
            .unwrap()
            .iter()
            .any(|(path, _)| {
                let v = Assignment::new().with(&pv, path);
                eval_path_formula(f, &v, &props, &mut NoOracle).is_err()
            })
    }

    #[test]
    fn required_horizon_suffices_and_is_tight() {
        let chain = parse_model(
            "dtmc\nstates 3\ninitial 0\nprops ap b\ntrans 0 0 1/3\ntrans 0 1 1/3\ntrans 0 2 1/3\n\
             trans 1 0 1/2\ntrans 1 2 1/2\ntrans 2 2 1\nlabel 0 ap\nlabel 1 b\nlabel 2 ap b\n",
        )
        .unwrap();
        let f = parse_formula("ap@p1 U<=5 (X ap@p1)").unwrap();
        assert_eq!(super::super::required_horizon(&f), Some(6));
        assert!(!reads_past_end(&f, &chain, 6));
        // Independent operands make the bound reachable.
        let g = parse_formula("ap@p1 U<=5 (X b@p1)").unwrap();
        assert_eq!(super::super::required_horizon(&g), Some(6));
        assert!(!reads_past_end(&g, &chain, 6));
        assert!(reads_past_end(&g, &chain, 5));
    }

    #[test]
    fn desugared_forms_agree() {
        let chain = parse_model(
            "dtmc\nstates 3\ninitial 0\nprops a\ntrans 0 1 1/2\ntrans 0 2 1/2\ntrans 1 0 1\ntrans 2 2 1\nlabel 1 a\n",
        )
        .unwrap();
        let props = chain.propositions().to_vec();
        let pv = PathVar::new("p");
        let pairs = [
            ("F<=3 a@p", "true U<=3 a@p"),
            ("G<=3 a@p", "!F<=3 !a@p"),
            ("a@p | X a@p", "!(!a@p & !X a@p)"),
            ("a@p => X a@p", "!a@p | X a@p"),
        ];
        for (path, _) in enumerate_paths(&chain, 4, DEFAULT_PATH_CAP).unwrap() {
            let v = Assignment::new().with(&pv, &path);
            for (x, y) in pairs {
                let fx = parse_formula(x).unwrap();
                let fy = parse_formula(y).unwrap();
                assert_eq!(
                    eval_path_formula(&fx, &v, &props, &mut NoOracle),
                    eval_path_formula(&fy, &v, &props, &mut NoOracle),
                    "{x} vs {y}"
                );
            }
        }
    }

    #[test]
    fn values() {
        let q = |n: i64, d: i64| Value::Exact(BigRational::new(n.into(), d.into()));
        assert_eq!(Value::apply(Func::Pow, &[q(1, 2), q(2, 1)]), q(1, 4));
        assert_eq!(Value::apply(Func::Div, &[q(1, 3), q(2, 3)]), q(1, 2));
        assert!(matches!(Value::apply(Func::Exp, &[q(1, 1)]), Value::Approx(_)));
        assert!(q(1, 3).compare(Rel::Lt, &Value::Approx(0.34)));
    }
}
