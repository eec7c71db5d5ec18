//! HyperPCTL* formulas.
//!
//! Path formulas ([`Formula`]) are evaluated on an [`Assignment`] of path
//! variables to concrete paths. Probability terms ([`ProbTerm`]) combine
//! probabilities of path-variable tuples with elementary functions, and a
//! [`Formula::Compare`] node compares two of them.
//!
//! Derived operators are desugared by the parser: `a | b` becomes
//! `!(!a & !b)`, `a => b` becomes `!(a & !b)`, `F<=k a` becomes
//! `true U<=k a` and `G<=k a` becomes `!(true U<=k !a)`.

mod eval;
mod parser;
mod pctl;
mod print;

pub use eval::{
    const_value, eval_path_formula, eval_term_with, Assignment, CompareOracle, EvalError, NoOracle,
    Value,
};
pub use parser::{parse_closed_formula, parse_formula, ParseError};
pub use pctl::{translate_pctls, Interval, PctlPath, PctlState};

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;

/// A random path variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathVar(pub String);

impl PathVar {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PathVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Step bound of an until.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound {
    Steps(usize),
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    pub fn holds<T: PartialOrd>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            Rel::Lt => lhs < rhs,
            Rel::Le => lhs <= rhs,
            Rel::Eq => lhs == rhs,
            Rel::Ge => lhs >= rhs,
            Rel::Gt => lhs > rhs,
        }
    }

    /// The relation obtained by swapping the operands.
    pub fn flip(self) -> Rel {
        match self {
            Rel::Lt => Rel::Gt,
            Rel::Le => Rel::Ge,
            Rel::Eq => Rel::Eq,
            Rel::Ge => Rel::Le,
            Rel::Gt => Rel::Lt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Exp,
    Ln,
}

impl Func {
    pub fn arity(self) -> usize {
        match self {
            Func::Exp | Func::Ln => 1,
            _ => 2,
        }
    }

    pub fn apply(self, args: &[f64]) -> f64 {
        match self {
            Func::Add => args[0] + args[1],
            Func::Sub => args[0] - args[1],
            Func::Mul => args[0] * args[1],
            Func::Div => args[0] / args[1],
            Func::Pow => args[0].powf(args[1]),
            Func::Exp => args[0].exp(),
            Func::Ln => args[0].ln(),
        }
    }
}

/// Path formula.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    Atom { ap: String, pv: PathVar },
    Assoc(Box<Formula>, PathVar),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until {
        lhs: Box<Formula>,
        rhs: Box<Formula>,
        bound: Bound,
    },
    Compare {
        lhs: ProbTerm,
        rel: Rel,
        rhs: ProbTerm,
    },
}

/// Probability expression.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbTerm {
    Const(BigRational),
    Func(Func, Vec<ProbTerm>),
    Prob { pvs: Vec<PathVar>, body: ProbBody },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbBody {
    Path(Box<Formula>),
    Term(Box<ProbTerm>),
}

impl Formula {
    pub fn atom(ap: &str, pv: &str) -> Self {
        Formula::Atom {
            ap: ap.into(),
            pv: PathVar::new(pv),
        }
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Self::not(Self::and(Self::not(a), Self::not(b)))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Self::not(Self::and(a, Self::not(b)))
    }

    pub fn next(f: Formula) -> Self {
        Formula::Next(Box::new(f))
    }

    pub fn next_n(f: Formula, n: usize) -> Self {
        (0..n).fold(f, |acc, _| Self::next(acc))
    }

    pub fn until(lhs: Formula, rhs: Formula, bound: Bound) -> Self {
        Formula::Until {
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
            bound,
        }
    }

    pub fn eventually(f: Formula, bound: Bound) -> Self {
        Self::until(Formula::True, f, bound)
    }

    pub fn globally(f: Formula, bound: Bound) -> Self {
        Self::not(Self::eventually(Self::not(f), bound))
    }

    pub fn assoc(f: Formula, pv: &str) -> Self {
        Formula::Assoc(Box::new(f), PathVar::new(pv))
    }

    pub fn compare(lhs: ProbTerm, rel: Rel, rhs: ProbTerm) -> Self {
        Formula::Compare { lhs, rel, rhs }
    }

    /// `|a - b| <= eps` as a conjunction of two comparisons.
    pub fn approx_eq(a: ProbTerm, b: ProbTerm, eps: ProbTerm) -> Self {
        Self::and(
            Self::compare(ProbTerm::sub(a.clone(), b.clone()), Rel::Le, eps.clone()),
            Self::compare(ProbTerm::sub(b, a), Rel::Le, eps),
        )
    }
}

impl ProbTerm {
    pub fn constant(value: BigRational) -> Self {
        ProbTerm::Const(value)
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        ProbTerm::Const(BigRational::new(num.into(), den.into()))
    }

    pub fn prob(pvs: &[&str], body: Formula) -> Self {
        ProbTerm::Prob {
            pvs: pvs.iter().map(|p| PathVar::new(*p)).collect(),
            body: ProbBody::Path(Box::new(body)),
        }
    }

    pub fn func(op: Func, args: Vec<ProbTerm>) -> Self {
        ProbTerm::Func(op, args)
    }

    pub fn add(a: ProbTerm, b: ProbTerm) -> Self {
        ProbTerm::Func(Func::Add, vec![a, b])
    }

    pub fn sub(a: ProbTerm, b: ProbTerm) -> Self {
        ProbTerm::Func(Func::Sub, vec![a, b])
    }
}

/// Path variables not bound by an enclosing probability operator.
pub fn free_vars(f: &Formula) -> BTreeSet<PathVar> {
    let mut out = BTreeSet::new();
    collect_free(f, &mut out);
    out
}

fn collect_free(f: &Formula, out: &mut BTreeSet<PathVar>) {
    match f {
        Formula::True => {}
        Formula::Atom { pv, .. } => {
            out.insert(pv.clone());
        }
        Formula::Assoc(body, pv) => {
            if !free_vars(body).is_empty() {
                out.insert(pv.clone());
            }
        }
        Formula::Not(a) | Formula::Next(a) => collect_free(a, out),
        Formula::And(a, b) | Formula::Until { lhs: a, rhs: b, .. } => {
            collect_free(a, out);
            collect_free(b, out);
        }
        Formula::Compare { lhs, rhs, .. } => {
            collect_free_term(lhs, out);
            collect_free_term(rhs, out);
        }
    }
}

fn collect_free_term(t: &ProbTerm, out: &mut BTreeSet<PathVar>) {
    match t {
        ProbTerm::Const(_) => {}
        ProbTerm::Func(_, args) => args.iter().for_each(|a| collect_free_term(a, out)),
        ProbTerm::Prob { pvs, body } => {
            let mut inner = BTreeSet::new();
            match body {
                ProbBody::Path(f) => collect_free(f, &mut inner),
                ProbBody::Term(t) => collect_free_term(t, &mut inner),
            }
            out.extend(inner.into_iter().filter(|v| !pvs.contains(v)));
        }
    }
}

/// Replaces every free path variable of `f` by `pv`.
pub fn apply_association(f: &Formula, pv: &PathVar) -> Formula {
    assoc_formula(f, pv, &BTreeSet::new())
}

fn assoc_formula(f: &Formula, pv: &PathVar, bound: &BTreeSet<PathVar>) -> Formula {
    let rec = |g: &Formula| Box::new(assoc_formula(g, pv, bound));
    match f {
        Formula::True => Formula::True,
        Formula::Atom { ap, pv: v } => Formula::Atom {
            ap: ap.clone(),
            pv: if bound.contains(v) { v.clone() } else { pv.clone() },
        },
        Formula::Assoc(body, v) => {
            if bound.contains(v) || free_vars(body).is_empty() {
                Formula::Assoc(body.clone(), v.clone())
            } else {
                Formula::Assoc(body.clone(), pv.clone())
            }
        }
        Formula::Not(a) => Formula::Not(rec(a)),
        Formula::Next(a) => Formula::Next(rec(a)),
        Formula::And(a, b) => Formula::And(rec(a), rec(b)),
        Formula::Until { lhs, rhs, bound: k } => Formula::Until {
            lhs: rec(lhs),
            rhs: rec(rhs),
            bound: *k,
        },
        Formula::Compare { lhs, rel, rhs } => Formula::Compare {
            lhs: assoc_term(lhs, pv, bound),
            rel: *rel,
            rhs: assoc_term(rhs, pv, bound),
        },
    }
}

fn assoc_term(t: &ProbTerm, pv: &PathVar, bound: &BTreeSet<PathVar>) -> ProbTerm {
    match t {
        ProbTerm::Const(c) => ProbTerm::Const(c.clone()),
        ProbTerm::Func(op, args) => {
            ProbTerm::Func(*op, args.iter().map(|a| assoc_term(a, pv, bound)).collect())
        }
        ProbTerm::Prob { pvs, body } => {
            let mut inner = bound.clone();
            inner.extend(pvs.iter().cloned());
            let body = match body {
                ProbBody::Path(f) => ProbBody::Path(Box::new(assoc_formula(f, pv, &inner))),
                ProbBody::Term(t) => ProbBody::Term(Box::new(assoc_term(t, pv, &inner))),
            };
            ProbTerm::Prob {
                pvs: pvs.clone(),
                body,
            }
        }
    }
}

/// Number of steps a path must have so that evaluation never reads past its
/// end; `None` if some until is unbounded.
pub fn required_horizon(f: &Formula) -> Option<usize> {
    match f {
        Formula::True | Formula::Atom { .. } => Some(0),
        Formula::Assoc(a, _) | Formula::Not(a) => required_horizon(a),
        Formula::Next(a) => required_horizon(a).map(|h| h + 1),
        Formula::And(a, b) => Some(required_horizon(a)?.max(required_horizon(b)?)),
        Formula::Until { lhs, rhs, bound } => {
            let Bound::Steps(k) = *bound else {
                return None;
            };
            let r = required_horizon(rhs)?;
            let l = required_horizon(lhs)?;
            if k == 0 {
                Some(r)
            } else {
                Some((k + r).max(k - 1 + l))
            }
        }
        Formula::Compare { lhs, rhs, .. } => {
            Some(term_horizon(lhs)?.max(term_horizon(rhs)?))
        }
    }
}

/// Largest horizon needed by the bodies of probability operators in `t`.
pub fn term_horizon(t: &ProbTerm) -> Option<usize> {
    match t {
        ProbTerm::Const(_) => Some(0),
        ProbTerm::Func(_, args) => args
            .iter()
            .try_fold(0, |acc, a| Some(acc.max(term_horizon(a)?))),
        ProbTerm::Prob { body, .. } => match body {
            ProbBody::Path(f) => required_horizon(f),
            ProbBody::Term(t) => term_horizon(t),
        },
    }
}

/// Replaces every unbounded until by one bounded at `horizon` steps.
pub fn truncate_unbounded(f: &Formula, horizon: usize) -> Formula {
    let rec = |g: &Formula| Box::new(truncate_unbounded(g, horizon));
    match f {
        Formula::True | Formula::Atom { .. } => f.clone(),
        Formula::Assoc(a, pv) => Formula::Assoc(rec(a), pv.clone()),
        Formula::Not(a) => Formula::Not(rec(a)),
        Formula::Next(a) => Formula::Next(rec(a)),
        Formula::And(a, b) => Formula::And(rec(a), rec(b)),
        Formula::Until { lhs, rhs, bound } => Formula::Until {
            lhs: rec(lhs),
            rhs: rec(rhs),
            bound: match bound {
                Bound::Unbounded => Bound::Steps(horizon),
                b => *b,
            },
        },
        Formula::Compare { lhs, rel, rhs } => Formula::Compare {
            lhs: truncate_term(lhs, horizon),
            rel: *rel,
            rhs: truncate_term(rhs, horizon),
        },
    }
}

fn truncate_term(t: &ProbTerm, horizon: usize) -> ProbTerm {
    match t {
        ProbTerm::Const(_) => t.clone(),
        ProbTerm::Func(op, args) => {
            ProbTerm::Func(*op, args.iter().map(|a| truncate_term(a, horizon)).collect())
        }
        ProbTerm::Prob { pvs, body } => ProbTerm::Prob {
            pvs: pvs.clone(),
            body: match body {
                ProbBody::Path(f) => ProbBody::Path(Box::new(truncate_unbounded(f, horizon))),
                ProbBody::Term(t) => ProbBody::Term(Box::new(truncate_term(t, horizon))),
            },
        },
    }
}

/// True if some until in `f` is unbounded.
pub fn has_unbounded(f: &Formula) -> bool {
    required_horizon(f).is_none()
}

/// Maximum nesting depth of probability operators (0 for pure path formulas).
pub fn prob_depth(f: &Formula) -> usize {
    match f {
        Formula::True | Formula::Atom { .. } => 0,
        Formula::Assoc(a, _) | Formula::Not(a) | Formula::Next(a) => prob_depth(a),
        Formula::And(a, b) | Formula::Until { lhs: a, rhs: b, .. } => {
            prob_depth(a).max(prob_depth(b))
        }
        Formula::Compare { lhs, rhs, .. } => term_depth(lhs).max(term_depth(rhs)),
    }
}

pub fn term_depth(t: &ProbTerm) -> usize {
    match t {
        ProbTerm::Const(_) => 0,
        ProbTerm::Func(_, args) => args.iter().map(term_depth).max().unwrap_or(0),
        ProbTerm::Prob { body, .. } => {
            1 + match body {
                ProbBody::Path(f) => prob_depth(f),
                ProbBody::Term(t) => term_depth(t),
            }
        }
    }
}
