use std::fmt;

use thiserror::Error;

use crate::logic::{
    const_value, free_vars, required_horizon, truncate_unbounded, Formula, Func, PathVar,
    ProbBody, ProbTerm, Rel, term_horizon,
};
use crate::numeric::to_f64;
use crate::sprt::{Direction, Expr, Indifference1D, RegionError, Test, TestRegion};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("formula is not closed: free path variables {0:?}")]
    NotClosed(Vec<String>),
    #[error("equality between probabilities cannot be tested statistically; use `a ~[eps] b`")]
    Equality,
    #[error("formula has an unbounded until and no horizon was given")]
    UnboundedHorizon,
    #[error("margin must be positive, got {0}")]
    Margin(f64),
    #[error("region for `{boundary} <= 0`: {source}")]
    Region { boundary: String, source: RegionError },
    #[error("region for `{0} <= 0` is not convex in either orientation")]
    NonConvex(String),
    #[error("constant `{0}` is not a finite number")]
    NonFinite(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Where the paths of a source start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartSpec {
    /// At the model's initial state.
    Initial,
    /// At the state reached by the enclosing path, or the initial state if
    /// the variable is not bound there.
    Enclosing,
}

/// One Bernoulli source: a probability operator drawn as a whole.
#[derive(Debug)]
pub struct Source {
    pub pvs: Vec<PathVar>,
    /// The `P[..](..)` node.
    pub term: ProbTerm,
    pub horizon: usize,
    pub start: StartSpec,
    /// Comparisons read inside the body, each tested by its own plan.
    pub nested: Vec<InnerTest>,
}

/// A nested comparison and the plan deciding it.
#[derive(Debug)]
pub struct InnerTest {
    // Address of the comparison's left operand inside `Source::term`.
    pub(crate) key: usize,
    pub plan: TestPlan,
}

/// Which set the region pieces describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Pieces cover the points violating the property (test H0 = violated).
    Violated,
    /// Pieces cover the points satisfying it (test H0 = satisfied).
    Satisfied,
}

#[derive(Debug, Clone)]
pub struct Piece {
    /// The piece is `{x : boundary(x) <= 0}` before margins.
    pub boundary: Expr,
    pub test: Test,
}

/// Sources and region pieces for one level of probability operators.
#[derive(Debug)]
pub struct TestPlan {
    pub sources: Vec<Source>,
    pub pieces: Vec<Piece>,
    pub orientation: Orientation,
    /// Set when the truth value needs no sampling.
    pub decided: Option<bool>,
    pub margin: f64,
}

impl TestPlan {
    /// Nesting depth counted in levels of tests.
    pub fn depth(&self) -> usize {
        1 + self
            .sources
            .iter()
            .flat_map(|s| &s.nested)
            .map(|n| n.plan.depth())
            .max()
            .unwrap_or(0)
    }

    pub fn dim(&self) -> usize {
        self.sources.len()
    }

    /// Rebuilds every region of this level with a new margin.
    pub fn set_margin(&mut self, margin: f64) -> Result<(), CompileError> {
        if !(margin > 0.0) {
            return Err(CompileError::Margin(margin));
        }
        let n = self.dim();
        for piece in &mut self.pieces {
            piece.test = build_test(&piece.boundary, n, margin)?;
        }
        self.margin = margin;
        Ok(())
    }

    pub(crate) fn inner(&self, source: usize, key: usize) -> Option<&TestPlan> {
        self.sources[source]
            .nested
            .iter()
            .find(|n| n.key == key)
            .map(|n| &n.plan)
    }

    /// Number of probability operators in the plan tree.
    pub fn prob_count(&self) -> usize {
        self.sources
            .iter()
            .map(|s| chain_len(&s.term) + s.nested.iter().map(|n| n.plan.prob_count()).sum::<usize>())
            .sum()
    }
}

fn chain_len(t: &ProbTerm) -> usize {
    match t {
        ProbTerm::Prob { body: ProbBody::Term(inner), .. } => 1 + chain_len(inner),
        _ => 1,
    }
}

/// Compiles a closed formula; unbounded untils are cut at `horizon`.
pub fn compile(formula: &Formula, margin: f64, horizon: Option<usize>) -> Result<TestPlan, CompileError> {
    let open = free_vars(formula);
    if !open.is_empty() {
        return Err(CompileError::NotClosed(open.into_iter().map(|v| v.0).collect()));
    }
    if !(margin > 0.0) {
        return Err(CompileError::Margin(margin));
    }
    let formula = match required_horizon(formula) {
        Some(_) => formula.clone(),
        None => truncate_unbounded(formula, horizon.ok_or(CompileError::UnboundedHorizon)?),
    };
    let mut literals = Vec::new();
    let structure = boolean_structure(&formula, &mut literals)?;
    compile_level(&structure, &literals, margin, StartSpec::Initial)
}

/// Truth of a closed formula as a function of its top-level comparisons.
#[derive(Debug, Clone)]
enum Bool {
    Const(bool),
    Lit(usize),
    Not(Box<Bool>),
    And(Box<Bool>, Box<Bool>),
}

#[derive(Debug, Clone, PartialEq)]
struct Literal {
    lhs: ProbTerm,
    rel: Rel,
    rhs: ProbTerm,
}

fn boolean_structure(f: &Formula, literals: &mut Vec<Literal>) -> Result<Bool, CompileError> {
    Ok(match f {
        Formula::True => Bool::Const(true),
        Formula::Atom { pv, .. } => return Err(CompileError::NotClosed(vec![pv.0.clone()])),
        // Without free variables every position evaluates alike.
        Formula::Assoc(a, _) | Formula::Next(a) => boolean_structure(a, literals)?,
        Formula::Until { rhs, .. } => boolean_structure(rhs, literals)?,
        Formula::Not(a) => Bool::Not(Box::new(boolean_structure(a, literals)?)),
        Formula::And(a, b) => Bool::And(
            Box::new(boolean_structure(a, literals)?),
            Box::new(boolean_structure(b, literals)?),
        ),
        Formula::Compare { lhs, rel, rhs } => {
            if let (Some(a), Some(b)) = (const_value(lhs), const_value(rhs)) {
                return Ok(Bool::Const(a.compare(*rel, &b)));
            }
            if *rel == Rel::Eq {
                return Err(CompileError::Equality);
            }
            let lit = Literal { lhs: lhs.clone(), rel: *rel, rhs: rhs.clone() };
            let idx = match literals.iter().position(|l| *l == lit) {
                Some(i) => i,
                None => {
                    literals.push(lit);
                    literals.len() - 1
                }
            };
            Bool::Lit(idx)
        }
    })
}

/// Disjunctive normal form: a list of conjunctions of `(literal, value)`.
type Dnf = Vec<Vec<(usize, bool)>>;

fn dnf(b: &Bool, positive: bool) -> Dnf {
    match (b, positive) {
        (Bool::Const(v), p) => {
            if *v == p {
                vec![vec![]]
            } else {
                vec![]
            }
        }
        (Bool::Lit(i), p) => vec![vec![(*i, p)]],
        (Bool::Not(a), p) => dnf(a, !p),
        (Bool::And(a, b), true) => {
            let (l, r) = (dnf(a, true), dnf(b, true));
            let mut out = Vec::new();
            for x in &l {
                for y in &r {
                    let mut term = x.clone();
                    for lit in y {
                        if !term.contains(lit) {
                            term.push(*lit);
                        }
                    }
                    if !term.iter().any(|(i, v)| term.contains(&(*i, !v))) {
                        out.push(term);
                    }
                }
            }
            simplify(out)
        }
        (Bool::And(a, b), false) => {
            let mut out = dnf(a, false);
            out.extend(dnf(b, false));
            simplify(out)
        }
    }
}

fn simplify(mut terms: Dnf) -> Dnf {
    for t in &mut terms {
        t.sort();
    }
    terms.sort();
    terms.dedup();
    if terms.iter().any(Vec::is_empty) {
        return vec![vec![]];
    }
    terms
}

fn compile_level(
    structure: &Bool,
    literals: &[Literal],
    margin: f64,
    start: StartSpec,
) -> Result<TestPlan, CompileError> {
    let mut sources: Vec<Source> = Vec::new();
    let mut gs = Vec::with_capacity(literals.len());
    for lit in literals {
        let lhs = to_expr(&lit.lhs, &mut sources, margin)?;
        let rhs = to_expr(&lit.rhs, &mut sources, margin)?;
        gs.push(match lit.rel {
            Rel::Gt | Rel::Ge => lhs - rhs,
            Rel::Lt | Rel::Le => rhs - lhs,
            Rel::Eq => return Err(CompileError::Equality),
        });
    }
    for s in &mut sources {
        s.start = start;
    }
    let mut plan = TestPlan {
        sources,
        pieces: Vec::new(),
        orientation: Orientation::Violated,
        decided: None,
        margin,
    };
    let violated = dnf(structure, false);
    let satisfied = dnf(structure, true);
    if violated.is_empty() {
        plan.decided = Some(true);
        return Ok(plan);
    }
    if satisfied.is_empty() {
        plan.decided = Some(false);
        return Ok(plan);
    }
    let singles = |d: &Dnf| d.iter().all(|t| t.len() == 1);
    let mut last_err = None;
    for (orientation, terms) in [(Orientation::Violated, &violated), (Orientation::Satisfied, &satisfied)] {
        if !singles(terms) {
            continue;
        }
        let boundaries: Vec<Expr> = terms
            .iter()
            .map(|t| {
                let (i, value) = t[0];
                // `value` true selects `g > 0`, written as `-g <= 0`.
                if value {
                    -gs[i].clone()
                } else {
                    gs[i].clone()
                }
            })
            .collect();
        let n = plan.dim();
        match boundaries
            .iter()
            .map(|b| build_test(b, n, margin).map(|test| Piece { boundary: b.clone(), test }))
            .collect::<Result<Vec<_>, _>>()
        {
            Ok(pieces) => {
                plan.pieces = pieces;
                plan.orientation = orientation;
                return Ok(plan);
            }
            Err(e @ CompileError::NonConvex(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| {
        CompileError::Unsupported(
            "the property and its negation both need conjunctions of comparisons".into(),
        )
    }))
}

fn build_test(boundary: &Expr, n: usize, margin: f64) -> Result<Test, CompileError> {
    let region_err = |source| CompileError::Region { boundary: boundary.to_string(), source };
    if let Some((a, b)) = boundary.as_affine(n) {
        let used: Vec<usize> = (0..n).filter(|&i| a[i] != 0.0).collect();
        if used.is_empty() {
            return Err(region_err(RegionError::Constant));
        }
        if let [source] = used[..] {
            let p = -b / a[source];
            let direction = if a[source] > 0.0 { Direction::Above } else { Direction::Below };
            if let Ok(spec) = Indifference1D::new(p, margin, direction) {
                return Ok(Test::Scalar { source, spec });
            }
        }
    }
    let region = TestRegion::with_margin(n, boundary.clone(), margin).map_err(region_err)?;
    if !region.convex() {
        return Err(CompileError::NonConvex(boundary.to_string()));
    }
    Ok(Test::Multi(region))
}

fn to_expr(t: &ProbTerm, sources: &mut Vec<Source>, margin: f64) -> Result<Expr, CompileError> {
    Ok(match t {
        ProbTerm::Const(c) => {
            let v = to_f64(c);
            if !v.is_finite() {
                return Err(CompileError::NonFinite(t.to_string()));
            }
            Expr::Const(v)
        }
        ProbTerm::Func(op, args) => {
            if let Some(v) = const_value(t) {
                let v = v.to_f64();
                if !v.is_finite() {
                    return Err(CompileError::NonFinite(t.to_string()));
                }
                return Ok(Expr::Const(v));
            }
            let mut xs = Vec::with_capacity(args.len());
            for a in args {
                xs.push(to_expr(a, sources, margin)?);
            }
            let b = |e: &Expr| Box::new(e.clone());
            match op {
                Func::Add => xs[0].clone() + xs[1].clone(),
                Func::Sub => xs[0].clone() - xs[1].clone(),
                Func::Mul => xs[0].clone() * xs[1].clone(),
                Func::Div => xs[0].clone() / xs[1].clone(),
                Func::Pow => Expr::Pow(b(&xs[0]), b(&xs[1])),
                Func::Exp => Expr::Exp(b(&xs[0])),
                Func::Ln => Expr::Ln(b(&xs[0])),
            }
        }
        ProbTerm::Prob { .. } => {
            let idx = match sources.iter().position(|s| s.term == *t) {
                Some(i) => i,
                None => {
                    sources.push(new_source(t, margin)?);
                    sources.len() - 1
                }
            };
            Expr::var(idx)
        }
    })
}

fn new_source(t: &ProbTerm, margin: f64) -> Result<Source, CompileError> {
    let ProbTerm::Prob { pvs, body } = t else {
        unreachable!("sources are probability operators");
    };
    let horizon = match body {
        ProbBody::Path(f) => required_horizon(f).expect("untils are bounded after truncation"),
        ProbBody::Term(inner) => {
            if !matches!(**inner, ProbTerm::Prob { .. }) {
                return Err(CompileError::Unsupported(format!(
                    "probability of the term `{inner}`; only a probability operator can be nested this way"
                )));
            }
            term_horizon(inner).expect("untils are bounded after truncation")
        }
    };
    let mut source = Source {
        pvs: pvs.clone(),
        term: t.clone(),
        horizon,
        start: StartSpec::Initial,
        nested: Vec::new(),
    };
    let mut found = Vec::new();
    collect_term_compares(&source.term, &mut found);
    for (key, lit) in found {
        let mut literals = Vec::new();
        let structure = boolean_structure(&lit, &mut literals)?;
        let plan = compile_level(&structure, &literals, margin, StartSpec::Enclosing)?;
        source.nested.push(InnerTest { key, plan });
    }
    Ok(source)
}

/// Comparisons at the next nesting level, keyed by the address of their left operand.
fn collect_term_compares(t: &ProbTerm, out: &mut Vec<(usize, Formula)>) {
    match t {
        ProbTerm::Prob { body: ProbBody::Path(f), .. } => collect_compares(f, out),
        ProbTerm::Prob { body: ProbBody::Term(inner), .. } => collect_term_compares(inner, out),
        _ => {}
    }
}

fn collect_compares(f: &Formula, out: &mut Vec<(usize, Formula)>) {
    match f {
        Formula::True | Formula::Atom { .. } => {}
        Formula::Assoc(a, _) | Formula::Not(a) | Formula::Next(a) => collect_compares(a, out),
        Formula::And(a, b) | Formula::Until { lhs: a, rhs: b, .. } => {
            collect_compares(a, out);
            collect_compares(b, out);
        }
        Formula::Compare { lhs, rhs, .. } => {
            if const_value(lhs).is_none() || const_value(rhs).is_none() {
                out.push((lhs as *const ProbTerm as usize, f.clone()));
            }
        }
    }
}

impl fmt::Display for TestPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sources.iter().enumerate() {
            writeln!(f, "x{} = {} (horizon {})", i + 1, s.term, s.horizon)?;
        }
        let side = match self.orientation {
            Orientation::Violated => "violated",
            Orientation::Satisfied => "satisfied",
        };
        if let Some(v) = self.decided {
            return writeln!(f, "decided without sampling: {v}");
        }
        for p in &self.pieces {
            let kind = match p.test {
                Test::Scalar { .. } => "scalar",
                Test::Multi(_) => "multi",
            };
            writeln!(f, "{side} where {} <= 0 ({kind}, margin {})", p.boundary, self.margin)?;
        }
        Ok(())
    }
}
