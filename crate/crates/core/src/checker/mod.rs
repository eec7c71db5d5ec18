//! Statistical checking of closed formulas and an exact oracle for small chains.
//!
//! [`compile`] maps every probability operator of the outermost level to a
//! Bernoulli source and turns the comparisons into region pieces. [`check`]
//! draws one path tuple per source at a time and feeds the counts to the
//! sequential tests. Comparisons nested inside a probability operator are
//! decided by their own sequential tests each time the enclosing body is
//! evaluated; the outcome then serves as a noisy observation for the
//! enclosing level.
//!
//! Budgets are split evenly across nesting levels. A nested verdict is wrong
//! with probability at most `gamma = max(alpha_level, beta_level)`, so every
//! level that depends on nested tests runs with its margin reduced by
//! `gamma`.

mod compile;
mod oracle;

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rand::RngCore;
use rayon::prelude::*;
use thiserror::Error;

use crate::dtmc::{sample_path_from, sample_trace_from, ModelSampler, Path};
use crate::logic::{
    eval_path_formula, has_unbounded, term_horizon, Assignment, CompareOracle, EvalError,
    Formula, ProbBody, ProbTerm, Rel,
};
use crate::sprt::{
    ErrorBudget, Outcome, PartitionedTest, SampleCounts, SprtError, Test, Verdict,
};
use crate::stream::substream;

pub use compile::{
    compile, CompileError, InnerTest, Orientation, Piece, Source, StartSpec, TestPlan,
};
pub use oracle::{brute_force_check, brute_force_check_capped, Comparison, OracleError, OracleResult};

pub const DEFAULT_MAX_SAMPLES: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Sprt(#[from] SprtError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error(
        "nested tests may err with probability {gamma}, which is not below the margin {margin}; \
         lower alpha and beta or widen the margin"
    )]
    NestedBudget { gamma: f64, margin: f64 },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// A statistical model-checking problem.
#[derive(Debug, Clone)]
pub struct CheckTask<'m, M> {
    pub model: &'m M,
    pub formula: Formula,
    pub budget: ErrorBudget,
    pub margin: f64,
    /// Cut-off for unbounded untils.
    pub horizon: Option<usize>,
    pub batch: u64,
    pub max_samples: u64,
    pub seed: u64,
    pub workers: usize,
}

impl<'m, M> CheckTask<'m, M> {
    pub fn new(model: &'m M, formula: Formula, budget: ErrorBudget, margin: f64) -> Self {
        CheckTask {
            model,
            formula,
            budget,
            margin,
            horizon: None,
            batch: 1,
            max_samples: DEFAULT_MAX_SAMPLES,
            seed: 0,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    /// `AssertH1` means the property holds.
    pub verdict: Verdict,
    /// Draws and successes of each outermost source.
    pub counts: SampleCounts,
    pub elapsed: Duration,
    /// Budget of each nesting level, outermost first.
    pub level_budgets: Vec<ErrorBudget>,
    /// Unbounded untils were cut at the task horizon.
    pub truncated: bool,
}

impl CheckResult {
    pub fn holds(&self) -> Option<bool> {
        match self.verdict.outcome {
            Outcome::AssertH1 => Some(true),
            Outcome::AssertH0 => Some(false),
            Outcome::Undecided => None,
        }
    }
}

/// Runs the sequential test of `task`, nested levels included.
pub fn check<M: ModelSampler>(task: &CheckTask<'_, M>) -> Result<CheckResult, CheckError> {
    let start = Instant::now();
    let truncated = has_unbounded(&task.formula);
    if truncated {
        log::warn!(
            "unbounded untils are cut at {} steps; the verdict is for the bounded formula",
            task.horizon.unwrap_or(0)
        );
    }
    let mut plan = compile(&task.formula, task.margin, task.horizon)?;
    let depth = plan.depth();
    let level = ErrorBudget {
        alpha: task.budget.alpha / depth as f64,
        beta: task.budget.beta / depth as f64,
    };
    if depth > 1 {
        let gamma = level.alpha.max(level.beta);
        if gamma >= task.margin {
            return Err(CheckError::NestedBudget { gamma, margin: task.margin });
        }
        shrink_parent_margins(&mut plan, task.margin - gamma)?;
    }
    let runner = Runner {
        model: task.model,
        level,
        batch: task.batch.max(1),
        max_samples: task.max_samples,
        cap_hit: AtomicBool::new(false),
    };
    let n = plan.dim();
    let finish = |verdict: Verdict, counts: SampleCounts| CheckResult {
        verdict,
        counts,
        elapsed: start.elapsed(),
        level_budgets: vec![level; depth],
        truncated,
    };
    if let Some(holds) = plan.decided {
        let outcome = if holds { Outcome::AssertH1 } else { Outcome::AssertH0 };
        let verdict = Verdict { outcome, samples_used: 0, llr: f64::INFINITY, pair: None };
        return Ok(finish(verdict, SampleCounts::new(n)));
    }
    let pool = if task.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(task.workers)
                .build()
                .map_err(|e| CheckError::Pool(e.to_string()))?,
        )
    } else {
        None
    };
    let mut test = runner.partitioned(&plan);
    let mut counts = SampleCounts::new(n);
    while counts.draws() < task.max_samples {
        let from = counts.draws();
        let to = from + runner.batch.min(task.max_samples - from);
        let draw = |k: u64| -> Result<Vec<bool>, CheckError> {
            (0..n)
                .map(|i| {
                    let mut rng = substream(task.seed, i as u64, k);
                    runner.sample_source(&plan, i, &Assignment::new(), 0, &mut rng)
                })
                .collect()
        };
        let outcomes: Vec<Result<Vec<bool>, CheckError>> = match &pool {
            Some(pool) => pool.install(|| (from..to).into_par_iter().map(draw).collect()),
            None => (from..to).map(draw).collect(),
        };
        for o in outcomes {
            counts.record(&o?);
        }
        if let Some(v) = test.observe(&counts)? {
            let verdict = if runner.cap_hit.load(Ordering::Relaxed) {
                Verdict::undecided(counts.draws())
            } else {
                orient(v, plan.orientation)
            };
            return Ok(finish(verdict, counts));
        }
    }
    let draws = counts.draws();
    Ok(finish(Verdict::undecided(draws), counts))
}

/// Same as [`check`]; kept as the entry point for formulas with nested
/// probability operators, which `check` also accepts.
pub fn check_nested<M: ModelSampler>(task: &CheckTask<'_, M>) -> Result<CheckResult, CheckError> {
    check(task)
}

fn shrink_parent_margins(plan: &mut TestPlan, margin: f64) -> Result<(), CheckError> {
    let mut has_children = false;
    for source in &mut plan.sources {
        for inner in &mut source.nested {
            has_children = true;
            shrink_parent_margins(&mut inner.plan, margin)?;
        }
    }
    if has_children {
        plan.set_margin(margin)?;
    }
    Ok(())
}

fn orient(v: Verdict, orientation: Orientation) -> Verdict {
    match orientation {
        Orientation::Violated => v,
        Orientation::Satisfied => Verdict {
            outcome: match v.outcome {
                Outcome::AssertH0 => Outcome::AssertH1,
                Outcome::AssertH1 => Outcome::AssertH0,
                Outcome::Undecided => Outcome::Undecided,
            },
            ..v
        },
    }
}

struct Runner<'m, M> {
    model: &'m M,
    level: ErrorBudget,
    batch: u64,
    max_samples: u64,
    cap_hit: AtomicBool,
}

impl<M: ModelSampler> Runner<'_, M> {
    fn partitioned(&self, plan: &TestPlan) -> PartitionedTest {
        let budget = match plan.orientation {
            Orientation::Violated => self.level,
            Orientation::Satisfied => self.level.swapped(),
        };
        let tests: Vec<Test> = plan.pieces.iter().map(|p| p.test.clone()).collect();
        PartitionedTest::new(tests, &budget)
    }

    fn sample_source<R: RngCore>(
        &self,
        plan: &TestPlan,
        index: usize,
        v: &Assignment<'_, M::State>,
        shift: usize,
        rng: &mut R,
    ) -> Result<bool, CheckError> {
        let source = &plan.sources[index];
        self.sample_prob(plan, index, &source.term, source.horizon, v, shift, rng)
    }

    #[allow(clippy::too_many_arguments)]
    fn sample_prob<R: RngCore>(
        &self,
        plan: &TestPlan,
        index: usize,
        term: &ProbTerm,
        horizon: usize,
        v: &Assignment<'_, M::State>,
        shift: usize,
        rng: &mut R,
    ) -> Result<bool, CheckError> {
        let ProbTerm::Prob { pvs, body } = term else {
            unreachable!("sources are probability operators");
        };
        // Paths only need their states when something restarts from them.
        let labels_only =
            matches!(body, ProbBody::Path(_)) && plan.sources[index].nested.is_empty();
        let mut paths: Vec<Path<M::State>> = Vec::with_capacity(pvs.len());
        for pv in pvs {
            let start = match v.state_at(pv.as_str(), shift)? {
                Some(s) => s.clone(),
                None => self.model.initial_state(),
            };
            paths.push(if labels_only {
                sample_trace_from(self.model, start, rng, horizon)
            } else {
                sample_path_from(self.model, start, rng, horizon)
            });
        }
        let mut w = v.shifted(shift);
        for (pv, path) in pvs.iter().zip(&paths) {
            w.bind(pv.as_str(), path);
        }
        match body {
            ProbBody::Path(f) => {
                let mut oracle = NestedOracle { runner: self, plan, index, rng, failure: None };
                let props = self.model.propositions();
                match eval_path_formula(f, &w, props, &mut oracle) {
                    Ok(b) => Ok(b),
                    Err(e) => Err(oracle.failure.take().unwrap_or(CheckError::Eval(e))),
                }
            }
            ProbBody::Term(inner) => {
                let h = inner_horizon(inner);
                self.sample_prob(plan, index, inner, h, &w, 0, rng)
            }
        }
    }

    /// Decides a nested comparison by a fresh sequential test.
    fn decide<R: RngCore>(
        &self,
        plan: &TestPlan,
        v: &Assignment<'_, M::State>,
        shift: usize,
        rng: &mut R,
    ) -> Result<bool, CheckError> {
        if let Some(holds) = plan.decided {
            return Ok(holds);
        }
        let mut test = self.partitioned(plan);
        let mut counts = SampleCounts::new(plan.dim());
        let mut outcome = vec![false; plan.dim()];
        while counts.draws() < self.max_samples {
            let todo = self.batch.min(self.max_samples - counts.draws());
            for _ in 0..todo {
                for (i, o) in outcome.iter_mut().enumerate() {
                    *o = self.sample_source(plan, i, v, shift, rng)?;
                }
                counts.record(&outcome);
            }
            if let Some(verdict) = test.observe(&counts)? {
                return Ok(orient(verdict, plan.orientation).outcome == Outcome::AssertH1);
            }
        }
        self.cap_hit.store(true, Ordering::Relaxed);
        Ok(false)
    }
}

fn inner_horizon(t: &ProbTerm) -> usize {
    match t {
        ProbTerm::Prob { body: ProbBody::Path(f), .. } => {
            crate::logic::required_horizon(f).expect("untils are bounded after truncation")
        }
        ProbTerm::Prob { body: ProbBody::Term(inner), .. } => {
            term_horizon(inner).expect("untils are bounded after truncation")
        }
        _ => 0,
    }
}

struct NestedOracle<'a, 'm, M, R> {
    runner: &'a Runner<'m, M>,
    plan: &'a TestPlan,
    index: usize,
    rng: &'a mut R,
    failure: Option<CheckError>,
}

impl<M: ModelSampler, R: RngCore> CompareOracle<M::State> for NestedOracle<'_, '_, M, R> {
    fn compare(
        &mut self,
        lhs: &ProbTerm,
        _rel: Rel,
        _rhs: &ProbTerm,
        v: &Assignment<'_, M::State>,
        shift: usize,
    ) -> Result<bool, EvalError> {
        let key = lhs as *const ProbTerm as usize;
        let Some(inner) = self.plan.inner(self.index, key) else {
            return Err(EvalError::Oracle("comparison missing from the test plan".into()));
        };
        self.runner.decide(inner, v, shift, self.rng).map_err(|e| {
            let msg = e.to_string();
            self.failure = Some(e);
            EvalError::Oracle(msg)
        })
    }
}

#[cfg(test)]
mod tests;
