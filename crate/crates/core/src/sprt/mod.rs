//! Sequential probability ratio tests.
//!
//! [`sprt_scalar_step`] decides between `p - ε` and `p + ε` for one Bernoulli
//! source. [`sprt_multi_step`] decides whether a vector of success
//! probabilities lies in `D0` or outside `D1` for a [`TestRegion`], reducing
//! the composite hypotheses to the simple pair closest in likelihood.

mod expr;
mod likelihood;
mod project;
mod region;

use thiserror::Error;

pub use expr::Expr;
pub use likelihood::{kl_divergence, log_likelihood, log_likelihood_gradient, mle};
pub use project::{
    project_q_max_likelihood, project_q_min_kl, project_r_max_likelihood, project_r_min_kl,
    ProjectionError,
};
pub use region::{BoundaryFn, RegionError, TestRegion};

/// Clamp applied to probabilities before taking logarithms.
pub const ETA: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SprtError {
    #[error("error ratios must lie in (0,1), got alpha={alpha} beta={beta}")]
    Budget { alpha: f64, beta: f64 },
    #[error("indifference region [{lo}, {hi}] leaves [0,1]")]
    Indifference { lo: f64, hi: f64 },
    #[error("no samples drawn yet")]
    NoEvidence,
    #[error("{successes} successes out of {draws} draws")]
    Counts { draws: u64, successes: u64 },
    #[error("counts have dimension {counts}, region has {region}")]
    Dimension { counts: usize, region: usize },
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

/// False-positive ratio `alpha` and false-negative ratio `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBudget {
    pub alpha: f64,
    pub beta: f64,
}

impl ErrorBudget {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, SprtError> {
        let ok = |v: f64| v > 0.0 && v < 1.0;
        if !ok(alpha) || !ok(beta) {
            return Err(SprtError::Budget { alpha, beta });
        }
        if alpha + beta >= 1.0 {
            log::warn!("alpha + beta = {} >= 1: the error guarantees are void", alpha + beta);
        }
        Ok(ErrorBudget { alpha, beta })
    }

    /// `ln((1-β)/α)`, crossed by evidence for H0.
    pub fn h0_threshold(&self) -> f64 {
        ((1.0 - self.beta) / self.alpha).ln()
    }

    /// `ln((1-α)/β)`, crossed by evidence for H1.
    pub fn h1_threshold(&self) -> f64 {
        ((1.0 - self.alpha) / self.beta).ln()
    }

    /// Budget with the roles of the two hypotheses exchanged.
    pub fn swapped(&self) -> Self {
        ErrorBudget { alpha: self.beta, beta: self.alpha }
    }
}

/// Which side of the threshold the alternative H1 occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Above,
    Below,
}

/// `H0: x <= p - ε` against `H1: x >= p + ε`, or the mirror image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Indifference1D {
    pub p: f64,
    pub epsilon: f64,
    pub direction: Direction,
}

impl Indifference1D {
    pub fn new(p: f64, epsilon: f64, direction: Direction) -> Result<Self, SprtError> {
        let (lo, hi) = (p - epsilon, p + epsilon);
        if !(epsilon > 0.0) || lo < 0.0 || hi > 1.0 {
            return Err(SprtError::Indifference { lo, hi });
        }
        Ok(Indifference1D { p, epsilon, direction })
    }

    pub fn h1_above(&self) -> bool {
        self.direction == Direction::Above
    }

    pub fn h0_point(&self) -> f64 {
        if self.h1_above() {
            self.p - self.epsilon
        } else {
            self.p + self.epsilon
        }
    }

    pub fn h1_point(&self) -> f64 {
        if self.h1_above() {
            self.p + self.epsilon
        } else {
            self.p - self.epsilon
        }
    }
}

/// `N` joint draws and the success count `T_i` of each source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleCounts {
    draws: u64,
    successes: Vec<u64>,
}

impl SampleCounts {
    pub fn new(dim: usize) -> Self {
        SampleCounts { draws: 0, successes: vec![0; dim] }
    }

    pub fn from_parts(draws: u64, successes: Vec<u64>) -> Result<Self, SprtError> {
        if let Some(&t) = successes.iter().find(|&&t| t > draws) {
            return Err(SprtError::Counts { draws, successes: t });
        }
        Ok(SampleCounts { draws, successes })
    }

    pub fn dim(&self) -> usize {
        self.successes.len()
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn successes(&self) -> &[u64] {
        &self.successes
    }

    /// Adds one joint observation.
    pub fn record(&mut self, outcome: &[bool]) {
        assert_eq!(outcome.len(), self.dim(), "dimension mismatch");
        self.draws += 1;
        for (t, &o) in self.successes.iter_mut().zip(outcome) {
            *t += o as u64;
        }
    }

    /// Adds `draws` observations with the given per-source successes.
    pub fn merge(&mut self, draws: u64, successes: &[u64]) {
        assert_eq!(successes.len(), self.dim(), "dimension mismatch");
        self.draws += draws;
        for (t, s) in self.successes.iter_mut().zip(successes) {
            debug_assert!(*s <= draws);
            *t += s;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    AssertH0,
    AssertH1,
    Undecided,
}

/// The simple hypotheses `r` in `D0` and `q` outside `D1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisPair {
    pub r: Vec<f64>,
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub samples_used: u64,
    /// Log-likelihood ratio in favour of the asserted side.
    pub llr: f64,
    pub pair: Option<HypothesisPair>,
}

impl Verdict {
    pub fn undecided(samples_used: u64) -> Self {
        Verdict { outcome: Outcome::Undecided, samples_used, llr: 0.0, pair: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Continue,
    Decided(Verdict),
}

pub fn sprt_scalar_step(counts: &SampleCounts, spec: &Indifference1D, budget: &ErrorBudget) -> Step {
    assert_eq!(counts.dim(), 1, "scalar test needs one source");
    let llr = log_likelihood(counts, &[spec.h1_point()]) - log_likelihood(counts, &[spec.h0_point()]);
    let samples_used = counts.draws();
    if -llr > budget.h0_threshold() {
        Step::Decided(Verdict { outcome: Outcome::AssertH0, samples_used, llr: -llr, pair: None })
    } else if llr > budget.h1_threshold() {
        Step::Decided(Verdict { outcome: Outcome::AssertH1, samples_used, llr, pair: None })
    } else {
        Step::Continue
    }
}

pub fn sprt_multi_step(
    counts: &SampleCounts,
    region: &TestRegion,
    budget: &ErrorBudget,
) -> Result<Step, SprtError> {
    if counts.dim() != region.dim() {
        return Err(SprtError::Dimension { counts: counts.dim(), region: region.dim() });
    }
    if counts.draws() == 0 {
        return Ok(Step::Continue);
    }
    let u = mle(counts)?;
    let samples_used = counts.draws();
    let decided = |outcome, llr, pair| Step::Decided(Verdict { outcome, samples_used, llr, pair });
    if region.in_d0(&u) {
        let q = match project_q_max_likelihood(counts, region) {
            Ok(q) => q,
            Err(ProjectionError::EmptyBoundary) => {
                return Ok(decided(Outcome::AssertH0, f64::INFINITY, None));
            }
            Err(e) => return Err(e.into()),
        };
        let r = match project_r_min_kl(&q, region) {
            Ok(r) => r,
            Err(ProjectionError::EmptyBoundary) => return Ok(Step::Continue),
            Err(e) => return Err(e.into()),
        };
        let llr = log_likelihood(counts, &r) - log_likelihood(counts, &q);
        if llr > budget.h0_threshold() {
            return Ok(decided(Outcome::AssertH0, llr, Some(HypothesisPair { r, q })));
        }
    } else if !region.in_d1(&u) {
        let r = match project_r_max_likelihood(counts, region) {
            Ok(r) => r,
            Err(ProjectionError::EmptyBoundary) => {
                return Ok(decided(Outcome::AssertH1, f64::INFINITY, None));
            }
            Err(e) => return Err(e.into()),
        };
        let q = match project_q_min_kl(&r, region) {
            Ok(q) => q,
            Err(ProjectionError::EmptyBoundary) => return Ok(Step::Continue),
            Err(e) => return Err(e.into()),
        };
        let llr = log_likelihood(counts, &q) - log_likelihood(counts, &r);
        if llr > budget.h1_threshold() {
            return Ok(decided(Outcome::AssertH1, llr, Some(HypothesisPair { r, q })));
        }
    }
    Ok(Step::Continue)
}

/// Splits the budget evenly over `regions.len()` subregion tests.
pub fn partition_region(regions: &[TestRegion], budget: &ErrorBudget) -> Vec<ErrorBudget> {
    assert!(!regions.is_empty(), "partition of an empty region list");
    let k = regions.len() as f64;
    vec![ErrorBudget { alpha: budget.alpha / k, beta: budget.beta / k }; regions.len()]
}

/// One sequential test over shared counts.
#[derive(Debug, Clone)]
pub enum Test {
    Scalar { source: usize, spec: Indifference1D },
    Multi(TestRegion),
}

impl Test {
    pub fn step(&self, counts: &SampleCounts, budget: &ErrorBudget) -> Result<Step, SprtError> {
        match self {
            Test::Scalar { source, spec } => {
                let own = SampleCounts {
                    draws: counts.draws,
                    successes: vec![counts.successes[*source]],
                };
                Ok(sprt_scalar_step(&own, spec, budget))
            }
            Test::Multi(region) => sprt_multi_step(counts, region, budget),
        }
    }
}

/// Subregion tests combined by union: H0 as soon as one piece asserts H0,
/// H1 once every piece has asserted H1.
#[derive(Debug, Clone)]
pub struct PartitionedTest {
    pieces: Vec<(Test, ErrorBudget)>,
    settled: Vec<Option<Verdict>>,
}

impl PartitionedTest {
    pub fn new(tests: Vec<Test>, budget: &ErrorBudget) -> Self {
        assert!(!tests.is_empty(), "partition of an empty region list");
        let k = tests.len() as f64;
        let share = ErrorBudget { alpha: budget.alpha / k, beta: budget.beta / k };
        let settled = vec![None; tests.len()];
        PartitionedTest { pieces: tests.into_iter().map(|t| (t, share)).collect(), settled }
    }

    pub fn pieces(&self) -> impl Iterator<Item = &(Test, ErrorBudget)> {
        self.pieces.iter()
    }

    /// Feeds the current counts to every unsettled piece.
    pub fn observe(&mut self, counts: &SampleCounts) -> Result<Option<Verdict>, SprtError> {
        for ((test, budget), slot) in self.pieces.iter().zip(self.settled.iter_mut()) {
            if slot.is_some() {
                continue;
            }
            if let Step::Decided(v) = test.step(counts, budget)? {
                if v.outcome == Outcome::AssertH0 {
                    return Ok(Some(v));
                }
                *slot = Some(v);
            }
        }
        if self.settled.iter().all(Option::is_some) {
            let last = self
                .settled
                .iter()
                .flatten()
                .max_by_key(|v| v.samples_used)
                .cloned()
                .expect("non-empty");
            return Ok(Some(Verdict { samples_used: counts.draws(), ..last }));
        }
        Ok(None)
    }
}

/// Runs a test to termination, checking every `batch` draws and giving up
/// after `max_samples` draws.
pub fn run_sequential(
    test: &mut PartitionedTest,
    dim: usize,
    batch: u64,
    max_samples: u64,
    mut draw: impl FnMut(&mut [bool]),
) -> Result<Verdict, SprtError> {
    let mut counts = SampleCounts::new(dim);
    let mut outcome = vec![false; dim];
    let batch = batch.max(1);
    while counts.draws() < max_samples {
        let todo = batch.min(max_samples - counts.draws());
        for _ in 0..todo {
            draw(&mut outcome);
            counts.record(&outcome);
        }
        if let Some(v) = test.observe(&counts)? {
            return Ok(v);
        }
    }
    Ok(Verdict::undecided(counts.draws()))
}
