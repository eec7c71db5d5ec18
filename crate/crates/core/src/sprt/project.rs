use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::likelihood::{clamp, kl_divergence, log_likelihood, log_likelihood_gradient, logit, sigmoid};
use super::region::{dot, newton_to_boundary, BoundaryFn, TestRegion};
use super::{SampleCounts, ETA};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProjectionError {
    /// The boundary does not meet the clamped unit box.
    #[error("boundary does not intersect the unit box")]
    EmptyBoundary,
    #[error("boundary optimizer did not converge")]
    NoConvergence,
}

/// `argmax λ` over `D1^c`, attained on `{f1 = 0}`.
pub fn project_q_max_likelihood(
    counts: &SampleCounts,
    region: &TestRegion,
) -> Result<Vec<f64>, ProjectionError> {
    max_likelihood_on(counts, region.f1())
}

/// `argmin K(. || q)` over `D0`, attained on `{f0 = 0}`.
pub fn project_r_min_kl(q: &[f64], region: &TestRegion) -> Result<Vec<f64>, ProjectionError> {
    min_kl_on(q, region.f0())
}

/// `argmax λ` over `D0`, attained on `{f0 = 0}` when the estimate lies outside `D1`.
pub fn project_r_max_likelihood(
    counts: &SampleCounts,
    region: &TestRegion,
) -> Result<Vec<f64>, ProjectionError> {
    max_likelihood_on(counts, region.f0())
}

/// `argmin K(. || r)` over `D1^c`, attained on `{f1 = 0}`.
pub fn project_q_min_kl(r: &[f64], region: &TestRegion) -> Result<Vec<f64>, ProjectionError> {
    min_kl_on(r, region.f1())
}

fn max_likelihood_on(counts: &SampleCounts, f: &BoundaryFn) -> Result<Vec<f64>, ProjectionError> {
    let n = counts.draws() as f64;
    if let Some((a, b)) = f.affine() {
        let t: Vec<f64> = counts.successes().iter().map(|&t| t as f64).collect();
        return solve_hyperplane(a, b, |i, mu| likelihood_inverse(t[i], n, mu * a[i]));
    }
    let scale = n.max(1.0);
    let start: Vec<f64> = counts
        .successes()
        .iter()
        .map(|&t| if n > 0.0 { t as f64 / n } else { 0.5 })
        .collect();
    descend_on_boundary(
        f,
        &start,
        |x| -log_likelihood(counts, x) / scale,
        |x| log_likelihood_gradient(counts, x).iter().map(|g| -g / scale).collect(),
    )
}

fn min_kl_on(target: &[f64], f: &BoundaryFn) -> Result<Vec<f64>, ProjectionError> {
    if let Some((a, b)) = f.affine() {
        let z: Vec<f64> = target.iter().map(|&t| logit(t)).collect();
        return solve_hyperplane(a, b, |i, mu| clamp(sigmoid(z[i] - mu * a[i])));
    }
    descend_on_boundary(
        f,
        target,
        |x| kl_divergence(x, target),
        |x| x.iter().zip(target).map(|(&xi, &ti)| logit(xi) - logit(ti)).collect(),
    )
}

/// Root of `T/x - (N-T)/(1-x) = s` in `[η, 1-η]`.
fn likelihood_inverse(t: f64, n: f64, s: f64) -> f64 {
    let x = if t == 0.0 {
        if s < -n {
            1.0 + n / s
        } else {
            0.0
        }
    } else if t == n {
        if s > n {
            n / s
        } else {
            1.0
        }
    } else if s == 0.0 {
        t / n
    } else {
        let k = s + n;
        2.0 * t / (k + (k * k - 4.0 * s * t).sqrt())
    };
    clamp(x)
}

/// Solves `a . x(mu) + b = 0` for the multiplier, where each `x_i(mu)` is
/// monotone so that `a_i x_i(mu)` is non-increasing.
fn solve_hyperplane(
    a: &[f64],
    b: f64,
    x_of: impl Fn(usize, f64) -> f64,
) -> Result<Vec<f64>, ProjectionError> {
    let lo_box: f64 = a.iter().map(|&ai| ai * if ai > 0.0 { ETA } else { 1.0 - ETA }).sum::<f64>() + b;
    let hi_box: f64 = a.iter().map(|&ai| ai * if ai > 0.0 { 1.0 - ETA } else { ETA }).sum::<f64>() + b;
    if lo_box > 0.0 || hi_box < 0.0 {
        return Err(ProjectionError::EmptyBoundary);
    }
    let point = |mu: f64| -> Vec<f64> { (0..a.len()).map(|i| x_of(i, mu)).collect() };
    let h = |mu: f64| dot(a, &point(mu)) + b;
    let mut lo = -1.0f64;
    while h(lo) < 0.0 && lo > -1e300 {
        lo *= 2.0;
    }
    let mut hi = 1.0f64;
    while h(hi) > 0.0 && hi < 1e300 {
        hi *= 2.0;
    }
    for _ in 0..2200 {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        let v = h(mid);
        if v == 0.0 {
            return Ok(point(mid));
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (pl, ph) = (point(lo), point(hi));
    Ok(if h(lo).abs() <= h(hi).abs() { pl } else { ph })
}

const SAMPLE_STARTS: usize = 256;
const POLISHED_STARTS: usize = 4;

/// Minimizes `obj` on `{f = 0}` by projected descent from the best of a
/// dense set of boundary points.
fn descend_on_boundary(
    f: &BoundaryFn,
    hint: &[f64],
    obj: impl Fn(&[f64]) -> f64,
    grad: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<Vec<f64>, ProjectionError> {
    let dim = hint.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0xb0_0d_a7);
    let mut starts: Vec<Vec<f64>> = newton_to_boundary(f, hint).into_iter().collect();
    for _ in 0..SAMPLE_STARTS * dim {
        let x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        starts.extend(newton_to_boundary(f, &x));
    }
    if starts.is_empty() {
        return Err(ProjectionError::EmptyBoundary);
    }
    let mut scored: Vec<(f64, Vec<f64>)> = starts
        .into_iter()
        .map(|x| (obj(&x), x))
        .filter(|(v, _)| v.is_finite())
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    scored
        .into_iter()
        .take(POLISHED_STARTS)
        .filter_map(|(_, x)| polish(f, x, &obj, &grad))
        .min_by(|a, b| obj(a).total_cmp(&obj(b)))
        .ok_or(ProjectionError::NoConvergence)
}

fn polish(
    f: &BoundaryFn,
    mut x: Vec<f64>,
    obj: &impl Fn(&[f64]) -> f64,
    grad: &impl Fn(&[f64]) -> Vec<f64>,
) -> Option<Vec<f64>> {
    let mut value = obj(&x);
    let mut step = 0.1;
    for _ in 0..2000 {
        let g = grad(&x);
        let n = f.gradient(&x);
        let nn = dot(&n, &n);
        let along = if nn > 0.0 { dot(&g, &n) / nn } else { 0.0 };
        let d: Vec<f64> = g.iter().zip(&n).map(|(gi, ni)| -(gi - along * ni)).collect();
        let dd = dot(&d, &d);
        if dd.sqrt() < 1e-12 {
            break;
        }
        let mut accepted = false;
        while step > 1e-16 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| (xi + step * di).clamp(0.0, 1.0)).collect();
            if let Some(y) = newton_to_boundary(f, &trial) {
                let v = obj(&y);
                if v < value - 1e-4 * step * dd {
                    x = y;
                    value = v;
                    accepted = true;
                    step *= 2.0;
                    break;
                }
            }
            step /= 2.0;
        }
        if !accepted {
            break;
        }
    }
    (f.value(&x).abs() < 1e-8).then_some(x)
}
