use super::{SampleCounts, SprtError, ETA};

pub(crate) fn clamp(x: f64) -> f64 {
    x.clamp(ETA, 1.0 - ETA)
}

/// `sum_i T_i ln x_i + (N - T_i) ln(1 - x_i)` with coordinates clamped to `[η, 1-η]`.
pub fn log_likelihood(counts: &SampleCounts, x: &[f64]) -> f64 {
    assert_eq!(counts.dim(), x.len(), "dimension mismatch");
    let n = counts.draws() as f64;
    counts
        .successes()
        .iter()
        .zip(x)
        .map(|(&t, &xi)| {
            let t = t as f64;
            let xi = clamp(xi);
            let mut v = 0.0;
            if t > 0.0 {
                v += t * xi.ln();
            }
            if n - t > 0.0 {
                v += (n - t) * (-xi).ln_1p();
            }
            v
        })
        .sum()
}

/// Partial derivatives of [`log_likelihood`].
pub fn log_likelihood_gradient(counts: &SampleCounts, x: &[f64]) -> Vec<f64> {
    let n = counts.draws() as f64;
    counts
        .successes()
        .iter()
        .zip(x)
        .map(|(&t, &xi)| {
            let t = t as f64;
            let xi = clamp(xi);
            t / xi - (n - t) / (1.0 - xi)
        })
        .collect()
}

fn bernoulli_kl(x: f64, q: f64) -> f64 {
    let (x, q) = (clamp(x), clamp(q));
    x * (x / q).ln() + (1.0 - x) * ((1.0 - x) / (1.0 - q)).ln()
}

/// Kullback-Leibler divergence between product Bernoulli laws.
pub fn kl_divergence(x: &[f64], q: &[f64]) -> f64 {
    assert_eq!(x.len(), q.len(), "dimension mismatch");
    x.iter().zip(q).map(|(&a, &b)| bernoulli_kl(a, b).max(0.0)).sum()
}

pub(crate) fn logit(x: f64) -> f64 {
    let x = clamp(x);
    (x / (1.0 - x)).ln()
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Empirical success frequencies `T_i / N`.
pub fn mle(counts: &SampleCounts) -> Result<Vec<f64>, SprtError> {
    if counts.draws() == 0 {
        return Err(SprtError::NoEvidence);
    }
    let n = counts.draws() as f64;
    Ok(counts.successes().iter().map(|&t| t as f64 / n).collect())
}
