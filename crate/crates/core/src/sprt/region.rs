use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::expr::Expr;
use super::Indifference1D;

const PROBE_POINTS: usize = 10_000;
const PROBE_SEED: u64 = 0x5eed_0f_b0a7;
const BOUNDARY_PROBES: usize = 400;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegionError {
    #[error("boundary function is constant")]
    Constant,
    #[error("boundary uses x{0} but the region has dimension {1}")]
    Dimension(usize, usize),
    #[error("margin must be positive, got {0}")]
    Margin(f64),
    #[error("D0 is not contained in D1 (witness {0:?})")]
    NotNested(Vec<f64>),
    #[error("boundaries of D0 and D1 touch")]
    NotSeparated,
    #[error("boundary is not finite at {0:?}")]
    NotFinite(Vec<f64>),
}

/// A boundary function with its symbolic gradient.
#[derive(Debug, Clone)]
pub struct BoundaryFn {
    expr: Expr,
    gradient: Vec<Expr>,
    affine: Option<(Vec<f64>, f64)>,
}

impl BoundaryFn {
    pub fn new(expr: Expr, dim: usize) -> Result<Self, RegionError> {
        if expr.arity() > dim {
            return Err(RegionError::Dimension(expr.arity(), dim));
        }
        let gradient = expr.gradient(dim);
        let affine = expr.as_affine(dim);
        Ok(BoundaryFn { expr, gradient, affine })
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.affine {
            Some((a, b)) => dot(a, x) + b,
            None => self.expr.eval(x),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.affine {
            Some((a, _)) => a.clone(),
            None => self.gradient.iter().map(|g| g.eval(x)).collect(),
        }
    }

    /// `Some((a, b))` when the function is `a . x + b`.
    pub fn affine(&self) -> Option<(&[f64], f64)> {
        self.affine.as_ref().map(|(a, b)| (a.as_slice(), *b))
    }
}

/// `D0 = {f0 <= 0}` inside `D1 = {f1 <= 0}`, both inside `[0,1]^dim`.
#[derive(Debug, Clone)]
pub struct TestRegion {
    dim: usize,
    f0: BoundaryFn,
    f1: BoundaryFn,
    convex: bool,
}

impl TestRegion {
    /// Builds `D = {f <= 0}` widened and narrowed by `margin`.
    ///
    /// Affine `f` is first scaled to a unit gradient so the margin is the
    /// Euclidean distance between the two boundaries.
    pub fn with_margin(dim: usize, f: Expr, margin: f64) -> Result<Self, RegionError> {
        if !(margin > 0.0) {
            return Err(RegionError::Margin(margin));
        }
        if f.arity() > dim {
            return Err(RegionError::Dimension(f.arity(), dim));
        }
        let f = match f.as_affine(dim) {
            Some((a, b)) => {
                let norm = dot(&a, &a).sqrt();
                if norm == 0.0 {
                    return Err(RegionError::Constant);
                }
                affine_expr(&a.iter().map(|v| v / norm).collect::<Vec<_>>(), b / norm)
            }
            None => f,
        };
        let f0 = f.clone() + Expr::Const(margin);
        let f1 = f - Expr::Const(margin);
        Self::new(dim, f0, f1)
    }

    /// Validates nesting and separation on a fixed probe sample.
    pub fn new(dim: usize, f0: Expr, f1: Expr) -> Result<Self, RegionError> {
        let region = Self::unchecked(dim, f0, f1)?;
        region.validate()?;
        Ok(region)
    }

    /// Skips the nesting and separation probes.
    pub fn unchecked(dim: usize, f0: Expr, f1: Expr) -> Result<Self, RegionError> {
        let f0 = BoundaryFn::new(f0, dim)?;
        let f1 = BoundaryFn::new(f1, dim)?;
        for f in [&f0, &f1] {
            if let Some((a, _)) = f.affine() {
                if a.iter().all(|v| *v == 0.0) {
                    return Err(RegionError::Constant);
                }
            }
        }
        let mut region = TestRegion { dim, f0, f1, convex: true };
        if region.f0.affine().is_none() || region.f1.affine().is_none() {
            region.convex = region.probe_convexity();
        }
        Ok(region)
    }

    /// The half-line region for a scalar test.
    pub fn from_indifference(spec: &Indifference1D) -> Self {
        let x = Expr::var(0);
        let (p, e) = (spec.p, spec.epsilon);
        let (f0, f1) = if spec.h1_above() {
            (x.clone() - Expr::Const(p - e), x - Expr::Const(p + e))
        } else {
            (Expr::Const(p + e) - x.clone(), Expr::Const(p - e) - x)
        };
        Self::unchecked(1, f0, f1).expect("affine in one variable")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn f0(&self) -> &BoundaryFn {
        &self.f0
    }

    pub fn f1(&self) -> &BoundaryFn {
        &self.f1
    }

    /// Whether D0 and D1 passed the midpoint convexity probe (always true when affine).
    pub fn convex(&self) -> bool {
        self.convex
    }

    pub fn in_d0(&self, x: &[f64]) -> bool {
        self.f0.value(x) <= 0.0
    }

    pub fn in_d1(&self, x: &[f64]) -> bool {
        self.f1.value(x) <= 0.0
    }

    fn probe_points(&self) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
        (0..PROBE_POINTS)
            .map(|_| (0..self.dim).map(|_| rng.random::<f64>()).collect())
            .collect()
    }

    fn validate(&self) -> Result<(), RegionError> {
        let points = self.probe_points();
        for x in &points {
            let (v0, v1) = (self.f0.value(x), self.f1.value(x));
            if !v0.is_finite() || !v1.is_finite() {
                return Err(RegionError::NotFinite(x.clone()));
            }
            if v0 <= 0.0 && v1 > 0.0 {
                return Err(RegionError::NotNested(x.clone()));
            }
        }
        if let (Some((a0, b0)), Some((a1, b1))) = (self.f0.affine(), self.f1.affine()) {
            let (n0, n1) = (norm(a0), norm(a1));
            let parallel = a0.iter().zip(a1).all(|(x, y)| (x / n0 - y / n1).abs() < 1e-12);
            if parallel {
                return if (b0 / n0 - b1 / n1).abs() > 1e-12 {
                    Ok(())
                } else {
                    Err(RegionError::NotSeparated)
                };
            }
        }
        let on0: Vec<_> = points
            .iter()
            .take(BOUNDARY_PROBES)
            .filter_map(|x| newton_to_boundary(&self.f0, x))
            .collect();
        let on1: Vec<_> = points
            .iter()
            .take(BOUNDARY_PROBES)
            .filter_map(|x| newton_to_boundary(&self.f1, x))
            .collect();
        let min = on0
            .iter()
            .flat_map(|a| on1.iter().map(move |b| distance(a, b)))
            .fold(f64::INFINITY, f64::min);
        if min > 1e-9 {
            Ok(())
        } else {
            Err(RegionError::NotSeparated)
        }
    }

    fn probe_convexity(&self) -> bool {
        let points = self.probe_points();
        [&self.f0, &self.f1].iter().all(|f| {
            let inside: Vec<_> = points.iter().filter(|x| f.value(x) <= 0.0).collect();
            inside.windows(2).all(|w| {
                let mid: Vec<f64> = w[0].iter().zip(w[1]).map(|(a, b)| (a + b) / 2.0).collect();
                f.value(&mid) <= 1e-12
            })
        })
    }
}

pub(crate) fn affine_expr(a: &[f64], b: f64) -> Expr {
    a.iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .fold(Expr::Const(b), |acc, (i, c)| acc + Expr::Const(*c) * Expr::var(i))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Newton steps along the gradient until `|f| < 1e-12`, staying in the unit box.
pub(crate) fn newton_to_boundary(f: &BoundaryFn, start: &[f64]) -> Option<Vec<f64>> {
    let mut x = start.to_vec();
    for _ in 0..60 {
        let v = f.value(&x);
        if !v.is_finite() {
            return None;
        }
        if v.abs() < 1e-12 {
            return Some(x);
        }
        let g = f.gradient(&x);
        let gg = dot(&g, &g);
        if !(gg > 0.0) || !gg.is_finite() {
            return None;
        }
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi = (*xi - v * gi / gg).clamp(0.0, 1.0);
        }
    }
    (f.value(&x).abs() < 1e-10).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Expr {
        Expr::var(i)
    }

    fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    #[test]
    fn margin_normalizes_affine_boundaries() {
        let r = TestRegion::with_margin(2, x(0) + x(1) - c(0.8), 0.05).unwrap();
        let s = 2f64.sqrt();
        let (a, b) = r.f0().affine().unwrap();
        assert!((a[0] - 1.0 / s).abs() < 1e-15 && (a[1] - 1.0 / s).abs() < 1e-15);
        assert!((b - (-0.8 / s + 0.05)).abs() < 1e-15);
        assert!(r.in_d0(&[0.35, 0.35]) && !r.in_d1(&[0.45, 0.45]));
        assert!(r.convex());
    }

    #[test]
    fn probes_reject_bad_regions() {
        let swapped = TestRegion::new(2, x(0) + x(1) - c(0.85), x(0) + x(1) - c(0.75));
        assert!(matches!(swapped, Err(RegionError::NotNested(_))));
        let touching = TestRegion::new(1, x(0) - c(0.5), x(0) - c(0.5));
        assert_eq!(touching.unwrap_err(), RegionError::NotSeparated);
        assert_eq!(TestRegion::with_margin(1, x(0), 0.0).unwrap_err(), RegionError::Margin(0.0));
        assert_eq!(
            TestRegion::with_margin(2, c(1.0) * x(2), 0.1).unwrap_err(),
            RegionError::Dimension(3, 2)
        );
    }

    #[test]
    fn circle_region_is_convex_and_separated() {
        let sq = |e: Expr| Expr::Pow(Box::new(e), Box::new(c(2.0)));
        let circle = |r: f64| sq(x(0) - c(0.5)) + sq(x(1) - c(0.5)) - c(r * r);
        let r = TestRegion::new(2, circle(0.2), circle(0.25)).unwrap();
        assert!(r.convex());
        assert!(r.in_d0(&[0.5, 0.6]) && r.in_d1(&[0.5, 0.73]) && !r.in_d1(&[0.5, 0.76]));
        let outside = TestRegion::unchecked(2, -circle(0.25), -circle(0.2)).unwrap();
        assert!(!outside.convex());
    }
}
