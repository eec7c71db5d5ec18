use std::fmt;

/// Elementary function of `x1..xn` with symbolic derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Zero-based coordinate index.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
}

use Expr::*;

impl Expr {
    pub fn var(i: usize) -> Self {
        Var(i)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Const(c) => *c,
            Var(i) => x[*i],
            Neg(a) => -a.eval(x),
            Add(a, b) => a.eval(x) + b.eval(x),
            Sub(a, b) => a.eval(x) - b.eval(x),
            Mul(a, b) => a.eval(x) * b.eval(x),
            Div(a, b) => a.eval(x) / b.eval(x),
            Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Exp(a) => a.eval(x).exp(),
            Ln(a) => a.eval(x).ln(),
        }
    }

    fn constant(&self) -> Option<f64> {
        match self {
            Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Highest variable index plus one.
    pub fn arity(&self) -> usize {
        match self {
            Const(_) => 0,
            Var(i) => i + 1,
            Neg(a) | Exp(a) | Ln(a) => a.arity(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Pow(a, b) => a.arity().max(b.arity()),
        }
    }

    /// Symbolic partial derivative, lightly simplified.
    pub fn derivative(&self, var: usize) -> Expr {
        match self {
            Const(_) => Const(0.0),
            Var(i) => Const(if *i == var { 1.0 } else { 0.0 }),
            Neg(a) => neg(a.derivative(var)),
            Add(a, b) => add(a.derivative(var), b.derivative(var)),
            Sub(a, b) => sub(a.derivative(var), b.derivative(var)),
            Mul(a, b) => add(
                mul(a.derivative(var), (**b).clone()),
                mul((**a).clone(), b.derivative(var)),
            ),
            Div(a, b) => div(
                sub(
                    mul(a.derivative(var), (**b).clone()),
                    mul((**a).clone(), b.derivative(var)),
                ),
                mul((**b).clone(), (**b).clone()),
            ),
            Pow(a, b) => {
                let da = a.derivative(var);
                let db = b.derivative(var);
                if let Some(k) = b.constant() {
                    // d(a^k) = k a^(k-1) da
                    return mul(
                        mul(Const(k), pow((**a).clone(), Const(k - 1.0))),
                        da,
                    );
                }
                // d(a^b) = a^b (db ln a + b da / a)
                mul(
                    self.clone(),
                    add(
                        mul(db, Ln(a.clone())),
                        div(mul((**b).clone(), da), (**a).clone()),
                    ),
                )
            }
            Exp(a) => mul(self.clone(), a.derivative(var)),
            Ln(a) => div(a.derivative(var), (**a).clone()),
        }
    }

    pub fn gradient(&self, dim: usize) -> Vec<Expr> {
        (0..dim).map(|i| self.derivative(i)).collect()
    }

    /// `Some((a, b))` if the expression equals `a . x + b`.
    pub fn as_affine(&self, dim: usize) -> Option<(Vec<f64>, f64)> {
        let zero = || vec![0.0; dim];
        match self {
            Const(c) => Some((zero(), *c)),
            Var(i) => {
                let mut a = zero();
                *a.get_mut(*i)? = 1.0;
                Some((a, 0.0))
            }
            Neg(e) => {
                let (a, b) = e.as_affine(dim)?;
                Some((a.iter().map(|v| -v).collect(), -b))
            }
            Add(l, r) | Sub(l, r) => {
                let (la, lb) = l.as_affine(dim)?;
                let (ra, rb) = r.as_affine(dim)?;
                let sign = if matches!(self, Add(..)) { 1.0 } else { -1.0 };
                let a = la.iter().zip(&ra).map(|(x, y)| x + sign * y).collect();
                Some((a, lb + sign * rb))
            }
            Mul(l, r) => {
                let (la, lb) = l.as_affine(dim)?;
                let (ra, rb) = r.as_affine(dim)?;
                let l_const = la.iter().all(|v| *v == 0.0);
                let r_const = ra.iter().all(|v| *v == 0.0);
                if l_const {
                    Some((ra.iter().map(|v| v * lb).collect(), rb * lb))
                } else if r_const {
                    Some((la.iter().map(|v| v * rb).collect(), lb * rb))
                } else {
                    None
                }
            }
            Div(l, r) => {
                let (la, lb) = l.as_affine(dim)?;
                let (ra, rb) = r.as_affine(dim)?;
                if ra.iter().any(|v| *v != 0.0) || rb == 0.0 {
                    return None;
                }
                Some((la.iter().map(|v| v / rb).collect(), lb / rb))
            }
            Pow(..) | Exp(..) | Ln(..) => {
                if self.arity() == 0 {
                    Some((zero(), self.eval(&[])))
                } else {
                    None
                }
            }
        }
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Const(c) => Const(-c),
        Neg(inner) => *inner,
        a => Neg(Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Const(x), Const(y)) => Const(x + y),
        (Const(z), _) if *z == 0.0 => b,
        (_, Const(z)) if *z == 0.0 => a,
        _ => Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Const(x), Const(y)) => Const(x - y),
        (_, Const(z)) if *z == 0.0 => a,
        (Const(z), _) if *z == 0.0 => neg(b),
        _ => Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Const(x), Const(y)) => Const(x * y),
        (Const(z), _) | (_, Const(z)) if *z == 0.0 => Const(0.0),
        (Const(o), _) if *o == 1.0 => b,
        (_, Const(o)) if *o == 1.0 => a,
        _ => Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Const(z), _) if *z == 0.0 => Const(0.0),
        (_, Const(o)) if *o == 1.0 => a,
        (Const(x), Const(y)) => Const(x / y),
        _ => Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (_, Const(o)) if *o == 1.0 => a,
        (_, Const(z)) if *z == 0.0 => Const(1.0),
        _ => Pow(Box::new(a), Box::new(b)),
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Add(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Sub(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Mul(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Div(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Neg(Box::new(self))
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Const(c)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const(c) => write!(f, "{c}"),
            Var(i) => write!(f, "x{}", i + 1),
            Neg(a) => write!(f, "-({a})"),
            Add(a, b) => write!(f, "({a} + {b})"),
            Sub(a, b) => write!(f, "({a} - {b})"),
            Mul(a, b) => write!(f, "({a} * {b})"),
            Div(a, b) => write!(f, "({a} / {b})"),
            Pow(a, b) => write!(f, "pow({a}, {b})"),
            Exp(a) => write!(f, "exp({a})"),
            Ln(a) => write!(f, "ln({a})"),
        }
    }
}
