//! Scalar expressions over two blocks of variables, `x1..xn` and `y1..ym`.
//!
//! The expression class is closed under sums, products, positive integer
//! powers and absolute values. Every member is piecewise polynomial, hence
//! twice semidifferentiable everywhere, which lets one-sided first and second
//! order expansions along a ray be computed exactly (see [`directional`]).

mod diff;
pub mod directional;
mod parse;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use diff::{gradient, hessian};
pub use directional::{
    second_subderivative, separation_defect, subderivative, DerivativeResult, Exactness,
};
pub use parse::parse_expression;

/// Arguments of `abs` with magnitude at or below this are treated as kinks.
pub const KINK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => write!(f, "x"),
            Axis::Y => write!(f, "y"),
        }
    }
}

/// Expression tree. Variable indices are zero based; `x1` is `Var(X, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Axis, usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Abs(Box<Expr>),
}

/// A candidate point `(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Point {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if let Some(v) = x.iter().chain(y.iter()).find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(format!("point coordinate {v}")));
        }
        Ok(Self { x, y })
    }

    /// Point with only one block populated; the other block is empty.
    pub fn from_block(axis: Axis, z: &[f64]) -> Self {
        match axis {
            Axis::X => Self {
                x: z.to_vec(),
                y: Vec::new(),
            },
            Axis::Y => Self {
                x: Vec::new(),
                y: z.to_vec(),
            },
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn m(&self) -> usize {
        self.y.len()
    }

    pub fn dim(&self) -> usize {
        self.x.len() + self.y.len()
    }

    /// Concatenation `(x, y)`.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.y);
        v
    }

    /// Splits a flat vector of length `n + m` at `n`.
    pub fn from_flat(z: &[f64], n: usize) -> Self {
        Self {
            x: z[..n].to_vec(),
            y: z[n..].to_vec(),
        }
    }

    /// `self + t·w` for a flat direction `w`.
    pub fn offset(&self, t: f64, w: &[f64]) -> Self {
        let n = self.n();
        Self {
            x: self.x.iter().zip(&w[..n]).map(|(a, b)| a + t * b).collect(),
            y: self.y.iter().zip(&w[n..]).map(|(a, b)| a + t * b).collect(),
        }
    }

    pub fn block(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
        }
    }
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn var(axis: Axis, index: usize) -> Self {
        Expr::Var(axis, index)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Self {
        Expr::Neg(Box::new(self))
    }

    pub fn add(self, rhs: Expr) -> Self {
        Expr::Add(Box::new(self), Box::new(rhs))
    }

    pub fn sub(self, rhs: Expr) -> Self {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }

    pub fn mul(self, rhs: Expr) -> Self {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }

    pub fn pow(self, k: u32) -> Self {
        assert!(k >= 1, "integer powers need exponent >= 1");
        Expr::Pow(Box::new(self), k)
    }

    pub fn abs(self) -> Self {
        Expr::Abs(Box::new(self))
    }

    /// Unchecked evaluation. Out-of-range variables read as NaN.
    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(Axis::X, i) => x.get(*i).copied().unwrap_or(f64::NAN),
            Expr::Var(Axis::Y, j) => y.get(*j).copied().unwrap_or(f64::NAN),
            Expr::Neg(a) => -a.value(x, y),
            Expr::Add(a, b) => a.value(x, y) + b.value(x, y),
            Expr::Sub(a, b) => a.value(x, y) - b.value(x, y),
            Expr::Mul(a, b) => a.value(x, y) * b.value(x, y),
            Expr::Pow(a, k) => a.value(x, y).powi(*k as i32),
            Expr::Abs(a) => a.value(x, y).abs(),
        }
    }

    /// Checked evaluation at `p`.
    pub fn evaluate(&self, p: &Point) -> Result<f64> {
        self.check_dims(p.n(), p.m())?;
        let v = self.value(&p.x, &p.y);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteValue(format!("{self} at {p:?} gives {v}")))
        }
    }

    /// Largest referenced index + 1 for the given axis (0 when unused).
    pub fn arity(&self, axis: Axis) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(a, i) => {
                if *a == axis {
                    i + 1
                } else {
                    0
                }
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Abs(a) => a.arity(axis),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.arity(axis).max(b.arity(axis)),
        }
    }

    pub fn check_dims(&self, n: usize, m: usize) -> Result<()> {
        for (axis, dim) in [(Axis::X, n), (Axis::Y, m)] {
            let k = self.arity(axis);
            if k > dim {
                return Err(Error::Dimension {
                    axis,
                    index: k,
                    dim,
                });
            }
        }
        Ok(())
    }

    /// Polynomial degree, or `None` when an `abs` wraps a non-constant term.
    pub fn degree(&self) -> Option<u32> {
        match self {
            Expr::Const(_) => Some(0),
            Expr::Var(..) => Some(1),
            Expr::Neg(a) => a.degree(),
            Expr::Add(a, b) | Expr::Sub(a, b) => Some(a.degree()?.max(b.degree()?)),
            Expr::Mul(a, b) => Some(a.degree()? + b.degree()?),
            Expr::Pow(a, k) => Some(a.degree()? * k),
            Expr::Abs(a) => match a.degree()? {
                0 => Some(0),
                _ => None,
            },
        }
    }

    /// Structurally affine (degree at most one, no kinks).
    pub fn is_affine(&self) -> bool {
        matches!(self.degree(), Some(d) if d <= 1)
    }

    /// Whether the tree contains an `abs` node.
    pub fn has_abs(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(..) => false,
            Expr::Abs(_) => true,
            Expr::Neg(a) | Expr::Pow(a, _) => a.has_abs(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.has_abs() || b.has_abs(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if c.is_sign_negative() => 3,
            Expr::Const(_) | Expr::Var(..) | Expr::Abs(_) => 5,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Canonical text form. Parentheses appear exactly where the tree shape
/// differs from what precedence and left associativity would produce.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(axis, i) => write!(f, "{axis}{}", i + 1),
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_child(f, 3)
            }
            Expr::Add(a, b) => {
                a.fmt_child(f, 1)?;
                write!(f, " + ")?;
                b.fmt_child(f, 2)
            }
            Expr::Sub(a, b) => {
                a.fmt_child(f, 1)?;
                write!(f, " - ")?;
                b.fmt_child(f, 2)
            }
            Expr::Mul(a, b) => {
                a.fmt_child(f, 2)?;
                write!(f, "*")?;
                b.fmt_child(f, 3)
            }
            Expr::Pow(a, k) => {
                a.fmt_child(f, 5)?;
                write!(f, "^{k}")
            }
            Expr::Abs(a) => write!(f, "abs({a})"),
        }
    }
}
