//! Exact gradients and Hessians by second-order forward propagation.

use nalgebra::DMatrix;

use super::{Axis, Expr, Point, KINK_TOL};
use crate::error::{Error, Result};

/// Value, gradient and Hessian of a subexpression (dense, row-major Hessian).
#[derive(Clone)]
struct Dual {
    v: f64,
    g: Vec<f64>,
    h: Vec<f64>,
}

impl Dual {
    fn constant(v: f64, d: usize) -> Self {
        Self {
            v,
            g: vec![0.0; d],
            h: vec![0.0; d * d],
        }
    }

    fn scale(mut self, s: f64) -> Self {
        self.v *= s;
        self.g.iter_mut().for_each(|g| *g *= s);
        self.h.iter_mut().for_each(|h| *h *= s);
        self
    }

    fn add(mut self, o: &Dual, sign: f64) -> Self {
        self.v += sign * o.v;
        self.g
            .iter_mut()
            .zip(&o.g)
            .for_each(|(a, b)| *a += sign * b);
        self.h
            .iter_mut()
            .zip(&o.h)
            .for_each(|(a, b)| *a += sign * b);
        self
    }

    fn mul(&self, o: &Dual) -> Self {
        let d = self.g.len();
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                h[i * d + j] = self.v * o.h[i * d + j]
                    + o.v * self.h[i * d + j]
                    + self.g[i] * o.g[j]
                    + o.g[i] * self.g[j];
            }
        }
        Self {
            v: self.v * o.v,
            g: self
                .g
                .iter()
                .zip(&o.g)
                .map(|(a, b)| self.v * b + o.v * a)
                .collect(),
            h,
        }
    }

    /// Applies a scalar map with derivatives `(f, f', f'')` at `self.v`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let d = self.g.len();
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                h[i * d + j] = f1 * self.h[i * d + j] + f2 * self.g[i] * self.g[j];
            }
        }
        Self {
            v: f0,
            g: self.g.iter().map(|g| f1 * g).collect(),
            h,
        }
    }
}

fn propagate(e: &Expr, p: &Point, kinks: &mut Vec<String>) -> Dual {
    let n = p.n();
    let d = p.dim();
    match e {
        Expr::Const(c) => Dual::constant(*c, d),
        Expr::Var(axis, i) => {
            let (k, v) = match axis {
                Axis::X => (*i, p.x[*i]),
                Axis::Y => (n + i, p.y[*i]),
            };
            let mut out = Dual::constant(v, d);
            out.g[k] = 1.0;
            out
        }
        Expr::Neg(a) => propagate(a, p, kinks).scale(-1.0),
        Expr::Add(a, b) => propagate(a, p, kinks).add(&propagate(b, p, kinks), 1.0),
        Expr::Sub(a, b) => propagate(a, p, kinks).add(&propagate(b, p, kinks), -1.0),
        Expr::Mul(a, b) => propagate(a, p, kinks).mul(&propagate(b, p, kinks)),
        Expr::Pow(a, k) => {
            let a = propagate(a, p, kinks);
            let k = *k as i32;
            let v = a.v;
            let f1 = if k >= 1 {
                k as f64 * v.powi(k - 1)
            } else {
                0.0
            };
            let f2 = if k >= 2 {
                (k * (k - 1)) as f64 * v.powi(k - 2)
            } else {
                0.0
            };
            a.chain(v.powi(k), f1, f2)
        }
        Expr::Abs(inner) => {
            let a = propagate(inner, p, kinks);
            if a.v.abs() <= KINK_TOL {
                kinks.push(format!("abs({inner})"));
            }
            let s = if a.v < 0.0 { -1.0 } else { 1.0 };
            a.scale(s)
        }
    }
}

fn differentiate(e: &Expr, p: &Point) -> Result<Dual> {
    e.check_dims(p.n(), p.m())?;
    let mut kinks = Vec::new();
    let out = propagate(e, p, &mut kinks);
    if !kinks.is_empty() {
        return Err(Error::NonsmoothAtPoint { nodes: kinks });
    }
    Ok(out)
}

/// Gradient with respect to `(x, y)`, length `n + m`.
pub fn gradient(e: &Expr, p: &Point) -> Result<Vec<f64>> {
    Ok(differentiate(e, p)?.g)
}

/// Symmetric Hessian with respect to `(x, y)`.
pub fn hessian(e: &Expr, p: &Point) -> Result<DMatrix<f64>> {
    let d = p.dim();
    let dual = differentiate(e, p)?;
    let h = DMatrix::from_row_slice(d, d, &dual.h);
    Ok((&h + h.transpose()) * 0.5)
}
