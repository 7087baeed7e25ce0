//! One-sided directional expansions.
//!
//! For a direction `w`, the map `t ↦ e(p + t·w)` is expanded as
//! `c0 + c1·t + c2·t² + o(t²)` for `t ↓ 0`. The subderivative is `c1` and the
//! second subderivative is `2·c2`. Absolute values are expanded by the sign
//! of their leading nonzero coefficient, which is exact for this class.

use serde::{Deserialize, Serialize};

use super::{Axis, Expr, Point, KINK_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exactness {
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeResult {
    pub value: f64,
    pub exactness: Exactness,
    /// Zero for analytic results.
    pub error_bound: f64,
}

impl DerivativeResult {
    fn analytic(value: f64) -> Self {
        Self {
            value,
            exactness: Exactness::Analytic,
            error_bound: 0.0,
        }
    }
}

/// Truncated one-sided Taylor coefficients `(c0, c1, c2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Ray2 {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Ray2 {
    fn constant(c: f64) -> Self {
        Self {
            c0: c,
            c1: 0.0,
            c2: 0.0,
        }
    }

    fn scale(self, s: f64) -> Self {
        Self {
            c0: s * self.c0,
            c1: s * self.c1,
            c2: s * self.c2,
        }
    }

    fn plus(self, o: Self, sign: f64) -> Self {
        Self {
            c0: self.c0 + sign * o.c0,
            c1: self.c1 + sign * o.c1,
            c2: self.c2 + sign * o.c2,
        }
    }

    fn times(self, o: Self) -> Self {
        Self {
            c0: self.c0 * o.c0,
            c1: self.c0 * o.c1 + self.c1 * o.c0,
            c2: self.c0 * o.c2 + self.c1 * o.c1 + self.c2 * o.c0,
        }
    }

    fn powi(self, k: u32) -> Self {
        let mut out = Self::constant(1.0);
        for _ in 0..k {
            out = out.times(self);
        }
        out
    }

    /// `|a(t)|` for small `t > 0`, following the sign of the leading term.
    fn abs(self) -> Self {
        if self.c0.abs() > KINK_TOL {
            self.scale(self.c0.signum())
        } else if self.c1.abs() > KINK_TOL {
            Self {
                c0: 0.0,
                c1: self.c1.abs(),
                c2: self.c1.signum() * self.c2,
            }
        } else {
            Self {
                c0: 0.0,
                c1: 0.0,
                c2: self.c2.abs(),
            }
        }
    }
}

pub(crate) fn expand(e: &Expr, p: &Point, w: &[f64]) -> Ray2 {
    let n = p.n();
    match e {
        Expr::Const(c) => Ray2::constant(*c),
        Expr::Var(Axis::X, i) => Ray2 {
            c0: p.x[*i],
            c1: w[*i],
            c2: 0.0,
        },
        Expr::Var(Axis::Y, j) => Ray2 {
            c0: p.y[*j],
            c1: w[n + j],
            c2: 0.0,
        },
        Expr::Neg(a) => expand(a, p, w).scale(-1.0),
        Expr::Add(a, b) => expand(a, p, w).plus(expand(b, p, w), 1.0),
        Expr::Sub(a, b) => expand(a, p, w).plus(expand(b, p, w), -1.0),
        Expr::Mul(a, b) => expand(a, p, w).times(expand(b, p, w)),
        Expr::Pow(a, k) => expand(a, p, w).powi(*k),
        Expr::Abs(a) => expand(a, p, w).abs(),
    }
}

fn check(e: &Expr, p: &Point, w: &[f64]) -> Result<()> {
    e.check_dims(p.n(), p.m())?;
    if w.len() != p.dim() {
        return Err(Error::DimensionMismatch(format!(
            "direction has length {}, point has dimension {}",
            w.len(),
            p.dim()
        )));
    }
    Ok(())
}

/// `dψ(p)(w)`: exact one-sided directional derivative.
pub fn subderivative(e: &Expr, p: &Point, w: &[f64]) -> Result<DerivativeResult> {
    check(e, p, w)?;
    Ok(DerivativeResult::analytic(expand(e, p, w).c1))
}

/// `d²ψ(p)(w)`: twice the second-order coefficient of `t ↦ ψ(p + t·w)`.
pub fn second_subderivative(e: &Expr, p: &Point, w: &[f64]) -> Result<DerivativeResult> {
    check(e, p, w)?;
    Ok(DerivativeResult::analytic(2.0 * expand(e, p, w).c2))
}

/// Zero-pads `u` and `h` into a flat `(u, h)` direction.
pub fn join(u: &[f64], h: &[f64]) -> Vec<f64> {
    let mut w = u.to_vec();
    w.extend_from_slice(h);
    w
}

/// `|dψ(p)(u,h) − d_xψ(p)(u) − d_yψ(p)(h)|`.
pub fn separation_defect(e: &Expr, p: &Point, u: &[f64], h: &[f64]) -> Result<f64> {
    let zu = vec![0.0; u.len()];
    let zh = vec![0.0; h.len()];
    let joint = subderivative(e, p, &join(u, h))?.value;
    let dx = subderivative(e, p, &join(u, &zh))?.value;
    let dy = subderivative(e, p, &join(&zu, h))?.value;
    Ok((joint - dx - dy).abs())
}

/// Richardson-extrapolated one-sided estimates for use outside the exact
/// class. Returns `(first, second)` with error bounds from the difference
/// between the two finest extrapolants.
pub fn numeric_directional(
    e: &Expr,
    p: &Point,
    w: &[f64],
    step: f64,
) -> Result<(DerivativeResult, DerivativeResult)> {
    check(e, p, w)?;
    let f0 = e.value(&p.x, &p.y);
    let phi = |t: f64| {
        let q = p.offset(t, w);
        e.value(&q.x, &q.y)
    };
    // One-sided quotient D1(t) = (φ(t) − φ(0))/t = c1 + c2 t + O(t²);
    // second quotient D2(t) = 2(φ(t) − φ(0) − t c1)/t² uses the extrapolated c1.
    let steps = [step, step / 2.0, step / 4.0];
    let d1: Vec<f64> = steps.iter().map(|&t| (phi(t) - f0) / t).collect();
    let r1 = [2.0 * d1[1] - d1[0], 2.0 * d1[2] - d1[1]];
    let first = 4.0 / 3.0 * r1[1] - 1.0 / 3.0 * r1[0];
    let err1 = (r1[1] - r1[0]).abs();
    // φ(t) = c0 + c1 t + c2 t² + c3 t³: (φ(2t) − 2φ(t) + φ(0))·… isolates c2.
    let d2: Vec<f64> = steps
        .iter()
        .map(|&t| (phi(2.0 * t) - 2.0 * phi(t) + f0) / (t * t))
        .collect();
    let r2 = [2.0 * d2[1] - d2[0], 2.0 * d2[2] - d2[1]];
    let second = 4.0 / 3.0 * r2[1] - 1.0 / 3.0 * r2[0];
    let err2 = (r2[1] - r2[0]).abs();
    Ok((
        DerivativeResult {
            value: first,
            exactness: Exactness::Numeric,
            error_bound: err1,
        },
        DerivativeResult {
            value: second,
            exactness: Exactness::Numeric,
            error_bound: err2,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn origin() -> Point {
        Point::new(vec![0.0], vec![0.0]).unwrap()
    }

    #[test]
    fn abs_kink_first_order() {
        let e = parse_expression("abs(x1)", 1, 0).unwrap();
        let p = Point::new(vec![0.0], vec![]).unwrap();
        let r = subderivative(&e, &p, &[-2.0]).unwrap();
        assert_eq!(r.value, 2.0);
        assert_eq!(r.exactness, Exactness::Analytic);
        assert_eq!(r.error_bound, 0.0);
    }

    #[test]
    fn nonsmooth_example_vanishes() {
        let e = parse_expression("-abs(x1)^9 + 0.6*abs(x1)^3*abs(y1)^3 - abs(y1)^5", 1, 1).unwrap();
        for w in [[1.0, 1.0], [-1.0, 2.0], [0.3, -0.7], [0.0, -1.0]] {
            assert_eq!(subderivative(&e, &origin(), &w).unwrap().value, 0.0);
            assert_eq!(second_subderivative(&e, &origin(), &w).unwrap().value, 0.0);
            assert_eq!(
                separation_defect(&e, &origin(), &w[..1], &w[1..]).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn smooth_examples() {
        let e = parse_expression("-x1^2 + 2*x1*y1^3 - y1^6", 1, 1).unwrap();
        assert_eq!(
            subderivative(&e, &origin(), &[1.0, 1.0]).unwrap().value,
            0.0
        );

        let xy = parse_expression("x1*y1", 1, 1).unwrap();
        assert_eq!(
            second_subderivative(&xy, &origin(), &[1.0, 1.0])
                .unwrap()
                .value,
            2.0
        );
        assert_eq!(
            separation_defect(&xy, &origin(), &[1.0], &[1.0]).unwrap(),
            0.0
        );

        let ex52 = parse_expression("-x1^4 + 4*x1^2*y1^2 - y1^4", 1, 1).unwrap();
        assert_eq!(
            second_subderivative(&ex52, &origin(), &[1.0, 1.0])
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn abs_with_vanishing_slope_uses_curvature() {
        // |x²| along w: t²w², second subderivative 2w²
        let e = parse_expression("abs(x1^2 - x1*x1 + x1^2)", 1, 0).unwrap();
        let p = Point::new(vec![0.0], vec![]).unwrap();
        assert_eq!(second_subderivative(&e, &p, &[3.0]).unwrap().value, 18.0);
        assert_eq!(subderivative(&e, &p, &[3.0]).unwrap().value, 0.0);
    }

    #[test]
    fn separation_can_fail() {
        let e = parse_expression("abs(x1 + y1)", 1, 1).unwrap();
        assert_eq!(
            separation_defect(&e, &origin(), &[1.0], &[-1.0]).unwrap(),
            2.0
        );
    }

    #[test]
    fn numeric_fallback_agrees_on_smooth_input() {
        let e = parse_expression("x1^3 + x1*y1 - y1^2", 1, 1).unwrap();
        let p = Point::new(vec![0.5], vec![-0.25]).unwrap();
        let w = [0.6, 0.8];
        let (d1, d2) = numeric_directional(&e, &p, &w, 1e-2).unwrap();
        let exact1 = subderivative(&e, &p, &w).unwrap().value;
        let exact2 = second_subderivative(&e, &p, &w).unwrap().value;
        assert_eq!(d1.exactness, Exactness::Numeric);
        assert!((d1.value - exact1).abs() < 1e-6, "{d1:?} vs {exact1}");
        assert!((d2.value - exact2).abs() < 1e-5, "{d2:?} vs {exact2}");
    }

    #[test]
    fn dimension_mismatch() {
        let e = parse_expression("x1", 1, 1).unwrap();
        assert!(subderivative(&e, &origin(), &[1.0]).is_err());
    }
}
