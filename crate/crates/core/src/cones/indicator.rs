//! Second subderivative of the indicator of a constraint set.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{membership, PolyhedralCone};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, quad};

/// Which closed form applies to the set.
#[derive(Debug, Clone, PartialEq)]
pub enum IndicatorCase {
    /// The set is the whole space.
    WholeSpace,
    /// Convex polyhedral set with tangent cone at the point.
    Polyhedral(PolyhedralCone),
    /// `{z : g(z) ∈ Σ}` with polyhedral `Σ`: tangent cone, Hessians of the
    /// constraints entering the multipliers, and multiplier vertices.
    NonlinearPolyhedral {
        tangent: PolyhedralCone,
        constraint_hessians: Vec<DMatrix<f64>>,
        multipliers: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum IndicatorSecondSub {
    Finite(f64),
    Infinite,
}

impl IndicatorSecondSub {
    pub fn is_infinite(&self) -> bool {
        matches!(self, IndicatorSecondSub::Infinite)
    }

    /// Value with `+∞` for the infinite case.
    pub fn as_f64(&self) -> f64 {
        match self {
            IndicatorSecondSub::Finite(v) => *v,
            IndicatorSecondSub::Infinite => f64::INFINITY,
        }
    }
}

/// `d²δ_S(z̄; v̄)(w)` for a gradient `v̄`.
pub fn indicator_second_sub(
    case: &IndicatorCase,
    vbar: &[f64],
    w: &[f64],
    tol: f64,
) -> Result<IndicatorSecondSub> {
    if vbar.len() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "v̄ has length {}, w has length {}",
            vbar.len(),
            w.len()
        )));
    }
    indicator_second_sub_directional(case, dot(vbar, w), w, tol)
}

/// As [`indicator_second_sub`] with the directional value `dψ(w)` supplied
/// directly, which covers nonsmooth `ψ`.
pub fn indicator_second_sub_directional(
    case: &IndicatorCase,
    dpsi_w: f64,
    w: &[f64],
    tol: f64,
) -> Result<IndicatorSecondSub> {
    let orthogonal = dpsi_w.abs() <= tol * norm(w).max(f64::MIN_POSITIVE);
    match case {
        IndicatorCase::WholeSpace => Ok(if orthogonal {
            IndicatorSecondSub::Finite(0.0)
        } else {
            IndicatorSecondSub::Infinite
        }),
        IndicatorCase::Polyhedral(k) => {
            check_dim(k, w)?;
            Ok(if orthogonal && membership(k, w, tol) {
                IndicatorSecondSub::Finite(0.0)
            } else {
                IndicatorSecondSub::Infinite
            })
        }
        IndicatorCase::NonlinearPolyhedral {
            tangent,
            constraint_hessians,
            multipliers,
        } => {
            check_dim(tangent, w)?;
            if multipliers.is_empty() {
                return Err(Error::EmptyMultiplierSet);
            }
            if !(orthogonal && membership(tangent, w, tol)) {
                return Ok(IndicatorSecondSub::Infinite);
            }
            let curv: Vec<f64> = constraint_hessians.iter().map(|h| quad(h, w)).collect();
            let mut best = f64::NEG_INFINITY;
            for lam in multipliers {
                if lam.len() != curv.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "multiplier has length {}, expected {}",
                        lam.len(),
                        curv.len()
                    )));
                }
                best = best.max(dot(lam, &curv));
            }
            Ok(IndicatorSecondSub::Finite(best))
        }
    }
}

fn check_dim(k: &PolyhedralCone, w: &[f64]) -> Result<()> {
    if k.dim != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "direction has length {}, cone dimension is {}",
            w.len(),
            k.dim
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use IndicatorSecondSub::*;

    #[test]
    fn whole_space() {
        let c = IndicatorCase::WholeSpace;
        assert_eq!(
            indicator_second_sub(&c, &[1.0, 0.0], &[0.0, 1.0], 1e-9).unwrap(),
            Finite(0.0)
        );
        assert_eq!(
            indicator_second_sub(&c, &[1.0, 0.0], &[1.0, 0.0], 1e-9).unwrap(),
            Infinite
        );
    }

    #[test]
    fn half_line() {
        let k = PolyhedralCone::new(1, vec![vec![-1.0]], vec![]).unwrap();
        let c = IndicatorCase::Polyhedral(k);
        assert_eq!(
            indicator_second_sub(&c, &[0.0], &[1.0], 1e-9).unwrap(),
            Finite(0.0)
        );
        assert_eq!(
            indicator_second_sub(&c, &[0.0], &[-1.0], 1e-9).unwrap(),
            Infinite
        );
    }

    #[test]
    fn curved_constraint() {
        // g(z) = z1² + z2² − 1 ≤ 0 at (1, 0): tangent {w1 ≤ 0}, Hessian 2I.
        let tangent = PolyhedralCone::new(2, vec![vec![2.0, 0.0]], vec![]).unwrap();
        let c = IndicatorCase::NonlinearPolyhedral {
            tangent,
            constraint_hessians: vec![DMatrix::identity(2, 2) * 2.0],
            multipliers: vec![vec![0.5], vec![1.5]],
        };
        assert_eq!(
            indicator_second_sub(&c, &[-1.0, 0.0], &[0.0, 1.0], 1e-9).unwrap(),
            Finite(3.0)
        );
        assert_eq!(
            indicator_second_sub(&c, &[-1.0, 0.0], &[-1.0, 0.0], 1e-9).unwrap(),
            Infinite
        );
        let empty = IndicatorCase::NonlinearPolyhedral {
            tangent: PolyhedralCone::full_space(2),
            constraint_hessians: vec![],
            multipliers: vec![],
        };
        assert_eq!(
            indicator_second_sub(&empty, &[0.0, 0.0], &[1.0, 0.0], 1e-9),
            Err(Error::EmptyMultiplierSet)
        );
    }

    #[test]
    fn degree_zero_homogeneous() {
        let k = PolyhedralCone::new(2, vec![vec![-1.0, 1.0]], vec![]).unwrap();
        let c = IndicatorCase::Polyhedral(k);
        let v = [0.0, 2.0];
        for w in [[1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [2.0, -3.0]] {
            let base = indicator_second_sub(&c, &v, &w, 1e-9).unwrap();
            for lam in [1e-3, 0.5, 7.0, 1e4] {
                let scaled: Vec<f64> = w.iter().map(|x| lam * x).collect();
                assert_eq!(indicator_second_sub(&c, &v, &scaled, 1e-9).unwrap(), base);
            }
        }
    }
}
