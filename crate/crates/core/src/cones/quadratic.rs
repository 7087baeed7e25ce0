//! Exact maximum of a quadratic form over the unit sphere of a polyhedral cone.
//!
//! At a maximizer `w` with active inequality set `J`, the KKT system makes `w`
//! an eigenvector of `H` compressed to the face subspace `V_J`. Every face
//! and every eigenspace meeting the cone is therefore a candidate, and the
//! largest attained eigenvalue is the maximum.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{generators, membership, PolyhedralCone};
use crate::error::{Error, Result};
use crate::linalg::{norm, normalized, null_space, quad, sorted_eigen, spectral_scale};

/// Most inequality rows for face enumeration.
pub const MAX_FACE_ROWS: usize = 16;
/// Largest ambient dimension handled.
pub const MAX_QUAD_DIM: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeQuadraticMax {
    pub value: f64,
    /// Unit vector in the cone attaining `value`.
    pub witness: Vec<f64>,
}

/// `max { wᵀHw : w ∈ K, ‖w‖ = 1 }`, or `None` when `K = {0}`.
pub fn cone_quadratic_max(
    h: &DMatrix<f64>,
    k: &PolyhedralCone,
) -> Result<Option<ConeQuadraticMax>> {
    let d = k.dim;
    if h.nrows() != d || h.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "form is {}×{}, cone dimension is {d}",
            h.nrows(),
            h.ncols()
        )));
    }
    if d > MAX_QUAD_DIM {
        return Err(Error::DimensionTooLarge {
            dim: d,
            limit: MAX_QUAD_DIM,
        });
    }
    let le: Vec<Vec<f64>> = k.le_rows.iter().filter_map(|a| normalized(a)).collect();
    if le.len() > MAX_FACE_ROWS {
        return Err(Error::DimensionTooLarge {
            dim: le.len(),
            limit: MAX_FACE_ROWS,
        });
    }
    let eig_tol = 1e-9 * spectral_scale(h);
    let mut best: Option<ConeQuadraticMax> = None;

    for mask in 0u32..(1u32 << le.len()) {
        let mut rows = k.eq_rows.clone();
        rows.extend(
            (0..le.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| le[i].clone()),
        );
        let v = null_space(&rows, d);
        if v.ncols() == 0 {
            continue;
        }
        let compressed = v.transpose() * h * &v;
        let (vals, vecs) = sorted_eigen(&compressed);
        // Walk eigenvalue clusters from the top.
        let mut hi = vals.len();
        while hi > 0 {
            let top = vals[hi - 1];
            if let Some(b) = &best {
                if top <= b.value {
                    break;
                }
            }
            let mut lo = hi - 1;
            while lo > 0 && top - vals[lo - 1] <= eig_tol {
                lo -= 1;
            }
            let basis = &v * vecs.columns(lo, hi - lo);
            if let Some(w) = eigenspace_hit(&basis, k)? {
                let value = quad(h, &w);
                if best.as_ref().is_none_or(|b| value > b.value) {
                    best = Some(ConeQuadraticMax { value, witness: w });
                }
                break;
            }
            hi = lo;
        }
    }
    Ok(best)
}

/// A unit vector of `span(basis) ∩ K`, if the intersection is nonzero.
fn eigenspace_hit(basis: &DMatrix<f64>, k: &PolyhedralCone) -> Result<Option<Vec<f64>>> {
    let e = basis.ncols();
    let proj = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
        rows.iter()
            .map(|a| {
                let p: Vec<f64> = (0..e)
                    .map(|j| (0..k.dim).map(|i| a[i] * basis[(i, j)]).sum())
                    .collect();
                if norm(&p) > 1e-10 * norm(a) {
                    p
                } else {
                    vec![0.0; e]
                }
            })
            .collect()
    };
    let inner = PolyhedralCone::new(e, proj(&k.le_rows), proj(&k.eq_rows))?;
    let gens = generators(&inner, MAX_QUAD_DIM)?;
    for z in gens.rays.iter().chain(&gens.lineality) {
        let w: Vec<f64> = (0..k.dim)
            .map(|i| (0..e).map(|j| basis[(i, j)] * z[j]).sum())
            .collect();
        if let Some(w) = normalized(&w) {
            if membership(k, &w, 1e-7) {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::sample_cone_directions;
    use proptest::prelude::*;

    fn m(r: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(r, r, v)
    }

    #[test]
    fn positive_off_diagonal_on_quadrant() {
        // Zero on both axes but 1 on the diagonal direction.
        let k = PolyhedralCone::new(2, vec![vec![-1.0, 0.0], vec![0.0, -1.0]], vec![]).unwrap();
        let r = cone_quadratic_max(&m(2, &[0.0, 1.0, 1.0, 0.0]), &k)
            .unwrap()
            .unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!((r.witness[0] - r.witness[1]).abs() < 1e-9);
    }

    #[test]
    fn full_space_is_top_eigenvalue() {
        let r = cone_quadratic_max(
            &m(2, &[0.0, 1.0, 1.0, -2.0]),
            &PolyhedralCone::full_space(2),
        )
        .unwrap()
        .unwrap();
        assert!((r.value - (-1.0 + 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn half_line_and_zero_cone() {
        let k = PolyhedralCone::new(1, vec![vec![-1.0]], vec![]).unwrap();
        assert_eq!(
            cone_quadratic_max(&m(1, &[-2.0]), &k)
                .unwrap()
                .unwrap()
                .value,
            -2.0
        );
        let z = PolyhedralCone::new(1, vec![], vec![vec![1.0]]).unwrap();
        assert_eq!(cone_quadratic_max(&m(1, &[3.0]), &z).unwrap(), None);
    }

    #[test]
    fn negative_on_orthant_boundary() {
        // H = diag(−1, 1) on {w2 ≤ 0, w2 ≥ 0}: only ±e1, value −1.
        let k = PolyhedralCone::new(2, vec![vec![0.0, 1.0], vec![0.0, -1.0]], vec![]).unwrap();
        let r = cone_quadratic_max(&m(2, &[-1.0, 0.0, 0.0, 1.0]), &k)
            .unwrap()
            .unwrap();
        assert!((r.value + 1.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn dominates_samples(
            entries in prop::collection::vec(-2.0f64..2.0, 9),
            rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 0..4),
            seed in 0u64..1000,
        ) {
            let h = DMatrix::from_fn(3, 3, |i, j| entries[3 * i.min(j) + i.max(j)]);
            let k = PolyhedralCone::new(3, rows, vec![]).unwrap();
            let samples = sample_cone_directions(&k, 200, seed);
            match cone_quadratic_max(&h, &k).unwrap() {
                None => prop_assert!(samples.is_empty()),
                Some(r) => {
                    prop_assert!(membership(&k, &r.witness, 1e-7));
                    prop_assert!((quad(&h, &r.witness) - r.value).abs() < 1e-9);
                    for w in &samples {
                        prop_assert!(quad(&h, w) <= r.value + 1e-7);
                    }
                }
            }
        }
    }
}
