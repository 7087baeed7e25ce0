//! Extreme rays and lineality of a polyhedral cone by double description.
//!
//! The cone is first restricted to the subspace cut out by its equality rows,
//! then split into its lineality space `L` and the pointed part in `L⊥`.
//! Rays of the pointed part are built incrementally, one inequality at a
//! time, combining adjacent rays across each new hyperplane.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{membership, PolyhedralCone};
use crate::error::{Error, Result};
use crate::linalg::{columns, dot, norm, normalized, null_space, rank};

/// Exhaustive enumeration is offered up to this ambient dimension.
pub const EXHAUSTIVE_DIM_LIMIT: usize = 6;

const SIGN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaySet {
    pub rays: Vec<Vec<f64>>,
    pub lineality: Vec<Vec<f64>>,
    pub exhaustive: bool,
}

impl RaySet {
    /// True when the cone is `{0}`.
    pub fn is_trivial(&self) -> bool {
        self.rays.is_empty() && self.lineality.is_empty()
    }

    /// True when the cone is a linear subspace.
    pub fn is_subspace(&self) -> bool {
        self.rays.is_empty()
    }

    /// Rays followed by `±` each lineality vector: a finite generating set
    /// under nonnegative combinations.
    pub fn conic_generators(&self) -> Vec<Vec<f64>> {
        let mut out = self.rays.clone();
        for l in &self.lineality {
            out.push(l.clone());
            out.push(l.iter().map(|v| -v).collect());
        }
        out
    }
}

/// Complete generator set for cones of dimension at most
/// [`EXHAUSTIVE_DIM_LIMIT`].
pub fn extreme_rays(k: &PolyhedralCone) -> Result<RaySet> {
    generators(k, EXHAUSTIVE_DIM_LIMIT)
}

/// As [`extreme_rays`] with a caller-chosen dimension limit.
pub fn generators(k: &PolyhedralCone, limit: usize) -> Result<RaySet> {
    if k.dim > limit {
        return Err(Error::DimensionTooLarge { dim: k.dim, limit });
    }
    let d = k.dim;
    // Subspace of the equalities, coordinates z with w = Q z.
    let q = null_space(&k.eq_rows, d);
    let kdim = q.ncols();
    if kdim == 0 {
        return Ok(RaySet {
            rays: Vec::new(),
            lineality: Vec::new(),
            exhaustive: true,
        });
    }
    // Rows orthogonal to the subspace are dropped rather than normalized.
    let a1: Vec<Vec<f64>> = k
        .le_rows
        .iter()
        .map(|a| {
            (
                a,
                (0..kdim)
                    .map(|j| (0..d).map(|i| a[i] * q[(i, j)]).sum())
                    .collect::<Vec<f64>>(),
            )
        })
        .filter(|(a, p)| norm(p) > 1e-10 * norm(a))
        .map(|(_, p)| p)
        .collect();
    // Lineality inside the subspace and its orthogonal complement.
    let lin = null_space(&a1, kdim);
    let comp = null_space(&columns(&lin), kdim);
    let lineality: Vec<Vec<f64>> = columns(&(&q * &lin))
        .iter()
        .filter_map(|v| normalized(v))
        .collect();

    let r = comp.ncols();
    let mut rays = Vec::new();
    if r > 0 {
        let a2: Vec<Vec<f64>> = a1
            .iter()
            .map(|a| {
                (0..r)
                    .map(|j| (0..kdim).map(|i| a[i] * comp[(i, j)]).sum())
                    .collect()
            })
            .collect();
        let lift = &q * &comp;
        for z in pointed_rays(&a2, r)? {
            let w: Vec<f64> = (0..d)
                .map(|i| (0..r).map(|j| lift[(i, j)] * z[j]).sum())
                .collect();
            if let Some(w) = normalized(&w) {
                if !rays.iter().any(|u: &Vec<f64>| close(u, &w)) {
                    rays.push(w);
                }
            }
        }
    }
    let out = RaySet {
        rays,
        lineality,
        exhaustive: true,
    };
    debug_assert!(out
        .conic_generators()
        .iter()
        .all(|g| membership(k, g, 1e-7)));
    Ok(out)
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9)
}

struct DdRay {
    z: Vec<f64>,
    zeros: Vec<bool>,
}

/// Extreme rays of `{z ∈ R^r : A z ≤ 0}` where `A` has full column rank.
fn pointed_rays(rows: &[Vec<f64>], r: usize) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<Vec<f64>> = rows.iter().filter_map(|a| normalized(a)).collect();
    // Pick r independent rows for the initial simplicial cone.
    let mut basis: Vec<usize> = Vec::new();
    for i in 0..rows.len() {
        let mut trial: Vec<Vec<f64>> = basis.iter().map(|&j| rows[j].clone()).collect();
        trial.push(rows[i].clone());
        if rank(&trial, r) == trial.len() {
            basis.push(i);
            if basis.len() == r {
                break;
            }
        }
    }
    if basis.len() < r {
        return Err(Error::NumericalFailure(
            "pointed part lost full rank during ray enumeration".into(),
        ));
    }
    let m = DMatrix::from_fn(r, r, |i, j| rows[basis[i]][j]);
    let inv = m
        .try_inverse()
        .ok_or_else(|| Error::NumericalFailure("singular initial basis".into()))?;
    let mut processed = basis.clone();
    let mut current: Vec<DdRay> = (0..r)
        .map(|j| {
            let z: Vec<f64> = (0..r).map(|i| -inv[(i, j)]).collect();
            let z = normalized(&z).unwrap_or(z);
            let zeros = processed
                .iter()
                .map(|&k| dot(&rows[k], &z).abs() <= SIGN_TOL)
                .collect();
            DdRay { z, zeros }
        })
        .collect();

    for i in 0..rows.len() {
        if basis.contains(&i) {
            continue;
        }
        let a = &rows[i];
        let s: Vec<f64> = current.iter().map(|ray| dot(a, &ray.z)).collect();
        let plus: Vec<usize> = (0..current.len()).filter(|&k| s[k] > SIGN_TOL).collect();
        let minus: Vec<usize> = (0..current.len()).filter(|&k| s[k] < -SIGN_TOL).collect();
        let mut next: Vec<DdRay> = Vec::new();
        for (k, ray) in current.iter().enumerate() {
            if s[k] <= SIGN_TOL {
                let mut zeros = ray.zeros.clone();
                zeros.push(s[k].abs() <= SIGN_TOL);
                next.push(DdRay {
                    z: ray.z.clone(),
                    zeros,
                });
            }
        }
        for &p in &plus {
            for &n in &minus {
                let common: Vec<usize> = (0..processed.len())
                    .filter(|&t| current[p].zeros[t] && current[n].zeros[t])
                    .collect();
                if r >= 2 {
                    let face_rows: Vec<Vec<f64>> =
                        common.iter().map(|&t| rows[processed[t]].clone()).collect();
                    if common.len() < r - 2 || rank(&face_rows, r) != r - 2 {
                        continue;
                    }
                } else {
                    continue;
                }
                let z: Vec<f64> = current[n]
                    .z
                    .iter()
                    .zip(&current[p].z)
                    .map(|(zn, zp)| s[p] * zn - s[n] * zp)
                    .collect();
                let Some(z) = normalized(&z) else { continue };
                let mut zeros: Vec<bool> = (0..processed.len())
                    .map(|t| dot(&rows[processed[t]], &z).abs() <= SIGN_TOL)
                    .collect();
                zeros.push(true);
                next.push(DdRay { z, zeros });
            }
        }
        processed.push(i);
        current = next;
        if current.is_empty() {
            break;
        }
    }
    Ok(current
        .into_iter()
        .map(|r| r.z)
        .filter(|z| norm(z) > 0.0)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        for x in v.iter_mut() {
            for c in x.iter_mut() {
                *c = (*c * 1e9).round() / 1e9 + 0.0;
            }
        }
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn nonnegative_quadrant() {
        let k = PolyhedralCone::new(2, vec![vec![-1.0, 0.0], vec![0.0, -1.0]], vec![]).unwrap();
        let rs = extreme_rays(&k).unwrap();
        assert_eq!(sorted(rs.rays), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(rs.lineality.is_empty());
        assert!(rs.exhaustive);
    }

    #[test]
    fn full_space_is_all_lineality() {
        let rs = extreme_rays(&PolyhedralCone::full_space(2)).unwrap();
        assert!(rs.rays.is_empty());
        assert_eq!(rs.lineality.len(), 2);
    }

    #[test]
    fn hyperplane() {
        let k = PolyhedralCone::new(2, vec![], vec![vec![1.0, 0.0]]).unwrap();
        let rs = extreme_rays(&k).unwrap();
        assert!(rs.rays.is_empty());
        assert_eq!(rs.lineality.len(), 1);
        assert!(rs.lineality[0][0].abs() < 1e-12);
        assert!((rs.lineality[0][1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_plane_has_ray_and_line() {
        let k = PolyhedralCone::new(2, vec![vec![-1.0, 0.0]], vec![]).unwrap();
        let rs = extreme_rays(&k).unwrap();
        assert_eq!(sorted(rs.rays), vec![vec![1.0, 0.0]]);
        assert_eq!(rs.lineality.len(), 1);
    }

    #[test]
    fn square_pyramid() {
        // w3 ≥ |w1|, w3 ≥ |w2|: four extreme rays (±1, ±1, 1)/√3.
        let k = PolyhedralCone::new(
            3,
            vec![
                vec![1.0, 0.0, -1.0],
                vec![-1.0, 0.0, -1.0],
                vec![0.0, 1.0, -1.0],
                vec![0.0, -1.0, -1.0],
            ],
            vec![],
        )
        .unwrap();
        let rs = extreme_rays(&k).unwrap();
        assert_eq!(rs.rays.len(), 4);
        let s = 1.0 / 3f64.sqrt();
        for r in &rs.rays {
            assert!(r.iter().all(|v| (v.abs() - s).abs() < 1e-9), "{r:?}");
            assert!(r[2] > 0.0);
        }
    }

    #[test]
    fn zero_cone() {
        let k = PolyhedralCone::new(1, vec![vec![1.0], vec![-1.0]], vec![]).unwrap();
        assert!(extreme_rays(&k).unwrap().is_trivial());
    }

    #[test]
    fn too_large() {
        let k = PolyhedralCone::full_space(7);
        assert_eq!(
            extreme_rays(&k),
            Err(Error::DimensionTooLarge { dim: 7, limit: 6 })
        );
    }
}
