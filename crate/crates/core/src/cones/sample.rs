//! Seeded unit directions inside a polyhedral cone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{membership, PolyhedralCone};
use crate::linalg::{dot, norm, normalized, null_space};

const SWEEPS: usize = 200;
const MEMBER_TOL: f64 = 1e-9;

/// Projects Gaussian draws onto the cone by alternating projections and
/// keeps the normalized results that pass membership. Returns an empty list
/// for the zero cone.
pub fn sample_cone_directions(k: &PolyhedralCone, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let d = k.dim;
    if d == 0 || count == 0 {
        return Vec::new();
    }
    if null_space(&k.eq_rows, d).ncols() == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let le: Vec<Vec<f64>> = k.le_rows.iter().filter_map(|a| normalized(a)).collect();
    let eq: Vec<Vec<f64>> = k.eq_rows.iter().filter_map(|b| normalized(b)).collect();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    let max_attempts = count * 20 + 100;
    while out.len() < count && attempts < max_attempts {
        attempts += 1;
        let mut w: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        for _ in 0..SWEEPS {
            for b in &eq {
                let s = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(v, bi)| *v -= s * bi);
            }
            for a in &le {
                let s = dot(a, &w);
                if s > 0.0 {
                    w.iter_mut().zip(a).for_each(|(v, ai)| *v -= s * ai);
                }
            }
            if membership(k, &w, MEMBER_TOL * 1e-3) {
                break;
            }
        }
        if norm(&w) < 1e-8 {
            continue;
        }
        let w = normalized(&w).expect("nonzero");
        if membership(k, &w, MEMBER_TOL) {
            out.push(w);
        }
    }
    out
}
