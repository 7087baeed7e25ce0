//! Dense phase-one simplex for small feasibility problems.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 10_000;

/// Box bound on a single variable; infinite ends are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub lower: f64,
    pub upper: f64,
}

impl Bound {
    pub const FREE: Bound = Bound {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };
    pub const NONNEG: Bound = Bound {
        lower: 0.0,
        upper: f64::INFINITY,
    };

    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }
}

/// How an original variable is expressed in nonnegative working variables.
enum Map {
    Shift { col: usize, lower: f64 },
    Reflect { col: usize, upper: f64 },
    Split { pos: usize, neg: usize },
}

/// Finds `x` with `A_eq x = b_eq`, `A_le x ≤ b_le` and `bounds`, or returns
/// `None` when the phase-one optimum is positive.
pub fn lp_feasible(
    a_eq: &[Vec<f64>],
    b_eq: &[f64],
    a_le: &[Vec<f64>],
    b_le: &[f64],
    bounds: &[Bound],
) -> Result<Option<Vec<f64>>> {
    let n = bounds.len();
    if a_eq.len() != b_eq.len() || a_le.len() != b_le.len() {
        return Err(Error::DimensionMismatch(
            "row count differs from right-hand side length".into(),
        ));
    }
    if let Some(r) = a_eq.iter().chain(a_le).find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "constraint row has length {}, expected {n}",
            r.len()
        )));
    }
    if bounds
        .iter()
        .any(|b| b.lower > b.upper || b.lower.is_nan() || b.upper.is_nan())
    {
        return Ok(None);
    }

    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    for b in bounds {
        if b.lower.is_finite() {
            maps.push(Map::Shift {
                col: ncols,
                lower: b.lower,
            });
            ncols += 1;
        } else if b.upper.is_finite() {
            maps.push(Map::Reflect {
                col: ncols,
                upper: b.upper,
            });
            ncols += 1;
        } else {
            maps.push(Map::Split {
                pos: ncols,
                neg: ncols + 1,
            });
            ncols += 2;
        }
    }

    // Rows over working variables: (coefficients, rhs, is_le).
    let mut rows: Vec<(Vec<f64>, f64, bool)> = Vec::new();
    let mut push = |a: &[f64], b: f64, le: bool| {
        let mut coef = vec![0.0; ncols];
        let mut rhs = b;
        for (j, m) in maps.iter().enumerate() {
            match *m {
                Map::Shift { col, lower } => {
                    coef[col] += a[j];
                    rhs -= a[j] * lower;
                }
                Map::Reflect { col, upper } => {
                    coef[col] -= a[j];
                    rhs -= a[j] * upper;
                }
                Map::Split { pos, neg } => {
                    coef[pos] += a[j];
                    coef[neg] -= a[j];
                }
            }
        }
        rows.push((coef, rhs, le));
    };
    for (a, &b) in a_eq.iter().zip(b_eq) {
        push(a, b, false);
    }
    for (a, &b) in a_le.iter().zip(b_le) {
        push(a, b, true);
    }
    for (j, b) in bounds.iter().enumerate() {
        if b.lower.is_finite() && b.upper.is_finite() {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            push(&e, b.upper, true);
        }
    }

    let scale = rows
        .iter()
        .flat_map(|(c, r, _)| c.iter().chain(std::iter::once(r)))
        .fold(1.0f64, |a, v| a.max(v.abs()));
    let feas_tol = 1e-9 * scale;

    let working = match phase_one(&rows, ncols, feas_tol)? {
        Some(w) => w,
        None => return Ok(None),
    };
    let x = maps
        .iter()
        .map(|m| match *m {
            Map::Shift { col, lower } => lower + working[col],
            Map::Reflect { col, upper } => upper - working[col],
            Map::Split { pos, neg } => working[pos] - working[neg],
        })
        .collect();
    Ok(Some(x))
}

/// Minimizes the sum of artificials over `{v ≥ 0 : rows}` with Bland's rule.
fn phase_one(
    rows: &[(Vec<f64>, f64, bool)],
    ncols: usize,
    feas_tol: f64,
) -> Result<Option<Vec<f64>>> {
    let m = rows.len();
    let nslack = rows.iter().filter(|r| r.2).count();
    let art0 = ncols + nslack;
    let width = art0 + m;
    // Tableau rows followed by the objective row; last column is the rhs.
    let mut t = vec![vec![0.0; width + 1]; m + 1];
    let mut basis = vec![0usize; m];
    let mut slack = ncols;
    for (i, (coef, rhs, le)) in rows.iter().enumerate() {
        t[i][..ncols].copy_from_slice(coef);
        if *le {
            t[i][slack] = 1.0;
            slack += 1;
        }
        t[i][width] = *rhs;
        if *rhs < 0.0 {
            for v in t[i].iter_mut() {
                *v = -*v;
            }
        }
        t[i][art0 + i] = 1.0;
        basis[i] = art0 + i;
    }
    for j in 0..=width {
        if (art0..width).contains(&j) {
            continue;
        }
        t[m][j] = -(0..m).map(|i| t[i][j]).sum::<f64>();
    }

    let mut pivots = 0;
    loop {
        let Some(enter) = (0..width).find(|&j| t[m][j] < -PIVOT_TOL) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[i][enter] > PIVOT_TOL {
                let ratio = t[i][width] / t[i][enter];
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best - 1e-12 || (ratio <= best + 1e-12 && basis[i] < basis[l])
                    }
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        // The phase-one objective is bounded below, so an entering column
        // always has a positive entry unless round-off removed it.
        let Some(r) = leave else {
            return Err(Error::NumericalFailure(
                "unbounded phase-one direction".into(),
            ));
        };
        pivot(&mut t, r, enter);
        basis[r] = enter;
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(Error::NumericalFailure(
                "simplex pivot limit exceeded".into(),
            ));
        }
    }

    if -t[m][width] > feas_tol {
        return Ok(None);
    }
    let mut v = vec![0.0; ncols];
    for (i, &b) in basis.iter().enumerate() {
        if b < ncols {
            v[b] = t[i][width].max(0.0);
        }
    }
    Ok(Some(v))
}

fn pivot(t: &mut [Vec<f64>], r: usize, c: usize) {
    let p = t[r][c];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    let row = t[r].clone();
    for (i, line) in t.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = line[c];
        if f != 0.0 {
            for (v, w) in line.iter_mut().zip(&row) {
                *v -= f * w;
            }
        }
    }
}
