//! Brute-force classification of candidate points on meshes.
//!
//! Every verdict is qualified by the resolution it was computed at: `true`
//! means no counterexample was found on the mesh, and the report carries the
//! mesh. Inner maximizations refine the best mesh node with a pattern search
//! so that exact-value comparisons are not defeated by mesh offsets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cones::ConstraintSystem;
use crate::error::{Error, Result};
use crate::expr::{Axis, Expr, Point};
use crate::kkt::MinimaxProblem;
use crate::linalg::norm;

/// Rounding allowance per unit of term magnitude.
const NOISE: f64 = 64.0 * f64::EPSILON;
const FEAS_TOL: f64 = 1e-10;
const POLISH_ROUNDS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Neighbourhood radii, strictly decreasing.
    pub delta_values: Vec<f64>,
    /// Nodes per axis; odd so the centre is a node.
    pub mesh_per_axis: usize,
    pub kappa_max: f64,
    /// Relative tolerance on value comparisons.
    pub value_tol: f64,
    /// Bound on `k^(n+m)` for `k` nodes per axis.
    pub node_cap: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            delta_values: geometric_deltas(1e-1, 1e-4, 13),
            mesh_per_axis: 201,
            kappa_max: 64.0,
            value_tol: 1e-12,
            node_cap: 1 << 22,
        }
    }
}

/// `count` geometrically spaced values from `hi` down to `lo`.
pub fn geometric_deltas(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    let step = (lo / hi).ln() / (count - 1) as f64;
    (0..count).map(|i| hi * (step * i as f64).exp()).collect()
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.delta_values.is_empty()
            || self
                .delta_values
                .iter()
                .any(|d| !(d.is_finite() && *d > 0.0))
        {
            return Err(Error::Validation(
                "delta_values must be positive and finite".into(),
            ));
        }
        if self.delta_values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Validation(
                "delta_values must be strictly decreasing".into(),
            ));
        }
        if self.mesh_per_axis < 3 || self.mesh_per_axis.is_multiple_of(2) {
            return Err(Error::Validation(format!(
                "mesh_per_axis must be odd and at least 3, got {}",
                self.mesh_per_axis
            )));
        }
        if !(self.kappa_max > 0.0) || !(self.value_tol >= 0.0) || self.node_cap < 9 {
            return Err(Error::Validation(
                "kappa_max, value_tol and node_cap must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn finest_delta(&self) -> f64 {
        *self.delta_values.last().expect("validated")
    }

    /// Nodes per axis actually used for a problem with `dim` variables.
    pub fn nodes_per_axis(&self, dim: usize) -> usize {
        let mut k = self.mesh_per_axis;
        while k > 3 && (k as f64).powi(dim as i32) > self.node_cap as f64 {
            k -= 2;
        }
        k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    True,
    False,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalmVerdict {
    Calm,
    NotCalm,
    Undetermined,
}

impl CalmVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            CalmVerdict::Calm => "calm",
            CalmVerdict::NotCalm => "not_calm",
            CalmVerdict::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauRow {
    pub delta: f64,
    #[serde(with = "crate::num::f64_ext")]
    pub tau_min: f64,
    #[serde(with = "crate::num::f64_ext")]
    pub ratio: f64,
    /// The `x` that rejected the last failing rung.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub binding_x: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauProfile {
    pub rows: Vec<TauRow>,
    #[serde(with = "crate::num::opt_f64_ext", default)]
    pub fitted_exponent: Option<f64>,
    pub calm_verdict: CalmVerdict,
    pub nodes_per_axis: usize,
}

impl TauProfile {
    /// Largest finite-or-infinite ratio `τ_min/δ`.
    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,tau_min,ratio\n");
        for r in &self.rows {
            out.push_str(&format!("{:e},{:e},{:e}\n", r.delta, r.tau_min, r.ratio));
        }
        let exp = self
            .fitted_exponent
            .map_or_else(|| "nan".to_string(), |e| format!("{e:.6}"));
        out.push_str(&format!(
            "# exponent={exp} verdict={}\n",
            self.calm_verdict.as_str()
        ));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// A grid point violating the defining inequality.
    Point {
        x: Vec<f64>,
        y: Vec<f64>,
        value: f64,
        reference: f64,
    },
    /// Largest observed `τ_min/δ`.
    Ratio {
        #[serde(with = "crate::num::f64_ext")]
        max_ratio: f64,
        #[serde(with = "crate::num::opt_f64_ext", default)]
        exponent: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        x: Option<Vec<f64>>,
    },
    Note {
        text: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub verdict: Tri,
    pub evidence: Option<Evidence>,
}

impl OracleVerdict {
    fn yes() -> Self {
        Self {
            verdict: Tri::True,
            evidence: None,
        }
    }

    fn no(e: Evidence) -> Self {
        Self {
            verdict: Tri::False,
            evidence: Some(e),
        }
    }

    fn unknown(text: &str) -> Self {
        Self {
            verdict: Tri::Undetermined,
            evidence: Some(Evidence::Note { text: text.into() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub mesh_per_axis: usize,
    pub nodes_per_axis: usize,
    pub finest_delta: f64,
    pub value_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaRow {
    pub delta: f64,
    #[serde(with = "crate::num::f64_ext")]
    pub radius: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgmaxCalmness {
    pub rows: Vec<KappaRow>,
    pub kappa_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub nash: OracleVerdict,
    pub local_nash: OracleVerdict,
    pub local_minimax: OracleVerdict,
    pub calm_local_minimax: OracleVerdict,
    pub global_minimax_on_box: OracleVerdict,
    pub tau_profile: Option<TauProfile>,
    pub argmax_calmness: Option<ArgmaxCalmness>,
    pub resolution: Resolution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerMax {
    pub value: f64,
    pub argmax: Vec<f64>,
}

/// Sum of term magnitudes of `e`, an upper bound on rounding scale.
fn magnitude(e: &Expr, x: &[f64], y: &[f64]) -> f64 {
    match e {
        Expr::Const(c) => c.abs(),
        Expr::Var(Axis::X, i) => x[*i].abs(),
        Expr::Var(Axis::Y, j) => y[*j].abs(),
        Expr::Neg(a) | Expr::Abs(a) => magnitude(a, x, y),
        Expr::Add(a, b) | Expr::Sub(a, b) => magnitude(a, x, y) + magnitude(b, x, y),
        Expr::Mul(a, b) => magnitude(a, x, y) * magnitude(b, x, y),
        Expr::Pow(a, k) => magnitude(a, x, y).powi(*k as i32),
    }
}

/// Feasible region for an inner maximization.
enum Region<'a> {
    Ball { center: &'a [f64], radius: f64 },
    Box { bounds: &'a [(f64, f64)] },
}

impl Region<'_> {
    fn contains(&self, z: &[f64], cs: &ConstraintSystem) -> bool {
        let inside = match self {
            Region::Ball { center, radius } => dist(z, center) <= radius * (1.0 + 1e-12),
            Region::Box { bounds } => z
                .iter()
                .zip(*bounds)
                .all(|(v, (lo, hi))| *lo <= *v && v <= hi),
        };
        inside && (cs.is_empty() || cs.is_feasible(z, FEAS_TOL))
    }

    fn nodes(&self, k: usize) -> Vec<Vec<f64>> {
        match self {
            Region::Ball { center, radius } => {
                let bounds: Vec<(f64, f64)> =
                    center.iter().map(|c| (c - radius, c + radius)).collect();
                grid(&bounds, k)
                    .into_iter()
                    .filter(|z| dist(z, center) <= radius * (1.0 + 1e-12))
                    .collect()
            }
            Region::Box { bounds } => grid(bounds, k),
        }
    }

    fn cell(&self, k: usize) -> f64 {
        match self {
            Region::Ball { radius, .. } => 2.0 * radius / (k - 1) as f64,
            Region::Box { bounds } => {
                bounds.iter().map(|(lo, hi)| hi - lo).fold(0.0, f64::max) / (k - 1) as f64
            }
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
}

/// Tensor grid with `k` nodes per axis, lexicographic order. Centres are
/// placed exactly.
fn grid(bounds: &[(f64, f64)], k: usize) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = bounds
        .iter()
        .map(|(lo, hi)| {
            if hi <= lo {
                return vec![*lo];
            }
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let c = (k / 2) as f64;
            (0..k).map(|i| mid + half * (i as f64 - c) / c).collect()
        })
        .collect();
    let mut out = vec![Vec::with_capacity(bounds.len())];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Maximizes `f(x, ·)` over the mesh of a region, then refines the best node.
fn maximize_y(prob: &MinimaxProblem, x: &[f64], region: &Region, k: usize) -> Option<InnerMax> {
    let cs = &prob.y_constraints;
    let mut best: Option<InnerMax> = None;
    for y in region.nodes(k) {
        if !(cs.is_empty() || cs.is_feasible(&y, FEAS_TOL)) {
            continue;
        }
        let v = prob.f.value(x, &y);
        if best.as_ref().is_none_or(|b| v > b.value) {
            best = Some(InnerMax {
                value: v,
                argmax: y,
            });
        }
    }
    let best = best?;
    Some(polish(prob, x, region, best, region.cell(k)))
}

/// Pattern search over `{−h, 0, h}^m` with halving steps.
fn polish(prob: &MinimaxProblem, x: &[f64], region: &Region, start: InnerMax, h0: f64) -> InnerMax {
    let m = start.argmax.len();
    if m == 0 || h0 <= 0.0 {
        return start;
    }
    let cs = &prob.y_constraints;
    let offsets: Vec<Vec<f64>> = grid(&vec![(-1.0, 1.0); m], 3)
        .into_iter()
        .filter(|o| o.iter().any(|v| *v != 0.0))
        .collect();
    let mut best = start;
    let mut h = h0;
    for _ in 0..POLISH_ROUNDS {
        let mut next: Option<InnerMax> = None;
        for o in &offsets {
            let y: Vec<f64> = best.argmax.iter().zip(o).map(|(b, d)| b + h * d).collect();
            if !region.contains(&y, cs) {
                continue;
            }
            let v = prob.f.value(x, &y);
            if v > next.as_ref().map_or(best.value, |n| n.value) {
                next = Some(InnerMax {
                    value: v,
                    argmax: y,
                });
            }
        }
        match next {
            Some(n) => best = n,
            None => h *= 0.5,
        }
        if h <= 1e-16 * (1.0 + norm(&best.argmax)) {
            break;
        }
    }
    best
}

/// `max { f(x, y) : y ∈ Y ∩ B_radius(center) }` on a mesh with `mesh` nodes
/// per axis, refined locally.
pub fn inner_max(
    prob: &MinimaxProblem,
    x: &[f64],
    radius: f64,
    center: &[f64],
    mesh: usize,
) -> Result<InnerMax> {
    if !(radius >= 0.0) || mesh < 3 {
        return Err(Error::Validation(
            "radius must be nonnegative and mesh at least 3".into(),
        ));
    }
    if radius == 0.0 {
        return Ok(InnerMax {
            value: prob.f.value(x, center),
            argmax: center.to_vec(),
        });
    }
    let k = if mesh.is_multiple_of(2) {
        mesh + 1
    } else {
        mesh
    };
    maximize_y(prob, x, &Region::Ball { center, radius }, k).ok_or(Error::EmptyFeasibleBall)
}

/// Shared evaluation context.
struct Ctx<'a> {
    prob: &'a MinimaxProblem,
    p: &'a Point,
    grid: &'a GridSpec,
    fbar: f64,
    mag_bar: f64,
    k: usize,
}

impl<'a> Ctx<'a> {
    fn new(prob: &'a MinimaxProblem, p: &'a Point, grid: &'a GridSpec) -> Result<Self> {
        grid.validate()?;
        prob.check_point(p, 1e-8)?;
        let fbar = prob.f.evaluate(p)?;
        Ok(Self {
            prob,
            p,
            grid,
            fbar,
            mag_bar: magnitude(&prob.f, &p.x, &p.y),
            k: grid.nodes_per_axis(prob.n + prob.m),
        })
    }

    fn noise(&self, x: &[f64], y: &[f64]) -> f64 {
        NOISE * (self.mag_bar + magnitude(&self.prob.f, x, y))
    }

    /// `v` restores the value lost at `(x, ȳ)` up to relative tolerance.
    fn restores(&self, x: &[f64], fx0: f64, r: &InnerMax) -> bool {
        let deficit = (self.fbar - fx0).max(0.0);
        r.value >= self.fbar - self.grid.value_tol * deficit - self.noise(x, &r.argmax)
    }

    fn x_nodes(&self, region: &Region) -> Vec<Vec<f64>> {
        let cs = &self.prob.x_constraints;
        region
            .nodes(self.k)
            .into_iter()
            .filter(|x| cs.is_empty() || cs.is_feasible(x, FEAS_TOL))
            .collect()
    }

    fn y_nodes(&self, region: &Region) -> Vec<Vec<f64>> {
        let cs = &self.prob.y_constraints;
        region
            .nodes(self.k)
            .into_iter()
            .filter(|y| cs.is_empty() || cs.is_feasible(y, FEAS_TOL))
            .collect()
    }

    /// First `y` with `f(x̄, y) > f̄` beyond tolerance.
    fn max_side_violation(&self, ys: &[Vec<f64>]) -> Option<Evidence> {
        let xbar = &self.p.x;
        let vals: Vec<f64> = ys.par_iter().map(|y| self.prob.f.value(xbar, y)).collect();
        let spread = vals
            .iter()
            .map(|v| (v - self.fbar).abs())
            .fold(0.0, f64::max);
        ys.iter()
            .zip(&vals)
            .find(|(y, v)| **v - self.fbar > self.grid.value_tol * spread + self.noise(xbar, y))
            .map(|(y, v)| Evidence::Point {
                x: xbar.clone(),
                y: y.clone(),
                value: *v,
                reference: self.fbar,
            })
    }

    /// First `x` with `f(x, ȳ) < f̄` beyond tolerance.
    fn min_side_violation(&self, xs: &[Vec<f64>]) -> Option<Evidence> {
        let ybar = &self.p.y;
        let vals: Vec<f64> = xs.par_iter().map(|x| self.prob.f.value(x, ybar)).collect();
        let spread = vals
            .iter()
            .map(|v| (v - self.fbar).abs())
            .fold(0.0, f64::max);
        xs.iter()
            .zip(&vals)
            .find(|(x, v)| self.fbar - **v > self.grid.value_tol * spread + self.noise(x, ybar))
            .map(|(x, v)| Evidence::Point {
                x: x.clone(),
                y: ybar.clone(),
                value: *v,
                reference: self.fbar,
            })
    }

    fn finest_max_side(&self) -> Option<Evidence> {
        let ys = self.y_nodes(&Region::Ball {
            center: &self.p.y,
            radius: self.grid.finest_delta(),
        });
        self.max_side_violation(&ys)
    }

    fn y_box(&self) -> Option<&'a [(f64, f64)]> {
        self.prob.bounding_box.as_deref().map(|b| &b[self.prob.n..])
    }

    fn x_box(&self) -> Option<&'a [(f64, f64)]> {
        self.prob.bounding_box.as_deref().map(|b| &b[..self.prob.n])
    }

    /// Radius beyond which the ladder stops: the farthest y-box corner, or
    /// one without a box.
    fn y_reach(&self) -> f64 {
        match self.y_box() {
            Some(b) => b
                .iter()
                .zip(&self.p.y)
                .map(|((lo, hi), c)| (c - lo).abs().max((hi - c).abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
            None => 1.0,
        }
    }

    fn tau_profile(&self) -> Result<TauProfile> {
        if let Some(Evidence::Point { y, value, .. }) = self.finest_max_side() {
            return Err(Error::NotMaxSide {
                y,
                excess: value - self.fbar,
            });
        }
        let ybar = &self.p.y;
        let rows = self
            .grid
            .delta_values
            .iter()
            .map(|&delta| {
                let xs = self.x_nodes(&Region::Ball {
                    center: &self.p.x,
                    radius: delta,
                });
                let hard: Vec<(Vec<f64>, f64)> = xs
                    .into_iter()
                    .map(|x| {
                        let v = self.prob.f.value(&x, ybar);
                        (x, v)
                    })
                    .filter(|(x, v)| {
                        !self.restores(
                            x,
                            *v,
                            &InnerMax {
                                value: *v,
                                argmax: ybar.clone(),
                            },
                        )
                    })
                    .collect();
                if hard.is_empty() {
                    return TauRow {
                        delta,
                        tau_min: 0.0,
                        ratio: 0.0,
                        binding_x: None,
                    };
                }
                let top = self.y_reach().max(self.grid.kappa_max * delta);
                let mut rung = 2.0 * delta / (self.k - 1) as f64;
                let mut binding = None;
                loop {
                    let r = rung.min(top);
                    let region = Region::Ball {
                        center: ybar,
                        radius: r,
                    };
                    let fail = hard.par_iter().find_first(|(x, v)| {
                        maximize_y(self.prob, x, &region, self.k)
                            .is_none_or(|im| !self.restores(x, *v, &im))
                    });
                    match fail {
                        None => {
                            return TauRow {
                                delta,
                                tau_min: r,
                                ratio: r / delta,
                                binding_x: binding,
                            }
                        }
                        Some((x, _)) => binding = Some(x.clone()),
                    }
                    if r >= top {
                        return TauRow {
                            delta,
                            tau_min: f64::INFINITY,
                            ratio: f64::INFINITY,
                            binding_x: binding,
                        };
                    }
                    rung *= 2f64.powf(0.25);
                }
            })
            .collect::<Vec<_>>();
        let fitted_exponent = fit_exponent(&rows);
        let calm_verdict = calm_verdict(&rows, fitted_exponent, self.grid.kappa_max);
        Ok(TauProfile {
            rows,
            fitted_exponent,
            calm_verdict,
            nodes_per_axis: self.k,
        })
    }

    fn argmax_calmness(&self, profile: &TauProfile) -> ArgmaxCalmness {
        let ybar = &self.p.y;
        let rows: Vec<KappaRow> = profile
            .rows
            .iter()
            .map(|row| {
                let radius = if row.tau_min.is_finite() {
                    row.tau_min
                } else {
                    self.y_reach()
                };
                let xs = self.x_nodes(&Region::Ball {
                    center: &self.p.x,
                    radius: row.delta,
                });
                let region = Region::Ball {
                    center: ybar,
                    radius,
                };
                let ys = if radius > 0.0 {
                    self.y_nodes(&region)
                } else {
                    vec![ybar.clone()]
                };
                let kappa = xs
                    .par_iter()
                    .filter(|x| dist(x, &self.p.x) > 0.0)
                    .map(|x| {
                        let vals: Vec<f64> = ys.iter().map(|y| self.prob.f.value(x, y)).collect();
                        let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        let low = vals.iter().copied().fold(f64::INFINITY, f64::min);
                        let tol = self.grid.value_tol * (best - low) + self.noise(x, ybar);
                        // Nearest near-maximizer to ȳ, refined locally.
                        let (i, _) = ys
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| vals[*i] >= best - tol)
                            .map(|(i, y)| (i, dist(y, ybar)))
                            .fold(
                                (usize::MAX, f64::INFINITY),
                                |a, b| if b.1 < a.1 { b } else { a },
                            );
                        let start = InnerMax {
                            value: vals[i],
                            argmax: ys[i].clone(),
                        };
                        let y = if radius > 0.0 {
                            polish(self.prob, x, &region, start, region.cell(self.k)).argmax
                        } else {
                            start.argmax
                        };
                        dist(&y, ybar) / dist(x, &self.p.x)
                    })
                    .reduce(|| 0.0, f64::max);
                KappaRow {
                    delta: row.delta,
                    radius,
                    kappa,
                }
            })
            .collect();
        let kappa_hat = rows.iter().map(|r| r.kappa).fold(0.0, f64::max);
        ArgmaxCalmness { rows, kappa_hat }
    }

    /// Box-based verdicts `(nash, global)`.
    fn box_verdicts(
        &self,
        local_nash: &OracleVerdict,
        max_side: &Option<Evidence>,
    ) -> (OracleVerdict, OracleVerdict) {
        let (Some(xb), Some(yb)) = (self.x_box(), self.y_box()) else {
            let u = OracleVerdict::unknown("no bounding box declared");
            return (u.clone(), u);
        };
        let in_box =
            |z: &[f64], b: &[(f64, f64)]| z.iter().zip(b).all(|(v, (lo, hi))| lo <= v && v <= hi);
        let xs = self.x_nodes(&Region::Box { bounds: xb });
        let yregion = Region::Box { bounds: yb };
        let ys = self.y_nodes(&yregion);
        let y_viol = self.max_side_violation(&ys).or_else(|| match max_side {
            Some(e @ Evidence::Point { y, .. }) if in_box(y, yb) => Some(e.clone()),
            _ => None,
        });
        let x_viol = self
            .min_side_violation(&xs)
            .or_else(|| match &local_nash.evidence {
                Some(e @ Evidence::Point { x, y, .. })
                    if local_nash.verdict == Tri::False && y == &self.p.y && in_box(x, xb) =>
                {
                    Some(e.clone())
                }
                _ => None,
            });
        let nash = match (&y_viol, &x_viol) {
            (Some(e), _) | (None, Some(e)) => OracleVerdict::no(e.clone()),
            (None, None) => OracleVerdict::yes(),
        };
        let global = if let Some(e) = y_viol {
            OracleVerdict::no(e)
        } else {
            let ybar = &self.p.y;
            let fail = xs.par_iter().find_first(|x| {
                let fx0 = self.prob.f.value(x, ybar);
                let trivial = InnerMax {
                    value: fx0,
                    argmax: ybar.clone(),
                };
                !self.restores(x, fx0, &trivial)
                    && maximize_y(self.prob, x, &yregion, self.k)
                        .is_none_or(|im| !self.restores(x, fx0, &im))
            });
            match fail {
                None => OracleVerdict::yes(),
                Some(x) => {
                    let im = maximize_y(self.prob, x, &yregion, self.k).unwrap_or(InnerMax {
                        value: f64::NEG_INFINITY,
                        argmax: ybar.clone(),
                    });
                    OracleVerdict::no(Evidence::Point {
                        x: x.clone(),
                        y: im.argmax,
                        value: im.value,
                        reference: self.fbar,
                    })
                }
            }
        };
        (nash, global)
    }

    fn resolution(&self) -> Resolution {
        Resolution {
            mesh_per_axis: self.grid.mesh_per_axis,
            nodes_per_axis: self.k,
            finest_delta: self.grid.finest_delta(),
            value_tol: self.grid.value_tol,
        }
    }

    fn classify(&self, box_only: bool) -> Result<ClassificationReport> {
        let max_side = self.finest_max_side();
        let local_nash = match &max_side {
            Some(e) => OracleVerdict::no(e.clone()),
            None => {
                let xs = self.x_nodes(&Region::Ball {
                    center: &self.p.x,
                    radius: self.grid.finest_delta(),
                });
                self.min_side_violation(&xs)
                    .map_or_else(OracleVerdict::yes, OracleVerdict::no)
            }
        };
        let (nash, global) = self.box_verdicts(&local_nash, &max_side);
        let (local, calm, profile, argmax) = if box_only {
            let u = OracleVerdict::unknown("skipped (box-only run)");
            (u.clone(), u, None, None)
        } else if let Some(e) = &max_side {
            (
                OracleVerdict::no(e.clone()),
                OracleVerdict::no(e.clone()),
                None,
                None,
            )
        } else {
            let profile = self.tau_profile()?;
            let finest = profile.rows.last().expect("validated");
            let local = if finest.tau_min.is_infinite() {
                let x = finest.binding_x.clone().unwrap_or_else(|| self.p.x.clone());
                let value = self.prob.f.value(&x, &self.p.y);
                OracleVerdict::no(Evidence::Point {
                    x,
                    y: self.p.y.clone(),
                    value,
                    reference: self.fbar,
                })
            } else if profile.rows.iter().all(|r| r.tau_min == 0.0)
                || profile.fitted_exponent.is_some_and(|e| e > 0.0)
            {
                OracleVerdict::yes()
            } else {
                OracleVerdict::unknown("radius function does not shrink with δ on this mesh")
            };
            let ratio = Evidence::Ratio {
                max_ratio: profile.max_ratio(),
                exponent: profile.fitted_exponent,
                x: finest.binding_x.clone(),
            };
            let calm = match (local.verdict, profile.calm_verdict) {
                (Tri::False, _) => local.clone(),
                (_, CalmVerdict::Calm) => OracleVerdict {
                    verdict: Tri::True,
                    evidence: Some(ratio),
                },
                (_, CalmVerdict::NotCalm) => OracleVerdict::no(ratio),
                (_, CalmVerdict::Undetermined) => OracleVerdict {
                    verdict: Tri::Undetermined,
                    evidence: Some(ratio),
                },
            };
            let argmax = self.argmax_calmness(&profile);
            (local, calm, Some(profile), Some(argmax))
        };
        let report = ClassificationReport {
            nash,
            local_nash,
            local_minimax: local,
            calm_local_minimax: calm,
            global_minimax_on_box: global,
            tau_profile: profile,
            argmax_calmness: argmax,
            resolution: self.resolution(),
        };
        check_implications(&report)?;
        Ok(report)
    }
}

/// Least-squares slope of `ln τ_min` against `ln δ` over rows with
/// `0 < τ_min < ∞`.
pub fn fit_exponent(rows: &[TauRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.tau_min > 0.0 && r.tau_min.is_finite())
        .map(|r| (r.delta.ln(), r.tau_min.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn calm_verdict(rows: &[TauRow], exponent: Option<f64>, kappa_max: f64) -> CalmVerdict {
    if rows.iter().any(|r| r.tau_min.is_infinite()) {
        return CalmVerdict::Undetermined;
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    if max_ratio <= kappa_max && exponent.is_none_or(|e| e >= 0.9) {
        return CalmVerdict::Calm;
    }
    // Ratios must at least double over every decade of δ.
    let mut pairs = 0;
    let mut growing = true;
    for (i, a) in rows.iter().enumerate() {
        if let Some(b) = rows[i + 1..]
            .iter()
            .find(|b| b.delta <= a.delta / 10.0 * (1.0 + 1e-9))
        {
            pairs += 1;
            growing &= a.ratio > 0.0 && b.ratio >= 2.0 * a.ratio;
        }
    }
    if exponent.is_some_and(|e| e <= 0.9) && pairs > 0 && growing {
        CalmVerdict::NotCalm
    } else {
        CalmVerdict::Undetermined
    }
}

/// `nash ⇒ local_nash ⇒ calm ⇒ local`; a `true` followed by a `false` is an
/// internal inconsistency.
pub fn check_implications(r: &ClassificationReport) -> Result<()> {
    let chain = [
        ("nash", &r.nash),
        ("local_nash", &r.local_nash),
        ("calm_local_minimax", &r.calm_local_minimax),
        ("local_minimax", &r.local_minimax),
    ];
    for (i, (a, va)) in chain.iter().enumerate() {
        for (b, vb) in &chain[i + 1..] {
            if va.verdict == Tri::True && vb.verdict == Tri::False {
                return Err(Error::Inconsistent(format!("{a} holds but {b} fails")));
            }
        }
    }
    Ok(())
}

/// Minimal radius function on the δ ladder of `grid`.
pub fn tau_profile(prob: &MinimaxProblem, p: &Point, grid: &GridSpec) -> Result<TauProfile> {
    Ctx::new(prob, p, grid)?.tau_profile()
}

/// Classifies `p` against the Nash, local, calm local and global minimax
/// definitions.
pub fn classify(prob: &MinimaxProblem, p: &Point, grid: &GridSpec) -> Result<ClassificationReport> {
    Ctx::new(prob, p, grid)?.classify(false)
}

/// As [`classify`], restricted to the box and finest-ball tests.
pub fn classify_box_only(
    prob: &MinimaxProblem,
    p: &Point,
    grid: &GridSpec,
) -> Result<ClassificationReport> {
    Ctx::new(prob, p, grid)?.classify(true)
}

/// Distance from `ȳ` to the nearest maximizer over `B_{τ_min(δ)}(ȳ)`,
/// relative to `‖x − x̄‖`, per δ.
pub fn argmax_calmness(
    prob: &MinimaxProblem,
    p: &Point,
    grid: &GridSpec,
    profile: &TauProfile,
) -> Result<ArgmaxCalmness> {
    Ok(Ctx::new(prob, p, grid)?.argmax_calmness(profile))
}
