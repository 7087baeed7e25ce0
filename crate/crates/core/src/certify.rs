//! First- and second-order checks for calm local minimax points.
//!
//! Universally quantified conditions over polyhedral cones are discharged
//! exactly where the structure allows it: linear functionals on generators,
//! quadratic forms through [`cone_quadratic_max`]. Everything else falls back
//! to seeded direction samples and is labelled `sampled`.

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cones::{
    cone_quadratic_max, generators, indicator_second_sub_directional, lp_feasible, membership,
    sample_cone_directions, tangent_cone, Bound, IndicatorCase, IndicatorSecondSub, PolyhedralCone,
    EXHAUSTIVE_DIM_LIMIT,
};
use crate::error::{Error, Result};
use crate::expr::directional::join;
use crate::expr::{hessian, second_subderivative, separation_defect, subderivative, Axis, Point};
use crate::kkt::{
    block_gradients, multiplier_set, vertices, MinimaxProblem, MultiplierPolyhedron, Side,
};
use crate::linalg::{dot, norm, normalized, quad, sorted_eigen, symmetric_split};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyOptions {
    /// One-sided tolerance for necessary conditions.
    pub tol: f64,
    /// Minimum margin for sufficiency claims.
    pub strict_tol: f64,
    pub activity_tol: f64,
    /// Sampled directions per cone when enumeration is not exhaustive.
    pub samples: usize,
    pub seed: u64,
    pub eig_tol: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            strict_tol: 1e-6,
            activity_tol: 1e-8,
            samples: 512,
            seed: 0,
            eig_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Vacuous,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Proved,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub u: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub h: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<Vec<f64>>,
    #[serde(with = "crate::num::f64_ext")]
    pub value: f64,
}

impl Witness {
    fn new(value: f64) -> Self {
        Self {
            u: None,
            h: None,
            alpha: None,
            beta: None,
            value,
        }
    }

    fn u(mut self, u: Vec<f64>) -> Self {
        self.u = Some(u);
        self
    }

    fn h(mut self, h: Vec<f64>) -> Self {
        self.h = Some(h);
        self
    }

    fn alpha(mut self, a: Option<Vec<f64>>) -> Self {
        self.alpha = a;
        self
    }

    fn beta(mut self, b: Option<Vec<f64>>) -> Self {
        self.beta = b;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub verdict: Verdict,
    pub mode: Mode,
    pub witness: Option<Witness>,
    #[serde(with = "crate::num::opt_f64_ext", default)]
    pub margin: Option<f64>,
    pub note: String,
}

impl CheckOutcome {
    fn holds(mode: Mode, margin: f64) -> Self {
        Self {
            verdict: Verdict::Holds,
            mode,
            witness: None,
            margin: Some(margin),
            note: String::new(),
        }
    }

    fn fails(mode: Mode, witness: Witness) -> Self {
        Self {
            verdict: Verdict::Fails,
            mode,
            margin: Some(witness.value),
            witness: Some(witness),
            note: String::new(),
        }
    }

    fn vacuous(mode: Mode, note: &str) -> Self {
        Self {
            verdict: Verdict::Vacuous,
            mode,
            witness: None,
            margin: None,
            note: note.into(),
        }
    }

    fn inconclusive(note: impl Into<String>) -> Self {
        Self {
            verdict: Verdict::Inconclusive,
            mode: Mode::Sampled,
            witness: None,
            margin: None,
            note: note.into(),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        let note = note.into();
        if self.note.is_empty() {
            self.note = note;
        } else if !note.is_empty() {
            self.note = format!("{}; {note}", self.note);
        }
        self
    }

    /// Holds or vacuous.
    pub fn ok(&self) -> bool {
        matches!(self.verdict, Verdict::Holds | Verdict::Vacuous)
    }

    pub fn proved_ok(&self) -> bool {
        self.ok() && self.mode == Mode::Proved
    }

    pub fn proved_failure(&self) -> bool {
        self.verdict == Verdict::Fails && self.mode == Mode::Proved
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Conclusion {
    Certified,
    Refuted { which: String },
    Consistent,
    Inconclusive { reason: String },
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conclusion::Certified => write!(f, "CERTIFIED (sufficient conditions proved)"),
            Conclusion::Refuted { which } => {
                write!(f, "REFUTED (necessary condition fails: {which})")
            }
            Conclusion::Consistent => write!(
                f,
                "CONSISTENT (necessary hold; sufficiency not established)"
            ),
            Conclusion::Inconclusive { reason } => write!(f, "INCONCLUSIVE ({reason})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub first_order_primal_x: CheckOutcome,
    pub first_order_primal_y: CheckOutcome,
    pub first_order_dual_x: CheckOutcome,
    pub first_order_dual_y: CheckOutcome,
    pub so_necessary_max: CheckOutcome,
    pub so_necessary_joint: CheckOutcome,
    pub so_sufficient_max: CheckOutcome,
    pub so_sufficient_joint: CheckOutcome,
    pub schur_sufficient: CheckOutcome,
    pub schur_necessary: CheckOutcome,
    pub nonsmooth_necessary_max: CheckOutcome,
    pub nonsmooth_necessary_joint: CheckOutcome,
    pub weak_sufficient_flag: CheckOutcome,
    pub assumptions: Vec<String>,
    pub conclusion: Conclusion,
}

impl CertificateReport {
    /// Named checks in report order.
    pub fn checks(&self) -> Vec<(&'static str, &CheckOutcome)> {
        vec![
            ("first_order_primal_x", &self.first_order_primal_x),
            ("first_order_primal_y", &self.first_order_primal_y),
            ("first_order_dual_x", &self.first_order_dual_x),
            ("first_order_dual_y", &self.first_order_dual_y),
            ("schur_necessary", &self.schur_necessary),
            ("so_necessary_max", &self.so_necessary_max),
            ("so_necessary_joint", &self.so_necessary_joint),
            ("nonsmooth_necessary_max", &self.nonsmooth_necessary_max),
            ("nonsmooth_necessary_joint", &self.nonsmooth_necessary_joint),
            ("so_sufficient_max", &self.so_sufficient_max),
            ("so_sufficient_joint", &self.so_sufficient_joint),
            ("schur_sufficient", &self.schur_sufficient),
            ("weak_sufficient_flag", &self.weak_sufficient_flag),
        ]
    }
}

/// Checks whose proved failure refutes calm local minimaxity, in the order
/// used to name the refutation.
const NECESSARY: [&str; 9] = [
    "first_order_primal_x",
    "first_order_primal_y",
    "first_order_dual_x",
    "first_order_dual_y",
    "schur_necessary",
    "so_necessary_max",
    "so_necessary_joint",
    "nonsmooth_necessary_max",
    "nonsmooth_necessary_joint",
];

const H_LADDER: [f64; 13] = [
    0.125,
    0.176_776_695,
    0.25,
    0.353_553_391,
    0.5,
    0.707_106_781,
    1.0,
    1.414_213_562,
    2.0,
    2.828_427_125,
    4.0,
    5.656_854_249,
    8.0,
];

/// Directions of a cone: generators when enumeration is complete, seeded
/// samples otherwise.
struct Directions {
    gens: Vec<Vec<f64>>,
    samples: Vec<Vec<f64>>,
    exhaustive: bool,
    /// The cone is `{0}`.
    trivial: bool,
    /// Generators cover every unit vector of the cone (one ray or one line).
    covers_sphere: bool,
    subspace: Option<Vec<Vec<f64>>>,
    single_ray: Option<Vec<f64>>,
}

impl Directions {
    fn new(k: &PolyhedralCone, opts: &CertifyOptions, salt: u64) -> Self {
        let samples = || {
            sample_cone_directions(
                k,
                opts.samples,
                opts.seed.wrapping_mul(0x9E37_79B9).wrapping_add(salt),
            )
        };
        match generators(k, EXHAUSTIVE_DIM_LIMIT) {
            Ok(rs) => {
                let trivial = rs.is_trivial();
                let covers_sphere = rs.rays.len() + rs.lineality.len() == 1;
                let subspace = rs.is_subspace().then(|| rs.lineality.clone());
                let single_ray =
                    (rs.rays.len() == 1 && rs.lineality.is_empty()).then(|| rs.rays[0].clone());
                Self {
                    gens: rs.conic_generators(),
                    samples: if trivial { Vec::new() } else { samples() },
                    exhaustive: true,
                    trivial,
                    covers_sphere,
                    subspace,
                    single_ray,
                }
            }
            Err(_) => {
                let s = samples();
                Self {
                    trivial: s.is_empty(),
                    gens: Vec::new(),
                    samples: s,
                    exhaustive: false,
                    covers_sphere: false,
                    subspace: None,
                    single_ray: None,
                }
            }
        }
    }

    fn all(&self) -> Vec<Vec<f64>> {
        self.gens.iter().chain(&self.samples).cloned().collect()
    }

    /// Mode for a positively homogeneous check evaluated on `all()`.
    fn homogeneous_mode(&self) -> Mode {
        if self.exhaustive && self.covers_sphere {
            Mode::Proved
        } else {
            Mode::Sampled
        }
    }
}

/// Flips `w` to a canonical sign when `−w` is also in the cone.
fn canonical(w: Vec<f64>, k: &PolyhedralCone) -> Vec<f64> {
    let neg: Vec<f64> = w.iter().map(|v| -v).collect();
    match w.iter().find(|v| v.abs() > 1e-12) {
        Some(v) if *v < 0.0 && membership(k, &neg, 1e-9) => neg,
        _ => w,
    }
}

fn tidy(w: Vec<f64>) -> Vec<f64> {
    w.into_iter()
        .map(|v| if v.abs() < 1e-14 { 0.0 } else { v })
        .collect()
}

/// Affine family of Lagrangian Hessians over the multiplier polyhedra.
struct Family {
    hf: DMatrix<f64>,
    n: usize,
    m: usize,
    /// `Σ α_i ∇²φ_i` per α vertex, with the vertex (full length).
    alpha: Vec<(DMatrix<f64>, Vec<f64>)>,
    /// `Σ r_i ∇²φ_i` per α recession ray.
    alpha_rays: Vec<DMatrix<f64>>,
    /// `Σ β_j ∇²ψ_j` per β vertex, with the vertex (full length).
    beta: Vec<(DMatrix<f64>, Vec<f64>)>,
    beta_rays: Vec<DMatrix<f64>>,
    exhaustive: bool,
}

impl Family {
    fn h_min(&self, a: usize, b: usize) -> DMatrix<f64> {
        let mut h = self.hf.clone();
        let (n, m) = (self.n, self.m);
        {
            let mut xx = h.view_mut((0, 0), (n, n));
            xx += &self.alpha[a].0;
        }
        {
            let mut yy = h.view_mut((n, n), (m, m));
            yy -= &self.beta[b].0;
        }
        h
    }

    /// The single Hessian when every multiplier choice gives the same matrix.
    fn collapsed(&self) -> Option<DMatrix<f64>> {
        let same = |v: &[(DMatrix<f64>, Vec<f64>)]| {
            v.windows(2).all(|w| (&w[0].0 - &w[1].0).amax() <= 1e-12)
        };
        let flat = |v: &[DMatrix<f64>]| v.iter().all(|r| r.amax() <= 1e-12);
        (self.exhaustive
            && same(&self.alpha)
            && same(&self.beta)
            && flat(&self.alpha_rays)
            && flat(&self.beta_rays))
        .then(|| self.h_min(0, 0))
    }

    /// `min_{β ∈ Λ_max} hᵀ ∇²_yy L_max(β) h`, `−∞` along a descending ray.
    fn max_side_value(&self, h: &[f64]) -> (f64, usize) {
        if self.beta_rays.iter().any(|r| quad(r, h) > 1e-12) {
            return (f64::NEG_INFINITY, 0);
        }
        let hyy = self
            .hf
            .view((self.n, self.n), (self.m, self.m))
            .into_owned();
        let mut best = (f64::INFINITY, 0);
        for (j, (psi, _)) in self.beta.iter().enumerate() {
            let v = quad(&(&hyy - psi), h);
            if v < best.0 {
                best = (v, j);
            }
        }
        best
    }

    /// `max_α min_β q_{α,β}(u, h)` with recession rays taken into account.
    fn joint_value(&self, u: &[f64], h: &[f64]) -> f64 {
        let w = join(u, h);
        if self.alpha_rays.iter().any(|r| quad(r, u) > 1e-12) {
            return f64::INFINITY;
        }
        if self.beta_rays.iter().any(|r| quad(r, h) > 1e-12) {
            return f64::NEG_INFINITY;
        }
        let base = quad(&self.hf, &w);
        let best_alpha = self
            .alpha
            .iter()
            .map(|(phi, _)| quad(phi, u))
            .fold(f64::NEG_INFINITY, f64::max);
        let worst_beta = self
            .beta
            .iter()
            .map(|(psi, _)| quad(psi, h))
            .fold(f64::NEG_INFINITY, f64::max);
        base + best_alpha - worst_beta
    }
}

struct Ctx<'a> {
    prob: &'a MinimaxProblem,
    p: &'a Point,
    opts: &'a CertifyOptions,
    /// `(∇_x f, ∇_y f)` when `f` is differentiable at the point.
    grad: Option<(Vec<f64>, Vec<f64>)>,
    tx: PolyhedralCone,
    ty: PolyhedralCone,
    mscq: bool,
}

impl<'a> Ctx<'a> {
    fn new(prob: &'a MinimaxProblem, p: &'a Point, opts: &'a CertifyOptions) -> Result<Self> {
        prob.check_point(p, opts.activity_tol)?;
        let grad = match block_gradients(prob, p) {
            Ok(g) => Some(g),
            Err(Error::NonsmoothAtPoint { .. }) => None,
            Err(e) => return Err(e),
        };
        let tx = tangent_cone(&prob.x_constraints, &p.x, opts.activity_tol)?;
        let ty = tangent_cone(&prob.y_constraints, &p.y, opts.activity_tol)?;
        let mscq = !prob.is_constrained() || prob.mscq_holds();
        Ok(Self {
            prob,
            p,
            opts,
            grad,
            tx,
            ty,
            mscq,
        })
    }

    fn pad(&self, axis: Axis, w: &[f64]) -> Vec<f64> {
        match axis {
            Axis::X => join(w, &vec![0.0; self.prob.m]),
            Axis::Y => join(&vec![0.0; self.prob.n], w),
        }
    }

    fn d1(&self, w: &[f64]) -> f64 {
        subderivative(&self.prob.f, self.p, w)
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    }

    fn d2(&self, w: &[f64]) -> f64 {
        second_subderivative(&self.prob.f, self.p, w)
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    }

    fn mscq_gate(&self) -> Option<CheckOutcome> {
        (!self.mscq).then(|| {
            CheckOutcome::inconclusive(
                "MSCQ not asserted for nonlinear constraints; tangent cones may be inexact",
            )
        })
    }
}

fn first_order_primal(ctx: &Ctx, side: Side) -> CheckOutcome {
    if let Some(o) = ctx.mscq_gate() {
        return o;
    }
    let (axis, cone, sign) = match side {
        Side::Min => (Axis::X, &ctx.tx, 1.0),
        Side::Max => (Axis::Y, &ctx.ty, -1.0),
    };
    let dirs = Directions::new(cone, ctx.opts, 11 + side as u64);
    if dirs.trivial {
        return CheckOutcome::vacuous(Mode::Proved, "tangent cone is {0}");
    }
    // A linear functional is nonnegative on a cone iff it is on its generators.
    let (cands, mode) = if ctx.grad.is_some() && dirs.exhaustive {
        (dirs.gens.clone(), Mode::Proved)
    } else {
        (dirs.all(), dirs.homogeneous_mode())
    };
    let mut worst: Option<(f64, Vec<f64>, f64)> = None;
    for w in cands {
        let v = ctx.d1(&ctx.pad(axis, &w));
        let slack = sign * v;
        if worst.as_ref().is_none_or(|(s, _, _)| slack < *s) {
            worst = Some((slack, w, v));
        }
    }
    let (slack, w, v) = worst.expect("nontrivial cone has directions");
    if slack < -ctx.opts.tol {
        let wit = Witness::new(v);
        let wit = match side {
            Side::Min => wit.u(tidy(w)),
            Side::Max => wit.h(tidy(w)),
        };
        CheckOutcome::fails(mode, wit)
    } else {
        CheckOutcome::holds(mode, slack)
    }
}

fn first_order_dual(ctx: &Ctx, side: Side) -> Result<CheckOutcome> {
    if let Some(o) = ctx.mscq_gate() {
        return Ok(o);
    }
    let Some((gx, gy)) = &ctx.grad else {
        return Ok(CheckOutcome::inconclusive(
            "dual form is implemented for objectives differentiable at the candidate",
        ));
    };
    let mp = multiplier_set(ctx.prob, ctx.p, side, ctx.opts.activity_tol)?;
    if !mp.is_empty()? {
        return Ok(
            CheckOutcome::holds(Mode::Proved, 0.0).with_note(match side {
                Side::Min => "Λ_min nonempty",
                Side::Max => "Λ_max nonempty",
            }),
        );
    }
    // Farkas direction: w in the tangent cone with a strictly wrong sign.
    let (cone, g) = match side {
        Side::Min => (&ctx.tx, gx.clone()),
        Side::Max => (&ctx.ty, gy.iter().map(|v| -v).collect::<Vec<f64>>()),
    };
    let mut le = cone.le_rows.clone();
    let mut b_le = vec![0.0; le.len()];
    le.push(g.clone());
    b_le.push(-1.0);
    let b_eq = vec![0.0; cone.eq_rows.len()];
    let bounds = vec![Bound::new(-1e6, 1e6); cone.dim];
    let w = lp_feasible(&cone.eq_rows, &b_eq, &le, &b_le, &bounds)?
        .and_then(|w| normalized(&w))
        .ok_or_else(|| {
            Error::Inconsistent("empty multiplier set without a separating direction".into())
        })?;
    let value = match side {
        Side::Min => dot(gx, &w),
        Side::Max => dot(gy, &w),
    };
    let wit = match side {
        Side::Min => Witness::new(value).u(tidy(w)),
        Side::Max => Witness::new(value).h(tidy(w)),
    };
    Ok(CheckOutcome::fails(Mode::Proved, wit).with_note("multiplier set is empty"))
}

/// Multiplier data for the smooth second-order checks.
struct Multipliers {
    mp_min: MultiplierPolyhedron,
    mp_max: MultiplierPolyhedron,
    family: Family,
}

fn multipliers(ctx: &Ctx) -> Result<std::result::Result<Multipliers, CheckOutcome>> {
    if let Some(o) = ctx.mscq_gate() {
        return Ok(Err(o));
    }
    if ctx.grad.is_none() {
        return Ok(Err(CheckOutcome::inconclusive(
            "objective is not differentiable at the candidate",
        )));
    }
    let prob = ctx.prob;
    let hf = match hessian(&prob.f, ctx.p) {
        Ok(h) => h,
        Err(Error::NonsmoothAtPoint { .. }) => {
            return Ok(Err(CheckOutcome::inconclusive(
                "objective is not twice differentiable at the candidate",
            )))
        }
        Err(e) => return Err(e),
    };
    let mp_min = multiplier_set(prob, ctx.p, Side::Min, ctx.opts.activity_tol)?;
    let mp_max = multiplier_set(prob, ctx.p, Side::Max, ctx.opts.activity_tol)?;
    let mut exhaustive = true;
    let mut enumerate =
        |mp: &MultiplierPolyhedron| -> Result<Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)>> {
            match vertices(mp) {
                Ok(v) if v.empty => Ok(None),
                Ok(v) => Ok(Some((v.vertices, v.rays))),
                Err(Error::DimensionTooLarge { .. }) => {
                    exhaustive = false;
                    Ok(mp.feasible_point()?.map(|p| (vec![p], Vec::new())))
                }
                Err(e) => Err(e),
            }
        };
    let (Some((va, ra)), Some((vb, rb))) = (enumerate(&mp_min)?, enumerate(&mp_max)?) else {
        return Ok(Err(CheckOutcome::inconclusive("multiplier set is empty")));
    };
    let hess = |cs: &crate::cones::ConstraintSystem,
                axis: Axis,
                idx: &[usize],
                z: &[f64]|
     -> Result<Vec<DMatrix<f64>>> {
        let q = Point::from_block(axis, z);
        idx.iter()
            .map(|&i| hessian(&cs.constraints()[i].expr, &q))
            .collect()
    };
    let phi = hess(
        &prob.x_constraints,
        Axis::X,
        &mp_min.constraint_indices,
        &ctx.p.x,
    )?;
    let psi = hess(
        &prob.y_constraints,
        Axis::Y,
        &mp_max.constraint_indices,
        &ctx.p.y,
    )?;
    let combine = |mats: &[DMatrix<f64>], lam: &[f64], d: usize| {
        mats.iter()
            .zip(lam)
            .fold(DMatrix::zeros(d, d), |acc, (m, l)| acc + m * *l)
    };
    let family = Family {
        n: prob.n,
        m: prob.m,
        alpha: va
            .iter()
            .map(|a| (combine(&phi, a, prob.n), mp_min.expand(a)))
            .collect(),
        alpha_rays: ra.iter().map(|r| combine(&phi, r, prob.n)).collect(),
        beta: vb
            .iter()
            .map(|b| (combine(&psi, b, prob.m), mp_max.expand(b)))
            .collect(),
        beta_rays: rb.iter().map(|r| combine(&psi, r, prob.m)).collect(),
        hf,
        exhaustive,
    };
    Ok(Ok(Multipliers {
        mp_min,
        mp_max,
        family,
    }))
}

fn critical(ctx: &Ctx, side: Side) -> PolyhedralCone {
    let (gx, gy) = ctx.grad.as_ref().expect("smooth path");
    let (k, g) = match side {
        Side::Min => (&ctx.tx, gx),
        Side::Max => (&ctx.ty, gy),
    };
    if g.iter().any(|v| *v != 0.0) {
        k.clone().with_eq_row(g.clone())
    } else {
        k.clone()
    }
}

/// `∀h ∈ C_max ∃β: hᵀ∇²_yy L_max(β) h ≤ tol` (necessary) or `< −strict_tol`
/// on `C_max \ {0}` (sufficient).
fn max_side(ctx: &Ctx, mult: &Multipliers, strict: bool) -> CheckOutcome {
    let cmax = critical(ctx, Side::Max);
    let fam = &mult.family;
    let (n, m) = (fam.n, fam.m);
    let passes = |v: f64| {
        if strict {
            v < -ctx.opts.strict_tol
        } else {
            v <= ctx.opts.tol
        }
    };
    if let Some(h) = fam.collapsed() {
        let hyy = h.view((n, n), (m, m)).into_owned();
        match cone_quadratic_max(&hyy, &cmax) {
            Ok(None) => return CheckOutcome::vacuous(Mode::Proved, "C_max is {0}"),
            Ok(Some(r)) => {
                return if passes(r.value) {
                    CheckOutcome::holds(Mode::Proved, -r.value)
                } else {
                    let w = Witness::new(r.value)
                        .h(tidy(canonical(r.witness, &cmax)))
                        .beta(Some(fam.beta[0].1.clone()));
                    CheckOutcome::fails(Mode::Proved, w)
                };
            }
            Err(Error::DimensionTooLarge { .. }) => {}
            Err(e) => return CheckOutcome::inconclusive(e.to_string()),
        }
    }
    let dirs = Directions::new(&cmax, ctx.opts, 21);
    if dirs.trivial {
        return CheckOutcome::vacuous(dirs.homogeneous_mode(), "C_max is {0}");
    }
    let mode = if fam.exhaustive {
        dirs.homogeneous_mode()
    } else {
        Mode::Sampled
    };
    let mut worst: Option<(f64, Vec<f64>, usize)> = None;
    for h in dirs.all() {
        let (v, j) = fam.max_side_value(&h);
        if worst.as_ref().is_none_or(|(w, _, _)| v > *w) {
            worst = Some((v, h, j));
        }
    }
    let (v, h, j) = worst.expect("nonempty");
    if passes(v) {
        CheckOutcome::holds(mode, -v)
    } else {
        CheckOutcome::fails(
            mode,
            Witness::new(v).h(tidy(h)).beta(Some(fam.beta[j].1.clone())),
        )
    }
}

/// `φ(u) = sup_{h ∈ C_max} q(u, h)` as a finite union of quadratic pieces,
/// each valid on `C_min` cut by extra rows; `+∞` off the union.
enum Phi {
    Infinite,
    Pieces(Vec<Piece>),
}

struct Piece {
    s: DMatrix<f64>,
    le: Vec<Vec<f64>>,
    eq: Vec<Vec<f64>>,
    /// Maximizing `h` as a linear map of `u` (`None` means `h = 0`), or along
    /// the ray `d` scaled by `max(0, v·u)/(−a)`.
    h_of_u: HMap,
}

enum HMap {
    Linear(DMatrix<f64>),
    Ray { d: Vec<f64>, v: Vec<f64>, a: f64 },
    Zero,
}

impl HMap {
    fn apply(&self, u: &[f64], m: usize) -> Vec<f64> {
        match self {
            HMap::Linear(mat) => (0..mat.nrows())
                .map(|i| (0..u.len()).map(|j| mat[(i, j)] * u[j]).sum())
                .collect(),
            HMap::Ray { d, v, a } => {
                let t = dot(v, u).max(0.0) / -a;
                d.iter().map(|x| t * x).collect()
            }
            HMap::Zero => vec![0.0; m],
        }
    }
}

fn phi_model(h: &DMatrix<f64>, n: usize, m: usize, cmax: &Directions, eig_tol: f64) -> Option<Phi> {
    let hxx = h.view((0, 0), (n, n)).into_owned();
    let hxy = h.view((0, n), (n, m)).into_owned();
    let hyy = h.view((n, n), (m, m)).into_owned();
    if let Some(basis) = &cmax.subspace {
        let k = basis.len();
        if k == 0 {
            return Some(Phi::Pieces(vec![Piece {
                s: hxx,
                le: vec![],
                eq: vec![],
                h_of_u: HMap::Zero,
            }]));
        }
        let v = DMatrix::from_fn(m, k, |i, j| basis[j][i]);
        let g = v.transpose() * &hyy * &v;
        let (vals, _) = sorted_eigen(&g);
        if vals.last().copied().unwrap_or(0.0) > eig_tol {
            return Some(Phi::Infinite);
        }
        let split = symmetric_split(&g, eig_tol);
        let c = v.transpose() * hxy.transpose();
        let s = &hxx - &hxy * &v * &split.pinv * &c;
        let s = (&s + s.transpose()) * 0.5;
        let range = split.kernel.transpose() * &c;
        let eq = (0..range.nrows())
            .map(|i| range.row(i).iter().cloned().collect())
            .collect();
        let hmap = -(&v * &split.pinv * &c);
        return Some(Phi::Pieces(vec![Piece {
            s,
            le: vec![],
            eq,
            h_of_u: HMap::Linear(hmap),
        }]));
    }
    if let Some(d) = &cmax.single_ray {
        let a = quad(&hyy, d);
        if a > eig_tol {
            return Some(Phi::Infinite);
        }
        let v: Vec<f64> = (0..n)
            .map(|i| (0..m).map(|j| hxy[(i, j)] * d[j]).sum())
            .collect();
        let mut pieces = vec![Piece {
            s: hxx.clone(),
            le: vec![v.clone()],
            eq: vec![],
            h_of_u: HMap::Zero,
        }];
        if a < -eig_tol {
            let vv = DMatrix::from_fn(n, n, |i, j| v[i] * v[j] / -a);
            pieces.push(Piece {
                s: &hxx + vv,
                le: vec![v.iter().map(|x| -x).collect()],
                eq: vec![],
                h_of_u: HMap::Ray {
                    d: d.clone(),
                    v: v.clone(),
                    a,
                },
            });
        }
        return Some(Phi::Pieces(pieces));
    }
    None
}

/// Joint condition: `∀u ∈ C_min ∃h ∈ C_max ∃α ∀β: q ≥ −tol` (necessary) or
/// `> 0` with margin `strict_tol` on `C_min \ {0}` (sufficient).
fn joint(ctx: &Ctx, mult: &Multipliers, strict: bool) -> CheckOutcome {
    let cmin = critical(ctx, Side::Min);
    let cmax_cone = critical(ctx, Side::Max);
    let fam = &mult.family;
    let (n, m) = (fam.n, fam.m);
    let threshold = if strict {
        ctx.opts.strict_tol
    } else {
        -ctx.opts.tol
    };
    let udirs = Directions::new(&cmin, ctx.opts, 31);
    if udirs.trivial {
        return CheckOutcome::vacuous(
            if udirs.exhaustive {
                Mode::Proved
            } else {
                Mode::Sampled
            },
            "C_min is {0}",
        );
    }
    let hdirs = Directions::new(&cmax_cone, ctx.opts, 41);

    if let Some(h) = fam.collapsed() {
        match phi_model(&h, n, m, &hdirs, ctx.opts.eig_tol) {
            Some(Phi::Infinite) => {
                return CheckOutcome::holds(Mode::Proved, f64::INFINITY)
                    .with_note("sup over C_max is +∞ for every u");
            }
            Some(Phi::Pieces(pieces)) => {
                let mut best: Option<(f64, Vec<f64>, usize)> = None;
                let mut exact = true;
                for (i, piece) in pieces.iter().enumerate() {
                    let k = PolyhedralCone {
                        dim: n,
                        le_rows: cmin
                            .le_rows
                            .iter()
                            .cloned()
                            .chain(piece.le.iter().cloned())
                            .collect(),
                        eq_rows: cmin
                            .eq_rows
                            .iter()
                            .cloned()
                            .chain(piece.eq.iter().cloned())
                            .collect(),
                    };
                    match cone_quadratic_max(&(-&piece.s), &k) {
                        Ok(None) => {}
                        Ok(Some(r)) => {
                            let v = -r.value;
                            if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                                best = Some((v, canonical(r.witness, &k), i));
                            }
                        }
                        Err(_) => exact = false,
                    }
                }
                if exact {
                    return match best {
                        None => CheckOutcome::holds(Mode::Proved, f64::INFINITY)
                            .with_note("sup over C_max is +∞ for every nonzero u"),
                        Some((v, _, _)) if v >= threshold => CheckOutcome::holds(Mode::Proved, v),
                        Some((v, u, i)) => {
                            let hstar = pieces[i].h_of_u.apply(&u, m);
                            let w = Witness::new(v)
                                .u(tidy(u))
                                .h(tidy(hstar))
                                .alpha(Some(fam.alpha[0].1.clone()))
                                .beta(Some(fam.beta[0].1.clone()));
                            CheckOutcome::fails(Mode::Proved, w)
                        }
                    };
                }
            }
            None => {}
        }
    }

    // Sampled search over h for every direction u.
    let mut hcands: Vec<Vec<f64>> = vec![vec![0.0; m]];
    let hbase: Vec<Vec<f64>> = hdirs
        .gens
        .iter()
        .chain(hdirs.samples.iter().take(64))
        .cloned()
        .collect();
    for d in &hbase {
        for t in H_LADDER {
            hcands.push(d.iter().map(|x| t * x).collect());
        }
    }
    let hyy0 = fam.h_min(0, 0).view((n, n), (m, m)).into_owned();
    let hxy0 = fam.h_min(0, 0).view((0, n), (n, m)).into_owned();
    let us = udirs.all();
    let results: Vec<(f64, Vec<f64>)> = us
        .par_iter()
        .map(|u| {
            let mut cands = hcands.clone();
            // Line maximizers of the first (α, β) pair along each base direction.
            for d in &hbase {
                let a = quad(&hyy0, d);
                let b: f64 = (0..n)
                    .map(|i| u[i] * (0..m).map(|j| hxy0[(i, j)] * d[j]).sum::<f64>())
                    .sum();
                if a < 0.0 && b > 0.0 {
                    let t = b / -a;
                    cands.push(d.iter().map(|x| t * x).collect());
                }
            }
            let mut best = (f64::NEG_INFINITY, vec![0.0; m]);
            for h in cands {
                let v = fam.joint_value(u, &h);
                if v > best.0 {
                    best = (v, h);
                }
            }
            best
        })
        .collect();
    let (worst_i, worst) = results
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .expect("nonempty");
    let note = "sup over h estimated on sampled directions of C_max";
    if worst.0 >= threshold {
        let mode = if fam.exhaustive && udirs.exhaustive && udirs.covers_sphere {
            Mode::Proved
        } else {
            Mode::Sampled
        };
        CheckOutcome::holds(mode, worst.0).with_note(note)
    } else {
        let w = Witness::new(worst.0)
            .u(tidy(us[worst_i].clone()))
            .h(tidy(worst.1.clone()));
        CheckOutcome::fails(Mode::Sampled, w).with_note(note)
    }
}

/// Restricted Schur complement tests `(sufficient, necessary)`.
fn schur(ctx: &Ctx, mult: &Multipliers, first_order_ok: bool) -> (CheckOutcome, CheckOutcome) {
    let fam = &mult.family;
    let (n, m) = (fam.n, fam.m);
    let nd = fam.beta.iter().position(|_| true).and_then(|_| {
        (0..fam.beta.len()).find(|&j| {
            let h = fam.h_min(0, j);
            let (vals, _) = sorted_eigen(&h.view((n, n), (m, m)).into_owned());
            m > 0 && vals.last().is_some_and(|v| *v < -ctx.opts.eig_tol)
        })
    });
    let Some(j) = nd else {
        let o = CheckOutcome::inconclusive("yy-block not negative definite");
        return (o.clone(), o);
    };
    let cmin = critical(ctx, Side::Min);
    let schur_of = |h: &DMatrix<f64>, v: &DMatrix<f64>| -> (DMatrix<f64>, DMatrix<f64>) {
        let hxx = h.view((0, 0), (n, n)).into_owned();
        let hxy = h.view((0, n), (n, m)).into_owned();
        let hyy = h.view((n, n), (m, m)).into_owned();
        let g = v.transpose() * &hyy * v;
        let ginv = g
            .try_inverse()
            .unwrap_or_else(|| DMatrix::zeros(v.ncols(), v.ncols()));
        let c = v.transpose() * hxy.transpose();
        let s = &hxx - &hxy * v * &ginv * &c;
        ((&s + s.transpose()) * 0.5, -(v * ginv * c))
    };
    let full = DMatrix::identity(m, m);

    // Necessary: ∀u ∈ C_min ∃α: uᵀ S(α) u ≥ −tol, with S over the whole y-space.
    let necessary = {
        let mats: Vec<DMatrix<f64>> = (0..fam.alpha.len())
            .map(|a| schur_of(&fam.h_min(a, j), &full).0)
            .collect();
        let distinct = mats.windows(2).any(|w| (&w[0] - &w[1]).amax() > 1e-12);
        if !distinct && fam.exhaustive {
            match cone_quadratic_max(&(-&mats[0]), &cmin) {
                Ok(None) => CheckOutcome::vacuous(Mode::Proved, "C_min is {0}"),
                Ok(Some(r)) if -r.value >= -ctx.opts.tol => {
                    CheckOutcome::holds(Mode::Proved, -r.value)
                }
                Ok(Some(r)) => CheckOutcome::fails(
                    Mode::Proved,
                    Witness::new(-r.value)
                        .u(tidy(canonical(r.witness, &cmin)))
                        .alpha(Some(fam.alpha[0].1.clone()))
                        .beta(Some(fam.beta[j].1.clone())),
                ),
                Err(e) => CheckOutcome::inconclusive(e.to_string()),
            }
        } else {
            let dirs = Directions::new(&cmin, ctx.opts, 51);
            if dirs.trivial {
                CheckOutcome::vacuous(dirs.homogeneous_mode(), "C_min is {0}")
            } else {
                let mut worst = (f64::INFINITY, Vec::new());
                for u in dirs.all() {
                    let v = mats
                        .iter()
                        .map(|s| quad(s, &u))
                        .fold(f64::NEG_INFINITY, f64::max);
                    if v < worst.0 {
                        worst = (v, u);
                    }
                }
                if worst.0 >= -ctx.opts.tol {
                    CheckOutcome::holds(Mode::Sampled, worst.0)
                } else {
                    CheckOutcome::fails(Mode::Sampled, Witness::new(worst.0).u(tidy(worst.1)))
                }
            }
        }
    };

    // Sufficient: the same test with strict margin, sup taken over C_max,
    // which must be a subspace; every β must give the same Hessian.
    let sufficient = (|| {
        if !first_order_ok {
            return CheckOutcome::inconclusive("first-order conditions not established");
        }
        let Some(h) = fam.collapsed() else {
            return CheckOutcome::inconclusive(
                "Lagrangian Hessian depends on the multiplier choice",
            );
        };
        let hdirs = Directions::new(&critical(ctx, Side::Max), ctx.opts, 61);
        let Some(basis) = &hdirs.subspace else {
            return CheckOutcome::inconclusive("C_max is not a subspace");
        };
        let v = if basis.is_empty() {
            DMatrix::zeros(m, 0)
        } else {
            DMatrix::from_fn(m, basis.len(), |i, c| basis[c][i])
        };
        let (s, hmap) = schur_of(&h, &v);
        match cone_quadratic_max(&(-&s), &cmin) {
            Ok(None) => CheckOutcome::vacuous(Mode::Proved, "C_min is {0}"),
            Ok(Some(r)) if -r.value >= ctx.opts.strict_tol => {
                CheckOutcome::holds(Mode::Proved, -r.value)
            }
            Ok(Some(r)) => {
                let u = tidy(canonical(r.witness, &cmin));
                let hs: Vec<f64> = (0..m)
                    .map(|i| (0..n).map(|c| hmap[(i, c)] * u[c]).sum())
                    .collect();
                CheckOutcome::fails(Mode::Proved, Witness::new(-r.value).u(u).h(tidy(hs)))
            }
            Err(e) => CheckOutcome::inconclusive(e.to_string()),
        }
    })();
    (sufficient, necessary)
}

/// Indicator data for one block; `None` when the nonsmooth objective meets
/// nonlinear constraints.
fn indicator_case(ctx: &Ctx, side: Side, mult: Option<&Multipliers>) -> Option<IndicatorCase> {
    let cs = ctx.prob.constraints(side);
    let cone = match side {
        Side::Min => &ctx.tx,
        Side::Max => &ctx.ty,
    };
    if cs.is_empty() {
        return Some(IndicatorCase::WholeSpace);
    }
    if cs.all_affine() {
        return Some(IndicatorCase::Polyhedral(cone.clone()));
    }
    let mult = mult?;
    let (mp, lams, rays) = match side {
        Side::Min => (&mult.mp_min, &mult.family.alpha, &mult.family.alpha_rays),
        Side::Max => (&mult.mp_max, &mult.family.beta, &mult.family.beta_rays),
    };
    let axis = side.axis();
    let q = Point::from_block(axis, ctx.p.block(axis));
    let hs: Vec<DMatrix<f64>> = mp
        .constraint_indices
        .iter()
        .map(|&i| hessian(&cs.constraints()[i].expr, &q))
        .collect::<Result<_>>()
        .ok()?;
    // Multipliers in component coordinates; probes along recession rays.
    let comps: Vec<Vec<f64>> = lams
        .iter()
        .map(|(_, full)| mp.constraint_indices.iter().map(|&i| full[i]).collect())
        .collect();
    let mut multipliers = comps.clone();
    if !rays.is_empty() {
        if let Ok(v) = vertices(mp) {
            for r in &v.rays {
                for c in &comps {
                    multipliers.push(c.iter().zip(r).map(|(a, b)| a + 10.0 * b).collect());
                }
            }
        }
    }
    Some(IndicatorCase::NonlinearPolyhedral {
        tangent: cone.clone(),
        constraint_hessians: hs,
        multipliers,
    })
}

/// Directional second-order necessary conditions `(max side, joint)`.
fn nonsmooth(ctx: &Ctx, mult: Option<&Multipliers>) -> Result<(CheckOutcome, CheckOutcome)> {
    if let Some(o) = ctx.mscq_gate() {
        return Ok((o.clone(), o));
    }
    let (m, tol) = (ctx.prob.m, ctx.opts.tol);
    let xd = Directions::new(&ctx.tx, ctx.opts, 71);
    let yd = Directions::new(&ctx.ty, ctx.opts, 81);

    // Hypothesis gate: the separation property on probe pairs.
    let probe = |d: &Directions| -> Vec<Vec<f64>> {
        let mut v: Vec<Vec<f64>> = d
            .gens
            .iter()
            .chain(d.samples.iter().take(16))
            .cloned()
            .collect();
        if v.is_empty() {
            v.push(vec![0.0; d.gens.first().map_or(0, |g| g.len())]);
        }
        v
    };
    for u in probe(&xd).iter().filter(|u| u.len() == ctx.prob.n) {
        for h in probe(&yd).iter().filter(|h| h.len() == m) {
            let defect = separation_defect(&ctx.prob.f, ctx.p, u, h)?;
            if defect > tol {
                return Err(Error::SeparationHypothesisFailed {
                    u: u.clone(),
                    h: h.clone(),
                    defect,
                });
            }
        }
    }

    let (Some(case_x), Some(case_y)) = (
        indicator_case(ctx, Side::Min, mult),
        indicator_case(ctx, Side::Max, mult),
    ) else {
        let o = CheckOutcome::inconclusive("nonlinear constraints with a nonsmooth objective");
        return Ok((o.clone(), o));
    };
    let ind_y = |h: &[f64]| -> Result<IndicatorSecondSub> {
        let dy = ctx.d1(&ctx.pad(Axis::Y, h));
        indicator_second_sub_directional(&case_y, dy, h, tol)
    };

    // Max side over critical h.
    let max_side = {
        let mut worst: Option<(f64, Vec<f64>)> = None;
        for h in yd.all() {
            let IndicatorSecondSub::Finite(i) = ind_y(&h)? else {
                continue;
            };
            let v = ctx.d2(&ctx.pad(Axis::Y, &h)) - i;
            if worst.as_ref().is_none_or(|(w, _)| v > *w) {
                worst = Some((v, h));
            }
        }
        let mode = yd.homogeneous_mode();
        match worst {
            None => CheckOutcome::vacuous(mode, "no critical direction in T_Y"),
            Some((v, _)) if v <= tol => CheckOutcome::holds(mode, -v),
            Some((v, h)) => CheckOutcome::fails(mode, Witness::new(v).h(tidy(h))),
        }
    };

    // Joint condition over critical u, searching h.
    let mut hcands: Vec<Vec<f64>> = vec![vec![0.0; m]];
    for d in yd.gens.iter().chain(yd.samples.iter().take(64)) {
        for t in H_LADDER {
            hcands.push(d.iter().map(|x| t * x).collect());
        }
    }
    let hvals: Vec<Option<f64>> = hcands
        .iter()
        .map(|h| {
            Ok(match ind_y(h)? {
                IndicatorSecondSub::Finite(v) => Some(v),
                IndicatorSecondSub::Infinite => None,
            })
        })
        .collect::<Result<_>>()?;
    let us = xd.all();
    let per_u: Vec<Result<Option<(f64, Vec<f64>)>>> = us
        .par_iter()
        .map(|u| {
            let dx = ctx.d1(&ctx.pad(Axis::X, u));
            let IndicatorSecondSub::Finite(ix) =
                indicator_second_sub_directional(&case_x, -dx, u, tol)?
            else {
                return Ok(None);
            };
            let mut best = (f64::NEG_INFINITY, vec![0.0; m]);
            for (h, iy) in hcands.iter().zip(&hvals) {
                let Some(iy) = iy else { continue };
                let v = ctx.d2(&join(u, h)) + ix - iy;
                if v > best.0 {
                    best = (v, h.clone());
                }
            }
            Ok(Some(best))
        })
        .collect();
    let mut worst: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for (u, r) in us.iter().zip(per_u) {
        if let Some((v, h)) = r? {
            if worst.as_ref().is_none_or(|(w, _, _)| v < *w) {
                worst = Some((v, u.clone(), h));
            }
        }
    }
    let joint = match worst {
        None => CheckOutcome::vacuous(xd.homogeneous_mode(), "no critical direction in T_X"),
        Some((v, _, _)) if v >= -tol => CheckOutcome::holds(xd.homogeneous_mode(), v),
        Some((v, u, h)) => {
            CheckOutcome::fails(Mode::Sampled, Witness::new(v).u(tidy(u)).h(tidy(h)))
                .with_note("no h found among sampled candidates")
        }
    };
    Ok((max_side, joint))
}

fn run_checks(ctx: &Ctx) -> Result<CertificateReport> {
    let fo_x = first_order_primal(ctx, Side::Min);
    let fo_y = first_order_primal(ctx, Side::Max);
    let du_x = first_order_dual(ctx, Side::Min)?;
    let du_y = first_order_dual(ctx, Side::Max)?;
    let first_ok = fo_x.ok() && fo_y.ok();

    let mult = multipliers(ctx)?;
    let (nec_max, nec_joint, suf_max, suf_joint, schur_suf, schur_nec, weak) = match &mult {
        Ok(mu) => {
            let nm = max_side(ctx, mu, false);
            let nj = joint(ctx, mu, false);
            let sm = max_side(ctx, mu, true);
            let sj = joint(ctx, mu, true);
            let (ss, sn) = schur(ctx, mu, first_ok);
            let mut weak = sm.clone();
            if weak.ok() {
                weak = weak.with_note("local minimax ⇔ calm local minimax at this point");
            }
            (nm, nj, sm, sj, ss, sn, weak)
        }
        Err(o) => (
            o.clone(),
            o.clone(),
            o.clone(),
            o.clone(),
            o.clone(),
            o.clone(),
            o.clone(),
        ),
    };
    let (ns_max, ns_joint) = match nonsmooth(ctx, mult.as_ref().ok()) {
        Ok(pair) => pair,
        Err(e @ Error::SeparationHypothesisFailed { .. }) => {
            let o = CheckOutcome::inconclusive(e.to_string());
            (o.clone(), o)
        }
        Err(e) => return Err(e),
    };

    let mut assumptions = vec![
        "objective is semidifferentiable: subderivative and superderivative coincide".to_string(),
    ];
    if ctx.prob.is_constrained() {
        assumptions.push(if ctx.prob.assume_mscq {
            "MSCQ asserted for the x- and y-constraint systems at the candidate".to_string()
        } else if ctx.mscq {
            "MSCQ taken from affinity of all constraints".to_string()
        } else {
            "MSCQ not asserted; constraint-dependent checks are inconclusive".to_string()
        });
    }
    if !ctx.prob.y_constraints.is_empty() {
        assumptions.push(
            "δ_Y twice epi-differentiable at ȳ for d_y f (polyhedral constraint image)".to_string(),
        );
        assumptions.push("f(x̄, ·) Lipschitz continuous around ȳ".to_string());
    }

    let mut report = CertificateReport {
        first_order_primal_x: fo_x,
        first_order_primal_y: fo_y,
        first_order_dual_x: du_x,
        first_order_dual_y: du_y,
        so_necessary_max: nec_max,
        so_necessary_joint: nec_joint,
        so_sufficient_max: suf_max,
        so_sufficient_joint: suf_joint,
        schur_sufficient: schur_suf,
        schur_necessary: schur_nec,
        nonsmooth_necessary_max: ns_max,
        nonsmooth_necessary_joint: ns_joint,
        weak_sufficient_flag: weak,
        assumptions,
        conclusion: Conclusion::Consistent,
    };
    report.conclusion = conclude(&report);
    Ok(report)
}

fn conclude(r: &CertificateReport) -> Conclusion {
    let checks = r.checks();
    let get = |name: &str| {
        checks
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, o)| *o)
            .expect("known check")
    };
    if let Some(name) = NECESSARY.iter().find(|n| get(n).proved_failure()) {
        return Conclusion::Refuted {
            which: name.to_string(),
        };
    }
    if let Some(name) = NECESSARY.iter().find(|n| get(n).verdict == Verdict::Fails) {
        return Conclusion::Inconclusive {
            reason: format!("{name} fails on sampled directions only"),
        };
    }
    let first = r.first_order_primal_x.ok() && r.first_order_primal_y.ok();
    if first
        && r.first_order_primal_x.mode == Mode::Proved
        && r.first_order_primal_y.mode == Mode::Proved
        && r.so_sufficient_max.proved_ok()
        && r.so_sufficient_joint.proved_ok()
    {
        return Conclusion::Certified;
    }
    let smooth_nec = r.so_necessary_max.ok() && r.so_necessary_joint.ok();
    let ns_nec = r.nonsmooth_necessary_max.ok() && r.nonsmooth_necessary_joint.ok();
    if first && (smooth_nec || ns_nec) {
        return Conclusion::Consistent;
    }
    let reason = checks
        .iter()
        .find(|(_, o)| o.verdict == Verdict::Inconclusive && !o.note.is_empty())
        .map(|(n, o)| format!("{n}: {}", o.note))
        .unwrap_or_else(|| "necessary conditions not established".to_string());
    Conclusion::Inconclusive { reason }
}

/// Runs every check at `p`.
pub fn certify(
    prob: &MinimaxProblem,
    p: &Point,
    opts: &CertifyOptions,
) -> Result<CertificateReport> {
    let ctx = Ctx::new(prob, p, opts)?;
    run_checks(&ctx)
}

/// Primal first-order conditions `(x side, y side)`.
pub fn check_first_order(
    prob: &MinimaxProblem,
    p: &Point,
    opts: &CertifyOptions,
) -> Result<(CheckOutcome, CheckOutcome)> {
    let ctx = Ctx::new(prob, p, opts)?;
    Ok((
        first_order_primal(&ctx, Side::Min),
        first_order_primal(&ctx, Side::Max),
    ))
}

/// Dual first-order conditions via multiplier nonemptiness `(x side, y side)`.
pub fn check_first_order_dual(
    prob: &MinimaxProblem,
    p: &Point,
    opts: &CertifyOptions,
) -> Result<(CheckOutcome, CheckOutcome)> {
    let ctx = Ctx::new(prob, p, opts)?;
    Ok((
        first_order_dual(&ctx, Side::Min)?,
        first_order_dual(&ctx, Side::Max)?,
    ))
}

/// Second-order necessary conditions `(max side, joint)`.
pub fn check_second_order_necessary(
    prob: &MinimaxProblem,
    p: &Point,
    opts: &CertifyOptions,
) -> Result<(CheckOutcome, CheckOutcome)> {
    let ctx = Ctx::new(prob, p, opts)?;
    Ok(match multipliers(&ctx)? {
        Ok(mu) => (max_side(&ctx, &mu, false), joint(&ctx, &mu, false)),
        Err(o) => (o.clone(), o),
    })
}

/// Second-order sufficient conditions `(max side, joint)`.
pub fn check_second_order_sufficient(
    prob: &MinimaxProblem,
    p: &Point,
    opts: &CertifyOptions,
) -> Result<(CheckOutcome, CheckOutcome)> {
    let ctx = Ctx::new(prob, p, opts)?;
    Ok(match multipliers(&ctx)? {
        Ok(mu) => (max_side(&ctx, &mu, true), joint(&ctx, &mu, true)),
        Err(o) => (o.clone(), o),
    })
}

/// Schur complement tests `(sufficient, necessary)`.
pub fn schur_check(
    prob: &MinimaxProblem,
    p: &Point,
    opts: &CertifyOptions,
) -> Result<(CheckOutcome, CheckOutcome)> {
    let ctx = Ctx::new(prob, p, opts)?;
    let first_ok =
        first_order_primal(&ctx, Side::Min).ok() && first_order_primal(&ctx, Side::Max).ok();
    Ok(match multipliers(&ctx)? {
        Ok(mu) => schur(&ctx, &mu, first_ok),
        Err(o) => (o.clone(), o),
    })
}

/// Directional second-order necessary conditions `(max side, joint)`.
pub fn check_nonsmooth_necessary(
    prob: &MinimaxProblem,
    p: &Point,
    opts: &CertifyOptions,
) -> Result<(CheckOutcome, CheckOutcome)> {
    let ctx = Ctx::new(prob, p, opts)?;
    let mult = multipliers(&ctx)?;
    nonsmooth(&ctx, mult.as_ref().ok())
}

/// Strict negativity of the max-side Lagrangian Hessian on `C_max \ {0}`.
pub fn weak_sufficient_flag(
    prob: &MinimaxProblem,
    p: &Point,
    opts: &CertifyOptions,
) -> Result<CheckOutcome> {
    let ctx = Ctx::new(prob, p, opts)?;
    Ok(match multipliers(&ctx)? {
        Ok(mu) => {
            let o = max_side(&ctx, &mu, true);
            if o.ok() {
                o.with_note("local minimax ⇔ calm local minimax at this point")
            } else {
                o
            }
        }
        Err(o) => o,
    })
}

/// Euclidean norm of the stationarity residual, for diagnostics.
pub fn gradient_norm(prob: &MinimaxProblem, p: &Point) -> Result<f64> {
    let (gx, gy) = block_gradients(prob, p)?;
    Ok(norm(&join(&gx, &gy)))
}
