//! Multiplier sets, critical cones and Lagrangian Hessians for problems with
//! constraint systems `φ(x) ∈ R^{p1}_− × {0}^{p2}` and `ψ(y) ∈ R^{q1}_− × {0}^{q2}`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cones::{
    active_set, generators, lp_feasible, tangent_cone, Bound, ConstraintKind, ConstraintSystem,
    PolyhedralCone,
};
use crate::error::{Error, Result};
use crate::expr::{gradient, hessian, Axis, Expr, Point};
use crate::linalg::{columns, null_space, RANK_TOL};

/// Largest multiplier dimension for vertex enumeration.
pub const VERTEX_DIM_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Min,
    Max,
}

impl Side {
    pub fn axis(self) -> Axis {
        match self {
            Side::Min => Axis::X,
            Side::Max => Axis::Y,
        }
    }
}

/// `min_{x ∈ X} max_{y ∈ Y} f(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxProblem {
    pub n: usize,
    pub m: usize,
    pub f: Expr,
    pub x_constraints: ConstraintSystem,
    pub y_constraints: ConstraintSystem,
    pub assume_mscq: bool,
    /// Per-coordinate bounds for `x` then `y`, used by global oracle tests.
    pub bounding_box: Option<Vec<(f64, f64)>>,
}

impl MinimaxProblem {
    pub fn new(
        f: Expr,
        x_constraints: ConstraintSystem,
        y_constraints: ConstraintSystem,
        assume_mscq: bool,
    ) -> Result<Self> {
        let n = x_constraints.dim();
        let m = y_constraints.dim();
        if x_constraints.block() != Axis::X || y_constraints.block() != Axis::Y {
            return Err(Error::Validation(
                "constraint systems must be given for x then y".into(),
            ));
        }
        f.check_dims(n, m)?;
        Ok(Self {
            n,
            m,
            f,
            x_constraints,
            y_constraints,
            assume_mscq,
            bounding_box: None,
        })
    }

    pub fn unconstrained(f: Expr, n: usize, m: usize) -> Result<Self> {
        Self::new(
            f,
            ConstraintSystem::unconstrained(Axis::X, n),
            ConstraintSystem::unconstrained(Axis::Y, m),
            false,
        )
    }

    pub fn with_box(mut self, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.len() != self.n + self.m {
            return Err(Error::Validation(format!(
                "box has {} entries, expected {}",
                bounds.len(),
                self.n + self.m
            )));
        }
        if let Some((i, _)) = bounds
            .iter()
            .enumerate()
            .find(|(_, (lo, hi))| !(lo <= hi && lo.is_finite() && hi.is_finite()))
        {
            return Err(Error::Validation(format!(
                "box entry {} is not a finite interval",
                i + 1
            )));
        }
        self.bounding_box = Some(bounds);
        Ok(self)
    }

    pub fn constraints(&self, side: Side) -> &ConstraintSystem {
        match side {
            Side::Min => &self.x_constraints,
            Side::Max => &self.y_constraints,
        }
    }

    /// `f` scaled by a constant.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            f: Expr::constant(c).mul(self.f.clone()),
            ..self.clone()
        }
    }

    /// Checks dimensions and feasibility of `p`.
    pub fn check_point(&self, p: &Point, tol: f64) -> Result<()> {
        if p.n() != self.n || p.m() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "point has dimensions ({}, {}), problem has ({}, {})",
                p.n(),
                p.m(),
                self.n,
                self.m
            )));
        }
        active_set(&self.x_constraints, &p.x, tol)?;
        active_set(&self.y_constraints, &p.y, tol)?;
        Ok(())
    }

    /// Mixed constraints are treated as satisfying the qualification when
    /// asserted or when every constraint is affine.
    pub fn mscq_holds(&self) -> bool {
        self.assume_mscq || (self.x_constraints.all_affine() && self.y_constraints.all_affine())
    }

    pub fn is_constrained(&self) -> bool {
        !self.x_constraints.is_empty() || !self.y_constraints.is_empty()
    }
}

/// `(∇_x f, ∇_y f)` at `p`.
pub fn block_gradients(prob: &MinimaxProblem, p: &Point) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = gradient(&prob.f, p)?;
    Ok((g[..prob.n].to_vec(), g[prob.n..].to_vec()))
}

/// `{λ : M λ = r, λ_i ≥ 0 for sign-constrained i}` over the active and
/// equality constraints of one side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierPolyhedron {
    pub side: Side,
    /// Block dimension × number of components; column `i` is `∇g_i`.
    pub matrix: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub sign_constrained: Vec<bool>,
    /// Constraint index of each component.
    pub constraint_indices: Vec<usize>,
    pub n_constraints: usize,
}

impl MultiplierPolyhedron {
    pub fn components(&self) -> usize {
        self.constraint_indices.len()
    }

    pub fn sign_constrained_indices(&self) -> Vec<usize> {
        (0..self.components())
            .filter(|&i| self.sign_constrained[i])
            .collect()
    }

    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.components())
            .filter(|&i| !self.sign_constrained[i])
            .collect()
    }

    /// `‖M λ − r‖∞`.
    pub fn residual(&self, lam: &[f64]) -> f64 {
        self.matrix
            .iter()
            .zip(&self.rhs)
            .map(|(row, r)| (row.iter().zip(lam).map(|(a, b)| a * b).sum::<f64>() - r).abs())
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, lam: &[f64], tol: f64) -> bool {
        lam.len() == self.components()
            && self.residual(lam) <= tol
            && lam
                .iter()
                .zip(&self.sign_constrained)
                .all(|(v, s)| !s || *v >= -tol)
    }

    fn bounds(&self) -> Vec<Bound> {
        self.sign_constrained
            .iter()
            .map(|&s| if s { Bound::NONNEG } else { Bound::FREE })
            .collect()
    }

    /// Some member, or `None` when empty.
    pub fn feasible_point(&self) -> Result<Option<Vec<f64>>> {
        lp_feasible(&self.matrix, &self.rhs, &[], &[], &self.bounds())
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.feasible_point()?.is_none())
    }

    /// Embeds component values into a vector indexed by constraint, with
    /// zeros for inactive constraints.
    pub fn expand(&self, lam: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_constraints];
        for (v, &i) in lam.iter().zip(&self.constraint_indices) {
            out[i] = *v;
        }
        out
    }
}

/// `Λ_min` (`∇_x f + ∇φᵀα = 0`) or `Λ_max` (`−∇_y f + ∇ψᵀβ = 0`).
pub fn multiplier_set(
    prob: &MinimaxProblem,
    p: &Point,
    side: Side,
    tol: f64,
) -> Result<MultiplierPolyhedron> {
    let cs = prob.constraints(side);
    let z = p.block(side.axis());
    let active = active_set(cs, z, tol)?;
    let (gx, gy) = block_gradients(prob, p)?;
    let rhs = match side {
        Side::Min => gx.iter().map(|v| -v).collect(),
        Side::Max => gy,
    };
    let mut indices = Vec::new();
    let mut sign = Vec::new();
    for (i, c) in cs.constraints().iter().enumerate() {
        match c.kind {
            ConstraintKind::Eq => {
                indices.push(i);
                sign.push(false);
            }
            ConstraintKind::Le if active.contains(&i) => {
                indices.push(i);
                sign.push(true);
            }
            ConstraintKind::Le => {}
        }
    }
    let q = Point::from_block(side.axis(), z);
    let grads: Vec<Vec<f64>> = indices
        .iter()
        .map(|&i| gradient(&cs.constraints()[i].expr, &q))
        .collect::<Result<_>>()?;
    let dim = cs.dim();
    let matrix = (0..dim)
        .map(|r| grads.iter().map(|g| g[r]).collect())
        .collect();
    Ok(MultiplierPolyhedron {
        side,
        matrix,
        rhs,
        sign_constrained: sign,
        constraint_indices: indices,
        n_constraints: cs.len(),
    })
}

/// `C_min` or `C_max`: the tangent cone cut by the block gradient of `f`.
pub fn critical_cone(
    prob: &MinimaxProblem,
    p: &Point,
    side: Side,
    tol: f64,
) -> Result<PolyhedralCone> {
    let cs = prob.constraints(side);
    let k = tangent_cone(cs, p.block(side.axis()), tol)?;
    let (gx, gy) = block_gradients(prob, p)?;
    let g = match side {
        Side::Min => gx,
        Side::Max => gy,
    };
    Ok(if g.iter().any(|v| *v != 0.0) {
        k.with_eq_row(g)
    } else {
        k
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierVertices {
    /// Basic feasible points (one per minimal face when the set has lines).
    pub vertices: Vec<Vec<f64>>,
    /// Recession directions; lineality appears as `±` pairs.
    pub rays: Vec<Vec<f64>>,
    pub empty: bool,
}

/// Vertices and recession rays of a multiplier polyhedron.
pub fn vertices(mp: &MultiplierPolyhedron) -> Result<MultiplierVertices> {
    let k = mp.components();
    if k > VERTEX_DIM_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim: k,
            limit: VERTEX_DIM_LIMIT,
        });
    }
    let Some(fallback) = mp.feasible_point()? else {
        return Ok(MultiplierVertices {
            vertices: Vec::new(),
            rays: Vec::new(),
            empty: true,
        });
    };
    if k == 0 {
        return Ok(MultiplierVertices {
            vertices: vec![Vec::new()],
            rays: Vec::new(),
            empty: false,
        });
    }

    // Lines of the polyhedron: Md = 0 with d vanishing on signed components.
    let signed = mp.sign_constrained_indices();
    let mut line_rows = mp.matrix.clone();
    for &i in &signed {
        let mut e = vec![0.0; k];
        e[i] = 1.0;
        line_rows.push(e);
    }
    let lines = columns(&null_space(&line_rows, k));

    let scale = mp
        .matrix
        .iter()
        .flatten()
        .chain(&mp.rhs)
        .fold(1.0f64, |a, v| a.max(v.abs()));
    let tol = 1e-9 * scale;
    let mut found: Vec<Vec<f64>> = Vec::new();
    for mask in 0u32..(1u32 << signed.len()) {
        let mut rows: Vec<Vec<f64>> = mp.matrix.clone();
        let mut rhs = mp.rhs.clone();
        for (b, &i) in signed.iter().enumerate() {
            if mask & (1 << b) != 0 {
                let mut e = vec![0.0; k];
                e[i] = 1.0;
                rows.push(e);
                rhs.push(0.0);
            }
        }
        for l in &lines {
            rows.push(l.clone());
            rhs.push(0.0);
        }
        let Some(sol) = unique_solution(&rows, &rhs, k) else {
            continue;
        };
        if !mp.contains(&sol, tol) {
            continue;
        }
        let sol: Vec<f64> = sol
            .iter()
            .zip(&mp.sign_constrained)
            .map(|(v, &s)| if s && *v < 0.0 { 0.0 } else { *v })
            .collect();
        if !found.iter().any(|f| {
            f.iter()
                .zip(&sol)
                .all(|(a, b)| (a - b).abs() <= 1e-9 * scale)
        }) {
            found.push(sol);
        }
    }
    if found.is_empty() {
        found.push(fallback);
    }

    let mut le_rows = Vec::new();
    for &i in &signed {
        let mut e = vec![0.0; k];
        e[i] = -1.0;
        le_rows.push(e);
    }
    let rec = PolyhedralCone::new(k, le_rows, mp.matrix.clone())?;
    let rays = generators(&rec, VERTEX_DIM_LIMIT)?.conic_generators();
    Ok(MultiplierVertices {
        vertices: found,
        rays,
        empty: false,
    })
}

/// The solution of `A λ = b` when `A` has full column rank and the system is
/// consistent.
fn unique_solution(rows: &[Vec<f64>], rhs: &[f64], k: usize) -> Option<Vec<f64>> {
    if rows.len() < k {
        return None;
    }
    let a = DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j]);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 || svd.singular_values.iter().any(|s| *s <= RANK_TOL * smax) {
        return None;
    }
    let b = DVector::from_column_slice(rhs);
    let x = svd.solve(&b, RANK_TOL * smax).ok()?;
    let resid = (&a * &x - &b).amax();
    let bscale = b.amax().max(1.0);
    if resid > 1e-9 * bscale * smax.max(1.0) {
        return None;
    }
    Some(x.iter().cloned().collect())
}

/// `∇²L_min` over `(x, y)` and `∇²_yy L_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianHessians {
    pub h_min: DMatrix<f64>,
    pub h_max_yy: DMatrix<f64>,
}

impl LagrangianHessians {
    pub fn xx(&self, n: usize) -> DMatrix<f64> {
        self.h_min.view((0, 0), (n, n)).into_owned()
    }

    pub fn xy(&self, n: usize) -> DMatrix<f64> {
        let m = self.h_min.nrows() - n;
        self.h_min.view((0, n), (n, m)).into_owned()
    }

    pub fn yy(&self, n: usize) -> DMatrix<f64> {
        let m = self.h_min.nrows() - n;
        self.h_min.view((n, n), (m, m)).into_owned()
    }
}

/// Lagrangian Hessians at full-length multipliers (one entry per
/// constraint, zeros allowed).
pub fn lagrangian_hessians(
    prob: &MinimaxProblem,
    p: &Point,
    alpha: &[f64],
    beta: &[f64],
) -> Result<LagrangianHessians> {
    if alpha.len() != prob.x_constraints.len() || beta.len() != prob.y_constraints.len() {
        return Err(Error::DimensionMismatch(format!(
            "multipliers have lengths ({}, {}), expected ({}, {})",
            alpha.len(),
            beta.len(),
            prob.x_constraints.len(),
            prob.y_constraints.len()
        )));
    }
    let n = prob.n;
    let mut h = hessian(&prob.f, p)?;
    let px = Point::from_block(Axis::X, &p.x);
    for (c, &a) in prob.x_constraints.constraints().iter().zip(alpha) {
        if a != 0.0 {
            let hc = hessian(&c.expr, &px)?;
            let mut block = h.view_mut((0, 0), (n, n));
            block += hc * a;
        }
    }
    let py = Point::from_block(Axis::Y, &p.y);
    for (c, &b) in prob.y_constraints.constraints().iter().zip(beta) {
        if b != 0.0 {
            let hc = hessian(&c.expr, &py)?;
            let mut block = h.view_mut((n, n), (prob.m, prob.m));
            block -= hc * b;
        }
    }
    let h_max_yy = h.view((n, n), (prob.m, prob.m)).into_owned();
    Ok(LagrangianHessians { h_min: h, h_max_yy })
}
