//! Constraint systems and polyhedral cone machinery.
//!
//! A block constraint system `g(z) ∈ R^{p1}_− × {0}^{p2}` is linearized at a
//! feasible point into the cone `{w : ∇g_i·w ≤ 0 (i active), ∇g_j·w = 0}`.
//! The linearization equals the tangent cone under metric subregularity,
//! which is asserted by the caller and never checked here.

mod indicator;
mod lp;
mod quadratic;
mod rays;
mod sample;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{gradient, hessian, Axis, Expr, Point};
use crate::linalg::{dot, norm};

pub use indicator::{
    indicator_second_sub, indicator_second_sub_directional, IndicatorCase, IndicatorSecondSub,
};
pub use lp::{lp_feasible, Bound};
pub use quadratic::{cone_quadratic_max, ConeQuadraticMax};
pub use rays::{extreme_rays, generators, RaySet, EXHAUSTIVE_DIM_LIMIT};
pub use sample::sample_cone_directions;

/// Default activity tolerance.
pub const ACTIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    /// `g(z) ≤ 0`
    Le,
    /// `g(z) = 0`
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub expr: Expr,
    pub kind: ConstraintKind,
}

/// Constraints on one block of variables. Empty means the whole space.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    block: Axis,
    dim: usize,
    constraints: Vec<Constraint>,
}

impl ConstraintSystem {
    pub fn unconstrained(block: Axis, dim: usize) -> Self {
        Self {
            block,
            dim,
            constraints: Vec::new(),
        }
    }

    pub fn new(block: Axis, dim: usize, constraints: Vec<Constraint>) -> Result<Self> {
        for (i, c) in constraints.iter().enumerate() {
            let other = match block {
                Axis::X => Axis::Y,
                Axis::Y => Axis::X,
            };
            if c.expr.arity(other) > 0 {
                return Err(Error::Validation(format!(
                    "{block}-constraint {} references {other}-variables",
                    i + 1
                )));
            }
            let k = c.expr.arity(block);
            if k > dim {
                return Err(Error::Dimension {
                    axis: block,
                    index: k,
                    dim,
                });
            }
        }
        Ok(Self {
            block,
            dim,
            constraints,
        })
    }

    pub fn block(&self) -> Axis {
        self.block
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Number of inequalities.
    pub fn p1(&self) -> usize {
        self.constraints
            .iter()
            .filter(|c| c.kind == ConstraintKind::Le)
            .count()
    }

    /// Number of equalities.
    pub fn p2(&self) -> usize {
        self.len() - self.p1()
    }

    pub fn all_affine(&self) -> bool {
        self.constraints.iter().all(|c| c.expr.is_affine())
    }

    fn point(&self, z: &[f64]) -> Result<Point> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "{}-block point has length {}, expected {}",
                self.block,
                z.len(),
                self.dim
            )));
        }
        Ok(Point::from_block(self.block, z))
    }

    pub fn values(&self, z: &[f64]) -> Result<Vec<f64>> {
        let p = self.point(z)?;
        Ok(self
            .constraints
            .iter()
            .map(|c| c.expr.value(&p.x, &p.y))
            .collect())
    }

    /// Largest violation (0 when feasible).
    pub fn violation(&self, z: &[f64]) -> Result<f64> {
        Ok(self
            .values(z)?
            .iter()
            .zip(&self.constraints)
            .map(|(v, c)| match c.kind {
                ConstraintKind::Le => v.max(0.0),
                ConstraintKind::Eq => v.abs(),
            })
            .fold(0.0, f64::max))
    }

    pub fn is_feasible(&self, z: &[f64], tol: f64) -> bool {
        self.violation(z).map(|v| v <= tol).unwrap_or(false)
    }

    /// Gradients of every constraint at `z`, each of length `dim`.
    pub fn gradients(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        let p = self.point(z)?;
        self.constraints
            .iter()
            .map(|c| gradient(&c.expr, &p))
            .collect()
    }

    /// Hessians of every constraint at `z`.
    pub fn hessians(&self, z: &[f64]) -> Result<Vec<nalgebra::DMatrix<f64>>> {
        let p = self.point(z)?;
        self.constraints
            .iter()
            .map(|c| hessian(&c.expr, &p))
            .collect()
    }
}

/// Indices (into the constraint list) of inequalities active at `z`.
pub fn active_set(cs: &ConstraintSystem, z: &[f64], tol: f64) -> Result<Vec<usize>> {
    let values = cs.values(z)?;
    let mut active = Vec::new();
    for (i, (v, c)) in values.iter().zip(&cs.constraints).enumerate() {
        let violation = match c.kind {
            ConstraintKind::Le => *v,
            ConstraintKind::Eq => v.abs(),
        };
        if violation > tol {
            return Err(Error::InfeasiblePoint {
                constraint: i + 1,
                violation,
            });
        }
        if c.kind == ConstraintKind::Le && v.abs() <= tol {
            active.push(i);
        }
    }
    Ok(active)
}

/// Homogeneous polyhedral cone `{w : A_le·w ≤ 0, A_eq·w = 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyhedralCone {
    pub dim: usize,
    pub le_rows: Vec<Vec<f64>>,
    pub eq_rows: Vec<Vec<f64>>,
}

impl PolyhedralCone {
    pub fn new(dim: usize, le_rows: Vec<Vec<f64>>, eq_rows: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(r) = le_rows.iter().chain(&eq_rows).find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "cone row has length {}, cone dimension is {dim}",
                r.len()
            )));
        }
        Ok(Self {
            dim,
            le_rows,
            eq_rows,
        })
    }

    pub fn full_space(dim: usize) -> Self {
        Self {
            dim,
            le_rows: Vec::new(),
            eq_rows: Vec::new(),
        }
    }

    pub fn with_eq_row(mut self, row: Vec<f64>) -> Self {
        debug_assert_eq!(row.len(), self.dim);
        self.eq_rows.push(row);
        self
    }

    pub fn with_le_row(mut self, row: Vec<f64>) -> Self {
        debug_assert_eq!(row.len(), self.dim);
        self.le_rows.push(row);
        self
    }

    /// Intersection with the orthogonal complement of `rows`.
    pub fn with_eq_rows(mut self, rows: impl IntoIterator<Item = Vec<f64>>) -> Self {
        self.eq_rows.extend(rows);
        self
    }
}

/// Membership with scale-free tolerance: `a·w ≤ tol·‖a‖·‖w‖`.
pub fn membership(k: &PolyhedralCone, w: &[f64], tol: f64) -> bool {
    if w.len() != k.dim {
        return false;
    }
    let wn = norm(w);
    if wn == 0.0 {
        return true;
    }
    k.le_rows.iter().all(|a| dot(a, w) <= tol * norm(a) * wn)
        && k.eq_rows
            .iter()
            .all(|b| dot(b, w).abs() <= tol * norm(b) * wn)
}

/// Linearized tangent cone of `cs` at the feasible point `z`.
pub fn tangent_cone(cs: &ConstraintSystem, z: &[f64], tol: f64) -> Result<PolyhedralCone> {
    let active = active_set(cs, z, tol)?;
    if cs.is_empty() {
        return Ok(PolyhedralCone::full_space(cs.dim));
    }
    let p = cs.point(z)?;
    let mut le_rows = Vec::new();
    let mut eq_rows = Vec::new();
    for (i, c) in cs.constraints.iter().enumerate() {
        match c.kind {
            ConstraintKind::Eq => eq_rows.push(gradient(&c.expr, &p)?),
            ConstraintKind::Le if active.contains(&i) => le_rows.push(gradient(&c.expr, &p)?),
            ConstraintKind::Le => {}
        }
    }
    PolyhedralCone::new(cs.dim, le_rows, eq_rows)
}
