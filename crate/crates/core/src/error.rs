use thiserror::Error;

use crate::expr::Axis;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },

    #[error("variable {axis}{index} out of range ({axis}-dimension is {dim})")]
    Dimension {
        axis: Axis,
        index: usize,
        dim: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value encountered: {0}")]
    NonFiniteValue(String),

    #[error("expression is not differentiable at the point (active kinks: {})", nodes.join(", "))]
    NonsmoothAtPoint { nodes: Vec<String> },

    #[error("point is infeasible: constraint {constraint} violated by {violation:e}")]
    InfeasiblePoint { constraint: usize, violation: f64 },

    #[error("dimension {dim} exceeds the exhaustive enumeration limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("multiplier set is empty")]
    EmptyMultiplierSet,

    #[error("no feasible mesh node in the ball")]
    EmptyFeasibleBall,

    #[error("candidate y is not a local maximizer of f(x̄, ·): f exceeds f(x̄, ȳ) by {excess:e} at y = {y:?}")]
    NotMaxSide { y: Vec<f64>, excess: f64 },

    #[error("separation property fails: defect {defect:e} at u = {u:?}, h = {h:?}")]
    SeparationHypothesisFailed {
        u: Vec<f64>,
        h: Vec<f64>,
        defect: f64,
    },

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("invalid input: {0}")]
    Validation(String),
}
