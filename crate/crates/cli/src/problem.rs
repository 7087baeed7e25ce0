//! JSON problem files.

use std::path::Path;

use minimax_cert::certify::CertifyOptions;
use minimax_cert::cones::{Constraint, ConstraintKind, ConstraintSystem};
use minimax_cert::expr::{parse_expression, Axis, Point};
use minimax_cert::kkt::MinimaxProblem;
use minimax_cert::oracle::GridSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindSpec {
    Le,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub expr: String,
    pub kind: KindSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateSpec {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptionsSpec {
    pub certify: CertifyOptions,
    pub grid: GridSpec,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub m: usize,
    pub objective: String,
    #[serde(default)]
    pub x_constraints: Vec<ConstraintSpec>,
    #[serde(default)]
    pub y_constraints: Vec<ConstraintSpec>,
    pub candidate: CandidateSpec,
    /// `[lo, hi]` per coordinate, `x` first.
    #[serde(default, rename = "box")]
    pub bounding_box: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub assume_mscq: bool,
    #[serde(default)]
    pub options: OptionsSpec,
}

/// A validated problem with its candidate and run options.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub problem: MinimaxProblem,
    pub point: Point,
    pub options: OptionsSpec,
    pub file: ProblemFile,
}

fn system(
    axis: Axis,
    dim: usize,
    n: usize,
    m: usize,
    specs: &[ConstraintSpec],
    field: &str,
) -> Result<ConstraintSystem, CliError> {
    let constraints = specs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (pn, pm) = match axis {
                Axis::X => (n, 0),
                Axis::Y => (0, m),
            };
            let expr = parse_expression(&c.expr, pn, pm)
                .map_err(|e| CliError::Input(format!("{field}[{i}].expr: {e}")))?;
            let kind = match c.kind {
                KindSpec::Le => ConstraintKind::Le,
                KindSpec::Eq => ConstraintKind::Eq,
            };
            Ok(Constraint { expr, kind })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    ConstraintSystem::new(axis, dim, constraints)
        .map_err(|e| CliError::Input(format!("{field}: {e}")))
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    pub fn validate(self) -> Result<Loaded, CliError> {
        let (n, m) = (self.n, self.m);
        if n == 0 || m == 0 {
            return Err(CliError::Input("n and m must be positive".into()));
        }
        let f = parse_expression(&self.objective, n, m)
            .map_err(|e| CliError::Input(format!("objective: {e}")))?;
        let xs = system(Axis::X, n, n, m, &self.x_constraints, "x_constraints")?;
        let ys = system(Axis::Y, m, n, m, &self.y_constraints, "y_constraints")?;
        let mut problem = MinimaxProblem::new(f, xs, ys, self.assume_mscq)
            .map_err(|e| CliError::Input(e.to_string()))?;
        if let Some(b) = &self.bounding_box {
            problem = problem
                .with_box(b.clone())
                .map_err(|e| CliError::Input(format!("box: {e}")))?;
        }
        if self.candidate.x.len() != n || self.candidate.y.len() != m {
            return Err(CliError::Input(format!(
                "candidate has dimensions ({}, {}), expected ({n}, {m})",
                self.candidate.x.len(),
                self.candidate.y.len()
            )));
        }
        let point = Point::new(self.candidate.x.clone(), self.candidate.y.clone())
            .map_err(|e| CliError::Input(format!("candidate: {e}")))?;
        problem
            .check_point(&point, self.options.certify.activity_tol)
            .map_err(|e| CliError::Input(format!("candidate: {e}")))?;
        self.options
            .grid
            .validate()
            .map_err(|e| CliError::Input(format!("options.grid: {e}")))?;
        Ok(Loaded {
            problem,
            point,
            options: self.options.clone(),
            file: self,
        })
    }
}

/// Reads and validates a problem file.
pub fn load_problem(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    ProblemFile::parse(&text)?.validate()
}
