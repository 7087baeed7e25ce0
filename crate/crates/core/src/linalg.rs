//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n > 0.0 && n.is_finite() {
        Some(a.iter().map(|v| v / n).collect())
    } else {
        None
    }
}

pub fn rows_to_matrix(rows: &[Vec<f64>], dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j])
}

/// Orthonormal basis (as columns) of `{w ∈ R^dim : r·w = 0 for every row r}`.
pub fn null_space(rows: &[Vec<f64>], dim: usize) -> DMatrix<f64> {
    if dim == 0 {
        return DMatrix::zeros(0, 0);
    }
    let live: Vec<&Vec<f64>> = rows
        .iter()
        .filter(|r| r.iter().any(|v| *v != 0.0))
        .collect();
    if live.is_empty() {
        return DMatrix::identity(dim, dim);
    }
    // Pad to at least `dim` rows so the SVD returns a full right basis.
    let k = live.len().max(dim);
    let a = DMatrix::from_fn(k, dim, |i, j| if i < live.len() { live[i][j] } else { 0.0 });
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = RANK_TOL * smax.max(1e-300);
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= cut)
        .map(|(i, _)| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Numerical rank of a set of row vectors.
pub fn rank(rows: &[Vec<f64>], dim: usize) -> usize {
    dim - null_space(rows, dim).ncols()
}

/// Columns of `m` as vectors.
pub fn columns(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.ncols())
        .map(|j| m.column(j).iter().cloned().collect())
        .collect()
}

/// Symmetric eigendecomposition with eigenvalues sorted ascending.
pub fn sorted_eigen(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = (h + h.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Largest absolute eigenvalue scale used for relative eigen thresholds.
pub fn spectral_scale(h: &DMatrix<f64>) -> f64 {
    h.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0)
}

/// Moore–Penrose pseudoinverse of a symmetric matrix together with its
/// eigen-split into range and null space.
pub struct SymmetricSplit {
    pub pinv: DMatrix<f64>,
    /// Orthonormal basis of the (numerical) null space, as columns.
    pub kernel: DMatrix<f64>,
    pub min_eig: f64,
    pub max_eig: f64,
}

pub fn symmetric_split(h: &DMatrix<f64>, tol: f64) -> SymmetricSplit {
    let n = h.nrows();
    let (vals, vecs) = sorted_eigen(h);
    let mut pinv = DMatrix::zeros(n, n);
    let mut kernel = Vec::new();
    for (i, &l) in vals.iter().enumerate() {
        let v = vecs.column(i);
        if l.abs() <= tol {
            kernel.push(v.into_owned());
        } else {
            pinv += (v * v.transpose()) / l;
        }
    }
    let kernel = if kernel.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&kernel)
    };
    SymmetricSplit {
        pinv,
        kernel,
        min_eig: vals.first().copied().unwrap_or(0.0),
        max_eig: vals.last().copied().unwrap_or(0.0),
    }
}

/// `wᵀ H w`.
pub fn quad(h: &DMatrix<f64>, w: &[f64]) -> f64 {
    let v = DVector::from_column_slice(w);
    (v.transpose() * h * &v)[(0, 0)]
}
