//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Inverse of a symmetric positive-definite matrix through its Cholesky factor.
///
/// The result is symmetrised so callers can rely on exact symmetry.
pub fn spd_inverse(q: &Matrix) -> Result<Matrix> {
    let chol = q.clone().cholesky().ok_or(Error::SingularCovariance)?;
    let inv = chol.inverse();
    Ok(symmetrize(inv))
}

pub fn symmetrize(mut m: Matrix) -> Matrix {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Smallest eigenvalue and a unit eigenvector for it. Ties resolve to the
/// lowest position in the eigen-solver's output order.
pub fn min_eigen(q: &Matrix) -> (f64, Vector) {
    let eig = SymmetricEigen::new(q.clone());
    let mut best = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    (
        eig.eigenvalues[best],
        eig.eigenvectors.column(best).into_owned(),
    )
}

pub fn min_eigenvalue(q: &Matrix) -> f64 {
    SymmetricEigen::new(q.clone()).eigenvalues.min()
}

pub fn max_eigenvalue(q: &Matrix) -> f64 {
    SymmetricEigen::new(q.clone()).eigenvalues.max()
}

/// Numerical rank of a matrix (rows are treated as vectors).
pub fn rank(m: &Matrix) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    if smax <= 0.0 {
        return 0;
    }
    let tol = smax * (m.nrows().max(m.ncols()) as f64) * f64::EPSILON * 16.0;
    svd.singular_values.iter().filter(|&&s| s > tol).count()
}

/// Orthonormal basis (as columns) of the span of the rows of `m`.
pub fn row_space_basis(m: &Matrix) -> Matrix {
    let r = rank(m);
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    // nalgebra does not sort singular values; pick the r largest.
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let cols: Vec<Vector> = order
        .iter()
        .take(r)
        .map(|&i| v_t.row(i).transpose().into_owned())
        .collect();
    if cols.is_empty() {
        return Matrix::zeros(m.ncols(), 0);
    }
    Matrix::from_columns(&cols)
}

pub fn l1_norm(v: &Vector) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn linf_norm(v: &Vector) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    best
}
