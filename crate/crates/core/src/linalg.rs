//! Matrix types and the factorizations the physics needs.
//!
//! Storage and arithmetic use `nalgebra`. SVDs and symmetric eigensolves go
//! through LAPACK (`ndarray-linalg`): nalgebra's complex SVD returns wrong
//! factors for rank-deficient inputs, which is exactly what single-path THz
//! segments are.

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use ndarray_linalg::{Eigh, SVD, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type RMatrix = DMatrix<f64>;

/// Full singular value decomposition `A = U Σ V†` with square unitaries.
///
/// Singular values are sorted in descending order and have length
/// `min(rows, cols)`. `left` is rows×rows and `right` is cols×cols.
#[derive(Debug, Clone)]
pub struct FullSvd {
    pub left: CMatrix,
    pub singular_values: Vec<f64>,
    pub right: CMatrix,
}

fn to_nd<T: nalgebra::Scalar + Copy>(a: &DMatrix<T>) -> Array2<T> {
    Array2::from_shape_fn(a.shape(), |(i, j)| a[(i, j)])
}

fn from_nd<T: nalgebra::Scalar + Copy>(a: &Array2<T>) -> DMatrix<T> {
    let (m, n) = a.dim();
    DMatrix::from_fn(m, n, |i, j| a[(i, j)])
}

fn lapack(e: ndarray_linalg::error::LinalgError) -> Error {
    Error::Contract(format!("LAPACK factorization failed: {e}"))
}

pub fn full_svd(a: &CMatrix) -> Result<FullSvd> {
    let (m, n) = a.shape();
    if m.min(n) == 0 {
        return Ok(FullSvd {
            left: CMatrix::identity(m, m),
            singular_values: Vec::new(),
            right: CMatrix::identity(n, n),
        });
    }
    let (u, s, vt) = to_nd(a).svd(true, true).map_err(lapack)?;
    let (u, vt) = match (u, vt) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Contract("LAPACK returned no singular vectors".into())),
    };
    // gesvd already orders singular values descending
    Ok(FullSvd {
        left: from_nd(&u),
        singular_values: s.to_vec(),
        right: from_nd(&vt).adjoint(),
    })
}

/// Singular values only, descending.
pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let (_, s, _) = to_nd(a).svd(false, false).map_err(lapack)?;
    Ok(s.to_vec())
}

/// Singular values of a real matrix, descending.
pub fn real_singular_values(a: &RMatrix) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let (_, s, _) = to_nd(a).svd(false, false).map_err(lapack)?;
    Ok(s.to_vec())
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a real symmetric matrix.
pub fn symmetric_eigen(a: &RMatrix) -> Result<(Vec<f64>, RMatrix)> {
    if a.nrows() == 0 {
        return Ok((Vec::new(), RMatrix::zeros(0, 0)));
    }
    let (w, v) = to_nd(a).eigh(UPLO::Lower).map_err(lapack)?;
    Ok((w.to_vec(), from_nd(&v)))
}

pub fn diag_phases(phases: &[f64]) -> CMatrix {
    let entries: Vec<Complex64> = phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
    CMatrix::from_diagonal(&CVector::from_vec(entries))
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// log-determinant of a symmetric positive definite matrix via Cholesky.
pub fn log_det_spd(a: &RMatrix) -> Option<f64> {
    if a.nrows() == 0 {
        return Some(0.0);
    }
    let chol = a.clone().cholesky()?;
    let l = chol.l();
    Some(l.diagonal().iter().map(|d| 2.0 * d.ln()).sum())
}

/// Moore–Penrose pseudo-inverse of a symmetric matrix; eigenvalues with
/// magnitude below `rel_tol * max|λ|` are treated as zero.
pub fn pinv_symmetric(a: &RMatrix, rel_tol: f64) -> Result<RMatrix> {
    let n = a.nrows();
    let (values, vectors) = symmetric_eigen(a)?;
    let max = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let cutoff = rel_tol * max;
    let mut out = RMatrix::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        if lambda.abs() <= cutoff || lambda == 0.0 {
            continue;
        }
        let v = vectors.column(k);
        out += (v * v.transpose()) / lambda;
    }
    Ok(out)
}
