//! Thin wrappers over the LAPACK-backed decompositions used throughout.
//!
//! All inputs here are finite real matrices, for which the LAPACK drivers
//! cannot fail to converge in practice; failures indicate a bug upstream and
//! are treated as panics rather than recoverable errors.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, JobSvd, SVDDC, UPLO};

/// Full singular value decomposition `a = u * diag(sigma) * vt`.
pub struct Svd {
    /// Left singular vectors, one per column.
    pub u: Array2<f64>,
    /// All singular values, nonincreasing.
    pub sigma: Vec<f64>,
    /// Right singular vectors, one per row.
    pub vt: Array2<f64>,
}

/// Computes the full SVD with all singular vectors (divide and conquer).
pub fn svd_full(a: &Array2<f64>) -> Svd {
    let (u, sigma, vt) = a
        .svddc(JobSvd::All)
        .expect("SVD of a finite matrix must converge");
    Svd {
        u: u.expect("left singular vectors requested"),
        sigma: sigma.to_vec(),
        vt: vt.expect("right singular vectors requested"),
    }
}

/// Singular values only, nonincreasing.
pub fn singular_values(a: &Array2<f64>) -> Vec<f64> {
    let (_, sigma, _) = a
        .svddc(JobSvd::None)
        .expect("SVD of a finite matrix must converge");
    sigma.to_vec()
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &Array2<f64>) -> Vec<f64> {
    let (values, _): (Array1<f64>, _) = a
        .eigh(UPLO::Lower)
        .expect("eigendecomposition of a finite symmetric matrix must converge");
    values.to_vec()
}

/// Frobenius norm.
pub fn frobenius_norm(a: &Array2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Squared Euclidean distance between two equal-length slices.
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}
