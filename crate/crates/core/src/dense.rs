//! Dense symmetric eigensolver bridge (`f64`, backed by faer).

use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Eigenvalues in nondecreasing order with orthonormal eigenvectors as columns.
pub(crate) struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

pub(crate) fn sym_eigen(matrix: &Mat<f64>) -> Result<SymEigen> {
    let evd = matrix
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NonConvergence {
            what: "dense symmetric eigensolver",
            iterations: 0,
            estimate: f64::NAN,
            residual: f64::NAN,
        })?;
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..matrix.nrows()).map(|i| s[i]).collect();
    Ok(SymEigen {
        values,
        vectors: evd.U().to_owned(),
    })
}

/// Eigenvalues only, nondecreasing.
pub(crate) fn sym_eigenvalues(matrix: &Mat<f64>) -> Result<Vec<f64>> {
    matrix
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::NonConvergence {
            what: "dense symmetric eigensolver",
            iterations: 0,
            estimate: f64::NAN,
            residual: f64::NAN,
        })
}
