// Dense decompositions behind the spectral routines. Every solver runs with
// an iteration cap of 10 * dim and converges to 1e-12; running out of
// iterations is reported as `EigenSolverFailure`.

use nalgebra::{Complex, DMatrix, DVector, Schur, SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(crate) const SOLVER_TOL: f64 = 1e-12;

fn iteration_cap(dim: usize) -> usize {
    10 * dim.max(1)
}

/// Singular values in decreasing order.
pub(crate) fn singular_values<T: Scalar>(m: &DMatrix<T>) -> Result<Vec<T>> {
    let dim = m.nrows().max(m.ncols());
    let svd = SVD::try_new(m.clone(), false, false, T::tol(SOLVER_TOL), iteration_cap(dim))
        .ok_or(Error::EigenSolverFailure { dim })?;
    let mut values: Vec<T> = svd.singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    Ok(values)
}

pub(crate) fn largest_singular_value<T: Scalar>(m: &DMatrix<T>) -> Result<T> {
    if m.iter().all(|v| *v == T::zero()) {
        return Ok(T::zero());
    }
    Ok(singular_values(m)?.first().copied().unwrap_or_else(T::zero))
}

/// Eigen-decomposition of the symmetric part `(m + m^T) / 2`.
pub(crate) fn symmetric_eigen<T: Scalar>(m: &DMatrix<T>) -> Result<SymmetricEigen<T, nalgebra::Dyn>> {
    let dim = m.nrows();
    let half = T::lit(0.5);
    let symmetric = (m + m.transpose()) * half;
    SymmetricEigen::try_new(symmetric, T::tol(SOLVER_TOL), iteration_cap(dim))
        .ok_or(Error::EigenSolverFailure { dim })
}

/// Eigenvalues of a general real square matrix.
pub(crate) fn complex_eigenvalues<T: Scalar>(m: &DMatrix<T>) -> Result<DVector<Complex<T>>> {
    let dim = m.nrows();
    let schur = Schur::try_new(m.clone(), T::tol(SOLVER_TOL), iteration_cap(dim))
        .ok_or(Error::EigenSolverFailure { dim })?;
    Ok(schur.complex_eigenvalues())
}
