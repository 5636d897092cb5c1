//! Shared dense linear-algebra helpers.
//!
//! Everything here wraps `nalgebra` decompositions; the one non-trivial piece
//! is [`unitary_eigenpairs`], which diagonalizes a unitary matrix through the
//! commuting Hermitian pair H = (U + U†)/2, K = (U - U†)/(2i) so that only
//! Hermitian eigensolvers are needed.

use crate::error::{Error, Result};
use crate::scalar::{c, C, CMat, CVec, Real};
use nalgebra::{ComplexField, DMatrix, DVector};

/// Largest absolute entry of a complex matrix.
pub fn max_abs<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

/// Max-norm of `U†U - I`.
pub fn unitarity_residual<T: Real>(u: &CMat<T>) -> T {
    let mut g = u.adjoint() * u;
    for i in 0..g.nrows() {
        g[(i, i)] -= c::<T>(1.0, 0.0);
    }
    max_abs(&g)
}

/// Max-norm of `M - M†`.
pub fn hermiticity_residual<T: Real>(m: &CMat<T>) -> T {
    let d = m.nrows();
    let mut worst = T::zero();
    for i in 0..d {
        for j in i..d {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).modulus());
        }
    }
    worst
}

fn sort_eigen<T: Real, V: Clone>(
    vals: Vec<T>,
    columns: Vec<V>,
) -> (Vec<T>, Vec<V>) {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
    let sv = order.iter().map(|&i| vals[i]).collect();
    let sc = order.iter().map(|&i| columns[i].clone()).collect();
    (sv, sc)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen<T: Real>(m: &CMat<T>) -> (DVector<T>, CMat<T>) {
    let (vals, vecs) = T::hermitian_eigen_backend(m);
    let cols: Vec<CVec<T>> = vecs.column_iter().map(|c| c.into_owned()).collect();
    let (vals, cols) = sort_eigen(vals.iter().copied().collect(), cols);
    (DVector::from_vec(vals), CMat::from_columns(&cols))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues<T: Real>(m: &CMat<T>) -> DVector<T> {
    let (vals, _) = T::hermitian_eigen_backend(m);
    let mut vals: Vec<T> = vals.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    DVector::from_vec(vals)
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
pub fn real_symmetric_eigen<T: Real>(m: &DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let (vals, vecs) = T::real_symmetric_eigen_backend(m);
    let cols: Vec<DVector<T>> = vecs.column_iter().map(|c| c.into_owned()).collect();
    let (vals, cols) = sort_eigen(vals.iter().copied().collect(), cols);
    (DVector::from_vec(vals), DMatrix::from_columns(&cols))
}

/// Eigenvalues and orthonormal eigenvectors of a unitary matrix.
///
/// Returns pairs sorted by eigenphase in (-pi, pi]. Degenerate H-eigenspaces
/// (every +-theta phase pair shares cos(theta)) are split by the restriction
/// of K; joint degeneracies are true eigenspaces of U, where any orthonormal
/// basis is valid. Residuals are checked before returning.
pub fn unitary_eigenpairs<T: Real>(u: &CMat<T>) -> Result<(CVec<T>, CMat<T>)> {
    let d = u.nrows();
    if d != u.ncols() {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: u.ncols(),
        });
    }
    let half = crate::scalar::c::<T>(0.5, 0.0);
    let mihalf = crate::scalar::c::<T>(0.0, -0.5);
    let udag = u.adjoint();
    let h = (u + &udag) * half;
    let k = (u - &udag) * mihalf;
    let (hvals, hvecs) = hermitian_eigen(&h);

    let gap_tol = T::tol(1e-9);
    let mut vectors: Vec<CVec<T>> = Vec::with_capacity(d);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && hvals[end] - hvals[end - 1] <= gap_tol {
            end += 1;
        }
        let g = end - start;
        if g == 1 {
            vectors.push(hvecs.column(start).into_owned());
        } else {
            let sub = hvecs.columns(start, g).into_owned();
            let b = sub.adjoint() * &k * &sub;
            let (_, bvecs) = hermitian_eigen(&b);
            let rotated = sub * bvecs;
            for col in rotated.column_iter() {
                vectors.push(col.into_owned());
            }
        }
        start = end;
    }

    let mut pairs: Vec<(C<T>, CVec<T>)> = vectors
        .into_iter()
        .map(|v| {
            let lambda = v.dotc(&(u * &v));
            (lambda, v)
        })
        .collect();
    pairs.sort_by(|a, b| {
        a.0.argument().partial_cmp(&b.0.argument()).unwrap()
    });

    let res_tol = T::tol(1e-7) * T::from_usize(d).unwrap();
    for (lambda, v) in &pairs {
        let resid = (u * v - v * *lambda).norm();
        if resid > res_tol {
            return Err(Error::EigenFailure {
                reason: format!(
                    "unitary eigenpair residual {:.3e} exceeds {:.3e}",
                    resid.to_f64().unwrap(),
                    res_tol.to_f64().unwrap()
                ),
            });
        }
    }

    let vals = CVec::from_iterator(d, pairs.iter().map(|p| p.0));
    let cols: Vec<CVec<T>> = pairs.into_iter().map(|p| p.1).collect();
    Ok((vals, CMat::from_columns(&cols)))
}
