//! Dense linear-algebra helpers on top of `nalgebra`.
//!
//! Superoperators use column-major vectorization throughout:
//! `vec(rho)[i + j*d] = rho[(i, j)]`, so that `vec(A rho B) = (B^T ⊗ A) vec(rho)`.

use nalgebra as na;

use crate::error::{Error, Result};
use crate::scalar::{creal, CMatrix, CVector, Complex, Modulus, Real};

pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

pub fn identity<T: Real>(d: usize) -> CMatrix<T> {
    CMatrix::identity(d, d)
}

/// Column-major vectorization.
pub fn vectorize<T: Real>(m: &CMatrix<T>) -> CVector<T> {
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize<T: Real>(v: &CVector<T>, d: usize) -> CMatrix<T> {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

/// Largest entrywise deviation of `m` from its adjoint.
pub fn hermiticity_defect<T: Real>(m: &CMatrix<T>) -> T {
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).modulus());
        }
    }
    worst
}

pub fn hermitian_part<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    (m + m.adjoint()).scale(T::lit(0.5))
}

pub fn trace<T: Real>(m: &CMatrix<T>) -> Complex<T> {
    m.diagonal().iter().fold(Complex::new(T::zero(), T::zero()), |a, z| a + *z)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen<T: Real>(m: &CMatrix<T>) -> Result<(Vec<T>, CMatrix<T>)> {
    let herm = hermitian_part(m);
    let n = herm.nrows();
    let eig = na::SymmetricEigen::try_new(herm, T::default_epsilon(), 0)
        .ok_or(Error::EigenFailure("hermitian eigensolver"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

pub fn hermitian_eigenvalues<T: Real>(m: &CMatrix<T>) -> Result<Vec<T>> {
    hermitian_eigen(m).map(|(values, _)| values)
}

/// Trace distance `||a - b||_1 / 2` between Hermitian matrices.
pub fn trace_distance<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<T> {
    let values = hermitian_eigenvalues(&(a - b))?;
    Ok(values.iter().fold(T::zero(), |acc, v| acc + v.abs()) * T::lit(0.5))
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm_one<T: Real>(m: &CMatrix<T>) -> T {
    m.column_iter()
        .map(|c| c.iter().fold(T::zero(), |acc, z| acc + z.modulus()))
        .fold(T::zero(), |a, b| a.max(b))
}

/// Right eigen-decomposition of a general complex matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T: Real> {
    pub values: Vec<Complex<T>>,
    /// Columns are unit-norm right eigenvectors.
    pub vectors: CMatrix<T>,
}

/// Computes eigenvalues and right eigenvectors of a general complex matrix
/// from its complex Schur form `m = Q T Q^†` by back substitution on `T`.
pub fn general_eigen<T: Real>(m: &CMatrix<T>) -> Result<EigenDecomposition<T>> {
    let n = m.nrows();
    let schur = na::Schur::try_new(m.clone(), T::default_epsilon(), 0)
        .ok_or(Error::EigenFailure("complex Schur iteration"))?;
    let (q, t) = schur.unpack();
    let scale = max_abs(&t).max(T::lit(f64::MIN_POSITIVE));
    let small = scale * T::default_epsilon();

    let values: Vec<Complex<T>> = (0..n).map(|i| t[(i, i)]).collect();
    let mut y = CMatrix::<T>::zeros(n, n);
    for i in 0..n {
        let lambda = values[i];
        y[(i, i)] = creal(T::one());
        for k in (0..i).rev() {
            let mut acc = Complex::new(T::zero(), T::zero());
            for l in (k + 1)..=i {
                acc += t[(k, l)] * y[(l, i)];
            }
            let mut denom = t[(k, k)] - lambda;
            if denom.modulus() < small {
                denom = creal(small);
            }
            y[(k, i)] = -acc / denom;
        }
    }
    let mut vectors = q * y;
    for mut col in vectors.column_iter_mut() {
        let norm = col.norm();
        if norm > T::zero() {
            col.unscale_mut(norm);
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Solves `a x = b` by LU with partial pivoting.
pub fn solve<T: Real>(a: &CMatrix<T>, b: &CVector<T>) -> Option<CVector<T>> {
    a.clone().lu().solve(b)
}

pub fn inverse<T: Real>(a: &CMatrix<T>) -> Option<CMatrix<T>> {
    a.clone().lu().try_inverse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    fn c(re: f64, im: f64) -> Complex<f64> {
        cplx(re, im)
    }

    #[test]
    fn vectorization_identity() {
        let a = CMatrix::from_fn(3, 3, |i, j| c(i as f64 + 1.0, j as f64 - 0.5));
        let b = CMatrix::from_fn(3, 3, |i, j| c((i * j) as f64, 1.0));
        let rho = CMatrix::from_fn(3, 3, |i, j| c(i as f64 - j as f64, 0.25 * i as f64));
        let lhs = vectorize(&(&a * &rho * &b));
        let rhs = kron(&b.transpose(), &a) * vectorize(&rho);
        assert!((lhs - rhs).norm() < 1e-12);
        assert_eq!(unvectorize(&vectorize(&rho), 3), rho);
    }

    #[test]
    fn general_eigen_reconstructs() {
        let m = CMatrix::from_fn(6, 6, |i, j| {
            c(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64 * 0.3)
        });
        let eig = general_eigen(&m).unwrap();
        for (k, lambda) in eig.values.iter().enumerate() {
            let v = eig.vectors.column(k);
            let residual = (&m * v - v * *lambda).norm();
            assert!(residual < 1e-10, "residual {residual}");
        }
    }

    #[test]
    fn trace_distance_of_orthogonal_projectors_is_one() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        let b = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]));
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-14);
    }
}
