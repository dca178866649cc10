use std::sync::OnceLock;

use crate::chain::Basis;
use crate::collision::{CollisionTensor, Variant};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{cplx, creal, CMatrix, Complex, Modulus, Real};

/// Dense generator acting on column-major `vec(ρ)`.
#[derive(Debug, Clone)]
pub struct Liouvillian<T: Real> {
    pub matrix: CMatrix<T>,
    /// Collision rate Γ (or the effective rate of a Lindblad operator set).
    pub gamma: T,
    /// Variant of the tensor the dissipator was built from, if any.
    pub source: Option<Variant>,
    /// Basis the matrices it was built from are expressed in.
    pub basis: Basis,
    spectral: OnceLock<Spectral<T>>,
}

/// Right eigen-decomposition `L = V Λ V⁻¹`, computed once on demand.
#[derive(Debug, Clone)]
pub struct Spectral<T: Real> {
    pub values: Vec<Complex<T>>,
    pub vectors: CMatrix<T>,
    /// `None` when `V` is numerically singular.
    pub inverse: Option<CMatrix<T>>,
    /// `‖V‖₁‖V⁻¹‖₁`, infinite if `V` is singular.
    pub condition: T,
}

impl<T: Real> Liouvillian<T> {
    pub fn new(matrix: CMatrix<T>, gamma: T, source: Option<Variant>) -> Self {
        Self { matrix, gamma, source, basis: Basis::Eigen, spectral: OnceLock::new() }
    }

    /// Marks the generator as acting on matrices in `basis` (eigenbasis by default).
    pub fn with_basis(self, basis: Basis) -> Self {
        Self { basis, ..self }
    }

    /// Hilbert-space dimension `d` (the matrix is `d² × d²`).
    pub fn dim(&self) -> usize {
        (self.matrix.nrows() as f64).sqrt().round() as usize
    }

    pub fn apply(&self, rho: &CMatrix<T>) -> CMatrix<T> {
        let d = rho.nrows();
        linalg::unvectorize(&(&self.matrix * linalg::vectorize(rho)), d)
    }

    /// `max |vec(I)† L|`: zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> T {
        let d = self.dim();
        let mut worst = T::zero();
        for col in 0..d * d {
            let mut acc = creal(T::zero());
            for i in 0..d {
                acc += self.matrix[(i + i * d, col)];
            }
            worst = worst.max(acc.modulus());
        }
        worst
    }

    pub fn spectral(&self) -> Result<&Spectral<T>> {
        if let Some(s) = self.spectral.get() {
            return Ok(s);
        }
        let eig = linalg::general_eigen(&self.matrix)?;
        let inverse = linalg::inverse(&eig.vectors);
        let condition = match &inverse {
            Some(inv) => linalg::norm_one(&eig.vectors) * linalg::norm_one(inv),
            None => T::lit(f64::INFINITY),
        };
        let computed = Spectral { values: eig.values, vectors: eig.vectors, inverse, condition };
        Ok(self.spectral.get_or_init(|| computed))
    }

    /// Largest real part of the spectrum.
    pub fn max_real_eigenvalue(&self) -> Result<T> {
        let s = self.spectral()?;
        Ok(s.values.iter().fold(-T::lit(f64::INFINITY), |a, z| a.max(z.re)))
    }
}

/// `−i(I⊗H − Hᵀ⊗I)`, i.e. `vec(−i[H, ρ])`.
fn commutator<T: Real>(h: &CMatrix<T>) -> CMatrix<T> {
    let d = h.nrows();
    let id = linalg::identity::<T>(d);
    let minus_i = cplx(T::zero(), -T::one());
    (linalg::kron(&id, h) - linalg::kron(&h.transpose(), &id)) * minus_i
}

fn check_square<T: Real>(h: &CMatrix<T>) -> Result<usize> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: h.ncols() });
    }
    Ok(h.nrows())
}

/// `L = −i[H, ·] + Γ(𝕊 − I)`.
///
/// `H` must be expressed in the basis the tensor is indexed in (the energy
/// eigenbasis). Pairing a Hamiltonian with a tensor of another variant is
/// allowed, e.g. `H(ε)` with the local tensor.
pub fn poisson_generator<T: Real>(
    h: &CMatrix<T>,
    tensor: &CollisionTensor<T>,
    gamma: T,
) -> Result<Liouvillian<T>> {
    let d = check_square(h)?;
    if tensor.dim != d {
        return Err(Error::DimensionMismatch { expected: d, found: tensor.dim });
    }
    let dissipator = (tensor.superoperator() - linalg::identity::<T>(d * d)) * creal(gamma);
    Ok(Liouvillian::new(commutator(h) + dissipator, gamma, Some(tensor.variant)))
}

/// `L = −i[H, ·] + Γ Σ_l (L_l · L_l† − ½{·, L_l†L_l})`.
pub fn generic_generator<T: Real>(
    h: &CMatrix<T>,
    ops: &[CMatrix<T>],
    gamma: T,
) -> Result<Liouvillian<T>> {
    let d = check_square(h)?;
    let id = linalg::identity::<T>(d);
    let half = creal(T::lit(0.5));
    let mut dissipator = CMatrix::zeros(d * d, d * d);
    for op in ops {
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: op.nrows() });
        }
        let ldl = op.adjoint() * op;
        dissipator += linalg::kron(&op.conjugate(), op)
            - linalg::kron(&id, &ldl) * half
            - linalg::kron(&ldl.transpose(), &id) * half;
    }
    Ok(Liouvillian::new(commutator(h) + dissipator * creal(gamma), gamma, None))
}

/// Short-collision limit of repeated interactions through `g V ⊗ B`:
/// a single Lindblad operator `V` at rate `Γ = g² ⟨B²⟩`.
pub fn repeated_interaction_generator<T: Real>(
    h: &CMatrix<T>,
    v: &CMatrix<T>,
    b_second_moment: T,
    g: T,
) -> Result<Liouvillian<T>> {
    if !(b_second_moment >= T::zero()) {
        return Err(Error::InvalidSpec(format!(
            "second moment of B must be non-negative, got {b_second_moment}"
        )));
    }
    generic_generator(h, std::slice::from_ref(v), g * g * b_second_moment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{CMatrix, CVector};

    fn sigma_minus() -> CMatrix<f64> {
        // σ⁻ = σx − iσy = 2|0⟩⟨1| with |1⟩ the excited state.
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = creal(2.0);
        m
    }

    #[test]
    fn trivial_generators_vanish() {
        let h = CMatrix::<f64>::zeros(4, 4);
        let l = poisson_generator(&h, &CollisionTensor::identity(4, Variant::Exact), 1.0).unwrap();
        assert_eq!(linalg::max_abs(&l.matrix), 0.0);
        let l = generic_generator(&h, &[], 3.0).unwrap();
        assert_eq!(linalg::max_abs(&l.matrix), 0.0);
    }

    #[test]
    fn commutator_matches_direct_evaluation() {
        let h = CMatrix::from_fn(3, 3, |i, j| cplx((i + 2 * j) as f64, i as f64 - j as f64));
        let h = linalg::hermitian_part(&h);
        let rho = CMatrix::from_fn(3, 3, |i, j| cplx((i * j) as f64 + 1.0, (i + j) as f64));
        let l = generic_generator(&h, &[], 1.0).unwrap();
        let direct = (&h * &rho - &rho * &h) * cplx(0.0, -1.0);
        assert!(linalg::max_abs(&(l.apply(&rho) - direct)) < 1e-12);
    }

    #[test]
    fn amplitude_damping_rate() {
        let h = CMatrix::from_diagonal(&CVector::from_vec(vec![creal(0.0), creal(4.0)]));
        let gamma = 0.3;
        let l = generic_generator(&h, &[sigma_minus()], gamma).unwrap();
        let mut rho = CMatrix::zeros(2, 2);
        rho[(1, 1)] = creal(1.0);
        // d p_1/dt = −4Γ p_1 with the σ± = σx ± iσy normalisation.
        let rate = l.apply(&rho)[(1, 1)].re;
        assert!((rate + 4.0 * gamma).abs() < 1e-14);
        assert!(l.trace_defect() < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        let h = CMatrix::<f64>::zeros(2, 2);
        let t = CollisionTensor::identity(4, Variant::Exact);
        assert!(matches!(poisson_generator(&h, &t, 1.0), Err(Error::DimensionMismatch { .. })));
    }
}
