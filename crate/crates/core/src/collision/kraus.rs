//! Finite Kraus decomposition from the Choi matrix.

use super::tensor::CollisionTensor;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{creal, CMatrix, Real};

/// Choi eigenvalues below this are a genuine loss of complete positivity.
pub const CP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet<T: Real> {
    pub operators: Vec<CMatrix<T>>,
    /// Choi eigenvalues of the retained operators.
    pub weights: Vec<T>,
    /// Smallest Choi eigenvalue found, retained or not.
    pub min_eigenvalue: T,
}

impl<T: Real> KrausSet<T> {
    pub fn from_operators(operators: Vec<CMatrix<T>>) -> Self {
        let weights = operators.iter().map(|m| m.norm_squared()).collect();
        Self { operators, weights, min_eigenvalue: T::zero() }
    }

    pub fn dim(&self) -> usize {
        self.operators.first().map_or(0, |m| m.nrows())
    }

    /// `Σ_l M_l† M_l`.
    pub fn completeness(&self) -> CMatrix<T> {
        let d = self.dim();
        self.operators.iter().fold(CMatrix::zeros(d, d), |acc, m| acc + m.adjoint() * m)
    }

    /// `max |Σ_l M_l† M_l − 1|`.
    pub fn completeness_defect(&self) -> T {
        let d = self.dim();
        linalg::max_abs(&(self.completeness() - CMatrix::identity(d, d)))
    }

    /// `Σ_l M_l ρ M_l†`.
    pub fn apply(&self, rho: &CMatrix<T>) -> CMatrix<T> {
        let d = rho.nrows();
        self.operators.iter().fold(CMatrix::zeros(d, d), |acc, m| acc + m * rho * m.adjoint())
    }

    /// `𝕊^{jk}_{j'k'} = Σ_l ⟨j'|M_l|j⟩ conj(⟨k'|M_l|k⟩)`.
    pub fn to_tensor(&self, template: &CollisionTensor<T>) -> CollisionTensor<T> {
        let d = self.dim();
        let mut out = CollisionTensor::zeros(d, template.variant);
        for m in &self.operators {
            for jp in 0..d {
                for j in 0..d {
                    let a = m[(jp, j)];
                    if a == creal(T::zero()) {
                        continue;
                    }
                    for kp in 0..d {
                        for k in 0..d {
                            let i = out.index(jp, kp, j, k);
                            out.entries[i] += a * m[(kp, k)].conj();
                        }
                    }
                }
            }
        }
        out
    }
}

/// Groups Choi indices into connected components of its sparsity pattern.
fn components<T: Real>(choi: &CMatrix<T>) -> Vec<Vec<usize>> {
    let n = choi.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if choi[(a, b)] != creal(T::zero()) || choi[(b, a)] != creal(T::zero()) {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for a in 0..n {
        let r = root(&mut parent, a);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(a);
    }
    groups
}

/// Kraus operators `M_l = sqrt(λ_l) reshape(v_l)` from the eigenpairs of the
/// Choi matrix with `λ_l > rank_tol`.
///
/// The Choi matrix is diagonalized block by block over the connected
/// components of its sparsity pattern, so that a tensor with an exact zero
/// pattern (narrow, local) yields operators that respect it.
pub fn kraus_decomposition<T: Real>(
    tensor: &CollisionTensor<T>,
    rank_tol: T,
) -> Result<KrausSet<T>> {
    let d = tensor.dim;
    let choi = tensor.choi();
    let mut operators = Vec::new();
    let mut weights = Vec::new();
    let mut min_eigenvalue = T::max_value().unwrap_or_else(|| T::lit(f64::MAX));
    for group in components(&choi) {
        let block = CMatrix::from_fn(group.len(), group.len(), |r, c| choi[(group[r], group[c])]);
        let (values, vectors) = linalg::hermitian_eigen(&block)?;
        min_eigenvalue = min_eigenvalue.min(values[0]);
        for (col, &lambda) in values.iter().enumerate() {
            if lambda <= rank_tol {
                continue;
            }
            let scale = lambda.sqrt();
            let mut m = CMatrix::zeros(d, d);
            for (r, &a) in group.iter().enumerate() {
                m[(a / d, a % d)] = vectors[(r, col)] * creal(scale);
            }
            operators.push(m);
            weights.push(lambda);
        }
    }
    if min_eigenvalue < -T::lit(CP_TOL) {
        return Err(Error::NotCompletelyPositive { min_eigenvalue: min_eigenvalue.as_f64() });
    }
    Ok(KrausSet { operators, weights, min_eigenvalue })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::tensor::Variant;
    use crate::scalar::cplx;

    #[test]
    fn identity_has_single_operator() {
        let t = CollisionTensor::<f64>::identity(4, Variant::Exact);
        let k = kraus_decomposition(&t, 1e-10).unwrap();
        assert_eq!(k.operators.len(), 1);
        let m = &k.operators[0];
        // Unique up to a global phase.
        let phase = m[(0, 0)];
        assert!(linalg::max_abs(&(m / phase - CMatrix::identity(4, 4))) < 1e-12);
        assert!((phase.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reconstructs_a_channel() {
        // Amplitude damping with probability 0.3 plus a dephased partner.
        let g = 0.3f64;
        let mut m0 = CMatrix::zeros(2, 2);
        m0[(0, 0)] = creal(1.0);
        m0[(1, 1)] = creal((1.0 - g).sqrt());
        let mut m1 = CMatrix::zeros(2, 2);
        m1[(0, 1)] = cplx(0.0, g.sqrt());
        let set = KrausSet::from_operators(vec![m0, m1]);
        let tensor = set.to_tensor(&CollisionTensor::zeros(2, Variant::Exact));
        assert!(tensor.tp_defect() < 1e-15);
        let back = kraus_decomposition(&tensor, 1e-10).unwrap();
        let again = back.to_tensor(&tensor);
        assert!(tensor.max_difference(&again, |_| true).unwrap() < 1e-14);
        assert!(back.completeness_defect() < 1e-14);
    }

    #[test]
    fn rejects_non_cp_map() {
        // Transpose map: trace preserving but not completely positive.
        let mut t = CollisionTensor::<f64>::zeros(2, Variant::Exact);
        for j in 0..2 {
            for k in 0..2 {
                t.set(k, j, j, k, creal(1.0));
            }
        }
        assert!(matches!(kraus_decomposition(&t, 1e-10), Err(Error::NotCompletelyPositive { .. })));
    }
}
