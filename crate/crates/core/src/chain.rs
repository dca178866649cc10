//! Qubit chain: Hamiltonian construction, diagonalization and thermal states.
//!
//! Local product basis: index `Σ_i s_i 2^{N-i}`, so qubit 1 (the bombarded one)
//! is the most significant bit and index 0 is `|0…0⟩`.

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{creal, CMatrix, Modulus, Real};

/// Physical parameters of the chain and the reservoir coupling (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec<T> {
    pub n_qubits: usize,
    /// Qubit splitting.
    pub h: T,
    /// Inter-qubit coupling.
    pub epsilon: T,
    /// Delta-barrier strength between the incident particle and qubit 1.
    pub g: T,
    pub mass: T,
    pub beta: T,
    pub sigma_p: T,
    pub gamma: T,
}

/// Largest chain the dense `d⁴` tensor machinery is meant for.
pub const MAX_QUBITS: usize = 6;

impl<T: Real> ChainSpec<T> {
    /// N = 3, h = 4, ε = 0.1, g = 50, m = β = 0.1, σ_p = 0.5, Γ = 1.
    pub fn reference_defaults() -> Self {
        Self {
            n_qubits: 3,
            h: T::lit(4.0),
            epsilon: T::lit(0.1),
            g: T::lit(50.0),
            mass: T::lit(0.1),
            beta: T::lit(0.1),
            sigma_p: T::lit(0.5),
            gamma: T::one(),
        }
    }

    pub fn with_epsilon(self, epsilon: T) -> Self {
        Self { epsilon, ..self }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSpec(msg));
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return fail(format!("n_qubits must be in 1..={MAX_QUBITS}, got {}", self.n_qubits));
        }
        let positive =
            [("h", self.h), ("mass", self.mass), ("beta", self.beta), ("sigma_p", self.sigma_p)];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return fail(format!("{name} must be positive and finite, got {v}"));
            }
        }
        let non_negative = [("epsilon", self.epsilon), ("gamma", self.gamma)];
        for (name, v) in non_negative {
            if !(v >= T::zero()) || !v.is_finite() {
                return fail(format!("{name} must be non-negative and finite, got {v}"));
            }
        }
        if !self.g.is_finite() {
            return fail(format!("g must be finite, got {}", self.g));
        }
        Ok(())
    }
}

/// Excitation count of a local basis index.
pub fn excitation_count(index: usize) -> usize {
    index.count_ones() as usize
}

/// Bit of qubit `site` (1-based, qubit 1 most significant) in a local basis index.
pub fn qubit_bit(index: usize, site: usize, n_qubits: usize) -> usize {
    (index >> (n_qubits - site)) & 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianTriple<T: Real> {
    pub h_loc: CMatrix<T>,
    pub h_int: CMatrix<T>,
    pub h_total: CMatrix<T>,
}

/// `H = Σ_i h(σz+1)/2 + ε Σ_i (σ+^{(i)}σ−^{(i+1)} + h.c.)` with `σ± = σx ± iσy`,
/// which makes the nearest-neighbour hopping amplitude 4ε.
pub fn build_chain_hamiltonian<T: Real>(spec: &ChainSpec<T>) -> Result<HamiltonianTriple<T>> {
    spec.validate()?;
    let n = spec.n_qubits;
    let d = spec.dim();
    let h_loc = CMatrix::from_fn(d, d, |a, b| {
        if a == b {
            creal(spec.h * T::from_usize_lossy(excitation_count(a)))
        } else {
            creal(T::zero())
        }
    });
    let mut h_int = CMatrix::<T>::zeros(d, d);
    for a in 0..d {
        for site in 1..n {
            let (x, y) = (qubit_bit(a, site, n), qubit_bit(a, site + 1, n));
            if x != y {
                let mask = (1 << (n - site)) | (1 << (n - site - 1));
                h_int[(a ^ mask, a)] = creal(T::lit(4.0));
            }
        }
    }
    let h_total = &h_loc + h_int.scale(spec.epsilon);
    Ok(HamiltonianTriple { h_loc, h_int, h_total })
}

/// Eigen-decomposition of the chain Hamiltonian with band labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T: Real> {
    pub n_qubits: usize,
    pub h: T,
    /// Ascending eigenvalues ε_j.
    pub energies: Vec<T>,
    /// Columns are the eigenvectors |j⟩ in the local product basis.
    pub eigenvectors: CMatrix<T>,
    pub excitations: Vec<usize>,
    /// `bands[n]` lists the eigenstates with n excitations, ascending in energy.
    pub bands: Vec<Vec<usize>>,
    /// ε_j^{(0)} = n_j h.
    pub local_energies: Vec<T>,
    /// Some gap is below `1e-12·h`.
    pub degenerate: bool,
}

impl<T: Real> Spectrum<T> {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Bohr gap `ε_to − ε_from`.
    pub fn gap(&self, from: usize, to: usize) -> T {
        self.energies[to] - self.energies[from]
    }

    /// Hamiltonian `diag(ε)` in the eigenbasis.
    pub fn hamiltonian(&self) -> CMatrix<T> {
        diag(&self.energies)
    }

    /// Local Hamiltonian `diag(n_j h)`; it is diagonal in the eigenbasis
    /// because the hopping conserves the excitation number.
    pub fn local_hamiltonian(&self) -> CMatrix<T> {
        diag(&self.local_energies)
    }

    /// `V† m V`: local basis → eigenbasis.
    pub fn to_eigenbasis(&self, m: &CMatrix<T>) -> CMatrix<T> {
        self.eigenvectors.adjoint() * m * &self.eigenvectors
    }

    /// `V m V†`: eigenbasis → local basis.
    pub fn to_local_basis(&self, m: &CMatrix<T>) -> CMatrix<T> {
        &self.eigenvectors * m * self.eigenvectors.adjoint()
    }
}

pub(crate) fn diag<T: Real>(values: &[T]) -> CMatrix<T> {
    let d = values.len();
    CMatrix::from_fn(d, d, |a, b| if a == b { creal(values[a]) } else { creal(T::zero()) })
}

/// Diagonalizes `h_total` block by block in the excitation number, sorts the
/// levels ascending (stable) and fixes eigenvector phases.
pub fn diagonalize<T: Real>(
    triple: &HamiltonianTriple<T>,
    spec: &ChainSpec<T>,
) -> Result<Spectrum<T>> {
    spec.validate()?;
    let n = spec.n_qubits;
    let d = spec.dim();
    if triple.h_total.nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, found: triple.h_total.nrows() });
    }

    // (energy, eigenvector in the local basis)
    let mut levels: Vec<(T, Vec<crate::scalar::Complex<T>>)> = Vec::with_capacity(d);
    if spec.epsilon == T::zero() {
        for a in 0..d {
            let mut v = vec![creal(T::zero()); d];
            v[a] = creal(T::one());
            levels.push((triple.h_total[(a, a)].re, v));
        }
    } else {
        for count in 0..=n {
            let members: Vec<usize> = (0..d).filter(|&a| excitation_count(a) == count).collect();
            let k = members.len();
            let block = CMatrix::from_fn(k, k, |r, c| triple.h_total[(members[r], members[c])]);
            let (values, vectors) = linalg::hermitian_eigen(&block)?;
            for (col, value) in values.into_iter().enumerate() {
                let mut v = vec![creal(T::zero()); d];
                for (r, &a) in members.iter().enumerate() {
                    v[a] = vectors[(r, col)];
                }
                levels.push((value, v));
            }
        }
    }
    levels.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));

    let mut eigenvectors = CMatrix::<T>::zeros(d, d);
    for (j, (_, v)) in levels.iter().enumerate() {
        let biggest = v.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()));
        let pivot = v.iter().position(|z| z.modulus() >= biggest - T::lit(1e-12)).unwrap_or(0);
        let phase = v[pivot].unscale(v[pivot].modulus()).conj();
        for a in 0..d {
            eigenvectors[(a, j)] = v[a] * phase;
        }
    }
    let energies: Vec<T> = levels.iter().map(|l| l.0).collect();

    let mut excitations = Vec::with_capacity(d);
    for j in 0..d {
        let mut expectation = T::zero();
        for a in 0..d {
            expectation +=
                eigenvectors[(a, j)].norm_sqr() * T::from_usize_lossy(excitation_count(a));
        }
        let rounded = expectation.round();
        if (expectation - rounded).abs() > T::lit(1e-6) {
            return Err(Error::NonIntegerExcitation { index: j, value: expectation.as_f64() });
        }
        excitations.push(rounded.as_f64() as usize);
    }
    let mut bands = vec![Vec::new(); n + 1];
    for (j, &count) in excitations.iter().enumerate() {
        bands[count].push(j);
    }
    let local_energies = excitations.iter().map(|&c| spec.h * T::from_usize_lossy(c)).collect();
    let degenerate = energies.windows(2).any(|w| w[1] - w[0] < T::lit(1e-12) * spec.h);

    Ok(Spectrum {
        n_qubits: n,
        h: spec.h,
        energies,
        eigenvectors,
        excitations,
        bands,
        local_energies,
        degenerate,
    })
}

/// Builds and diagonalizes the chain Hamiltonian in one step.
pub fn spectrum<T: Real>(spec: &ChainSpec<T>) -> Result<Spectrum<T>> {
    diagonalize(&build_chain_hamiltonian(spec)?, spec)
}

/// Basis a density matrix is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Eigen,
    Local,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    pub data: CMatrix<T>,
    pub basis: Basis,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(data: CMatrix<T>, basis: Basis) -> Self {
        Self { data, basis }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Checks Hermiticity (1e-12), unit trace (1e-12) and positivity (`min_eig ≥ -tol_neg`).
    pub fn validate(&self, tol_neg: T) -> Result<()> {
        let defect = linalg::hermiticity_defect(&self.data);
        if defect > T::lit(1e-12) {
            return Err(Error::InvalidSpec(format!(
                "density matrix not Hermitian (defect {defect:e})"
            )));
        }
        let tr = linalg::trace(&self.data);
        if (tr - creal(T::one())).modulus() > T::lit(1e-12) {
            return Err(Error::InvalidSpec(format!("density matrix trace {} != 1", tr.re)));
        }
        let min = linalg::hermitian_eigenvalues(&self.data)?[0];
        if min < -tol_neg {
            return Err(Error::InvalidSpec(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    pub fn in_eigenbasis(&self, spectrum: &Spectrum<T>) -> Self {
        match self.basis {
            Basis::Eigen => self.clone(),
            Basis::Local => Self::new(spectrum.to_eigenbasis(&self.data), Basis::Eigen),
        }
    }

    pub fn in_local_basis(&self, spectrum: &Spectrum<T>) -> Self {
        match self.basis {
            Basis::Local => self.clone(),
            Basis::Eigen => Self::new(spectrum.to_local_basis(&self.data), Basis::Local),
        }
    }

    pub fn populations(&self) -> Vec<T> {
        self.data.diagonal().iter().map(|z| z.re).collect()
    }
}

fn boltzmann<T: Real>(energies: &[T], beta: T) -> DensityMatrix<T> {
    let floor = energies.iter().fold(energies[0], |a, &b| a.min(b));
    let weights: Vec<T> = energies.iter().map(|&e| (-beta * (e - floor)).exp()).collect();
    let z = weights.iter().fold(T::zero(), |a, &b| a + b);
    let probs: Vec<T> = weights.into_iter().map(|w| w / z).collect();
    DensityMatrix::new(diag(&probs), Basis::Eigen)
}

/// `e^{-βH}/Z` in the eigenbasis.
pub fn gibbs_state<T: Real>(spectrum: &Spectrum<T>, beta: T) -> DensityMatrix<T> {
    boltzmann(&spectrum.energies, beta)
}

/// `e^{-βH_loc}/Z₀` in the eigenbasis of the full Hamiltonian.
pub fn local_gibbs_state<T: Real>(spectrum: &Spectrum<T>, beta: T) -> DensityMatrix<T> {
    boltzmann(&spectrum.local_energies, beta)
}

/// `(e^{-βh}|10…0⟩⟨10…0| + |0…0⟩⟨0…0|)/Z_loc` in the local basis.
pub fn local_thermal_state<T: Real>(spec: &ChainSpec<T>) -> Result<DensityMatrix<T>> {
    spec.validate()?;
    let d = spec.dim();
    let excited = (-spec.beta * spec.h).exp();
    let z = excited + T::one();
    let mut data = CMatrix::zeros(d, d);
    data[(0, 0)] = creal(T::one() / z);
    data[(d / 2, d / 2)] = creal(excited / z);
    Ok(DensityMatrix::new(data, Basis::Local))
}

/// Projector onto a local product state given as a bit string such as `"000"`.
pub fn product_state<T: Real>(bits: &str, n_qubits: usize) -> Result<DensityMatrix<T>> {
    if bits.len() != n_qubits || !bits.chars().all(|c| c == '0' || c == '1') {
        return Err(Error::InvalidSpec(format!("'{bits}' is not a {n_qubits}-qubit bit string")));
    }
    let index = usize::from_str_radix(bits, 2).expect("validated bit string");
    let d = 1 << n_qubits;
    let mut data = CMatrix::zeros(d, d);
    data[(index, index)] = creal(T::one());
    Ok(DensityMatrix::new(data, Basis::Local))
}
