use crate::chain::{DensityMatrix, Spectrum};
use crate::collision::{tensor_energies, CollisionTensor};
use crate::error::{Error, Result};
use crate::scalar::{cplx, creal, CMatrix, Complex, Real};

/// Populations at or below this make `β_eff` undefined.
pub const POPULATION_FLOOR: f64 = 1e-14;

/// Relative tolerance on Bohr gaps for the perturbative coherences.
const GAP_TOL: f64 = 1e-10;

/// Which derived quantities to record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservableSpec {
    /// `(j, k)` of `β_eff(j→k)`.
    pub beta_pair: (usize, usize),
    /// Eigenbasis coherences `ρ_jk` to record.
    pub coherences: Vec<(usize, usize)>,
}

impl ObservableSpec {
    /// Ground state against the middle level of the one-excitation band, and
    /// `ρ_23` when the chain has at least two qubits.
    pub fn default_for<T: Real>(spectrum: &Spectrum<T>) -> Self {
        let band = spectrum.bands.get(1).filter(|b| !b.is_empty());
        let middle = band.map_or(0, |b| b[b.len() / 2]);
        let coherences = if spectrum.dim() >= 4 { vec![(2, 3)] } else { Vec::new() };
        Self { beta_pair: (0, middle), coherences }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observables<T: Real> {
    /// Eigenbasis populations `ρ_jj`.
    pub populations: Vec<T>,
    /// Population of each excitation-number band.
    pub band_populations: Vec<T>,
    /// One-excitation band population over the ground population (`ρ_123/ρ_00`
    /// for three qubits); `None` if the ground population vanishes.
    pub first_band_ratio: Option<T>,
    /// `log(ρ_jj/ρ_kk)/(ε_k − ε_j)` for the configured pair; `None` if undefined.
    pub beta_eff: Option<T>,
    pub coherences: Vec<Complex<T>>,
}

/// Reads the observables off `rho`, converting it to the eigenbasis first.
pub fn observables<T: Real>(
    rho: &DensityMatrix<T>,
    spectrum: &Spectrum<T>,
    spec: &ObservableSpec,
) -> Result<Observables<T>> {
    let d = spectrum.dim();
    if rho.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho.dim() });
    }
    let (j, k) = spec.beta_pair;
    for &(a, b) in spec.coherences.iter().chain(std::iter::once(&spec.beta_pair)) {
        if a >= d || b >= d {
            return Err(Error::InvalidSpec(format!(
                "level pair ({a}, {b}) out of range for dimension {d}"
            )));
        }
    }
    let rho = rho.in_eigenbasis(spectrum);
    let populations = rho.populations();
    let band_populations: Vec<T> = spectrum
        .bands
        .iter()
        .map(|band| band.iter().fold(T::zero(), |acc, &i| acc + populations[i]))
        .collect();
    let floor = T::lit(POPULATION_FLOOR);
    let ground = populations[0];
    let first_band_ratio = match band_populations.get(1) {
        Some(&first) if ground > floor => Some(first / ground),
        _ => None,
    };
    let gap = spectrum.energies[k] - spectrum.energies[j];
    let beta_eff = if populations[j] > floor && populations[k] > floor && gap != T::zero() {
        Some((populations[j] / populations[k]).ln() / gap)
    } else {
        None
    };
    let coherences = spec.coherences.iter().map(|&(a, b)| rho.data[(a, b)]).collect();
    Ok(Observables { populations, band_populations, first_band_ratio, beta_eff, coherences })
}

/// First-order coherences of the steady state at small Γ, already multiplied
/// by Γ: `Γ ρ⁽¹⁾_{jk} = −iΓ (𝕊ρ₀)_{jk}/(ε_j − ε_k)` for `j ≠ k`.
///
/// `ρ₀` is the Gibbs state of the energies the tensor was built with (local
/// energies for the local variant); the gaps are those of `spectrum`.
pub fn perturbative_coherences<T: Real>(
    tensor: &CollisionTensor<T>,
    spectrum: &Spectrum<T>,
    beta: T,
    gamma: T,
) -> Result<CMatrix<T>> {
    let d = spectrum.dim();
    if tensor.dim != d {
        return Err(Error::DimensionMismatch { expected: d, found: tensor.dim });
    }
    let tol = T::lit(GAP_TOL) * spectrum.h;
    let energies = tensor_energies(tensor, spectrum);
    let floor = energies.iter().fold(energies[0], |a, &b| a.min(b));
    let weights: Vec<T> = energies.iter().map(|&e| (-beta * (e - floor)).exp()).collect();
    let z = weights.iter().fold(T::zero(), |a, &b| a + b);
    let mut out = CMatrix::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            if j == k {
                continue;
            }
            let gap = spectrum.energies[j] - spectrum.energies[k];
            if gap.abs() < tol {
                return Err(Error::DegenerateGap { j, k, gap: gap.as_f64() });
            }
            let mut source = creal(T::zero());
            for (jp, &w) in weights.iter().enumerate() {
                source += tensor.get(j, k, jp, jp) * (w / z);
            }
            out[(j, k)] = source * cplx(T::zero(), -gamma / gap);
        }
    }
    Ok(out)
}
