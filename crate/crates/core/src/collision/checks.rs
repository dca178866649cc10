//! Thermodynamic consistency checks of an assembled tensor.

use super::tensor::{CollisionTensor, Variant};
use crate::chain::Spectrum;
use crate::error::{Error, Result};
use crate::scalar::{Modulus, Real};

/// Rates below this are treated as zero.
pub const RATE_FLOOR: f64 = 1e-14;

/// Energies the tensor was built with: local ones for the local variant.
pub fn tensor_energies<'a, T: Real>(
    tensor: &CollisionTensor<T>,
    spectrum: &'a Spectrum<T>,
) -> &'a [T] {
    match tensor.variant {
        Variant::Local => &spectrum.local_energies,
        _ => &spectrum.energies,
    }
}

/// `max_{j≠j'} |𝕊^{jj}_{j'j'} e^{β(e_{j'} − e_j)} − 𝕊^{j'j'}_{jj}| / max(|𝕊^{j'j'}_{jj}|, floor)`,
/// skipping pairs where both rates are below the floor.
pub fn check_detailed_balance<T: Real>(
    tensor: &CollisionTensor<T>,
    spectrum: &Spectrum<T>,
    beta: T,
) -> T {
    detailed_balance_witness(tensor, spectrum, beta).0
}

/// Residual of [`check_detailed_balance`] and the pair `(j, j')` attaining it.
pub fn detailed_balance_witness<T: Real>(
    tensor: &CollisionTensor<T>,
    spectrum: &Spectrum<T>,
    beta: T,
) -> (T, (usize, usize)) {
    let e = tensor_energies(tensor, spectrum);
    let floor = T::lit(RATE_FLOOR);
    let d = tensor.dim;
    let mut worst = (T::zero(), (0, 0));
    for j in 0..d {
        for jp in 0..d {
            if j == jp {
                continue;
            }
            let forward = tensor.get(jp, jp, j, j).re;
            let backward = tensor.get(j, j, jp, jp).re;
            if forward.abs() < floor && backward.abs() < floor {
                continue;
            }
            let residual = (forward * (beta * (e[jp] - e[j])).exp() - backward).abs()
                / backward.abs().max(floor);
            if residual > worst.0 {
                worst = (residual, (j, jp));
            }
        }
    }
    worst
}

/// `max_{j'k'} |Σ_j 𝕊^{jj}_{j'k'} w_j − δ_{j'k'} w_{j'}|` with `w = e^{−βε⁽⁰⁾}/Z₀`.
pub fn check_sum_rule<T: Real>(
    tensor: &CollisionTensor<T>,
    spectrum: &Spectrum<T>,
    beta: T,
) -> Result<T> {
    if tensor.variant != Variant::Local {
        return Err(Error::WrongVariant {
            expected: Variant::Local.name(),
            found: tensor.variant.name(),
        });
    }
    let weights: Vec<T> = spectrum.local_energies.iter().map(|&e| (-beta * e).exp()).collect();
    let z = weights.iter().fold(T::zero(), |a, &b| a + b);
    let d = tensor.dim;
    let mut worst = T::zero();
    for jp in 0..d {
        for kp in 0..d {
            let mut acc = crate::scalar::creal(T::zero());
            for j in 0..d {
                acc += tensor.get(jp, kp, j, j) * (weights[j] / z);
            }
            if jp == kp {
                acc.re -= weights[jp] / z;
            }
            worst = worst.max(acc.modulus());
        }
    }
    Ok(worst)
}
