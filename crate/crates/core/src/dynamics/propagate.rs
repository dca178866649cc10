use std::fmt::Write;

use super::generator::Liouvillian;
use super::observables::{observables, ObservableSpec, Observables};
use crate::chain::{DensityMatrix, Spectrum};
use crate::collision::io::{fmt17, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{cexp, creal, CMatrix, CVector, Complex, Modulus, Real};

/// Largest eigenvector condition number accepted by [`Method::SpectralExp`].
pub const MAX_SPECTRAL_CONDITION: f64 = 1e10;

/// Eigenvalues closer than this to zero count as stationary.
pub const STEADY_GAP_TOL: f64 = 1e-10;

/// Steady-state eigenvalues above `-CLIP_TOL` are clipped to zero.
const CLIP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// `ρ(t) = V e^{Λt} V⁻¹ ρ₀`, one diagonalization for all times.
    SpectralExp,
    /// Classical Runge–Kutta with step `≤ 0.1/‖L‖₁`.
    Rk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<DensityMatrix<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn observables(
        &self,
        spectrum: &Spectrum<T>,
        spec: &ObservableSpec,
    ) -> Result<Vec<Observables<T>>> {
        self.states.iter().map(|s| observables(s, spectrum, spec)).collect()
    }

    /// CSV with a `#` metadata preamble and one row per time:
    /// `t, rho_j_j…, re/im of the requested coherences, rho123_over_rho00, beta_eff`.
    /// Undefined values are written as `NaN`.
    pub fn to_csv(&self, spectrum: &Spectrum<T>, spec: &ObservableSpec) -> Result<String> {
        let d = spectrum.dim();
        let records = self.observables(spectrum, spec)?;
        let mut out = String::new();
        let _ = writeln!(out, "# trajectory");
        let _ = writeln!(out, "# format_version = {FORMAT_VERSION}");
        let _ = writeln!(out, "# beta_pair = {},{}", spec.beta_pair.0, spec.beta_pair.1);
        let mut header = vec!["t".to_string()];
        header.extend((0..d).map(|j| format!("rho_{j}_{j}")));
        for &(a, b) in &spec.coherences {
            header.push(format!("re_rho_{a}_{b}"));
            header.push(format!("im_rho_{a}_{b}"));
        }
        header.push("rho123_over_rho00".into());
        header.push("beta_eff".into());
        let _ = writeln!(out, "{}", header.join(","));
        let opt = |x: Option<T>| x.map_or_else(|| "NaN".to_string(), |v| fmt17(v.as_f64()));
        for (t, rec) in self.times.iter().zip(&records) {
            let mut row = vec![fmt17(t.as_f64())];
            row.extend(rec.populations.iter().map(|p| fmt17(p.as_f64())));
            for c in &rec.coherences {
                row.push(fmt17(c.re.as_f64()));
                row.push(fmt17(c.im.as_f64()));
            }
            row.push(opt(rec.first_band_ratio));
            row.push(opt(rec.beta_eff));
            let _ = writeln!(out, "{}", row.join(","));
        }
        Ok(out)
    }
}

fn check_times<T: Real>(times: &[T]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < T::zero())
        || times.windows(2).any(|w| w[1] < w[0])
    {
        return Err(Error::NonMonotoneTimes);
    }
    Ok(())
}

/// Propagates `rho0` under `l` and records the state at each of `times`
/// (non-decreasing, starting from `t = 0`).
pub fn evolve<T: Real>(
    l: &Liouvillian<T>,
    rho0: &DensityMatrix<T>,
    times: &[T],
    method: Method,
) -> Result<Trajectory<T>> {
    check_times(times)?;
    let d = rho0.dim();
    if d * d != l.matrix.nrows() {
        return Err(Error::DimensionMismatch { expected: l.dim(), found: d });
    }
    if rho0.basis != l.basis {
        return Err(Error::InvalidSpec(
            "initial state and generator are expressed in different bases".into(),
        ));
    }
    let v0 = linalg::vectorize(&rho0.data);
    let vectors: Vec<CVector<T>> = match method {
        Method::SpectralExp => {
            let s = l.spectral()?;
            let inverse = match &s.inverse {
                Some(inv) if s.condition <= T::lit(MAX_SPECTRAL_CONDITION) => inv,
                _ => return Err(Error::IllConditionedSpectral { condition: s.condition.as_f64() }),
            };
            let c = inverse * &v0;
            times
                .iter()
                .map(|&t| {
                    let scaled =
                        CVector::from_fn(c.len(), |i, _| c[i] * cexp(s.values[i] * creal(t)));
                    &s.vectors * scaled
                })
                .collect()
        }
        Method::Rk4 => {
            let norm = linalg::norm_one(&l.matrix);
            let max_step =
                if norm > T::zero() { T::lit(0.1) / norm } else { T::lit(f64::INFINITY) };
            let mut v = v0;
            let mut now = T::zero();
            let mut out = Vec::with_capacity(times.len());
            for &t in times {
                let span = t - now;
                if span > T::zero() {
                    let steps = (span / max_step).ceil().max(T::one());
                    let dt = span / steps;
                    let count = steps.as_f64() as usize;
                    for _ in 0..count {
                        v = rk4_step(&l.matrix, &v, dt);
                    }
                }
                now = t;
                out.push(v.clone());
            }
            out
        }
    };
    let states = vectors
        .iter()
        .map(|v| DensityMatrix::new(linalg::hermitian_part(&linalg::unvectorize(v, d)), rho0.basis))
        .collect();
    Ok(Trajectory { times: times.to_vec(), states })
}

fn rk4_step<T: Real>(l: &CMatrix<T>, v: &CVector<T>, dt: T) -> CVector<T> {
    let half = creal(dt / T::lit(2.0));
    let k1 = l * v;
    let k2 = l * (v + &k1 * half);
    let k3 = l * (v + &k2 * half);
    let k4 = l * (v + &k3 * creal(dt));
    v + (k1 + (k2 + k3) * creal(T::lit(2.0)) + k4) * creal(dt / T::lit(6.0))
}

/// Unique stationary state of `l`.
///
/// Uniqueness is checked on the spectrum (the two eigenvalues nearest zero
/// must be separated from it by more than [`STEADY_GAP_TOL`]); the state
/// itself solves `Lρ = 0` with one population equation replaced by `tr ρ = 1`,
/// then is Hermitized, clipped at `−1e-10` and renormalized.
pub fn steady_state<T: Real>(l: &Liouvillian<T>) -> Result<DensityMatrix<T>> {
    let d = l.dim();
    let s = l.spectral()?;
    let mut moduli: Vec<T> = s.values.iter().map(|z| z.modulus()).collect();
    moduli.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    if moduli.len() > 1 && moduli[1] < T::lit(STEADY_GAP_TOL) {
        return Err(Error::DegenerateSteadyState {
            first: moduli[0].as_f64(),
            second: moduli[1].as_f64(),
        });
    }
    let mut a = l.matrix.clone();
    let mut b = CVector::zeros(d * d);
    for col in 0..d * d {
        a[(0, col)] = creal(T::zero());
    }
    for i in 0..d {
        a[(0, i + i * d)] = creal(T::one());
    }
    b[0] = creal(T::one());
    let x = linalg::solve(&a, &b)
        .ok_or(Error::EigenFailure("steady-state linear system is singular"))?;
    let rho = linalg::hermitian_part(&linalg::unvectorize(&x, d));
    let (values, vectors) = linalg::hermitian_eigen(&rho)?;
    if values[0] < -T::lit(CLIP_TOL) {
        return Err(Error::NegativeSteadyState { min_eigenvalue: values[0].as_f64() });
    }
    let rho = if values[0] < T::zero() {
        let clipped: Vec<Complex<T>> = values.iter().map(|&v| creal(v.max(T::zero()))).collect();
        let diag = CMatrix::from_diagonal(&CVector::from_vec(clipped));
        &vectors * diag * vectors.adjoint()
    } else {
        rho
    };
    let tr = linalg::trace(&rho).re;
    Ok(DensityMatrix::new(rho.unscale(tr), l.basis))
}
