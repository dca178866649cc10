//! Assembly of the collision tensor `𝕊^{jk}_{j'k'}`.
//!
//! Every variant is integrated over the kinetic energy `E` of the outgoing
//! particle:
//!
//! ```text
//! 𝕊^{jk}_{j'k'} = Σ_α ∫ dE  m/sqrt(pπ) ρ_U(p, π) s^α_{j'j}(E + e_{j'}) conj(s^α_{k'k}(E + e_{k'}))
//! p = sqrt(2m(E + e_{j'} − e_j)),  π = sqrt(2m(E + e_{k'} − e_k))
//! ```
//!
//! over `E ≥ max(0, e_j − e_{j'}, e_k − e_{k'})`. The variable is shared by all
//! tuples, so one set of S-matrix evaluations at `E + e_l` serves the whole
//! tensor, and the integrand's branch points all sit at differences of channel
//! energies, which are the breakpoints of the piecewise rule.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::kernel::{unit_kernel, KernelShape, UnitKernel};
use crate::chain::{ChainSpec, Spectrum};
use crate::error::{Error, Result};
use crate::linalg;
use crate::quadrature::{merge_breakpoints, PiecewiseRule};
use crate::scalar::{creal, CMatrix, Complex, Modulus, Real};
use crate::scattering::{local_smatrix, Scatterer};

/// Relative tolerance (in units of h) for equal Bohr frequencies.
pub const SECULAR_TOL: f64 = 1e-8;
/// Relative tolerance (in units of h) below which breakpoints are merged.
pub const MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Finite momentum dispersion, full scattering matrix.
    Exact,
    /// Vanishing dispersion: only equal Bohr frequencies survive.
    Narrow,
    /// Dispersion narrow on the scale of h but broad on the scale of ε.
    BandResolved,
    /// ε → 0 limit of the band-resolved map, evaluated with local energies.
    Local,
}

impl Variant {
    pub const ALL: [Variant; 4] =
        [Variant::Exact, Variant::Narrow, Variant::BandResolved, Variant::Local];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Exact => "exact",
            Variant::Narrow => "narrow",
            Variant::BandResolved => "band-resolved",
            Variant::Local => "local",
        }
    }

    /// Whether the variant relies on a resolvable band structure (ε < h/4).
    pub fn needs_bands(self) -> bool {
        !matches!(self, Variant::Exact)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "exact" => Ok(Variant::Exact),
            "narrow" => Ok(Variant::Narrow),
            "band-resolved" | "bandresolved" | "band" => Ok(Variant::BandResolved),
            "local" => Ok(Variant::Local),
            other => Err(Error::InvalidSpec(format!("unknown variant '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig<T> {
    pub panels: usize,
    /// Gauss–Legendre nodes per panel; the convergence check doubles this.
    pub nodes: usize,
    /// Energy cutoff `W/β` above the spread of the spectrum.
    pub cutoff_w: T,
    /// Largest change under node doubling accepted for any element.
    pub tol_quad: T,
    /// Spread the trace defect over the diagonal after assembly. Off by default
    /// so that the defect remains visible as a diagnostic.
    pub trace_projection: bool,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        Self {
            panels: 8,
            nodes: 32,
            cutoff_w: T::lit(40.0),
            tol_quad: T::lit(1e-7),
            trace_projection: false,
        }
    }
}

impl<T: Real> QuadratureConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.panels == 0 || self.nodes == 0 {
            return Err(Error::InvalidSpec(
                "quadrature needs at least one panel and one node".into(),
            ));
        }
        if !(self.cutoff_w > T::zero()) || !(self.tol_quad > T::zero()) {
            return Err(Error::InvalidSpec(
                "quadrature cutoff and tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Quadrature diagnostics carried by an assembled tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureReport<T> {
    pub panels: usize,
    pub nodes: usize,
    pub intervals: usize,
    /// Upper limit of the outgoing kinetic energy.
    pub energy_cutoff: T,
    /// `sqrt(2 m W / β)`.
    pub momentum_cutoff: T,
    /// Largest `|I_2n − I_n|` over all elements, and where it occurred.
    pub max_error: T,
    pub error_witness: [usize; 4],
    /// Per-element `|I_2n − I_n|`, same layout as the entries.
    pub errors: Vec<T>,
    /// Number of integrated tuples (canonical, nonzero by selection).
    pub integrated: usize,
    /// Tuples dropped because a Bohr frequency fits neither the intra-band
    /// nor the single-flip class.
    pub unclassified: usize,
}

/// Rank-4 collision tensor in the energy eigenbasis.
///
/// Stored flat with index `((j'·d + k')·d + j)·d + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionTensor<T: Real> {
    pub dim: usize,
    pub variant: Variant,
    pub entries: Vec<Complex<T>>,
    pub spec: Option<ChainSpec<T>>,
    pub kernel: Option<UnitKernel<T>>,
    pub quadrature: Option<QuadratureReport<T>>,
    pub trace_projected: bool,
}

impl<T: Real> CollisionTensor<T> {
    pub fn zeros(dim: usize, variant: Variant) -> Self {
        Self {
            dim,
            variant,
            entries: vec![creal(T::zero()); dim.pow(4)],
            spec: None,
            kernel: None,
            quadrature: None,
            trace_projected: false,
        }
    }

    /// The identity map `𝕊^{jk}_{j'k'} = δ_{j'j} δ_{k'k}`.
    pub fn identity(dim: usize, variant: Variant) -> Self {
        let mut t = Self::zeros(dim, variant);
        for j in 0..dim {
            for k in 0..dim {
                let i = t.index(j, k, j, k);
                t.entries[i] = creal(T::one());
            }
        }
        t
    }

    #[inline]
    pub fn index(&self, jp: usize, kp: usize, j: usize, k: usize) -> usize {
        let d = self.dim;
        ((jp * d + kp) * d + j) * d + k
    }

    /// `𝕊^{jk}_{j'k'}`.
    #[inline]
    pub fn get(&self, jp: usize, kp: usize, j: usize, k: usize) -> Complex<T> {
        self.entries[self.index(jp, kp, j, k)]
    }

    pub fn set(&mut self, jp: usize, kp: usize, j: usize, k: usize, value: Complex<T>) {
        let i = self.index(jp, kp, j, k);
        self.entries[i] = value;
    }

    pub fn tuples(&self) -> impl Iterator<Item = [usize; 4]> {
        let d = self.dim;
        (0..d.pow(4)).map(move |i| [i / (d * d * d), (i / (d * d)) % d, (i / d) % d, i % d])
    }

    pub fn max_abs(&self) -> T {
        self.entries.iter().fold(T::zero(), |a, z| a.max(z.modulus()))
    }

    /// `(𝕊ρ)_{j'k'} = Σ_{jk} 𝕊^{jk}_{j'k'} ρ_{jk}`.
    pub fn apply(&self, rho: &CMatrix<T>) -> CMatrix<T> {
        let d = self.dim;
        CMatrix::from_fn(d, d, |jp, kp| {
            let mut acc = creal(T::zero());
            for j in 0..d {
                for k in 0..d {
                    acc += self.get(jp, kp, j, k) * rho[(j, k)];
                }
            }
            acc
        })
    }

    /// Superoperator on column-major `vec(ρ)`: `L[j'+k'd, j+kd] = 𝕊^{jk}_{j'k'}`.
    pub fn superoperator(&self) -> CMatrix<T> {
        let d = self.dim;
        CMatrix::from_fn(d * d, d * d, |row, col| self.get(row % d, row / d, col % d, col / d))
    }

    /// Choi matrix `C[j'd+j, k'd+k] = 𝕊^{jk}_{j'k'}`.
    pub fn choi(&self) -> CMatrix<T> {
        let d = self.dim;
        CMatrix::from_fn(d * d, d * d, |row, col| self.get(row / d, col / d, row % d, col % d))
    }

    /// `max_{jk} |Σ_{j'} 𝕊^{jk}_{j'j'} − δ_{jk}|`.
    pub fn tp_defect(&self) -> T {
        let d = self.dim;
        let mut worst = T::zero();
        for j in 0..d {
            for k in 0..d {
                let mut acc = creal(T::zero());
                for jp in 0..d {
                    acc += self.get(jp, jp, j, k);
                }
                if j == k {
                    acc -= creal(T::one());
                }
                worst = worst.max(acc.modulus());
            }
        }
        worst
    }

    /// `max |𝕊^{jk}_{j'k'} − conj(𝕊^{kj}_{k'j'})|`.
    pub fn hermiticity_defect(&self) -> T {
        self.tuples()
            .map(|[jp, kp, j, k]| {
                (self.get(jp, kp, j, k) - self.get(kp, jp, k, j).conj()).modulus()
            })
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Smallest eigenvalue of the Choi matrix.
    pub fn choi_min_eigenvalue(&self) -> Result<T> {
        Ok(linalg::hermitian_eigenvalues(&self.choi())?[0])
    }

    /// Largest entrywise difference, optionally restricted by a tuple filter.
    pub fn max_difference(
        &self,
        other: &Self,
        mut keep: impl FnMut([usize; 4]) -> bool,
    ) -> Result<T> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(self
            .tuples()
            .filter(|&t| keep(t))
            .map(|[a, b, c, e]| (self.get(a, b, c, e) - other.get(a, b, c, e)).modulus())
            .fold(T::zero(), |a, b| a.max(b)))
    }

    /// Spreads `Σ_{j'} 𝕊^{jk}_{j'j'} − δ_{jk}` uniformly over the diagonal outputs.
    pub fn project_trace(&mut self) {
        let d = self.dim;
        let share = T::one() / T::from_usize_lossy(d);
        for j in 0..d {
            for k in 0..d {
                let mut defect = creal(T::zero());
                for jp in 0..d {
                    defect += self.get(jp, jp, j, k);
                }
                if j == k {
                    defect -= creal(T::one());
                }
                for jp in 0..d {
                    let i = self.index(jp, jp, j, k);
                    self.entries[i] -= defect * share;
                }
            }
        }
        self.trace_projected = true;
    }
}

/// Band class of a Bohr frequency: `Some(0)` intra-band, `Some(±1)` single
/// excitation flip, `None` otherwise.
pub fn band_class<T: Real>(gap: T, h: T) -> Option<i8> {
    let half = h / T::lit(2.0);
    if gap.abs() < half {
        Some(0)
    } else if (gap - h).abs() < half {
        Some(1)
    } else if (gap + h).abs() < half {
        Some(-1)
    } else {
        None
    }
}

/// Assembles the tensor with the thermal effusion kernel of `spec`.
pub fn assemble_tensor<T: Real>(
    spec: &ChainSpec<T>,
    spectrum: &Spectrum<T>,
    variant: Variant,
    quad: &QuadratureConfig<T>,
) -> Result<CollisionTensor<T>> {
    let kernel = UnitKernel::from_spec(spec)?.with_cutoff(quad.cutoff_w);
    assemble_tensor_with_kernel(spec, spectrum, variant, &kernel, quad)
}

enum Source<'a, T: Real> {
    General(Scatterer<T>),
    Local(&'a Spectrum<T>, &'a ChainSpec<T>),
}

impl<T: Real> Source<'_, T> {
    /// Row `l` of `s⁺` and `s⁻` at energy `energy`, appended to `out`.
    fn push_rows(&self, energy: T, l: usize, out: &mut Vec<Complex<T>>) -> Result<()> {
        let pair = match self {
            Source::General(s) => s.at(energy)?,
            Source::Local(spectrum, spec) => local_smatrix(energy, spectrum, spec)?,
        };
        out.extend(pair.transmitted.row(l).iter());
        out.extend(pair.reflected.row(l).iter());
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Tuple<T> {
    jp: usize,
    kp: usize,
    j: usize,
    k: usize,
    dj: T,
    dk: T,
    first: usize,
}

/// Assembles the tensor for an arbitrary unit kernel (e.g. the flat control).
pub fn assemble_tensor_with_kernel<T: Real>(
    spec: &ChainSpec<T>,
    spectrum: &Spectrum<T>,
    variant: Variant,
    kernel: &UnitKernel<T>,
    quad: &QuadratureConfig<T>,
) -> Result<CollisionTensor<T>> {
    spec.validate()?;
    kernel.validate()?;
    quad.validate()?;
    let d = spectrum.dim();
    if d != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: d });
    }
    if variant.needs_bands() && spec.epsilon >= spec.h / T::lit(4.0) {
        return Err(Error::BandOverlap { epsilon: spec.epsilon.as_f64(), h: spec.h.as_f64() });
    }

    let energies: &[T] = match variant {
        Variant::Local => &spectrum.local_energies,
        _ => &spectrum.energies,
    };
    let source = match variant {
        Variant::Local => Source::Local(spectrum, spec),
        _ => Source::General(Scatterer::new(spectrum, spec)),
    };
    let two_m = T::lit(2.0) * spec.mass;
    let secular = T::lit(SECULAR_TOL) * spec.h;
    let merge_tol = T::lit(MERGE_TOL) * spec.h;

    // Breakpoints: every channel threshold seen from every output channel.
    let mut gaps = Vec::with_capacity(d * d);
    for &a in energies {
        for &b in energies {
            gaps.push(a - b);
        }
    }
    let mut breaks: Vec<T> = gaps.iter().copied().filter(|&g| g >= T::zero()).collect();
    if kernel.shape == KernelShape::Flat {
        let edge = kernel.p_max() * kernel.p_max() / two_m;
        breaks.extend(gaps.iter().map(|&g| edge - g).filter(|&x| x > T::zero()));
    }
    let e_min = energies.iter().fold(energies[0], |a, &b| a.min(b));
    let e_max = energies.iter().fold(energies[0], |a, &b| a.max(b));
    let top = kernel.cutoff_w / kernel.beta + (e_max - e_min);
    let rule =
        PiecewiseRule::new(merge_breakpoints(breaks, merge_tol), top, quad.panels, quad.nodes);

    // Canonical tuples selected by the variant: (j', j) ≤ (k', k).
    let mut tuples = Vec::new();
    let mut unclassified = 0usize;
    for jp in 0..d {
        for j in 0..d {
            for kp in 0..d {
                for k in 0..d {
                    if (jp, j) > (kp, k) {
                        continue;
                    }
                    let dj = energies[jp] - energies[j];
                    let dk = energies[kp] - energies[k];
                    let keep = match variant {
                        Variant::Exact => true,
                        Variant::Narrow | Variant::Local => (dj - dk).abs() <= secular,
                        Variant::BandResolved => {
                            match (band_class(dj, spec.h), band_class(dk, spec.h)) {
                                (Some(a), Some(b)) => a == b,
                                _ => {
                                    unclassified += 1;
                                    false
                                }
                            }
                        }
                    };
                    if keep {
                        let lower = T::zero().max(-dj).max(-dk);
                        let first = rule.first_interval(lower, merge_tol);
                        tuples.push(Tuple { jp, kp, j, k, dj, dk, first });
                    }
                }
            }
        }
    }

    let with_coherence = variant == Variant::Exact;
    let integrand = |x: T, t: &Tuple<T>| -> Option<T> {
        let p2 = two_m * (x + t.dj);
        let q2 = two_m * (x + t.dk);
        if p2 <= T::zero() || q2 <= T::zero() {
            return None;
        }
        let (p, q) = (p2.sqrt(), q2.sqrt());
        let weight = if with_coherence {
            unit_kernel(p, q, kernel)
        } else {
            kernel.density((p + q) / T::lit(2.0))
        };
        Some(spec.mass / (p * q).sqrt() * weight)
    };

    // Per interval: coarse and fine partial sums for every tuple.
    let partials: Vec<Vec<(Complex<T>, Complex<T>)>> = (0..rule.intervals())
        .into_par_iter()
        .map(|i| -> Result<Vec<(Complex<T>, Complex<T>)>> {
            let mut out = vec![(creal(T::zero()), creal(T::zero())); tuples.len()];
            if tuples.iter().all(|t| t.first > i) {
                return Ok(out);
            }
            for (slot, nodes) in [(0usize, &rule.coarse[i]), (1usize, &rule.fine[i])] {
                // rows[(n*d + l)*2d + α*d + col] = s^α_{l,col}(x_n + e_l)
                let mut rows = Vec::with_capacity(nodes.len() * d * 2 * d);
                for &x in &nodes.points {
                    for (l, &e) in energies.iter().enumerate() {
                        source.push_rows(x + e, l, &mut rows)?;
                    }
                }
                for (t, acc) in tuples.iter().zip(out.iter_mut()) {
                    if t.first > i {
                        continue;
                    }
                    let mut sum = creal(T::zero());
                    for (n, (&x, &w)) in nodes.points.iter().zip(&nodes.weights).enumerate() {
                        let Some(factor) = integrand(x, t) else { continue };
                        let a = (n * d + t.jp) * 2 * d;
                        let b = (n * d + t.kp) * 2 * d;
                        let amp = rows[a + t.j] * rows[b + t.k].conj()
                            + rows[a + d + t.j] * rows[b + d + t.k].conj();
                        sum += amp * (w * factor);
                    }
                    if slot == 0 {
                        acc.0 = sum;
                    } else {
                        acc.1 = sum;
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut tensor = CollisionTensor::zeros(d, variant);
    let mut errors = vec![T::zero(); d.pow(4)];
    let mut max_error = T::zero();
    let mut witness = [0; 4];
    for (n, t) in tuples.iter().enumerate() {
        let (mut coarse, mut fine) = (creal(T::zero()), creal(T::zero()));
        for part in &partials {
            coarse += part[n].0;
            fine += part[n].1;
        }
        if (t.jp, t.j) == (t.kp, t.k) {
            coarse.im = T::zero();
            fine.im = T::zero();
        }
        let err = (fine - coarse).modulus();
        tensor.set(t.jp, t.kp, t.j, t.k, fine);
        tensor.set(t.kp, t.jp, t.k, t.j, fine.conj());
        let idx = tensor.index(t.jp, t.kp, t.j, t.k);
        let partner = tensor.index(t.kp, t.jp, t.k, t.j);
        errors[idx] = err;
        errors[partner] = err;
        if err > max_error {
            max_error = err;
            witness = [t.jp, t.kp, t.j, t.k];
        }
    }
    if !(max_error <= quad.tol_quad) {
        return Err(Error::QuadratureNotConverged { max_change: max_error.as_f64(), witness });
    }

    tensor.spec = Some(*spec);
    tensor.kernel = Some(*kernel);
    tensor.quadrature = Some(QuadratureReport {
        panels: quad.panels,
        nodes: quad.nodes,
        intervals: rule.intervals(),
        energy_cutoff: top,
        momentum_cutoff: kernel.p_max(),
        max_error,
        error_witness: witness,
        errors,
        integrated: tuples.len(),
        unclassified,
    });
    if quad.trace_projection {
        tensor.project_trace();
    }
    Ok(tensor)
}
