//! Resource-theoretic classification of collision maps and their Kraus sets.

use std::collections::BTreeMap;
use std::fmt::Write;

use nalgebra::DMatrix;

use crate::chain::{excitation_count, gibbs_state, qubit_bit, Spectrum};
use crate::collision::{tensor_energies, CollisionTensor, KrausSet, SECULAR_TOL};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{creal, CMatrix, Complex, Modulus, Real};

/// Default relative tolerance of every classification.
pub const CLASSIFY_TOL: f64 = 1e-8;

/// Imaginary parts of populations above this are flagged by [`transition_rates`].
pub const RATE_IMAG_TOL: f64 = 1e-10;

/// Outcome of one property check.
///
/// `residual` is the worst violation beyond the tolerance, so it is zero
/// exactly when `holds`; `measure` is the raw worst-case value for auditing.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict<T> {
    pub holds: bool,
    pub residual: T,
    pub measure: T,
    pub witness: String,
}

impl<T: Real> Verdict<T> {
    fn from_measure(measure: T, tol: T, witness: String) -> Self {
        let holds = measure <= tol;
        Self { holds, residual: if holds { T::zero() } else { measure }, measure, witness }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncoherenceReport<T> {
    pub io: Verdict<T>,
    pub sio: Verdict<T>,
}

/// IO: every column of every Kraus operator has at most one entry above
/// `tol` relative to the operator's largest entry; SIO additionally asks the
/// same of rows. The measure is the second-largest entry over the largest.
pub fn classify_incoherent<T: Real>(kraus: &KrausSet<T>, tol: T) -> IncoherenceReport<T> {
    let mut col = (T::zero(), String::from("none"));
    let mut row = (T::zero(), String::from("none"));
    for (l, m) in kraus.operators.iter().enumerate() {
        let scale = linalg::max_abs(m);
        if scale == T::zero() {
            continue;
        }
        for j in 0..m.ncols() {
            let ratio = second_largest(m.column(j).iter()) / scale;
            if ratio > col.0 {
                col = (ratio, format!("operator {l} column {j}"));
            }
        }
        for j in 0..m.nrows() {
            let ratio = second_largest(m.row(j).iter()) / scale;
            if ratio > row.0 {
                row = (ratio, format!("operator {l} row {j}"));
            }
        }
    }
    let io = Verdict::from_measure(col.0, tol, col.1);
    let sio = if row.0 > col.0 {
        Verdict::from_measure(row.0, tol, row.1)
    } else {
        Verdict::from_measure(col.0, tol, io.witness.clone())
    };
    IncoherenceReport { io, sio }
}

fn second_largest<'a, T: Real>(values: impl Iterator<Item = &'a Complex<T>>) -> T {
    let (mut first, mut second) = (T::zero(), T::zero());
    for z in values {
        let a = z.modulus();
        if a > first {
            second = first;
            first = a;
        } else if a > second {
            second = a;
        }
    }
    second
}

/// TIO: every entry above `tol·max|𝕊|` connects equal Bohr frequencies,
/// `|(ε_{j'} − ε_j) − (ε_{k'} − ε_k)| ≤ 1e-8·h`. The residual is the largest
/// violating entry.
pub fn classify_tio<T: Real>(
    tensor: &CollisionTensor<T>,
    spectrum: &Spectrum<T>,
    tol: T,
) -> Result<Verdict<T>> {
    if tensor.dim != spectrum.dim() {
        return Err(Error::DimensionMismatch { expected: spectrum.dim(), found: tensor.dim });
    }
    let e = &spectrum.energies;
    let threshold = tol * tensor.max_abs();
    let secular = T::lit(SECULAR_TOL) * spectrum.h;
    let mut worst = (T::zero(), String::from("none"));
    for [jp, kp, j, k] in tensor.tuples() {
        let value = tensor.get(jp, kp, j, k).modulus();
        if value <= threshold || value <= worst.0 {
            continue;
        }
        let mismatch = ((e[jp] - e[j]) - (e[kp] - e[k])).abs();
        if mismatch > secular {
            worst = (value, format!("({jp},{kp},{j},{k}) frequency mismatch {mismatch:e}"));
        }
    }
    // Any violation is by construction above the tolerance.
    Ok(Verdict {
        holds: worst.0 == T::zero(),
        residual: worst.0,
        measure: worst.0,
        witness: worst.1,
    })
}

/// Mean value of one generalized-local coefficient, keyed by
/// `(n', n, s₁', s₁)`: output/input excitation numbers and first-qubit bits.
pub type LambdaTable<T> = BTreeMap<(usize, usize, usize, usize), Complex<T>>;

#[derive(Debug, Clone, PartialEq)]
pub struct LocalityReport<T> {
    /// `⟨s'|M|s⟩ = λ(ε⁽⁰⁾_{s'}, ε⁽⁰⁾_s) ⟨s₁'|L⁽¹⁾|s₁⟩`.
    pub generalized_local: Verdict<T>,
    /// λ independent of the excitation numbers.
    pub strictly_local: Verdict<T>,
    /// Only the support condition (spectator qubits untouched), i.e. λ
    /// allowed to depend on the full state labels.
    pub unrestricted: Verdict<T>,
    /// One table per Kraus operator.
    pub lambda: Vec<LambdaTable<T>>,
}

/// Generalized locality of a Kraus set given in the eigenbasis.
///
/// Residuals are absolute, relative to the largest entry of the whole set, so
/// that operators with tiny weights do not amplify rounding noise.
pub fn classify_generalized_local<T: Real>(
    kraus: &KrausSet<T>,
    spectrum: &Spectrum<T>,
    tol: T,
) -> LocalityReport<T> {
    let n = spectrum.n_qubits;
    let d = spectrum.dim();
    let locals: Vec<CMatrix<T>> =
        kraus.operators.iter().map(|m| spectrum.to_local_basis(m)).collect();
    let scale = locals.iter().fold(T::zero(), |a, m| a.max(linalg::max_abs(m)));
    let scale = if scale > T::zero() { scale } else { T::one() };
    let rest_mask = (d >> 1).saturating_sub(1);

    let mut support = (T::zero(), String::from("none"));
    let mut consistency = (T::zero(), String::from("none"));
    let mut rank = (T::zero(), String::from("none"));
    let mut strict = (T::zero(), String::from("none"));
    let mut tables = Vec::with_capacity(locals.len());

    for (l, m) in locals.iter().enumerate() {
        // Entries that change a spectator qubit must vanish.
        for sp in 0..d {
            for s in 0..d {
                if sp & rest_mask != s & rest_mask {
                    let v = m[(sp, s)].modulus() / scale;
                    if v > support.0 {
                        support = (v, format!("operator {l} entry ({sp},{s})"));
                    }
                }
            }
        }
        // Group the surviving entries by (n', n, s₁', s₁).
        let mut groups: BTreeMap<(usize, usize, usize, usize), Vec<Complex<T>>> = BTreeMap::new();
        for rest in 0..(d >> 1) {
            for s1p in 0..2 {
                for s1 in 0..2 {
                    let sp = (s1p << (n - 1)) | rest;
                    let s = (s1 << (n - 1)) | rest;
                    debug_assert_eq!(qubit_bit(sp, 1, n), s1p);
                    let key = (excitation_count(sp), excitation_count(s), s1p, s1);
                    groups.entry(key).or_default().push(m[(sp, s)]);
                }
            }
        }
        let mut table = LambdaTable::new();
        for (&key, values) in &groups {
            let count = T::from_usize_lossy(values.len());
            let mean = values.iter().fold(creal(T::zero()), |a, &b| a + b) / creal(count);
            for &v in values {
                let dev = (v - mean).modulus() / scale;
                if dev > consistency.0 {
                    consistency = (dev, format!("operator {l} key {key:?}"));
                }
            }
            table.insert(key, mean);
        }
        // Diagonal keys (n, n) mix two first-qubit entries: the vectors
        // A_n = λ(n,n) L₀₀ and B_n = λ(n,n) L₁₁ must be proportional.
        let pairs: Vec<(Complex<T>, Complex<T>)> = (0..=n)
            .filter_map(|k| Some((*table.get(&(k, k, 0, 0))?, *table.get(&(k, k, 1, 1))?)))
            .collect();
        if pairs.len() > 1 {
            let stacked =
                CMatrix::from_fn(
                    2,
                    pairs.len(),
                    |r, c| if r == 0 { pairs[c].0 } else { pairs[c].1 },
                );
            let sv = stacked.singular_values();
            let smallest = sv.iter().fold(sv[0], |a, &b| a.min(b)) / scale;
            if smallest > rank.0 {
                rank = (smallest, format!("operator {l} diagonal coefficients"));
            }
        }
        // Strict locality: the same coefficient for every excitation number.
        let mut by_bits: BTreeMap<(usize, usize), Vec<Complex<T>>> = BTreeMap::new();
        for (&(_, _, s1p, s1), &v) in &table {
            by_bits.entry((s1p, s1)).or_default().push(v);
        }
        for (bits, values) in by_bits {
            for &v in &values {
                let dev = (v - values[0]).modulus() / scale;
                if dev > strict.0 {
                    strict = (dev, format!("operator {l} bits {bits:?}"));
                }
            }
        }
        tables.push(table);
    }

    let unrestricted = Verdict::from_measure(support.0, tol, support.1.clone());
    let general = [&support, &consistency, &rank].into_iter().fold(
        (T::zero(), String::from("none")),
        |acc, c| if c.0 > acc.0 { c.clone() } else { acc },
    );
    let strict_all = if general.0 > strict.0 { general.clone() } else { strict };
    LocalityReport {
        generalized_local: Verdict::from_measure(general.0, tol, general.1),
        strictly_local: Verdict::from_measure(strict_all.0, tol, strict_all.1),
        unrestricted,
        lambda: tables,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix<T: Real> {
    /// `rates[(j, j')] = Γ_{j→j'} = Γ Re 𝕊^{jj}_{j'j'}`, diagonal included.
    pub rates: DMatrix<T>,
    pub max_imaginary: T,
    /// Some population element had an imaginary part above [`RATE_IMAG_TOL`].
    pub imaginary_flagged: bool,
}

impl<T: Real> RateMatrix<T> {
    /// `max_j |Σ_{j'} Γ_{j→j'} − Γ|`.
    pub fn row_sum_defect(&self, gamma: T) -> T {
        self.rates.row_iter().fold(T::zero(), |a, r| a.max((r.sum() - gamma).abs()))
    }
}

/// Population transfer rates of the Poissonian master equation.
pub fn transition_rates<T: Real>(tensor: &CollisionTensor<T>, gamma: T) -> Result<RateMatrix<T>> {
    let d = tensor.dim;
    let tol = T::lit(RATE_IMAG_TOL);
    let mut rates = DMatrix::zeros(d, d);
    let mut max_imaginary = T::zero();
    for j in 0..d {
        for jp in 0..d {
            let s = tensor.get(jp, jp, j, j);
            if s.re < -tol {
                return Err(Error::NegativeRate { from: j, to: jp, value: s.re.as_f64() });
            }
            max_imaginary = max_imaginary.max(s.im.abs());
            rates[(j, jp)] = gamma * s.re.max(T::zero());
        }
    }
    Ok(RateMatrix { rates, max_imaginary, imaginary_flagged: max_imaginary > tol })
}

/// Trace distance between `𝕊ρ` and `ρ`.
pub fn fixed_point_defect<T: Real>(tensor: &CollisionTensor<T>, rho: &CMatrix<T>) -> Result<T> {
    if rho.nrows() != tensor.dim {
        return Err(Error::DimensionMismatch { expected: tensor.dim, found: rho.nrows() });
    }
    linalg::trace_distance(&linalg::hermitian_part(&tensor.apply(rho)), rho)
}

/// Gibbs-state invariance of the map, with the Gibbs state of the energies
/// the tensor was built with (`H_loc` for the local variant).
pub fn gibbs_invariance<T: Real>(
    tensor: &CollisionTensor<T>,
    spectrum: &Spectrum<T>,
    beta: T,
) -> Result<T> {
    let energies = tensor_energies(tensor, spectrum);
    let gibbs = if std::ptr::eq(energies, spectrum.energies.as_slice()) {
        gibbs_state(spectrum, beta)
    } else {
        crate::chain::local_gibbs_state(spectrum, beta)
    };
    fixed_point_defect(tensor, &gibbs.data)
}

/// Every classification of one map.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport<T: Real> {
    pub variant: &'static str,
    pub tolerance: T,
    pub io: Verdict<T>,
    pub sio: Verdict<T>,
    pub tio: Verdict<T>,
    pub generalized_local: Verdict<T>,
    pub strictly_local: Verdict<T>,
    pub unrestricted_local: Verdict<T>,
    pub gibbs_defect: T,
    pub gibbs_invariant: bool,
    pub kraus_rank: usize,
    pub kraus_completeness_defect: T,
}

/// Runs all classifications. Gibbs invariance is judged against `gibbs_tol`.
pub fn classify<T: Real>(
    tensor: &CollisionTensor<T>,
    kraus: &KrausSet<T>,
    spectrum: &Spectrum<T>,
    beta: T,
    tol: T,
    gibbs_tol: T,
) -> Result<ClassificationReport<T>> {
    let inc = classify_incoherent(kraus, tol);
    let loc = classify_generalized_local(kraus, spectrum, tol);
    let gibbs_defect = gibbs_invariance(tensor, spectrum, beta)?;
    Ok(ClassificationReport {
        variant: tensor.variant.name(),
        tolerance: tol,
        io: inc.io,
        sio: inc.sio,
        tio: classify_tio(tensor, spectrum, tol)?,
        generalized_local: loc.generalized_local,
        strictly_local: loc.strictly_local,
        unrestricted_local: loc.unrestricted,
        gibbs_defect,
        gibbs_invariant: gibbs_defect <= gibbs_tol,
        kraus_rank: kraus.operators.len(),
        kraus_completeness_defect: kraus.completeness_defect(),
    })
}

impl<T: Real> ClassificationReport<T> {
    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "format_version: {}", crate::collision::io::FORMAT_VERSION);
        let _ = writeln!(out, "variant: {}", self.variant);
        let _ = writeln!(out, "tolerance: {:e}", self.tolerance);
        for (name, v) in [
            ("io", &self.io),
            ("sio", &self.sio),
            ("tio", &self.tio),
            ("generalized_local", &self.generalized_local),
            ("strictly_local", &self.strictly_local),
            ("unrestricted_local", &self.unrestricted_local),
        ] {
            let _ = writeln!(out, "is_{name}: {}", v.holds);
            let _ = writeln!(out, "{name}_residual: {:.16e}", v.residual);
            let _ = writeln!(out, "{name}_measure: {:.16e}", v.measure);
            let _ = writeln!(out, "{name}_witness: {}", v.witness);
        }
        let _ = writeln!(out, "gibbs_invariant: {}", self.gibbs_invariant);
        let _ = writeln!(out, "gibbs_defect: {:.16e}", self.gibbs_defect);
        let _ = writeln!(out, "kraus_rank: {}", self.kraus_rank);
        let _ = writeln!(out, "kraus_completeness_defect: {:.16e}", self.kraus_completeness_defect);
        out
    }
}
