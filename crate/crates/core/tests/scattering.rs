#![allow(clippy::needless_range_loop)]

use collisional::scalar::Complex;
use collisional::*;
use proptest::prelude::*;

fn single(g: f64) -> ChainSpec64 {
    ChainSpec64 { n_qubits: 1, g, ..ChainSpec64::reference_defaults() }
}

/// Closed form for one qubit written out independently: basis (ground, excited),
/// `c² = g²m²/(k₀k₁)` with `k₁` continued to `iκ` below threshold.
fn closed_form(e: f64, h: f64, m: f64, g: f64) -> [[Complex<f64>; 2]; 2] {
    let k0 = Complex::new((2.0 * m * e).sqrt(), 0.0);
    let k1 = Complex::new(2.0 * m * (e - h), 0.0).sqrt();
    let c2 = Complex::new(g * g * m * m, 0.0) / (k0 * k1);
    let den = Complex::new(1.0, 0.0) + c2;
    let off = Complex::new(0.0, -1.0) * c2.sqrt() / den;
    let one = Complex::new(1.0, 0.0) / den;
    if e > h {
        [[one, off], [off, one]]
    } else {
        [[one, Complex::new(0.0, 0.0)], [Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)]]
    }
}

#[test]
fn general_matches_closed_form_on_grid() {
    let spec = single(50.0);
    let s = spectrum(&spec).unwrap();
    for i in 1..=40 {
        let e = 0.5 * i as f64;
        if (e - 4.0).abs() < 1e-9 {
            continue;
        }
        let general = smatrix_general(e, &s, &spec).unwrap();
        let closed = smatrix_single_qubit(e, &spec).unwrap();
        let oracle = closed_form(e, 4.0, 0.1, 50.0);
        for a in 0..2 {
            for b in 0..2 {
                assert!(
                    (general.transmitted[(a, b)] - closed.transmitted[(a, b)]).norm() < 1e-10,
                    "E={e}"
                );
                assert!(
                    (general.reflected[(a, b)] - closed.reflected[(a, b)]).norm() < 1e-10,
                    "E={e}"
                );
                assert!((closed.transmitted[(a, b)] - oracle[a][b]).norm() < 1e-12, "E={e}");
            }
        }
    }
}

#[test]
fn tensor_product_structure_at_zero_coupling() {
    // ε = 0: amplitudes depend only on the first qubit and on the excitation number.
    let spec = ChainSpec64::reference_defaults().with_epsilon(0.0);
    let s = spectrum(&spec).unwrap();
    for &kinetic in &[0.7, 2.5, 6.0, 13.0] {
        for n in 0..3usize {
            let e = kinetic + 4.0 * n as f64;
            let general = smatrix_general(e, &s, &spec).unwrap();
            let local = local_smatrix(e, &s, &spec).unwrap();
            assert!(linalg::max_abs(&(&general.transmitted - &local.transmitted)) < 1e-10);
            assert!(linalg::max_abs(&(&general.reflected - &local.reflected)) < 1e-10);
        }
    }
}

#[test]
fn weak_barrier_approaches_identity_monotonically() {
    let mut last = 0.0;
    for g in [1e-4, 1e-3, 1e-2, 1e-1] {
        let spec = ChainSpec64 { g, ..ChainSpec64::reference_defaults() };
        let s = spectrum(&spec).unwrap();
        let pair = smatrix_general(9.0, &s, &spec).unwrap();
        let mut id = pair.transmitted.clone();
        id.fill_with_identity();
        for j in 0..8 {
            if !pair.open[j] {
                id[(j, j)] = Complex::new(0.0, 0.0);
            }
        }
        let dist = linalg::max_abs(&(&pair.transmitted - id));
        assert!(dist > last);
        last = dist;
    }
    assert!(last < 0.1);
}

#[test]
fn effusion_shift_identity() {
    use collisional::quadrature::{composite_unit_rule, cosine_mapped};
    let spec = ChainSpec64::reference_defaults();
    let f = |x2: f64| x2 / (1.0 + x2).powi(2);
    let kernel = UnitKernel64::from_spec(&spec).unwrap();
    let unit = composite_unit_rule::<f64>(8, 64);
    let threshold = (2.0 * spec.mass * spec.h).sqrt();
    let lhs = cosine_mapped(0.0, kernel.p_max(), true, &unit).integrate(|p| {
        let a = smatrix_local_limit(p, 0, &spec).unwrap();
        effusion_pdf(p, &kernel) * f(a.c_plus * a.c_plus)
    });
    let rhs = cosine_mapped(threshold, kernel.p_max() + threshold, true, &unit).integrate(|p| {
        let a = smatrix_local_limit(p, 0, &spec).unwrap();
        effusion_pdf(p, &kernel) * f(a.c_minus_sq.re)
    });
    assert!(lhs > 1e-3);
    assert!((lhs - (spec.beta * spec.h).exp() * rhs).abs() < 1e-8, "{lhs} vs {rhs}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flux_and_reciprocity(n in 1usize..=3, eps_on in any::<bool>(), e in 0.05f64..20.0, g in 0.0f64..80.0) {
        let spec = ChainSpec64 { n_qubits: n, g, ..ChainSpec64::reference_defaults() }.with_epsilon(if eps_on { 0.1 } else { 0.0 });
        let s = spectrum(&spec).unwrap();
        prop_assume!(s.energies.iter().all(|&x| (e - x).abs() > 1e-6));
        let pair = smatrix_general(e, &s, &spec).unwrap();
        prop_assert!(pair.unitarity_defect() < 1e-10);
        prop_assert!(pair.symmetry_defect() < 1e-10);
    }

    #[test]
    fn local_amplitudes_conserve_flux(p in 0.05f64..8.0, g in 0.0f64..80.0) {
        let spec = ChainSpec64 { g, ..ChainSpec64::reference_defaults() };
        let a = smatrix_local_limit(p, 1, &spec).unwrap();
        // Incoming in the ground state of the first qubit: column 0 of T.
        let t = a.transmitted.matrix();
        let r = a.reflected.matrix();
        let col0 = t[0][0].norm_sqr() + t[1][0].norm_sqr() + r[0][0].norm_sqr() + r[1][0].norm_sqr();
        prop_assert!((col0 - 1.0).abs() < 1e-10);
    }
}
