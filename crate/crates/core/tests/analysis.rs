mod common;

use collisional::scalar::Complex;
use collisional::*;
use common::*;

fn kraus(variant: Variant) -> KrausSet64 {
    kraus_decomposition(&*tensor(variant, 0.1), 1e-12).unwrap()
}

fn phase(s: &Spectrum64, t: f64) -> CMatrix64 {
    CMatrix64::from_diagonal(&CVector::from_iterator(
        8,
        s.energies.iter().map(|&e| Complex::new(0.0, -e * t).exp()),
    ))
}

fn probe_state(seed: u64) -> CMatrix64 {
    let mut x = seed;
    let mut next = move || {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let a = CMatrix64::from_fn(8, 8, |_, _| Complex::new(next(), next()));
    let rho = &a * a.adjoint();
    let tr = linalg::trace(&rho).re;
    rho / Complex::new(tr, 0.0)
}

#[test]
fn verdicts_at_reference_parameters() {
    let s = spectrum_at(0.1);
    let narrow =
        classify(&tensor(Variant::Narrow, 0.1), &kraus(Variant::Narrow), &s, BETA, 1e-8, 1e-6)
            .unwrap();
    assert!(narrow.tio.holds && narrow.io.holds && narrow.gibbs_invariant);
    let exact =
        classify(&tensor(Variant::Exact, 0.1), &kraus(Variant::Exact), &s, BETA, 1e-8, 1e-6)
            .unwrap();
    assert!(!exact.tio.holds && !exact.generalized_local.holds);
    let local =
        classify(&tensor(Variant::Local, 0.1), &kraus(Variant::Local), &s, BETA, 1e-8, 1e-6)
            .unwrap();
    assert!(local.generalized_local.holds && local.gibbs_invariant);
    for report in [&narrow, &exact, &local] {
        // SIO ⊂ IO; a failed verdict always carries a positive residual.
        assert!(!report.sio.holds || report.io.holds);
        for v in [
            &report.io,
            &report.sio,
            &report.tio,
            &report.generalized_local,
            &report.strictly_local,
        ] {
            assert_eq!(v.holds, v.residual == 0.0);
            assert!(v.residual == 0.0 || v.residual == v.measure);
        }
        let text = report.to_text();
        assert!(text.contains(&format!("is_tio: {}", report.tio.holds)));
    }
}

#[test]
fn narrow_map_is_time_covariant() {
    let s = spectrum_at(0.1);
    let t = tensor(Variant::Narrow, 0.1);
    for (seed, time) in [(1, 0.37), (2, 2.9), (3, 41.0)] {
        let rho = probe_state(seed);
        let u = phase(&s, time);
        let lhs = t.apply(&(&u * &rho * u.adjoint()));
        let rhs = &u * t.apply(&rho) * u.adjoint();
        assert!(linalg::max_abs(&(lhs - rhs)) < 1e-12);
    }
    // The exact map is not.
    let exact = tensor(Variant::Exact, 0.1);
    let rho = probe_state(4);
    let u = phase(&s, 0.37);
    let gap = linalg::max_abs(
        &(exact.apply(&(&u * &rho * u.adjoint())) - &u * exact.apply(&rho) * u.adjoint()),
    );
    assert!(gap > 1e-6);
}

#[test]
fn kraus_sets_reproduce_their_maps() {
    for variant in [Variant::Exact, Variant::Narrow, Variant::Local] {
        let t = tensor(variant, 0.1);
        let k = kraus(variant);
        for seed in 10..13 {
            let rho = probe_state(seed);
            assert!(linalg::max_abs(&(k.apply(&rho) - t.apply(&rho))) < 1e-8, "{variant}");
        }
    }
}

#[test]
fn rates() {
    let s = spectrum_at(0.1);
    let gamma = 2.5;
    for variant in [Variant::Exact, Variant::Narrow, Variant::Local] {
        let t = tensor(variant, 0.1);
        let r = transition_rates(&t, gamma).unwrap();
        assert!(r.row_sum_defect(gamma) <= gamma * t.tp_defect() + 1e-12, "{variant}");
        assert!(!r.imaginary_flagged);
        let e = if variant == Variant::Local { &s.local_energies } else { &s.energies };
        for j in 0..8 {
            for jp in 0..8 {
                let forward = r.rates[(j, jp)] * (-BETA * e[j]).exp();
                let backward = r.rates[(jp, j)] * (-BETA * e[jp]).exp();
                assert!((forward - backward).abs() < 1e-6 * gamma, "{variant} {j}->{jp}");
            }
        }
        // Single-flip coupling: no direct transfer from the ground state to two excitations.
        let bound = if variant == Variant::Local { 1e-15 } else { 1e-6 };
        for jp in 0..8 {
            if s.excitations[jp] == 2 {
                assert!(
                    r.rates[(0, jp)] < bound * gamma,
                    "{variant} 0->{jp}: {}",
                    r.rates[(0, jp)]
                );
            }
        }
    }
}

#[test]
fn gibbs_states_are_fixed_points() {
    let s = spectrum_at(0.1);
    for variant in [Variant::Narrow, Variant::Local] {
        let d = gibbs_invariance(&tensor(variant, 0.1), &s, BETA).unwrap();
        assert!(d < 1e-8, "{variant}: {d}");
    }
    // Rates are detailed-balanced, but the exact map feeds coherences from
    // populations, so the Gibbs state is not a fixed point.
    let exact = tensor(Variant::Exact, 0.1);
    let gibbs = gibbs_state(&s, BETA);
    assert!(gibbs_invariance(&exact, &s, BETA).unwrap() > 1e-3);
    let out = exact.apply(&gibbs.data);
    for j in 0..8 {
        assert!((out[(j, j)].re - gibbs.data[(j, j)].re).abs() < 1e-6);
    }
}
