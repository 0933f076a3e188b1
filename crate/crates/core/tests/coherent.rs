use affine_cs::coherent::*;
use affine_cs::fiducial::{xi_star, FiducialSpec};
use affine_cs::specfun::{integrate_adaptive_tol, Domain};
use num_complex::Complex64;
use proptest::prelude::*;

const XI_3_0: f64 = 3.758_252_930_319_821_012_809_314_594_26;
// mpmath quadrature of ⟨Ĥ_ν⟩ at (5, −4), ν = 3, n = 0
const H_5_M4: f64 = 17.630_509_612_476_400_300_742_659_831_2;
const RHO_PEAK_3: f64 = 0.127_044_357_611_943_524_030_856_208_563;

const LABELS: [(f64, f64); 9] = [
    (1.0, 0.0),
    (5.0, -4.0),
    (2.0, 1.0),
    (0.3, 2.5),
    (0.7, -3.0),
    (3.0, 0.5),
    (8.0, -0.2),
    (1.5, 6.0),
    (0.1, -9.0),
];

#[test]
fn wavefunction_is_normalized() {
    let cs = CSParams::new(5.0, -4.0, 3.0, 0).unwrap();
    let e = cs.expectations_quadrature().unwrap();
    assert!((e.norm - 1.0).abs() < 1e-12);
    for n in 0..3 {
        for (q, p) in LABELS {
            let e = CSParams::new(q, p, 3.0, n)
                .unwrap()
                .expectations_quadrature()
                .unwrap();
            assert!((e.norm - 1.0).abs() < 1e-11, "n={n} ({q},{p}): {}", e.norm);
        }
    }
}

#[test]
fn identity_label_reproduces_fiducial() {
    for n in 0..3 {
        let cs = CSParams::new(1.0, 0.0, 3.0, n).unwrap();
        let f = FiducialSpec::new(3.0, n).unwrap();
        for i in 1..40 {
            let x = 0.1 * i as f64;
            let w = cs.wavefunction(x);
            assert!((w - Complex64::new(f.phi(x), 0.0)).norm() < 1e-15);
        }
        assert_eq!(cs.phase_angle(), 0.0);
    }
}

#[test]
fn n0_formula_matches_pointwise() {
    for (q, p) in LABELS {
        for nu in [1.0, 3.0, 4.5] {
            let cs = CSParams::new(q, p, nu, 0).unwrap();
            let scale = 1.0 / q.sqrt();
            for i in 1..200 {
                let x = q * 0.02 * i as f64;
                let a = cs.wavefunction(x);
                let b = cs.wavefunction_n0(x).unwrap();
                assert!(
                    (a - b).norm() < 1e-12 * scale,
                    "ν={nu} ({q},{p}) x={x}: {a} vs {b}"
                );
            }
        }
    }
    assert!(CSParams::new(1.0, 0.0, 3.0, 1)
        .unwrap()
        .wavefunction_n0(1.0)
        .is_err());
}

#[test]
fn phase_factor_is_principal_power() {
    for n in 0..3 {
        for (q, p) in LABELS {
            let cs = CSParams::new(q, p, 3.5, n).unwrap();
            let f = cs.phase_factor();
            assert!((f.norm() - 1.0).abs() < 1e-13);
            let z = Complex64::new(cs.xi(), -q * p) / Complex64::new(cs.xi(), q * p);
            let principal = z.powf(cs.phase_exponent());
            assert!(
                (f - principal).norm() < 1e-12,
                "({q},{p}) n={n}: {f} vs {principal}"
            );
        }
    }
}

#[test]
fn label_matching_and_energy() {
    for nu in [1.0, 3.0] {
        for n in 0..3 {
            for (q, p) in LABELS {
                let cs = CSParams::new(q, p, nu, n).unwrap();
                let e = cs.expectations_quadrature().unwrap();
                assert!(
                    (e.x - q).abs() < 1e-8 * q.max(1.0),
                    "ν={nu} n={n} ({q},{p}) <x> = {}",
                    e.x
                );
                assert!((e.p - p).abs() < 1e-8 * p.abs().max(1.0), "<p> = {}", e.p);
                let h = cs.expectation_h_semiclassical();
                assert!(
                    (e.h - h).abs() < 1e-8 * h,
                    "ν={nu} n={n} ({q},{p}) <H> = {} vs {h}",
                    e.h
                );
                assert!((cs.expectation_h() - h).abs() < 1e-10 * h);
            }
        }
    }
}

#[test]
fn closed_form_expectations_match_quadrature() {
    for n in 0..3 {
        for (q, p) in LABELS {
            let cs = CSParams::new(q, p, 3.0, n).unwrap();
            let e = cs.expectations_quadrature().unwrap();
            assert!((cs.expectation_x_power(2.0).unwrap() - e.x2).abs() < 1e-9 * e.x2);
            assert!((cs.expectation_d() - e.d).abs() < 1e-9 * e.d.abs().max(1.0));
            assert!((cs.expectation_p2() - e.p2).abs() < 1e-9 * e.p2);
            for alpha in [-3.0, -1.0, 0.5, 3.0] {
                let closed = cs.expectation_x_power(alpha).unwrap();
                let quad = cs.expectation_x_power_quadrature(alpha).unwrap();
                assert!((closed - quad).abs() < 1e-9 * closed, "α={alpha}");
            }
        }
    }
}

#[test]
fn expectation_examples() {
    let cs = CSParams::new(1.0, 0.0, 3.0, 0).unwrap();
    assert!((cs.expectation_p2() - 4.0715).abs() < 1e-4);
    assert!((cs.expectation_x_power(0.0).unwrap() - 1.0).abs() < 1e-14);
    let cs = CSParams::new(3.0, 0.0, 3.0, 0).unwrap();
    assert!((cs.expectation_x_power(1.0).unwrap() - 3.0).abs() < 1e-13);
    assert!((cs.expectation_x_power(2.0).unwrap() - 4.0 / XI_3_0 * 9.0).abs() < 1e-12);
    assert!((cs.expectation_x_power(2.0).unwrap() / 9.0 - 1.06432).abs() < 1e-5);
    assert_eq!(cs.expectation_d(), 0.0);
    assert!(cs.expectation_x_power(-8.0).is_err());
    let cs = CSParams::new(2.0, -1.0, 3.0, 2).unwrap();
    assert!((cs.expectation_p() + 1.0).abs() < 1e-13);
    let cs = CSParams::new(5.0, -4.0, 3.0, 0).unwrap();
    assert!((cs.expectation_h() - H_5_M4).abs() < 1e-12 * H_5_M4);
    assert!((cs.expectation_h_semiclassical() - H_5_M4).abs() < 1e-12 * H_5_M4);
    // ⟨Ĥ⟩ = ⟨p̂²⟩ + (ν²−1/4)⟨x̂^{−2}⟩
    let k = 3.0f64 * 3.0 - 0.25;
    let sum = cs.expectation_p2() + k * cs.expectation_x_power(-2.0).unwrap();
    assert!((sum - cs.expectation_h()).abs() < 1e-10 * sum);
    // far away at rest the energy vanishes
    let far = CSParams::new(1e6, 0.0, 3.0, 0).unwrap();
    assert!(far.expectation_h() < 1e-10);
}

#[test]
fn overlap_examples() {
    let a = CSParams::new(1.0, 0.0, 3.0, 0).unwrap();
    let b = CSParams::new(2.0, 0.0, 3.0, 0).unwrap();
    assert_eq!(overlap(&a, &a).unwrap(), Complex64::new(1.0, 0.0));
    let closed = overlap_n0_squared(&a, &b).unwrap();
    assert!((closed - 0.8f64.powi(8)).abs() < 1e-15);
    let quad = overlap(&a, &b).unwrap().norm_sqr();
    assert!((quad - closed).abs() < 1e-12);
    let c = CSParams::new(1.0, 0.0, 4.0, 0).unwrap();
    assert!(overlap(&a, &c).is_err());
    assert!(overlap_n0_squared(&a, &CSParams::new(1.0, 0.0, 3.0, 1).unwrap()).is_err());
    // self-overlap by quadrature is 1 as well
    let s = inner_product(&b, &b).unwrap();
    assert!((s - 1.0).norm() < 1e-12);
}

#[test]
fn overlap_closed_form_random_pairs() {
    use proptest::strategy::ValueTree;
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let label = (0.2f64..6.0, -6.0f64..6.0);
    for _ in 0..50 {
        let ((q1, p1), (q2, p2)) = (label.clone(), label.clone())
            .new_tree(&mut runner)
            .unwrap()
            .current();
        let a = CSParams::new(q1, p1, 3.0, 0).unwrap();
        let b = CSParams::new(q2, p2, 3.0, 0).unwrap();
        let quad = overlap(&a, &b).unwrap();
        let closed = overlap_n0_squared(&a, &b).unwrap();
        assert!(
            (quad.norm_sqr() - closed).abs() < 1e-10,
            "({q1},{p1}) ({q2},{p2}): {} vs {closed}",
            quad.norm_sqr()
        );
        let back = overlap(&b, &a).unwrap();
        assert!((back - quad.conj()).norm() < 1e-12);
    }
}

#[test]
fn mixed_n_overlaps_are_hermitian() {
    let a = CSParams::new(2.0, 0.0, 3.0, 1).unwrap();
    let b = CSParams::new(1.4, 0.8, 3.0, 0).unwrap();
    let ab = overlap(&a, &b).unwrap();
    let ba = overlap(&b, &a).unwrap();
    assert!((ab - ba.conj()).norm() < 1e-13);
    assert!(ab.norm() < 1.0);
}

#[test]
fn husimi_peak_and_normalization() {
    let nu = 3.0;
    let state = CSParams::new(2.0, 0.0, nu, 0).unwrap();
    let peak = husimi_density(nu, 2.0, 0.0, &state).unwrap();
    assert!((peak - RHO_PEAK_3).abs() < 1e-14);
    assert!(husimi_density(nu, 2.1, 0.0, &state).unwrap() < peak);
    assert!(husimi_density(nu, 2.0, 0.1, &state).unwrap() < peak);
    // quadrature path agrees with the closed form
    let probe = CSParams::new(1.7, 0.4, nu, 0).unwrap();
    let closed = husimi_density(nu, 1.7, 0.4, &state).unwrap();
    let quad = inner_product(&probe, &state).unwrap().norm_sqr()
        / (2.0 * std::f64::consts::PI * XI_3_0 / 3.0);
    assert!((closed - quad).abs() < 1e-12);

    // ∫ρ dq dp over the half-plane
    let xi = xi_star(nu, 0).unwrap();
    let total = integrate_adaptive_tol(
        |s: f64| {
            let q = s.exp();
            let inner = |p: f64| husimi_density(nu, q, p, &state).unwrap();
            let lo = integrate_adaptive_tol(
                |t: f64| inner(-t),
                Domain::UpperInfinite {
                    a: 0.0,
                    scale: xi / q,
                },
                1e-14,
                1e-11,
            )
            .unwrap();
            let hi = integrate_adaptive_tol(
                inner,
                Domain::UpperInfinite {
                    a: 0.0,
                    scale: xi / q,
                },
                1e-14,
                1e-11,
            )
            .unwrap();
            q * (lo.value + hi.value)
        },
        Domain::Finite((2e-3f64).ln(), (2e3f64).ln()),
        1e-12,
        1e-10,
    )
    .unwrap();
    assert!((total.value - 1.0).abs() < 1e-6, "∫ρ = {}", total.value);
}

#[test]
fn husimi_grid_matches_pointwise() {
    let state = CSParams::new(2.0, 0.0, 3.0, 1).unwrap();
    let qs = [1.0, 2.0, 3.0];
    let ps = [-1.0, 0.0, 1.0];
    let g = husimi_grid(3.0, &qs, &ps, &state).unwrap();
    assert_eq!(g.len(), 9);
    assert!((g[4] - husimi_density(3.0, 2.0, 0.0, &state).unwrap()).abs() < 1e-15);
    assert!(g.iter().all(|&v| v >= 0.0));
}

#[test]
fn resolution_of_identity() {
    let xi = xi_star(3.0, 0).unwrap();
    let tests: Vec<FiducialSpec> = (0..4)
        .map(|k| FiducialSpec::with_xi(3.0, k, xi).unwrap())
        .collect();
    let refs: Vec<&dyn WaveFunction> = tests.iter().map(|t| t as &dyn WaveFunction).collect();
    let r = identity_check(3.0, 0, &refs, FrameOptions::default()).unwrap();
    assert!(r.max_residual < 1e-3, "{:?}", r.residuals);
    assert!(r.frame.error_budget() < 1e-4);
    for i in 0..4 {
        // diagonal entries integrate |⟨φ|q,p⟩|² ≥ 0
        assert!(r.frame.entry(i, i).re > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_overlap_is_dilation_invariant(
        q1 in 0.1f64..10.0, p1 in -10.0f64..10.0, q2 in 0.1f64..10.0, p2 in -10.0f64..10.0, lambda in 0.1f64..10.0
    ) {
        let a = CSParams::new(q1, p1, 3.0, 0).unwrap();
        let b = CSParams::new(q2, p2, 3.0, 0).unwrap();
        let a2 = CSParams::new(lambda * q1, p1 / lambda, 3.0, 0).unwrap();
        let b2 = CSParams::new(lambda * q2, p2 / lambda, 3.0, 0).unwrap();
        let v = overlap_n0_squared(&a, &b).unwrap();
        let w = overlap_n0_squared(&a2, &b2).unwrap();
        prop_assert!((v - w).abs() <= 1e-12 * v.max(1e-300));
        prop_assert!(v <= 1.0 + 1e-15);
    }

    #[test]
    fn phase_factor_has_unit_modulus(q in 1e-3f64..1e3, p in -1e3f64..1e3, n in 0usize..5, nu in 0.6f64..10.0) {
        let cs = CSParams::new(q, p, nu, n).unwrap();
        prop_assert!((cs.phase_factor().norm() - 1.0).abs() < 1e-13);
    }
}
