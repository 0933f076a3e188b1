#![allow(clippy::excessive_precision)]

use affine_cs::fiducial::*;
use affine_cs::specfun::{
    gauss_laguerre, integrate_adaptive_tol, ln_gamma, radial_functions, Domain,
};
use affine_cs::Error;
use proptest::prelude::*;

const NUS: [f64; 3] = [1.0, 3.0, 6.0];

// 30-digit reference values (mpmath quadrature of the defining integrals).
const XI_3_0: f64 = 3.758_252_930_319_821_012_809_314_594_26;
const XI_3_1: f64 = 5.299_723_858_771_310_100_094_385_033_3;
const XI_3_2: f64 = 6.865_280_270_479_853_704_368_284_697_97;
const XI_1_0: f64 = 1.767_145_867_644_258_696_635_236_903_1;
const XI_6_0: f64 = 6.754_615_503_408_107_216_976_944_016_03;
const G1_3_2_3: f64 = 2.302_112_911_820_640_933_893_128_321;

// ψ ∝ e^{−(x+1/x)} restricted to [1e−4, 50], mpmath.
const GRID_C1: f64 = 1.393_954_185_972_208_741_155_678_472_47;
const GRID_C2: f64 = 2.393_954_185_972_208_741_155_678_472_38;
const GRID_CM1: f64 = 0.893_954_185_972_208_741_155_678_472_511;
const GRID_C: f64 = 1.393_954_185_972_208_741_155_678_472_47;
const GRID_K: f64 = 8.575_816_743_888_834_964_622_713_889_61;
const GRID_POSITIVITY: f64 = 4.984_885_464_930_521_852_889_196_181_04;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn orthonormality_up_to_eight() {
    for nu in NUS {
        let xi = xi_star(nu, 0).unwrap();
        let hi = ((4.0 * 8.0 + 2.0 * nu + 90.0) / xi).sqrt();
        let r = integrate_adaptive_tol(
            |x: f64| {
                let phi = radial_functions(8, nu, xi, x);
                let mut out = Vec::with_capacity(45);
                for m in 0..=8 {
                    for n in m..=8 {
                        out.push(phi[m] * phi[n]);
                    }
                }
                out
            },
            Domain::Finite(0.0, hi),
            1e-14,
            1e-13,
        )
        .unwrap();
        let mut i = 0;
        for m in 0..=8 {
            for n in m..=8 {
                let want = if m == n { 1.0 } else { 0.0 };
                assert!(
                    (r.value[i] - want).abs() < 1e-10,
                    "ν={nu} ⟨{m}|{n}⟩ = {}",
                    r.value[i]
                );
                i += 1;
            }
        }
    }
}

#[test]
fn phi_vanishes_at_origin_and_omega() {
    let s = FiducialSpec::with_xi(3.0, 0, 1.0).unwrap();
    assert_eq!(s.phi(0.0), 0.0);
    assert_eq!(s.omega(), 8.0);
    assert_eq!(FiducialSpec::with_xi(3.0, 1, 1.0).unwrap().omega(), 12.0);
}

#[test]
fn eigen_residuals() {
    for nu in NUS {
        for n in 0..3 {
            let r = FiducialSpec::new(nu, n).unwrap().eigen_residual().unwrap();
            assert!(r < 1e-8, "ν={nu} n={n}: {r:e}");
        }
    }
}

#[test]
fn constraints_hold_at_scaled_xi() {
    for nu in NUS {
        for n in 0..3 {
            let report = FiducialSpec::new(nu, n).unwrap().validate().unwrap();
            assert!(report.satisfied, "ν={nu} n={n}: {report:?}");
            assert!(report.max_relative < 1e-8);
        }
    }
}

#[test]
fn constraint_ii_fails_off_scale() {
    let s = FiducialSpec::with_xi(3.0, 0, 2.0 * XI_3_0).unwrap();
    let report = s.validate().unwrap();
    assert!(!report.satisfied);
    assert!(report.entries[1].relative > 1e-3);
}

#[test]
fn c_gamma_closed_form_matches_quadrature() {
    for nu in NUS {
        for n in 0..3 {
            let s = FiducialSpec::new(nu, n).unwrap();
            for g in [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0] {
                match s.c_gamma(g) {
                    Moment::Finite { value } => {
                        let q = s.c_gamma_quadrature(g).unwrap();
                        assert!(rel(q, value) < 1e-10, "ν={nu} n={n} γ={g}: {q} vs {value}");
                    }
                    Moment::Divergent { bound, .. } => assert!(g >= bound && bound == 2.0 * nu),
                }
            }
        }
    }
}

#[test]
fn c_gamma_examples() {
    for nu in NUS {
        for n in 0..3 {
            let s = FiducialSpec::new(nu, n).unwrap();
            assert!((s.c_gamma(-2.0).value().unwrap() - 1.0).abs() < 1e-13);
            assert!((s.c_gamma(-3.0).value().unwrap() - 1.0).abs() < 1e-13);
        }
    }
    let s = FiducialSpec::new(3.0, 0).unwrap();
    assert!(rel(s.c_gamma(0.0).value().unwrap(), XI_3_0 / 3.0) < 1e-13);
    assert!(rel(c0(3.0, 0).unwrap(), XI_3_0 / 3.0) < 1e-13);
    assert!(matches!(s.c_gamma(6.0).value(), Err(Error::Divergent(_))));
    assert!(matches!(
        s.c_gamma_quadrature(7.0),
        Err(Error::Divergent(_))
    ));
}

#[test]
fn g_moment_examples() {
    for nu in [0.7, 1.0, 3.0, 6.0] {
        for n in 0..6 {
            assert!(
                (g_moment(n, 1.0, nu).unwrap() - 1.0).abs() < 1e-12,
                "G_{n}(1,{nu})"
            );
        }
        for alpha in [-0.5, 0.0, 1.5, 2.0] {
            let want = (ln_gamma(nu + alpha) - ln_gamma(nu + 1.0)).exp();
            assert!(rel(g_moment(0, alpha, nu).unwrap(), want) < 1e-13);
        }
    }
    assert!(rel(g_moment(1, 1.5, 3.0).unwrap(), G1_3_2_3) < 1e-13);
    assert!(matches!(g_moment(2, -3.5, 3.0), Err(Error::Divergent(_))));
}

#[test]
fn g_moment_paths_agree() {
    for nu in [0.6, 1.0, 3.0, 6.0] {
        for n in 0..7 {
            for alpha in [-0.5, 0.0, 0.5, 1.5, 2.0, 3.0] {
                let closed = g_moment(n, alpha, nu).unwrap();
                let quad = g_moment_quadrature(n, alpha, nu).unwrap();
                assert!(
                    rel(quad, closed) < 1e-10,
                    "n={n} α={alpha} ν={nu}: {quad} vs {closed}"
                );
            }
        }
    }
}

#[test]
fn scale_values() {
    let ratio = (ln_gamma(4.5) - ln_gamma(4.0)).exp();
    assert!(rel(xi_star(3.0, 0).unwrap(), ratio * ratio) < 1e-12);
    assert!(rel(xi_star(3.0, 0).unwrap(), XI_3_0) < 1e-13);
    assert!(rel(g_moment_quadrature(0, 1.5, 3.0).unwrap().powi(2), XI_3_0) < 1e-10);
    assert!(rel(xi_star(3.0, 1).unwrap(), XI_3_1) < 1e-12);
    assert!(rel(xi_star(3.0, 2).unwrap(), XI_3_2) < 1e-12);
    assert!(rel(xi_star(1.0, 0).unwrap(), XI_1_0) < 1e-12);
    assert!(rel(xi_star(6.0, 0).unwrap(), XI_6_0) < 1e-12);
    assert!(rel(omega_tilde(3.0, 0).unwrap(), 8.0 * XI_3_0) < 1e-13);
    assert!(xi_star(0.5, 0).is_err());
}

#[test]
fn c_minus_four_relations() {
    for nu in NUS {
        for n in 0..3 {
            let s = FiducialSpec::new(nu, n).unwrap();
            let cm4 = s.c_gamma(-4.0).value().unwrap();
            let wt = omega_tilde(nu, n).unwrap();
            assert!(rel(cm4, wt / (2.0 * s.xi * s.xi)) < 1e-10);
        }
        let s = FiducialSpec::new(nu, 0).unwrap();
        assert!(rel(s.c_gamma(-4.0).value().unwrap(), (nu + 1.0) / s.xi) < 1e-13);
    }
    assert!(
        (FiducialSpec::new(3.0, 0)
            .unwrap()
            .c_gamma(-4.0)
            .value()
            .unwrap()
            - 1.06432)
            .abs()
            < 1e-5
    );
}

#[test]
fn derivative_constants_closed_form_and_quadrature() {
    let s = FiducialSpec::new(3.0, 0).unwrap();
    let c = s.derivative_constants().c;
    assert!(rel(c, XI_3_0 * 3.25 / 3.0) < 1e-12);
    assert!((c - 4.0715).abs() < 1e-4);
    for nu in NUS {
        for n in 0..3 {
            let s = FiducialSpec::new(nu, n).unwrap();
            let dc = s.derivative_constants();
            let (cq, kq) = s.derivative_constants_quadrature().unwrap();
            assert!(dc.c > 0.0);
            assert!(rel(cq, dc.c) < 1e-10, "ν={nu} n={n}");
            // C = ω̃/2 − (ν²−1/4)c₀
            let c0 = s.c_gamma(0.0).value().unwrap();
            assert!(rel(dc.c, 0.5 * s.omega() - s.repulsion() * c0) < 1e-10);
            match (dc.k, kq) {
                (Moment::Finite { value }, Some(k)) => {
                    assert!(rel(k, value) < 1e-9, "ν={nu} n={n}: {k} vs {value}")
                }
                (Moment::Divergent { .. }, None) => assert!(nu <= 1.0),
                other => panic!("mismatched K status {other:?}"),
            }
        }
    }
}

#[test]
fn moment_report_is_complete() {
    let s = FiducialSpec::new(3.0, 1).unwrap();
    let r = s.moment_report(&[-4.0, -3.0, 0.0, 6.0]).unwrap();
    assert_eq!(r.c_gamma.len(), 4);
    assert!(r.c_gamma[..3]
        .iter()
        .all(|e| e.relative_difference.unwrap() < 1e-10));
    assert!(!r.c_gamma[3].moment.is_finite());
    assert!(r.constraints.satisfied);
    assert!(r.eigen_residual < 1e-8);
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["c_gamma"][3]["moment"]["status"], "divergent");
}

#[test]
fn grid_fiducial_moments() {
    let g = GridFiducial::standard();
    assert_eq!(g.len(), 2048);
    assert!((g.moment(-2.0) - 1.0).abs() < 1e-10);
    assert!(rel(g.moment(1.0), GRID_C1) < 1e-9);
    assert!(rel(g.moment(2.0), GRID_C2) < 1e-9);
    assert!(rel(g.moment(-1.0), GRID_CM1) < 1e-9);
    let (c, k) = g.derivative_constants().unwrap();
    assert!(rel(c, GRID_C) < 1e-8, "C = {c}");
    assert!(rel(k, GRID_K) < 1e-8, "K = {k}");
    assert!(k - 1.5 * g.moment(2.0) > 0.0);
}

#[test]
fn grid_positivity_identity() {
    let g = GridFiducial::standard();
    let (_, k) = g.derivative_constants().unwrap();
    let lhs = k - 1.5 * g.moment(2.0);
    let rhs = g.inverted_positivity_integral();
    assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
    assert!(rel(rhs, GRID_POSITIVITY) < 1e-8);
}

#[test]
fn grid_rejects_bad_input() {
    assert!(GridFiducial::from_samples(&[1.0, 0.5, 2.0], &[1.0; 3], 1).is_err());
    assert!(GridFiducial::from_samples(&[1.0, 2.0], &[1.0; 3], 1).is_err());
    assert!(GridFiducial::standard().rescaled(-1.0).is_err());
}

#[test]
fn grid_matches_analytic_samples() {
    // a Φ_0 sampled on a grid reproduces its analytic moments
    let s = FiducialSpec::new(3.0, 0).unwrap();
    let n = 1500;
    let (a, b) = (1e-3f64.ln(), 6f64.ln());
    let x: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    let v: Vec<f64> = x.iter().map(|&x| s.phi(x)).collect();
    let g = GridFiducial::from_samples(&x, &v, 6).unwrap();
    assert!(rel(g.moment(-4.0), s.c_gamma(-4.0).value().unwrap()) < 1e-9);
    assert!(rel(g.moment(0.0), s.c_gamma(0.0).value().unwrap()) < 1e-9);
    let (c, _) = g.derivative_constants().unwrap();
    assert!(rel(c, s.derivative_constants().c) < 1e-8);
}

#[test]
fn gauss_laguerre_reproduces_normalization() {
    // ∫ Φ_n² dx = 1 through the y-substitution and a Gauss–Laguerre rule
    let (nodes, weights) = gauss_laguerre(10, 3.0).unwrap();
    let norm = (ln_gamma(5.0) - ln_gamma(3.0 + 4.0 + 1.0)).exp();
    let s: f64 = nodes
        .iter()
        .zip(&weights)
        .map(|(&y, w)| w * affine_cs::specfun::laguerre(4, 3.0, y).powi(2))
        .sum();
    assert!((norm * s - 1.0).abs() < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scaling_law_on_grid(lambda in 0.2f64..5.0) {
        let g = GridFiducial::standard();
        let base = g.moment(-3.0);
        let scaled = g.rescaled(lambda).unwrap();
        prop_assert!((scaled.moment(-2.0) - 1.0).abs() < 1e-10);
        prop_assert!(rel(scaled.moment(-3.0), lambda * base) < 1e-10);
    }

    #[test]
    fn c_gamma_scales_with_xi(nu in 0.6f64..8.0, n in 0usize..4, g in -4.0f64..1.0, xi in 0.3f64..8.0) {
        prop_assume!(g < 2.0 * nu);
        let s = FiducialSpec::with_xi(nu, n, xi).unwrap();
        let unit = FiducialSpec::with_xi(nu, n, 1.0).unwrap();
        let v = s.c_gamma(g).value().unwrap();
        let u = unit.c_gamma(g).value().unwrap();
        prop_assert!(rel(v, xi.powf(1.0 + 0.5 * g) * u) < 1e-12);
    }
}
