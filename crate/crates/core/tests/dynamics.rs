#![allow(clippy::excessive_precision)]

use affine_cs::coherent::CSParams;
use affine_cs::dynamics::*;
use num_complex::Complex64;
use proptest::prelude::*;

const H_5_M4: f64 = 16.564_978_603_530_300_856_681_39;
const Q_MIN_5_M4: f64 = 0.923_401_477_530_001_040_050_437_4;
const T_BOUNCE_5_M4: f64 = 0.603_683_242_782_385_274_608_272;

fn start() -> PhasePoint {
    PhasePoint::new(5.0, -4.0).unwrap()
}

/// Störmer–Verlet for dq/dt = 2p, dp/dt = 2ξ²/q³, Richardson-extrapolated in dt.
fn leapfrog(xi: f64, x: PhasePoint, t: f64, dt: f64) -> PhasePoint {
    let run = |dt: f64| {
        let steps = (t / dt).round() as usize;
        let h = t / steps as f64;
        let (mut q, mut p) = (x.q, x.p);
        for _ in 0..steps {
            p += 0.5 * h * 2.0 * xi * xi / (q * q * q);
            q += h * 2.0 * p;
            p += 0.5 * h * 2.0 * xi * xi / (q * q * q);
        }
        (q, p)
    };
    let (q1, p1) = run(dt);
    let (q2, p2) = run(0.5 * dt);
    PhasePoint {
        q: (4.0 * q2 - q1) / 3.0,
        p: (4.0 * p2 - p1) / 3.0,
    }
}

#[test]
fn hamiltonian_examples() {
    let sc = Semiclassical::new(3.0, 0).unwrap();
    assert!((sc.h_sc(start()) - H_5_M4).abs() < 1e-13 * H_5_M4);
    assert!((h_sc(start(), 3.0, 0).unwrap() - H_5_M4).abs() < 1e-13 * H_5_M4);
    for n in 0..3 {
        let sc = Semiclassical::new(3.0, n).unwrap();
        assert!((sc.h_sc(PhasePoint::new(sc.xi, 0.0).unwrap()) - 1.0).abs() < 1e-15);
    }
    assert!(PhasePoint::new(0.0, 1.0).is_err());
    assert!(PhasePoint::new(1.0, f64::INFINITY).is_err());
}

#[test]
fn bounce_example() {
    let sc = Semiclassical::new(3.0, 0).unwrap();
    assert!((sc.q_min(start()) - Q_MIN_5_M4).abs() < 1e-14);
    assert!((sc.bounce_time(start()) - T_BOUNCE_5_M4).abs() < 1e-14);
    let y = sc.flow(start(), 0.6036);
    assert!((y.q - 0.9234).abs() < 1e-4 && y.p.abs() < 5e-3);
    let oracle = leapfrog(sc.xi, start(), 0.6036, 1e-5);
    assert!((y.q - oracle.q).abs() < 1e-6 && (y.p - oracle.p).abs() < 1e-6);
    let at = flow(start(), T_BOUNCE_5_M4, 3.0, 0).unwrap();
    assert!((at.q - Q_MIN_5_M4).abs() < 1e-14 && at.p.abs() < 1e-13);
}

#[test]
fn energy_is_conserved() {
    let sc = Semiclassical::new(3.0, 0).unwrap();
    let h0 = sc.h_sc(start());
    for t in [-2.0, 1.0, 10.0] {
        let h = sc.h_sc(sc.flow(start(), t));
        assert!((h - h0).abs() < 1e-12 * h0, "t={t}");
    }
}

#[test]
fn bounce_is_the_minimum() {
    for n in 0..3 {
        let sc = Semiclassical::new(3.0, n).unwrap();
        let x = start();
        let lowest = (0..=200_000)
            .map(|i| sc.flow(x, 1.2 * i as f64 / 200_000.0).q)
            .fold(f64::INFINITY, f64::min);
        assert!((lowest - sc.q_min(x)).abs() < 1e-8, "n={n}");
    }
}

#[test]
fn flow_equations_by_finite_differences() {
    let sc = Semiclassical::new(3.0, 1).unwrap();
    let x = PhasePoint::new(2.0, 1.5).unwrap();
    let h = 1e-3;
    for t in [-1.0, 0.0, 0.3, 2.0] {
        // fourth-order central difference
        let d = |f: &dyn Fn(f64) -> f64| {
            (8.0 * (f(t + h) - f(t - h)) - (f(t + 2.0 * h) - f(t - 2.0 * h))) / (12.0 * h)
        };
        let dq = d(&|s| sc.flow(x, s).q);
        let dp = d(&|s| sc.flow(x, s).p);
        let dm = d(&|s| {
            let y = sc.flow(x, s);
            y.q * y.p
        });
        let dphi = d(&|s| sc.phase(x, s));
        let y = sc.flow(x, t);
        let hsc = sc.h_sc(x);
        assert!((dq - 2.0 * y.p).abs() < 1e-7);
        assert!((dp - 2.0 * sc.xi * sc.xi / y.q.powi(3)).abs() < 1e-7);
        assert!((dm - 2.0 * hsc).abs() < 1e-8 * hsc);
        let want = sc.omega_tilde() / (y.q * y.q);
        assert!((dphi - want).abs() < 1e-8 * want, "t={t}: {dphi} vs {want}");
    }
}

#[test]
fn phase_conventions() {
    let sc = Semiclassical::new(3.0, 2).unwrap();
    assert!((sc.omega_tilde() / (4.0 * sc.xi) - 0.5 * (2.0 * 2.0 + 3.0 + 1.0)).abs() < 1e-14);
    assert_eq!(sc.phase(PhasePoint::new(1.0, 0.0).unwrap(), 0.0), 0.0);
    assert_eq!(
        phase(PhasePoint::new(3.0, 0.0).unwrap(), 0.0, 3.0, 0).unwrap(),
        0.0
    );
    let x = start();
    for t in [-1.0, 0.2, 0.9, 3.0] {
        let m = sc.dilation(x, t);
        let z = Complex64::new(sc.xi, -m) / Complex64::new(sc.xi, m);
        let lhs = Complex64::from_polar(1.0, -sc.phase(x, t));
        let rhs = z.powf(sc.omega_tilde() / (4.0 * sc.xi));
        assert!((lhs - rhs).norm() < 1e-12);
    }
}

#[test]
fn matches_symplectic_oracle() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    use proptest::strategy::{Strategy, ValueTree};
    let sc = Semiclassical::new(3.0, 0).unwrap();
    let strat = (0.5f64..8.0, -5.0f64..5.0).prop_map(|(q, p)| PhasePoint::new(q, p).unwrap());
    for _ in 0..10 {
        let x = strat.new_tree(&mut runner).unwrap().current();
        for t in [1.0, 2.5, 5.0] {
            let y = sc.flow(x, t);
            let o = leapfrog(sc.xi, x, t, 1e-5);
            assert!(
                (y.q - o.q).abs() < 1e-6 && (y.p - o.p).abs() < 1e-6,
                "{x:?} t={t}: {y:?} vs {o:?}"
            );
        }
    }
}

#[test]
fn evolve_cs_moves_labels() {
    let cs = CSParams::new(5.0, -4.0, 3.0, 1).unwrap();
    assert_eq!(evolve_cs(&cs, 0.0).unwrap(), cs);
    let e = evolve_cs(&cs, 0.7).unwrap();
    let y = flow(start(), 0.7, 3.0, 1).unwrap();
    assert!((e.q() - y.q).abs() < 1e-15 && (e.p() - y.p).abs() < 1e-15);
    assert_eq!((e.nu(), e.n(), e.xi()), (cs.nu(), cs.n(), cs.xi()));
}

#[test]
fn trajectory_records_energy() {
    let sc = Semiclassical::new(3.0, 0).unwrap();
    let tr = sc.trajectory(start(), &[0.0, 0.5, 1.0]);
    assert_eq!(tr.points.len(), 3);
    assert!((tr.h_sc - H_5_M4).abs() < 1e-12);
    for p in &tr.points {
        assert!((sc.h_sc(PhasePoint::new(p.q, p.p).unwrap()) - tr.h_sc).abs() < 1e-12 * tr.h_sc);
    }
    assert!(sc.polyline(start(), 1.0, 0.0, 5).is_err());
}

proptest! {
    #[test]
    fn group_property(q in 0.1f64..10.0, p in -10.0f64..10.0, t1 in -3.0f64..3.0, t2 in -3.0f64..3.0) {
        let sc = Semiclassical::new(3.0, 0).unwrap();
        let x = PhasePoint::new(q, p).unwrap();
        let a = sc.flow(sc.flow(x, t1), t2);
        let b = sc.flow(x, t1 + t2);
        prop_assert!((a.q - b.q).abs() < 1e-12 * b.q.max(1.0));
        prop_assert!((a.p - b.p).abs() < 1e-12 * b.p.abs().max(1.0));
    }

    #[test]
    fn time_reversal(q in 0.1f64..10.0, p in -10.0f64..10.0, t in -3.0f64..3.0) {
        let sc = Semiclassical::new(3.0, 1).unwrap();
        let fwd = sc.flow(PhasePoint::new(q, p).unwrap(), t);
        let back = sc.flow(PhasePoint::new(q, -p).unwrap(), -t);
        prop_assert!((fwd.q - back.q).abs() < 1e-12 * fwd.q.max(1.0));
        prop_assert!((fwd.p + back.p).abs() < 1e-12 * fwd.p.abs().max(1.0));
    }

    #[test]
    fn phase_is_odd(q in 0.1f64..10.0, p in -10.0f64..10.0, t in -3.0f64..3.0) {
        let sc = Semiclassical::new(3.0, 0).unwrap();
        let a = sc.phase(PhasePoint::new(q, p).unwrap(), t);
        let b = sc.phase(PhasePoint::new(q, -p).unwrap(), -t);
        prop_assert!((a + b).abs() < 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn q_stays_above_bounce(q in 0.1f64..10.0, p in -10.0f64..10.0, t in -50.0f64..50.0) {
        let sc = Semiclassical::new(6.0, 2).unwrap();
        let x = PhasePoint::new(q, p).unwrap();
        prop_assert!(sc.flow(x, t).q >= sc.q_min(x) * (1.0 - 1e-15));
    }
}
