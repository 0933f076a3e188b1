//! Numerical experiments on propagated coherent states.

use super::{
    choose_xi_ref, hnu_matrix, momentum_matrix, position_matrix, project, BasisSpec, Propagator,
    StateVector,
};
use crate::coherent::{CSParams, Superposition, WaveFunction};
use crate::dynamics::{evolve_cs, PhasePoint};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;

/// Basis and convergence settings shared by the checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityOptions {
    /// Working truncation N; the comparison run uses 2N.
    pub size: usize,
    /// Basis scale; chosen from the states involved when absent.
    pub xi_ref: Option<f64>,
    /// Largest acceptable projection deficit.
    pub deficit_tol: f64,
    /// Largest acceptable |F_N − F_2N|.
    pub delta_tol: f64,
}

impl Default for FidelityOptions {
    fn default() -> Self {
        FidelityOptions {
            size: 256,
            xi_ref: None,
            deficit_tol: super::DEFICIT_TOL,
            delta_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityRow {
    pub t: f64,
    pub q: f64,
    pub p: f64,
    /// F = ⟨q_t,p_t|e^{−iĤt}|q₀,p₀⟩ at size N.
    pub fidelity: Complex64,
    pub deviation: f64,
    /// |F_N − F_2N|.
    pub truncation_delta: f64,
    pub deficit_initial: f64,
    pub deficit_target: f64,
    /// ⟨c(t)|H|c(t)⟩ − ⟨c|H|c⟩.
    pub energy_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityReport {
    pub nu: f64,
    pub n: usize,
    pub q0: f64,
    pub p0: f64,
    pub basis: BasisSpec,
    pub rows: Vec<FidelityRow>,
    pub max_deviation: f64,
    pub max_truncation_delta: f64,
    /// Every deficit and N-vs-2N delta within tolerance.
    pub converged: bool,
}

/// Sizes N and 2N sharing one ξ_ref.
struct Pair {
    small: BasisSpec,
    large: BasisSpec,
    u_small: Propagator,
    u_large: Propagator,
}

impl Pair {
    fn new(nu: f64, xi_ref: f64, size: usize) -> Result<Self> {
        let small = BasisSpec::new(nu, xi_ref, size)?;
        let large = small.with_size(2 * size)?;
        let u_large = Propagator::new(&hnu_matrix(&large)?)?;
        let u_small = Propagator::new(&hnu_matrix(&small)?)?;
        Ok(Pair {
            small,
            large,
            u_small,
            u_large,
        })
    }

    /// Projections at 2N and the truncation to N.
    fn project(&self, psi: &dyn WaveFunction) -> Result<(StateVector, StateVector)> {
        let big = project(psi, &self.large)?;
        let small = big.truncated(self.small.size)?;
        Ok((small, big))
    }
}

fn labels_of(states: &[CSParams]) -> Vec<(f64, f64, f64)> {
    states.iter().map(|s| (s.q(), s.p(), s.xi())).collect()
}

/// Adds the turning point when the orbit passes it between 0 and t.
fn with_bounce(cs: &CSParams, times: &[f64], states: &mut Vec<CSParams>) -> Result<()> {
    let m = cs.q() * cs.p();
    let h = cs.expectation_h_semiclassical();
    let tb = -m / (2.0 * h);
    let (lo, hi) = times
        .iter()
        .fold((0.0f64, 0.0f64), |(a, b), &t| (a.min(t), b.max(t)));
    if tb > lo && tb < hi {
        states.push(evolve_cs(cs, tb)?);
    }
    Ok(())
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid(
            "times must be a non-empty list of finite values",
        ));
    }
    Ok(())
}

/// F(t) = ⟨q_t,p_t;ν,n|e^{−iĤ_ν t}|q₀,p₀;ν,n⟩ for each time, with the N vs
/// 2N comparison as an error bar.
pub fn fidelity_report(
    nu: f64,
    n: usize,
    point: PhasePoint,
    times: &[f64],
    options: &FidelityOptions,
) -> Result<FidelityReport> {
    check_times(times)?;
    let cs0 = CSParams::new(point.q, point.p, nu, n)?;
    let targets = times
        .iter()
        .map(|&t| evolve_cs(&cs0, t))
        .collect::<Result<Vec<_>>>()?;
    let xi_ref = match options.xi_ref {
        Some(x) => x,
        None => {
            let mut states = vec![cs0];
            states.extend(targets.iter().copied());
            with_bounce(&cs0, times, &mut states)?;
            choose_xi_ref(&labels_of(&states))?
        }
    };
    let pair = Pair::new(nu, xi_ref, options.size)?;
    let h = hnu_matrix(&pair.small)?;
    let (c_small, c_large) = pair.project(&cs0)?;
    let e0 = h.expectation(&c_small).re;

    let mut rows = Vec::with_capacity(times.len());
    for (&t, target) in times.iter().zip(&targets) {
        let (d_small, d_large) = pair.project(target)?;
        let ct = pair.u_small.propagate(&c_small, t);
        let f_small = d_small.inner(&ct);
        let f_large = d_large.inner(&pair.u_large.propagate(&c_large, t));
        rows.push(FidelityRow {
            t,
            q: target.q(),
            p: target.p(),
            fidelity: f_small,
            deviation: (f_small - 1.0).norm(),
            truncation_delta: (f_small - f_large).norm(),
            deficit_initial: c_small.deficit,
            deficit_target: d_small.deficit,
            energy_drift: h.expectation(&ct).re - e0,
        });
    }
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let max_truncation_delta = rows.iter().map(|r| r.truncation_delta).fold(0.0, f64::max);
    let converged = max_truncation_delta < options.delta_tol
        && rows.iter().all(|r| {
            r.deficit_initial < options.deficit_tol && r.deficit_target < options.deficit_tol
        });
    Ok(FidelityReport {
        nu,
        n,
        q0: point.q,
        p0: point.p,
        basis: pair.small,
        rows,
        max_deviation,
        max_truncation_delta,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiouvilleRow {
    pub q: f64,
    pub p: f64,
    /// ⟨q,p|e^{−iĤt}|ψ⟩ from the propagated coefficients.
    pub evolved: Complex64,
    /// ⟨Q_{−t},P_{−t}|ψ⟩ from closed-form overlaps.
    pub transported: Complex64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiouvilleReport {
    pub t: f64,
    pub basis: BasisSpec,
    pub rows: Vec<LiouvilleRow>,
    pub max_residual: f64,
    pub deficit: f64,
    pub converged: bool,
}

/// Compares the evolved state's coherent-state representation with the
/// representation of the initial state transported along the flow.
pub fn liouville_check(
    n: usize,
    psi: &Superposition,
    points: &[PhasePoint],
    t: f64,
    options: &FidelityOptions,
) -> Result<LiouvilleReport> {
    check_times(&[t])?;
    if points.is_empty() {
        return Err(Error::invalid("no sample points"));
    }
    let nu = psi.terms().next().map(|(_, s)| s.nu()).unwrap_or(0.0);
    let probes = points
        .iter()
        .map(|x| CSParams::new(x.q, x.p, nu, n))
        .collect::<Result<Vec<_>>>()?;
    let back = probes
        .iter()
        .map(|s| evolve_cs(s, -t))
        .collect::<Result<Vec<_>>>()?;
    let xi_ref = match options.xi_ref {
        Some(x) => x,
        None => {
            let mut states: Vec<CSParams> = Vec::new();
            for (_, s) in psi.terms() {
                states.push(*s);
                states.push(evolve_cs(s, t)?);
                with_bounce(s, &[t], &mut states)?;
            }
            states.extend(probes.iter().copied());
            choose_xi_ref(&labels_of(&states))?
        }
    };
    let pair = Pair::new(nu, xi_ref, options.size)?;
    let (c_small, c_large) = pair.project(psi)?;
    let ct_small = pair.u_small.propagate(&c_small, t);
    let ct_large = pair.u_large.propagate(&c_large, t);

    let mut rows = Vec::with_capacity(points.len());
    let mut converged = c_small.deficit < options.deficit_tol;
    for ((x, probe), b) in points.iter().zip(&probes).zip(&back) {
        let (d_small, d_large) = pair.project(probe)?;
        let evolved = d_small.inner(&ct_small);
        converged &= d_small.deficit < options.deficit_tol
            && (evolved - d_large.inner(&ct_large)).norm() < options.delta_tol;
        let transported = psi.overlap_with(b)?;
        rows.push(LiouvilleRow {
            q: x.q,
            p: x.p,
            evolved,
            transported,
            residual: (evolved - transported).norm(),
        });
    }
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(LiouvilleReport {
        t,
        basis: pair.small,
        rows,
        max_residual,
        deficit: c_small.deficit,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EhrenfestRow {
    pub t: f64,
    /// d⟨x̂⟩/dt by finite differences.
    pub dx_dt: f64,
    pub two_p: f64,
    /// d⟨p̂⟩/dt by finite differences.
    pub dp_dt: f64,
    /// 2(ν²−1/4)⟨x̂^{−3}⟩.
    pub force: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EhrenfestReport {
    pub basis: BasisSpec,
    pub rows: Vec<EhrenfestRow>,
    pub max_residual: f64,
}

/// Finite-difference step of the Ehrenfest check.
const EHRENFEST_STEP: f64 = 2e-4;

/// Checks d⟨x̂⟩/dt = 2⟨p̂⟩ and d⟨p̂⟩/dt = 2(ν²−1/4)⟨x̂^{−3}⟩ along the
/// propagated state, with x̂, p̂ and x̂^{−3} built by quadrature.
pub fn ehrenfest_check(
    nu: f64,
    n: usize,
    point: PhasePoint,
    times: &[f64],
    options: &FidelityOptions,
) -> Result<EhrenfestReport> {
    check_times(times)?;
    let cs0 = CSParams::new(point.q, point.p, nu, n)?;
    let xi_ref = match options.xi_ref {
        Some(x) => x,
        None => {
            let mut states = vec![cs0];
            for &t in times {
                states.push(evolve_cs(&cs0, t)?);
            }
            with_bounce(&cs0, times, &mut states)?;
            choose_xi_ref(&labels_of(&states))?
        }
    };
    let basis = BasisSpec::new(nu, xi_ref, options.size)?;
    let u = Propagator::new(&hnu_matrix(&basis)?)?;
    let c = project(&cs0, &basis)?;
    let x = position_matrix(&basis, |x| x);
    let xm3 = position_matrix(&basis, |x| x.powi(-3));
    let pm = momentum_matrix(&basis);
    let g = 2.0 * (nu * nu - 0.25);

    let h = EHRENFEST_STEP;
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let at = |s: f64| u.propagate(&c, t + s);
        let states: Vec<StateVector> = [-2.0, -1.0, 1.0, 2.0].iter().map(|k| at(k * h)).collect();
        let deriv = |m: &super::OperatorMatrix| {
            let v: Vec<f64> = states.iter().map(|s| m.expectation(s).re).collect();
            (v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * h)
        };
        let ct = at(0.0);
        let dx_dt = deriv(&x);
        let dp_dt = deriv(&pm);
        let two_p = 2.0 * pm.expectation(&ct).re;
        let force = g * xm3.expectation(&ct).re;
        let residual = (dx_dt - two_p).abs().max((dp_dt - force).abs());
        rows.push(EhrenfestRow {
            t,
            dx_dt,
            two_p,
            dp_dt,
            force,
            residual,
        });
    }
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(EhrenfestReport {
        basis,
        rows,
        max_residual,
    })
}
