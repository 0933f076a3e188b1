//! Affine coherent states |q,p;ν,n⟩ built on the fiducials Φ_n at ξ = ξ_{ν,n}.
//!
//! ⟨x|q,p;ν,n⟩ = e^{−iφ} q^{−1/2} Φ_n(x/q) e^{ipx²/(2q)} with
//! e^{−iφ} = ((ξ−iqp)/(ξ+iqp))^{(2n+ν+1)/2} on the principal branch.

mod frame;

pub use frame::{identity_check, FrameIntegrator, FrameOptions, FrameResult, IdentityReport};

use crate::error::{Error, Result};
use crate::fiducial::{xi_star, Fiducial, FiducialSpec};
use crate::specfun::{integrate_adaptive_tol, ln_gamma, Domain};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Absolute and relative tolerances of the x-space overlap quadratures.
pub const OVERLAP_ABS_TOL: f64 = 1e-14;
pub const OVERLAP_REL_TOL: f64 = 1e-12;

/// A square-integrable state on the half-line, given pointwise.
pub trait WaveFunction: Sync {
    fn amplitude(&self, x: f64) -> Complex64;
    /// Interval outside which the amplitude is negligible.
    fn support(&self) -> (f64, f64);
    /// Points inside the support where quadrature panels should break.
    fn landmarks(&self) -> Vec<f64> {
        Vec::new()
    }
    /// Bound on |d(arg ψ)/dx| from chirps, used to size quadrature panels.
    fn phase_rate(&self, _x: f64) -> f64 {
        0.0
    }
    fn as_coherent(&self) -> Option<&CSParams> {
        None
    }
}

/// A coherent-state label (q, p) with the fiducial indices (ν, n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CSParams {
    q: f64,
    p: f64,
    nu: f64,
    n: usize,
    xi: f64,
}

impl CSParams {
    pub fn new(q: f64, p: f64, nu: f64, n: usize) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::invalid(format!("q must be positive (got {q})")));
        }
        if !p.is_finite() {
            return Err(Error::invalid(format!("p must be finite (got {p})")));
        }
        let xi = xi_star(nu, n)?;
        Ok(CSParams { q, p, nu, n, xi })
    }

    /// Same (ν, n) at another phase-space point.
    pub fn at(&self, q: f64, p: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite() && p.is_finite()) {
            return Err(Error::invalid(format!("invalid label ({q}, {p})")));
        }
        Ok(CSParams { q, p, ..*self })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn fiducial(&self) -> FiducialSpec {
        FiducialSpec {
            nu: self.nu,
            n: self.n,
            xi: self.xi,
        }
    }

    /// (2n+ν+1)/2, the exponent of the phase factor.
    pub fn phase_exponent(&self) -> f64 {
        0.5 * (2.0 * self.n as f64 + self.nu + 1.0)
    }

    /// φ with e^{−iφ} = ((ξ−iqp)/(ξ+iqp))^{(2n+ν+1)/2}.
    pub fn phase_angle(&self) -> f64 {
        2.0 * self.phase_exponent() * (self.q * self.p / self.xi).atan()
    }

    pub fn phase_factor(&self) -> Complex64 {
        Complex64::from_polar(1.0, -self.phase_angle())
    }

    /// ⟨x|q,p;ν,n⟩.
    pub fn wavefunction(&self, x: f64) -> Complex64 {
        if x <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let amp = self.fiducial().phi(x / self.q) / self.q.sqrt();
        self.phase_factor() * Complex64::from_polar(amp, 0.5 * self.p * x * x / self.q)
    }

    /// (ψ, ψ′) at x.
    pub fn wavefunction_with_derivative(&self, x: f64) -> (Complex64, Complex64) {
        if x <= 0.0 {
            return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        }
        let (v, d, _) = self.fiducial().phi_derivatives(x / self.q);
        let s = self.q.sqrt();
        let carrier =
            self.phase_factor() * Complex64::from_polar(1.0, 0.5 * self.p * x * x / self.q);
        let psi = carrier * (v / s);
        let dpsi = carrier * Complex64::new(d / (self.q * s), v * self.p * x / (self.q * s));
        (psi, dpsi)
    }

    /// The n = 0 formula written without the Laguerre factor.
    pub fn wavefunction_n0(&self, x: f64) -> Result<Complex64> {
        if self.n != 0 {
            return Err(Error::invalid("the n = 0 formula needs n = 0"));
        }
        if x <= 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let nu = self.nu;
        let xi = self.xi;
        let z = Complex64::new(xi, -self.q * self.p) / Complex64::new(xi, self.q * self.p);
        let pre = (0.5 * (2f64.ln() - ln_gamma(nu + 1.0))).exp();
        let power = (z * xi).powf(0.5 * (nu + 1.0));
        let r = x / self.q;
        let ln_mod = (nu + 0.5) * x.ln() - (nu + 1.0) * self.q.ln() - 0.5 * xi * r * r;
        Ok(pre * power * Complex64::from_polar(ln_mod.exp(), 0.5 * self.p * x * r))
    }

    /// ⟨x̂^α⟩ = c_{−α−2} q^α, finite for α > −2ν−2.
    pub fn expectation_x_power(&self, alpha: f64) -> Result<f64> {
        if alpha <= -2.0 * self.nu - 2.0 {
            return Err(Error::Divergent(format!(
                "<x^{alpha}> requires alpha > {}",
                -2.0 * self.nu - 2.0
            )));
        }
        Ok(self.fiducial().c_gamma(-alpha - 2.0).value()? * self.q.powf(alpha))
    }

    /// ⟨p̂⟩ = c_{−3} p, equal to p at ξ = ξ_{ν,n}.
    pub fn expectation_p(&self) -> f64 {
        self.fiducial()
            .c_gamma(-3.0)
            .value()
            .expect("c_-3 is finite")
            * self.p
    }

    /// ⟨d̂⟩ = c_{−4} q p for the dilation generator d̂ = (x̂p̂ + p̂x̂)/2.
    pub fn expectation_d(&self) -> f64 {
        self.c_m4() * self.q * self.p
    }

    /// ⟨p̂²⟩ = c_{−4}p² + C/q².
    pub fn expectation_p2(&self) -> f64 {
        self.c_m4() * self.p * self.p + self.fiducial().derivative_constants().c / (self.q * self.q)
    }

    /// ⟨Ĥ_ν⟩ = c_{−4}p² + [C + (ν²−1/4)c₀]/q².
    pub fn expectation_h(&self) -> f64 {
        let f = self.fiducial();
        let c0 = f.c_gamma(0.0).value().expect("c_0 is finite");
        self.c_m4() * self.p * self.p
            + (f.derivative_constants().c + f.repulsion() * c0) / (self.q * self.q)
    }

    /// [(2n+ν+1)/ξ] H_sc(q,p).
    pub fn expectation_h_semiclassical(&self) -> f64 {
        2.0 * self.phase_exponent() / self.xi
            * (self.p * self.p + self.xi * self.xi / (self.q * self.q))
    }

    fn c_m4(&self) -> f64 {
        self.fiducial()
            .c_gamma(-4.0)
            .value()
            .expect("c_-4 is finite")
    }

    /// The same expectation values by x-space quadrature.
    pub fn expectations_quadrature(&self) -> Result<Expectations> {
        let k = self.fiducial().repulsion();
        let v = self.x_integral(|x, psi, dpsi| {
            let rho = psi.norm_sqr();
            // −i ψ̄ψ′ has real part Im(ψ̄ψ′)
            let flux = (psi.conj() * dpsi).im;
            vec![
                rho,
                x * rho,
                x * x * rho,
                flux,
                x * flux,
                dpsi.norm_sqr(),
                rho / (x * x),
            ]
        })?;
        Ok(Expectations {
            norm: v[0],
            x: v[1],
            x2: v[2],
            p: v[3],
            d: v[4],
            p2: v[5],
            h: v[5] + k * v[6],
        })
    }

    /// ⟨x̂^α⟩ by quadrature.
    pub fn expectation_x_power_quadrature(&self, alpha: f64) -> Result<f64> {
        if alpha <= -2.0 * self.nu - 2.0 {
            return Err(Error::Divergent(format!(
                "<x^{alpha}> requires alpha > {}",
                -2.0 * self.nu - 2.0
            )));
        }
        Ok(self.x_integral(|x, psi, _| vec![x.powf(alpha) * psi.norm_sqr()])?[0])
    }

    fn x_integral(
        &self,
        f: impl Fn(f64, Complex64, Complex64) -> Vec<f64> + Sync,
    ) -> Result<Vec<f64>> {
        let breaks = breakpoints(self.support(), &self.landmarks());
        let mut total: Option<Vec<f64>> = None;
        for w in breaks.windows(2) {
            let r = integrate_adaptive_tol(
                |x: f64| {
                    let (psi, dpsi) = self.wavefunction_with_derivative(x);
                    f(x, psi, dpsi)
                },
                Domain::Finite(w[0], w[1]),
                1e-15,
                1e-13,
            )?;
            if !r.converged {
                return Err(Error::no_convergence(format!(
                    "expectation quadrature on [{}, {}]",
                    w[0], w[1]
                )));
            }
            total = Some(match total {
                None => r.value,
                Some(t) => t.iter().zip(&r.value).map(|(a, b)| a + b).collect(),
            });
        }
        Ok(total.unwrap_or_default())
    }
}

impl WaveFunction for CSParams {
    fn amplitude(&self, x: f64) -> Complex64 {
        self.wavefunction(x)
    }

    fn support(&self) -> (f64, f64) {
        let (a, b) = Fiducial::support(&self.fiducial());
        (self.q * a, self.q * b)
    }

    fn landmarks(&self) -> Vec<f64> {
        let peak = self.q * (2.0 * self.phase_exponent() / self.xi).sqrt();
        vec![
            0.25 * peak,
            0.5 * peak,
            peak,
            1.5 * peak,
            2.0 * peak,
            3.0 * peak,
        ]
    }

    fn phase_rate(&self, x: f64) -> f64 {
        self.p.abs() * x / self.q
    }

    fn as_coherent(&self) -> Option<&CSParams> {
        Some(self)
    }
}

/// A normalized finite superposition Σ a_i |q_i,p_i;ν,n_i⟩.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Superposition {
    terms: Vec<(Complex64, CSParams)>,
    norm: f64,
}

impl Superposition {
    pub fn new(terms: Vec<(Complex64, CSParams)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid("superposition needs at least one term"));
        }
        let mut sq = 0.0;
        for (a, x) in &terms {
            for (b, y) in &terms {
                sq += (a.conj() * b * overlap(x, y)?).re;
            }
        }
        if !(sq > 0.0) {
            return Err(Error::invalid("superposition has zero norm"));
        }
        Ok(Superposition {
            terms,
            norm: sq.sqrt(),
        })
    }

    /// Normalized coefficients and states.
    pub fn terms(&self) -> impl Iterator<Item = (Complex64, &CSParams)> + '_ {
        self.terms.iter().map(move |(a, x)| (a / self.norm, x))
    }

    /// ⟨x|ψ⟩ overlap with a coherent state, term by term.
    pub fn overlap_with(&self, probe: &CSParams) -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        for (a, x) in self.terms() {
            s += a * overlap(probe, x)?;
        }
        Ok(s)
    }
}

impl WaveFunction for Superposition {
    fn amplitude(&self, x: f64) -> Complex64 {
        self.terms().map(|(a, s)| a * s.wavefunction(x)).sum()
    }

    fn support(&self) -> (f64, f64) {
        self.terms
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), (_, s)| {
                let (a, b) = s.support();
                (lo.min(a), hi.max(b))
            })
    }

    fn landmarks(&self) -> Vec<f64> {
        self.terms.iter().flat_map(|(_, s)| s.landmarks()).collect()
    }

    fn phase_rate(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|(_, s)| s.phase_rate(x))
            .fold(0.0, f64::max)
    }
}

/// Expectation values computed by quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expectations {
    pub norm: f64,
    pub x: f64,
    pub x2: f64,
    pub p: f64,
    pub d: f64,
    pub p2: f64,
    pub h: f64,
}

fn breakpoints(support: (f64, f64), marks: &[f64]) -> Vec<f64> {
    let (lo, hi) = support;
    let mut b = vec![0.0];
    b.extend(marks.iter().copied().filter(|&m| m > lo && m < hi));
    b.push(hi);
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// ⟨a|b⟩ = ∫ ā(x) b(x) dx by adaptive quadrature.
pub fn inner_product(a: &dyn WaveFunction, b: &dyn WaveFunction) -> Result<Complex64> {
    let (la, ha) = a.support();
    let (lb, hb) = b.support();
    let lo = la.max(lb);
    let hi = ha.min(hb);
    if hi <= lo {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut marks = a.landmarks();
    marks.extend(b.landmarks());
    let breaks = breakpoints((lo, hi), &marks);
    let mut total = Complex64::new(0.0, 0.0);
    for w in breaks.windows(2) {
        let r = integrate_adaptive_tol(
            |x: f64| a.amplitude(x).conj() * b.amplitude(x),
            Domain::Finite(w[0], w[1]),
            OVERLAP_ABS_TOL,
            OVERLAP_REL_TOL,
        )?;
        if !r.converged {
            return Err(Error::no_convergence(format!(
                "overlap quadrature on [{}, {}]",
                w[0], w[1]
            )));
        }
        total += r.value;
    }
    Ok(total)
}

/// ⟨a|b⟩ for two coherent states with the same ν.
pub fn overlap(a: &CSParams, b: &CSParams) -> Result<Complex64> {
    if a.nu != b.nu {
        return Err(Error::invalid(format!(
            "overlap needs equal nu (got {} and {})",
            a.nu, b.nu
        )));
    }
    if a == b {
        return Ok(Complex64::new(1.0, 0.0));
    }
    inner_product(a, b)
}

/// |⟨a|b⟩|² for n = 0 in closed form:
/// (2ξ)^{2ν+2} / [ξ²(q′/q + q/q′)² + (qp′ − q′p)²]^{ν+1}.
pub fn overlap_n0_squared(a: &CSParams, b: &CSParams) -> Result<f64> {
    if a.n != 0 || b.n != 0 || a.nu != b.nu {
        return Err(Error::invalid(
            "closed-form overlap needs n = 0 and equal nu",
        ));
    }
    Ok(overlap_n0_squared_raw(a.nu, a.xi, a.q, a.p, b.q, b.p))
}

fn overlap_n0_squared_raw(nu: f64, xi: f64, q: f64, p: f64, q2: f64, p2: f64) -> f64 {
    let r = q2 / q + q / q2;
    let m = q * p2 - q2 * p;
    let den = xi * xi * r * r + m * m;
    ((nu + 1.0) * ((2.0 * xi).powi(2) / den).ln()).exp()
}

/// ρ_ψ(q,p) = |⟨q,p;ν,0|ψ⟩|² / (2π c₀(ν,0)).
pub fn husimi_density(nu: f64, q: f64, p: f64, state: &dyn WaveFunction) -> Result<f64> {
    let probe = CSParams::new(q, p, nu, 0)?;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * crate::fiducial::c0(nu, 0)?);
    if let Some(cs) = state.as_coherent() {
        if cs.n == 0 && cs.nu == nu {
            return Ok(norm * overlap_n0_squared(&probe, cs)?);
        }
    }
    Ok(norm * inner_product(&probe, state)?.norm_sqr())
}

/// ρ_ψ on the tensor grid qs × ps, row-major in q.
pub fn husimi_grid(nu: f64, qs: &[f64], ps: &[f64], state: &dyn WaveFunction) -> Result<Vec<f64>> {
    let cells: Vec<(f64, f64)> = qs
        .iter()
        .flat_map(|&q| ps.iter().map(move |&p| (q, p)))
        .collect();
    cells
        .par_iter()
        .map(|&(q, p)| husimi_density(nu, q, p, state))
        .collect()
}
