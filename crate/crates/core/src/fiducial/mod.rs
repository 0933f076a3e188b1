//! Fiducial vectors: the radial-oscillator eigenfunctions Φ_n, their moment
//! functionals, and a sampled test fiducial for the quantization checks.

mod grid;

pub use grid::GridFiducial;

use crate::error::{Error, Result};
use crate::specfun::{
    gauss_laguerre, integrate_adaptive_tol, ln_gamma, radial_functions,
    radial_functions_with_derivative, Domain,
};
use serde::Serialize;

/// Relative threshold used by [`FiducialSpec::validate`].
pub const CONSTRAINT_TOL: f64 = 1e-8;

/// A normalized real fiducial vector on the half-line.
pub trait Fiducial: Send + Sync {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
    /// Interval outside which |ψ|² is negligible (below ~1e−30 of its peak).
    fn support(&self) -> (f64, f64);
    /// c_γ = ∫ x^{−γ−2} ψ(x)² dx.
    fn c_gamma(&self, gamma: f64) -> Moment;
    /// K = ∫ ψ′(x)²/x² dx.
    fn k_constant(&self) -> Result<Moment>;
}

/// A moment that is either finite or known to diverge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Moment {
    Finite {
        value: f64,
    },
    /// c_γ diverges because γ ≥ `bound`.
    Divergent {
        gamma: f64,
        bound: f64,
    },
}

impl Moment {
    pub fn value(&self) -> Result<f64> {
        match *self {
            Moment::Finite { value } => Ok(value),
            Moment::Divergent { gamma, bound } => Err(Error::Divergent(format!(
                "c_{gamma} is infinite (requires γ < {bound})"
            ))),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Moment::Finite { .. })
    }
}

/// Parameters (ν, n, ξ) of the eigenvector Φ_n of
/// Ĥ₀ = −d²/dx² + (ν²−1/4)/x² + ξ²x².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiducialSpec {
    pub nu: f64,
    pub n: usize,
    pub xi: f64,
}

fn check_nu(nu: f64) -> Result<()> {
    if nu > 0.5 && nu.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("nu must exceed 1/2 (got {nu})")))
    }
}

impl FiducialSpec {
    /// Φ_n at the scale ξ_{ν,n} that makes c_{−3} = 1.
    pub fn new(nu: f64, n: usize) -> Result<Self> {
        check_nu(nu)?;
        Ok(FiducialSpec {
            nu,
            n,
            xi: xi_star(nu, n)?,
        })
    }

    /// Φ_n at an explicit scale.
    pub fn with_xi(nu: f64, n: usize, xi: f64) -> Result<Self> {
        check_nu(nu)?;
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::invalid(format!("xi must be positive (got {xi})")));
        }
        Ok(FiducialSpec { nu, n, xi })
    }

    pub fn phi(&self, x: f64) -> f64 {
        radial_functions(self.n, self.nu, self.xi, x)[self.n]
    }

    /// (Φ_n, Φ_n′, Φ_n″) at x from the Laguerre derivative identity, without
    /// using the eigenvalue equation.
    pub fn phi_derivatives(&self, x: f64) -> (f64, f64, f64) {
        if x <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let (v, d) = radial_functions_with_derivative(self.n, self.nu, self.xi, x);
        let n = self.n;
        let nf = n as f64;
        let a = (self.nu + 0.5 + 2.0 * nf) / x - self.xi * x;
        let da = -(self.nu + 0.5 + 2.0 * nf) / (x * x) - self.xi;
        let mut second = da * v[n] + a * d[n];
        if n > 0 {
            let b = 2.0 / x * (nf * (nf + self.nu)).sqrt();
            second -= -b / x * v[n - 1] + b * d[n - 1];
        }
        (v[n], d[n], second)
    }

    /// ω_n = 2ξ(2n+ν+1).
    pub fn omega(&self) -> f64 {
        2.0 * self.xi * (2.0 * self.n as f64 + self.nu + 1.0)
    }

    /// Repulsive coefficient ν² − 1/4.
    pub fn repulsion(&self) -> f64 {
        self.nu * self.nu - 0.25
    }

    /// c_γ(Φ_n) = ξ^{1+γ/2} G_n(−γ/2, ν), finite for γ < 2ν.
    pub fn c_gamma(&self, gamma: f64) -> Moment {
        if gamma >= 2.0 * self.nu {
            return Moment::Divergent {
                gamma,
                bound: 2.0 * self.nu,
            };
        }
        let g = g_moment(self.n, -0.5 * gamma, self.nu).expect("γ < 2ν keeps the moment finite");
        Moment::Finite {
            value: self.xi.powf(1.0 + 0.5 * gamma) * g,
        }
    }

    /// c_γ by direct adaptive quadrature of ∫x^{−γ−2}Φ_n² dx.
    pub fn c_gamma_quadrature(&self, gamma: f64) -> Result<f64> {
        if gamma >= 2.0 * self.nu {
            return Err(Error::Divergent(format!(
                "c_{gamma} requires γ < {}",
                2.0 * self.nu
            )));
        }
        self.x_space_integral(|x, v, _| x.powf(-gamma - 2.0) * v * v)
    }

    /// C = ∫Φ_n′² dx and K = ∫Φ_n′²/x² dx from Gauss–Laguerre rules that are
    /// exact for the polynomial integrands.
    pub fn derivative_constants(&self) -> DerivativeConstants {
        // Φ_n′ = A x^{ν−1/2} e^{−y/2} P(y) with P = (ν+1/2−y)L_n + 2y L_n′
        let c = self.xi * self.derivative_poly_moment(self.nu - 1.0);
        let k = if self.nu > 1.0 {
            Moment::Finite {
                value: self.xi * self.xi * self.derivative_poly_moment(self.nu - 2.0),
            }
        } else {
            Moment::Divergent {
                gamma: 0.0,
                bound: 1.0,
            }
        };
        DerivativeConstants { c, k }
    }

    /// n!/Γ(ν+n+1) ∫ y^{e} e^{−y} P(y)² dy.
    fn derivative_poly_moment(&self, exponent: f64) -> f64 {
        let n = self.n;
        let (nodes, weights) = gauss_laguerre(n + 2, exponent).expect("small Gauss–Laguerre rule");
        let norm = (ln_gamma(n as f64 + 1.0) - ln_gamma(self.nu + n as f64 + 1.0)).exp();
        let s: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(&y, w)| {
                let l = crate::specfun::laguerre(n, self.nu, y);
                let dl = if n == 0 {
                    0.0
                } else {
                    -crate::specfun::laguerre(n - 1, self.nu + 1.0, y)
                };
                let p = (self.nu + 0.5 - y) * l + 2.0 * y * dl;
                w * p * p
            })
            .sum();
        norm * s
    }

    /// C and K by adaptive x-space quadrature with the analytic derivative.
    pub fn derivative_constants_quadrature(&self) -> Result<(f64, Option<f64>)> {
        let c = self.x_space_integral(|_, _, d| d * d)?;
        let k = if self.nu > 1.0 {
            Some(self.x_space_integral(|x, _, d| d * d / (x * x))?)
        } else {
            None
        };
        Ok((c, k))
    }

    /// ∫ f(x, Φ, Φ′) dx over the support, split at the bulk of the function.
    pub(crate) fn x_space_integral(&self, f: impl Fn(f64, f64, f64) -> f64) -> Result<f64> {
        let (_, hi) = Fiducial::support(self);
        let scale = (1.0 / self.xi).sqrt();
        let peak = scale * (2.0 * self.n as f64 + self.nu + 1.0).sqrt();
        let breaks = [
            0.0,
            0.25 * peak,
            0.5 * peak,
            peak,
            1.5 * peak,
            2.0 * peak,
            hi.max(2.5 * peak),
        ];
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let r = integrate_adaptive_tol(
                |x| {
                    let (v, d, _) = self.phi_derivatives(x);
                    f(x, v, d)
                },
                Domain::Finite(w[0], w[1]),
                1e-15,
                1e-13,
            )?;
            if !r.converged {
                return Err(Error::no_convergence(format!(
                    "x-space integral on [{}, {}]",
                    w[0], w[1]
                )));
            }
            total += r.value;
        }
        Ok(total)
    }

    /// ‖(Ĥ₀ − ω_n)Φ_n‖ / ω_n by quadrature.
    pub fn eigen_residual(&self) -> Result<f64> {
        let c = self.repulsion();
        let xi2 = self.xi * self.xi;
        let w = self.omega();
        let sq = self.x_space_integral(|x, _, _| {
            let (v, _, dd) = self.phi_derivatives(x);
            let r = -dd + c * v / (x * x) + xi2 * x * x * v - w * v;
            r * r
        })?;
        Ok(sq.sqrt() / w)
    }

    /// Residuals of the four virial constraints that hold at ξ = ξ_{ν,n}.
    pub fn validate(&self) -> Result<ConstraintReport> {
        let k = self.repulsion();
        let cv = |g: f64| self.c_gamma(g).value();
        let (c1, cm4, c0) = (cv(1.0)?, cv(-4.0)?, cv(0.0)?);
        let big_c = self.derivative_constants().c;
        let xi2 = self.xi * self.xi;
        let w = self.omega();
        let entries = vec![
            ConstraintResidual::new("C = (nu^2-1/4)(c_1 c_-4 - c_0)", big_c, k * (c1 * cm4 - c0)),
            ConstraintResidual::new("(nu^2-1/4) c_1 = xi^2", k * c1, xi2),
            ConstraintResidual::new(
                "C + (nu^2-1/4) c_0 + xi^2 c_-4 = omega",
                big_c + k * c0 + xi2 * cm4,
                w,
            ),
            ConstraintResidual::new(
                "C + (nu^2-1/4) c_0 - xi^2 c_-4 = 0",
                big_c + k * c0 - xi2 * cm4,
                0.0,
            )
            .relative_to(xi2 * cm4),
        ];
        let max = entries.iter().map(|e| e.relative).fold(0.0, f64::max);
        Ok(ConstraintReport {
            entries,
            max_relative: max,
            satisfied: max < CONSTRAINT_TOL,
        })
    }

    /// Moments, scales and constraint residuals gathered for reporting.
    pub fn moment_report(&self, gammas: &[f64]) -> Result<MomentReport> {
        let xi_star = xi_star(self.nu, self.n)?;
        let mut c_gamma = Vec::with_capacity(gammas.len());
        for &g in gammas {
            let closed = self.c_gamma(g);
            let (quadrature, relative_difference) = match closed {
                Moment::Finite { value } => {
                    let q = self.c_gamma_quadrature(g)?;
                    (Some(q), Some(((q - value) / value).abs()))
                }
                Moment::Divergent { .. } => (None, None),
            };
            c_gamma.push(GammaEntry {
                gamma: g,
                moment: closed,
                quadrature,
                relative_difference,
            });
        }
        let alphas = [0.0, 1.0, 1.5, 2.0];
        let g_values = alphas
            .iter()
            .filter(|&&a| a + self.nu > 0.0)
            .map(|&a| Ok((a, g_moment(self.n, a, self.nu)?)))
            .collect::<Result<Vec<_>>>()?;
        let dc = self.derivative_constants();
        Ok(MomentReport {
            nu: self.nu,
            n: self.n,
            xi: self.xi,
            xi_star,
            omega_n: self.omega(),
            omega_tilde: omega_tilde(self.nu, self.n)?,
            g_values,
            c_gamma,
            big_c: dc.c,
            big_k: dc.k,
            eigen_residual: self.eigen_residual()?,
            constraints: self.validate()?,
        })
    }
}

impl Fiducial for FiducialSpec {
    fn value(&self, x: f64) -> f64 {
        self.phi(x)
    }

    fn derivative(&self, x: f64) -> f64 {
        self.phi_derivatives(x).1
    }

    fn support(&self) -> (f64, f64) {
        // |Φ_n|² ∝ y^{ν+1/2} near 0 and ≈ y^{ν+2n} e^{−y} for large y
        let y_lo = (self.nu + 1.0) * 1e-30f64.powf(1.0 / (self.nu + 0.5));
        let y_hi = 4.0 * self.n as f64 + 2.0 * self.nu + 2.0 + 80.0;
        ((y_lo / self.xi).sqrt(), (y_hi / self.xi).sqrt())
    }

    fn c_gamma(&self, gamma: f64) -> Moment {
        FiducialSpec::c_gamma(self, gamma)
    }

    fn k_constant(&self) -> Result<Moment> {
        Ok(self.derivative_constants().k)
    }
}

/// C = ∫ψ′² and K = ∫ψ′²/x² (K diverges for Φ_n when ν ≤ 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeConstants {
    pub c: f64,
    pub k: Moment,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintResidual {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relative: f64,
}

impl ConstraintResidual {
    fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let relative = if scale == 0.0 {
            0.0
        } else {
            (lhs - rhs).abs() / scale
        };
        ConstraintResidual {
            name: name.to_string(),
            lhs,
            rhs,
            relative,
        }
    }

    fn relative_to(mut self, scale: f64) -> Self {
        self.relative = (self.lhs - self.rhs).abs() / scale.abs();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub entries: Vec<ConstraintResidual>,
    pub max_relative: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaEntry {
    pub gamma: f64,
    pub moment: Moment,
    pub quadrature: Option<f64>,
    pub relative_difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub nu: f64,
    pub n: usize,
    pub xi: f64,
    pub xi_star: f64,
    pub omega_n: f64,
    pub omega_tilde: f64,
    /// (α, G_n(α, ν)) pairs.
    pub g_values: Vec<(f64, f64)>,
    pub c_gamma: Vec<GammaEntry>,
    #[serde(rename = "C")]
    pub big_c: f64,
    #[serde(rename = "K")]
    pub big_k: Moment,
    pub eigen_residual: f64,
    pub constraints: ConstraintReport,
}

/// G_n(α, ν) = n!/Γ(ν+n+1) ∫₀^∞ x^{ν+α−1} L_n^ν(x)² e^{−x} dx.
///
/// Closed form for n ≤ 2, Gauss–Laguerre (exact for the polynomial part)
/// beyond that.
pub fn g_moment(n: usize, alpha: f64, nu: f64) -> Result<f64> {
    let s = nu + alpha;
    if !(s > 0.0) {
        return Err(Error::Divergent(format!(
            "G_{n}({alpha}, {nu}) requires alpha + nu > 0"
        )));
    }
    if !(nu > 0.0) {
        return Err(Error::invalid(format!("G_n requires nu > 0 (got {nu})")));
    }
    let nf = n as f64;
    let prefactor = ln_gamma(nf + 1.0) - ln_gamma(nu + nf + 1.0);
    if n <= 2 {
        // L_n^ν(x) = Σ_j a_j x^j, a_j = (−1)^j C(n+ν, n−j)/j!; ∫x^{s−1+j+k}e^{−x} = Γ(s)(s)_{j+k}
        let a: Vec<f64> = (0..=n)
            .map(|j| {
                let jf = j as f64;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * (ln_gamma(nf + nu + 1.0)
                    - ln_gamma(nf - jf + 1.0)
                    - ln_gamma(nu + jf + 1.0)
                    - ln_gamma(jf + 1.0))
                .exp()
            })
            .collect();
        let rising = |m: usize| (0..m).fold(1.0, |acc, i| acc * (s + i as f64));
        let mut sum = 0.0;
        for (j, aj) in a.iter().enumerate() {
            for (k, ak) in a.iter().enumerate() {
                sum += aj * ak * rising(j + k);
            }
        }
        Ok((prefactor + ln_gamma(s)).exp() * sum)
    } else {
        let (nodes, weights) = gauss_laguerre(n + 2, s - 1.0)?;
        let sum: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(&x, w)| {
                let l = crate::specfun::laguerre(n, nu, x);
                w * l * l
            })
            .sum();
        Ok(prefactor.exp() * sum)
    }
}

/// G_n(α, ν) by adaptive quadrature of its defining integral.
pub fn g_moment_quadrature(n: usize, alpha: f64, nu: f64) -> Result<f64> {
    let s = nu + alpha;
    if !(s > 0.0) {
        return Err(Error::Divergent(format!(
            "G_{n}({alpha}, {nu}) requires alpha + nu > 0"
        )));
    }
    let nf = n as f64;
    let h = |x: f64| {
        let l = crate::specfun::laguerre(n, nu, x);
        l * l * (-x).exp()
    };
    // x = u^{1/s} on [0, 1] removes the x^{s−1} endpoint singularity
    let head = if s < 1.0 {
        integrate_adaptive_tol(
            |u: f64| h(u.powf(1.0 / s)) / s,
            Domain::Finite(0.0, 1.0),
            1e-16,
            1e-13,
        )?
    } else {
        integrate_adaptive_tol(
            |x: f64| x.powf(s - 1.0) * h(x),
            Domain::Finite(0.0, 1.0),
            1e-16,
            1e-13,
        )?
    };
    let tail = integrate_adaptive_tol(
        |x: f64| x.powf(s - 1.0) * h(x),
        Domain::UpperInfinite {
            a: 1.0,
            scale: 2.0 * nf + nu + 1.0,
        },
        1e-16,
        1e-13,
    )?;
    if !(head.converged && tail.converged) {
        return Err(Error::no_convergence(format!(
            "G_{n}({alpha}, {nu}) quadrature"
        )));
    }
    Ok((ln_gamma(nf + 1.0) - ln_gamma(nu + nf + 1.0)).exp() * (head.value + tail.value))
}

/// ξ_{ν,n} = G_n(3/2, ν)².
pub fn xi_star(nu: f64, n: usize) -> Result<f64> {
    check_nu(nu)?;
    Ok(g_moment(n, 1.5, nu)?.powi(2))
}

/// ω̃_{ν,n} = 2ξ_{ν,n}(2n+ν+1).
pub fn omega_tilde(nu: f64, n: usize) -> Result<f64> {
    Ok(2.0 * xi_star(nu, n)? * (2.0 * n as f64 + nu + 1.0))
}

/// c₀(ν,n) = ξ_{ν,n} G_n(0,ν), the frame normalization of the coherent states.
pub fn c0(nu: f64, n: usize) -> Result<f64> {
    Ok(xi_star(nu, n)? * g_moment(n, 0.0, nu)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g1_closed_form() {
        // G_1(α,ν) = Γ(ν+α)/Γ(ν+2)·[(α−1)² + ν + α]
        for &(alpha, nu) in &[(1.5, 3.0), (0.0, 2.0), (-0.5, 1.2)] {
            let want = (ln_gamma(nu + alpha) - ln_gamma(nu + 2.0)).exp()
                * ((alpha - 1.0f64).powi(2) + nu + alpha);
            assert!((g_moment(1, alpha, nu).unwrap() - want).abs() < 1e-13 * want);
        }
    }

    #[test]
    fn divergence_is_tagged() {
        let s = FiducialSpec::new(3.0, 0).unwrap();
        assert_eq!(
            s.c_gamma(6.0),
            Moment::Divergent {
                gamma: 6.0,
                bound: 6.0
            }
        );
        assert!(g_moment(0, -3.0, 3.0).is_err());
        assert!(matches!(
            FiducialSpec::new(1.0, 0).unwrap().derivative_constants().k,
            Moment::Divergent { .. }
        ));
    }

    #[test]
    fn rejects_small_nu() {
        let e = FiducialSpec::new(0.4, 0).unwrap_err();
        assert!(e.to_string().contains("nu must exceed 1/2"));
    }
}
