//! Sampled fiducial on a log-uniform grid.

use super::{Fiducial, Moment};
use crate::error::{Error, Result};
use crate::specfun::gauss_legendre;

/// A real fiducial sampled on a strictly increasing grid and interpolated by
/// local Lagrange polynomials in ln x, optionally dilated as
/// ψ_λ(x) = λ^{−1/2} ψ(x/λ).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFiducial {
    log_x: Vec<f64>,
    values: Vec<f64>,
    order: usize,
    scale: f64,
}

/// Points per grid cell for the cellwise Gauss–Legendre integrals.
const CELL_POINTS: usize = 6;

impl GridFiducial {
    /// Builds and normalizes a fiducial from samples. `order` is the
    /// interpolation degree.
    pub fn from_samples(x: &[f64], values: &[f64], order: usize) -> Result<Self> {
        if x.len() != values.len() || x.len() < order + 2 {
            return Err(Error::invalid(
                "grid fiducial needs matching samples and more points than its order",
            ));
        }
        if x[0] <= 0.0 || x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "grid fiducial abscissae must be positive and strictly increasing",
            ));
        }
        let mut g = GridFiducial {
            log_x: x.iter().map(|v| v.ln()).collect(),
            values: values.to_vec(),
            order,
            scale: 1.0,
        };
        let norm = g.integrate_values(|_, v| v * v).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("grid fiducial has zero or non-finite norm"));
        }
        for v in g.values.iter_mut() {
            *v /= norm;
        }
        Ok(g)
    }

    /// ψ₀(x) ∝ e^{−(x+1/x)} on 2048 log-uniform points over [1e−4, 50],
    /// interpolation degree 6.
    pub fn standard() -> Self {
        let n = 2048;
        let (a, b) = (1e-4f64.ln(), 50f64.ln());
        let x: Vec<f64> = (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect();
        let v: Vec<f64> = x.iter().map(|&x| (-(x + 1.0 / x)).exp()).collect();
        Self::from_samples(&x, &v, 6).expect("standard grid is valid")
    }

    /// The dilated fiducial ψ_λ.
    pub fn rescaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!(
                "scale must be positive (got {lambda})"
            )));
        }
        let mut g = self.clone();
        g.scale *= lambda;
        Ok(g)
    }

    /// Dilation making c₁ = c₀, i.e. λ = c₁/c₀.
    pub fn normalized_to_unit_c1_over_c0(&self) -> Result<Self> {
        let c0 = self.moment(0.0);
        let c1 = self.moment(1.0);
        self.rescaled(c1 / c0)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Undilated interpolant at u = ln s.
    fn base_value(&self, u: f64) -> f64 {
        let n = self.log_x.len();
        if u < self.log_x[0] || u > self.log_x[n - 1] {
            return 0.0;
        }
        let du = (self.log_x[n - 1] - self.log_x[0]) / (n - 1) as f64;
        let m = self.order + 1;
        let pos = (u - self.log_x[0]) / du;
        let centre = pos.floor() as isize - (self.order as isize) / 2;
        let start = centre.clamp(0, (n - m) as isize) as usize;
        let mut sum = 0.0;
        for i in start..start + m {
            let mut l = 1.0;
            for j in start..start + m {
                if j != i {
                    l *= (u - self.log_x[j]) / (self.log_x[i] - self.log_x[j]);
                }
            }
            sum += l * self.values[i];
        }
        sum
    }

    /// Step in ln x that keeps a central difference inside one interpolation
    /// cell, so the stencil never switches between the probes.
    fn log_step(&self, x: f64) -> f64 {
        let n = self.log_x.len();
        let du = (self.log_x[n - 1] - self.log_x[0]) / (n - 1) as f64;
        let pos = ((x / self.scale).ln() - self.log_x[0]) / du;
        let frac = pos - pos.floor();
        let d = frac.min(1.0 - frac);
        if d < 0.05 {
            0.25 * du
        } else {
            0.45 * d * du
        }
    }

    /// Derivative by Richardson-extrapolated central differences.
    ///
    /// Returns the estimate and the difference between the last two
    /// extrapolation levels.
    pub fn derivative_with_error(&self, x: f64) -> (f64, f64) {
        richardson(|x| self.value(x), x, self.log_step(x) * x)
    }

    /// Cellwise Gauss–Legendre nodes (in x) and weights covering the sampled
    /// range of the dilated fiducial.
    pub fn quadrature_nodes(&self) -> Vec<(f64, f64)> {
        let (t, w) = gauss_legendre(CELL_POINTS);
        let ln_l = self.scale.ln();
        let mut out = Vec::with_capacity(CELL_POINTS * self.log_x.len());
        for cell in self.log_x.windows(2) {
            let (a, b) = (cell[0] + ln_l, cell[1] + ln_l);
            let h = 0.5 * (b - a);
            let c = 0.5 * (a + b);
            for (ti, wi) in t.iter().zip(&w) {
                let x = (c + h * ti).exp();
                out.push((x, h * wi * x));
            }
        }
        out
    }

    /// ∫ f(x, ψ(x), ψ′(x)) dx over the sampled range.
    pub fn integrate(&self, f: impl Fn(f64, f64, f64) -> f64) -> f64 {
        self.quadrature_nodes()
            .into_iter()
            .map(|(x, w)| w * f(x, self.value(x), self.derivative(x)))
            .sum()
    }

    /// ∫ f(x, ψ(x)) dx without evaluating derivatives.
    pub fn integrate_values(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.quadrature_nodes()
            .into_iter()
            .map(|(x, w)| w * f(x, self.value(x)))
            .sum()
    }

    /// c_γ = ∫ x^{−γ−2} ψ² dx.
    pub fn moment(&self, gamma: f64) -> f64 {
        self.integrate_values(|x, v| x.powf(-gamma - 2.0) * v * v)
    }

    /// C = ∫ψ′² and K = ∫ψ′²/x². Fails if the finite-difference
    /// extrapolation did not settle where the integrand matters.
    pub fn derivative_constants(&self) -> Result<(f64, f64)> {
        let mut c = 0.0;
        let mut k = 0.0;
        let mut c_err = 0.0;
        let mut k_err = 0.0;
        for (x, w) in self.quadrature_nodes() {
            let (d, e) = self.derivative_with_error(x);
            c += w * d * d;
            k += w * d * d / (x * x);
            c_err += w * 2.0 * d.abs() * e;
            k_err += w * 2.0 * d.abs() * e / (x * x);
        }
        if c_err > 1e-9 * c || k_err > 1e-9 * k {
            return Err(Error::no_convergence(format!(
                "finite-difference extrapolation (error bounds {c_err:e}, {k_err:e})"
            )));
        }
        Ok((c, k))
    }

    /// ∫ [y² φ′(y)² + φ(y)²/2] dy with φ(y) = y ψ(1/y), the positive form of
    /// K − (3/2)c₂.
    pub fn inverted_positivity_integral(&self) -> f64 {
        // integrate in y over the image of the sampled range, via x = 1/y
        let (t, w) = gauss_legendre(CELL_POINTS);
        let ln_l = self.scale.ln();
        let mut total = 0.0;
        for cell in self.log_x.windows(2) {
            let (a, b) = (-(cell[1] + ln_l), -(cell[0] + ln_l));
            let h = 0.5 * (b - a);
            let c = 0.5 * (a + b);
            for (ti, wi) in t.iter().zip(&w) {
                let y = (c + h * ti).exp();
                let phi = |y: f64| y * self.value(1.0 / y);
                let (dphi, _) = richardson(phi, y, self.log_step(1.0 / y) * y);
                let p = phi(y);
                total += h * wi * y * (y * y * dphi * dphi + 0.5 * p * p);
            }
        }
        total
    }
}

/// Central differences at h, h/2, h/4 combined by two Richardson levels.
fn richardson(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let (d1, d2, d3) = (d(h), d(0.5 * h), d(0.25 * h));
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d3 - d2) / 3.0;
    let r = (16.0 * r2 - r1) / 15.0;
    (r, (r - r2).abs())
}

impl Fiducial for GridFiducial {
    fn value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.base_value((x / self.scale).ln()) / self.scale.sqrt()
    }

    fn derivative(&self, x: f64) -> f64 {
        self.derivative_with_error(x).0
    }

    fn support(&self) -> (f64, f64) {
        let n = self.log_x.len();
        // trim the range where ψ² is below 1e−30 of its peak
        let peak = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let keep = |v: &f64| v.abs() > 1e-15 * peak;
        let first = self
            .values
            .iter()
            .position(keep)
            .unwrap_or(0)
            .saturating_sub(1);
        let last = (self.values.iter().rposition(keep).unwrap_or(n - 1) + 1).min(n - 1);
        (
            self.log_x[first].exp() * self.scale,
            self.log_x[last].exp() * self.scale,
        )
    }

    fn c_gamma(&self, gamma: f64) -> Moment {
        Moment::Finite {
            value: self.moment(gamma),
        }
    }

    fn k_constant(&self) -> Result<Moment> {
        Ok(Moment::Finite {
            value: self.derivative_constants()?.1,
        })
    }
}
