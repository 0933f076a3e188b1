//! Phase-space integrals against the coherent-state frame.
//!
//! For test vectors φ_i the integrator evaluates
//!
//!   M_ij = ∫ dq dp/(2π c₀) q^a p^b ⟨φ_i|q,p⟩⟨q,p|φ_j⟩.
//!
//! With k = p/q and u = x²/2 the overlap ⟨q,p|φ⟩ is the Fourier transform in u
//! of F(u) = q^{−1/2} ψ₀(x/q) φ(x)/x, so each q-slice is an integral over k of
//! products of Fourier transforms. The k-axis is covered in octaves, each
//! integrated adaptively in ln k, until the octave contributions decay like a
//! power law; the remaining tail is extrapolated from that power and added to
//! the error budget. The outer
//! integral runs adaptively over ln q.

use super::WaveFunction;
use crate::error::{Error, Result};
use crate::fiducial::{c0, Fiducial, FiducialSpec};
use crate::specfun::{integrate_adaptive_tol, Domain, PanelGrid};
use num_complex::Complex64;
use serde::Serialize;
use std::cell::RefCell;

/// Tuning for [`FrameIntegrator`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameOptions {
    pub outer_abs_tol: f64,
    pub outer_rel_tol: f64,
    /// Relative bound on the extrapolated k-tail of each q-slice.
    pub tail_rel_tol: f64,
    /// Gauss–Legendre points per x panel.
    pub x_order: usize,
    pub max_doublings: usize,
}

impl Default for FrameOptions {
    fn default() -> Self {
        FrameOptions {
            outer_abs_tol: 1e-7,
            outer_rel_tol: 1e-6,
            tail_rel_tol: 1e-7,
            x_order: 16,
            max_doublings: 14,
        }
    }
}

/// Integrated frame matrix and its error budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameResult {
    /// Row-major m×m matrix, stored as (re, im) pairs.
    pub matrix: Vec<Vec<(f64, f64)>>,
    /// Outer adaptive quadrature error estimate.
    pub quadrature_error: f64,
    /// Extrapolated contribution of |p| beyond the k cut-offs plus the inner
    /// k-quadrature error.
    pub tail_bound: f64,
    /// Size of the integrand at the edges of the q-window.
    pub window_bound: f64,
    pub q_window: (f64, f64),
    /// Largest k = p/q reached by any slice.
    pub k_max: f64,
    pub converged: bool,
    pub slices: usize,
}

impl FrameResult {
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        let (re, im) = self.matrix[i][j];
        Complex64::new(re, im)
    }

    pub fn error_budget(&self) -> f64 {
        self.quadrature_error + self.tail_bound + self.window_bound
    }
}

/// Integrates q^a p^b against the frame generated by a fiducial.
pub struct FrameIntegrator<'a> {
    fiducial: &'a dyn Fiducial,
    c0: f64,
    tests: Vec<&'a dyn WaveFunction>,
    options: FrameOptions,
}

struct Slice {
    values: Vec<Complex64>,
    tail: f64,
    error: f64,
    k_max: f64,
    converged: bool,
}

impl<'a> FrameIntegrator<'a> {
    pub fn new(
        fiducial: &'a dyn Fiducial,
        tests: Vec<&'a dyn WaveFunction>,
        options: FrameOptions,
    ) -> Result<Self> {
        if tests.is_empty() {
            return Err(Error::invalid(
                "frame integration needs at least one test vector",
            ));
        }
        let c0 = fiducial.c_gamma(0.0).value()?;
        Ok(FrameIntegrator {
            fiducial,
            c0,
            tests,
            options,
        })
    }

    /// Range of q outside which the dilated fiducial misses every test vector.
    fn q_window(&self) -> (f64, f64) {
        let (a, b) = self.fiducial.support();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for t in &self.tests {
            let (l, h) = t.support();
            lo = lo.min(l);
            hi = hi.max(h);
        }
        (lo / b, hi / a)
    }

    /// M_ij for the symbol q^a p^b.
    pub fn integrate(&self, a: f64, b: u32) -> Result<FrameResult> {
        let m = self.tests.len();
        let (q_lo, q_hi) = self.q_window();
        let (s_lo, s_hi) = (q_lo.ln(), q_hi.ln());
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let stats = RefCell::new((0.0f64, 0.0f64, true, 0usize));
        let floor = 1e-3 * self.options.outer_abs_tol;
        let norm = 1.0 / (2.0 * std::f64::consts::PI * self.c0);
        // each outer sample carries 2m² matrix components plus the tail estimate
        let integrand = |s: f64| -> Vec<f64> {
            let mut out = vec![0.0; 2 * m * m + 1];
            if failure.borrow().is_some() {
                return out;
            }
            let q = s.exp();
            // dq dp = q² ds dk, symbol q^{a+b} k^b
            let jac = norm * q.powf(2.0 + a + b as f64);
            match self.slice(q, b, floor / jac) {
                Ok(slice) => {
                    for (idx, v) in slice.values.iter().enumerate() {
                        out[2 * idx] = jac * v.re;
                        out[2 * idx + 1] = jac * v.im;
                    }
                    out[2 * m * m] = jac * (slice.tail + slice.error);
                    let mut st = stats.borrow_mut();
                    st.0 = st.0.max(slice.k_max);
                    st.2 &= slice.converged;
                    st.3 += 1;
                }
                Err(e) => *failure.borrow_mut() = Some(e),
            }
            out
        };
        let r = integrate_adaptive_tol(
            integrand,
            Domain::Finite(s_lo, s_hi),
            self.options.outer_abs_tol,
            self.options.outer_rel_tol,
        )?;
        let edge = integrand(s_lo)
            .iter()
            .chain(integrand(s_hi).iter())
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        if let Some(e) = failure.take() {
            return Err(e);
        }
        let (k_max, _, slices_converged, slices) = stats.into_inner();
        let matrix = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| (r.value[2 * (i * m + j)], r.value[2 * (i * m + j) + 1]))
                    .collect()
            })
            .collect();
        Ok(FrameResult {
            matrix,
            quadrature_error: r.error,
            tail_bound: r.value[2 * m * m].abs(),
            window_bound: edge,
            q_window: (s_lo.exp(), s_hi.exp()),
            k_max,
            converged: r.converged && slices_converged,
            slices,
        })
    }

    /// ∫ dk k^b conj(g_i(k)) g_j(k) at fixed q; contributions below `floor` are negligible.
    fn slice(&self, q: f64, b: u32, floor: f64) -> Result<Slice> {
        let m = self.tests.len();
        let zero = Slice {
            values: vec![Complex64::new(0.0, 0.0); m * m],
            tail: 0.0,
            error: 0.0,
            k_max: 0.0,
            converged: true,
        };
        let (fa, fb) = self.fiducial.support();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for t in &self.tests {
            let (l, h) = t.support();
            lo = lo.min(l);
            hi = hi.max(h);
        }
        let (xa, xb) = ((q * fa).max(lo), (q * fb).min(hi));
        if xb <= xa * (1.0 + 1e-12) {
            return Ok(zero);
        }
        let du = 0.5 * (xb * xb - xa * xa);
        let sq = q.sqrt();
        let rel = self.options.tail_rel_tol;

        let mut total = vec![Complex64::new(0.0, 0.0); m * m];
        let mut error = 0.0;
        let mut shells: Vec<f64> = Vec::new();
        let mut k_in = 0.0f64;
        let mut k_out = 8.0 * std::f64::consts::PI / du;
        for _ in 0..=self.options.max_doublings {
            // one sampling of F serves every k below k_out
            let grid =
                PanelGrid::logarithmic(xa, xb, 0.1, 8.0, |x| k_out * x, self.options.x_order);
            let f: Vec<Vec<Complex64>> = self
                .tests
                .iter()
                .map(|t| {
                    grid.nodes
                        .iter()
                        .zip(&grid.weights)
                        .map(|(&x, &w)| t.amplitude(x) * (w * self.fiducial.value(x / q) / sq))
                        .collect()
                })
                .collect();
            let u: Vec<f64> = grid.nodes.iter().map(|x| 0.5 * x * x).collect();
            let shell = if k_in == 0.0 {
                let r = integrate_adaptive_tol(
                    |k: f64| k_density(&f, &u, k, b),
                    Domain::Finite(0.0, k_out),
                    floor,
                    rel,
                )?;
                error += r.error;
                r.value
            } else {
                // integrate in ln k, where the transforms vary on the scale of k itself
                let r = integrate_adaptive_tol(
                    |s: f64| {
                        let k = s.exp();
                        let mut v = k_density(&f, &u, k, b);
                        v.iter_mut().for_each(|x| *x *= k);
                        v
                    },
                    Domain::Finite(k_in.ln(), k_out.ln()),
                    floor,
                    rel,
                )?;
                error += r.error;
                r.value
            };
            // all entries count: odd symbols have vanishing diagonals
            let size: f64 = shell.iter().map(|v| v.abs()).sum();
            for (idx, a) in total.iter_mut().enumerate() {
                *a += Complex64::new(shell[2 * idx], shell[2 * idx + 1]);
            }
            shells.push(size);
            let scale: f64 = total
                .iter()
                .map(|z| z.re.abs() + z.im.abs())
                .sum::<f64>()
                .max(f64::MIN_POSITIVE);
            let n = shells.len();
            if n >= 2 {
                let (prev, last) = (shells[n - 2], shells[n - 1]);
                if last <= floor || last <= 1e-3 * rel * scale {
                    return Ok(Slice {
                        values: total,
                        tail: last,
                        error,
                        k_max: k_out,
                        converged: true,
                    });
                }
                // shells of a power-law tail k^{−γ} shrink by r = 2^{γ−1}; the rest sums to last/(r − 1)
                let ratio = prev / last;
                if n >= 3 && ratio > 1.5 {
                    let tail = last / (ratio - 1.0);
                    if tail <= floor || tail <= rel * scale {
                        return Ok(Slice {
                            values: total,
                            tail,
                            error,
                            k_max: k_out,
                            converged: true,
                        });
                    }
                }
            }
            k_in = k_out;
            k_out *= 2.0;
        }
        let tail = shells[shells.len() - 1];
        Ok(Slice {
            values: total,
            tail,
            error,
            k_max: k_in,
            converged: false,
        })
    }
}

/// k^b [ḡ_i(k)g_j(k) + ḡ_i(−k)g_j(−k)(−1)^b] as interleaved (re, im), with
/// g_i(k) = Σ f_i e^{−iku}.
fn k_density(f: &[Vec<Complex64>], u: &[f64], k: f64, b: u32) -> Vec<f64> {
    let m = f.len();
    let zero = Complex64::new(0.0, 0.0);
    let phase: Vec<Complex64> = u
        .iter()
        .map(|&u| Complex64::from_polar(1.0, -k * u))
        .collect();
    let mut gp = vec![zero; m];
    let mut gm = vec![zero; m];
    for i in 0..m {
        for (v, e) in f[i].iter().zip(&phase) {
            gp[i] += v * e;
            gm[i] += v * e.conj();
        }
    }
    let wp = k.powi(b as i32);
    let wm = (-k).powi(b as i32);
    let mut out = vec![0.0; 2 * m * m];
    for i in 0..m {
        for l in 0..m {
            let z = gp[i].conj() * gp[l] * wp + gm[i].conj() * gm[l] * wm;
            out[2 * (i * m + l)] = z.re;
            out[2 * (i * m + l) + 1] = z.im;
        }
    }
    out
}

/// Residuals of the resolution of identity on a set of test vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub nu: f64,
    pub n: usize,
    /// |M_ij − δ_ij|.
    pub residuals: Vec<Vec<f64>>,
    pub max_residual: f64,
    pub frame: FrameResult,
}

/// ∫ dq dp/(2πc₀) ⟨φ_i|q,p;ν,n⟩⟨q,p;ν,n|φ_j⟩ − δ_ij for orthonormal test vectors.
pub fn identity_check(
    nu: f64,
    n: usize,
    tests: &[&dyn WaveFunction],
    options: FrameOptions,
) -> Result<IdentityReport> {
    let fid = FiducialSpec::new(nu, n)?;
    debug_assert!(
        (c0(nu, n)? - fid.c_gamma(0.0).value()?).abs() < 1e-12 * fid.c_gamma(0.0).value()?
    );
    let integrator = FrameIntegrator::new(&fid, tests.to_vec(), options)?;
    let frame = integrator.integrate(0.0, 0)?;
    let m = tests.len();
    let residuals: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| (frame.entry(i, j) - if i == j { 1.0 } else { 0.0 }).norm())
                .collect()
        })
        .collect();
    let max_residual = residuals.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    if !frame.converged {
        return Err(Error::no_convergence(format!(
            "frame integral (q-window [{:e}, {:e}], k cut-off {:e}, max residual {max_residual:e})",
            frame.q_window.0, frame.q_window.1, frame.k_max
        )));
    }
    Ok(IdentityReport {
        nu,
        n,
        residuals,
        max_residual,
        frame,
    })
}

impl WaveFunction for FiducialSpec {
    fn amplitude(&self, x: f64) -> Complex64 {
        Complex64::new(self.phi(x), 0.0)
    }

    fn support(&self) -> (f64, f64) {
        Fiducial::support(self)
    }

    fn landmarks(&self) -> Vec<f64> {
        let peak = ((2.0 * self.n as f64 + self.nu + 1.0) / self.xi).sqrt();
        vec![
            0.25 * peak,
            0.5 * peak,
            peak,
            1.5 * peak,
            2.0 * peak,
            3.0 * peak,
        ]
    }
}
