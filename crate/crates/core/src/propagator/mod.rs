//! Spectral Galerkin solution of i∂ₜψ = Ĥ_ν ψ in the eigenbasis Φ_k(·; ν, ξ_ref) of Ĥ₀.
//!
//! In that basis Ĥ₀ is diagonal and x̂² is tridiagonal, so
//! Ĥ_ν = Ĥ₀ − ξ_ref² x̂² is tridiagonal with
//! diagonal ξ_ref(2k+ν+1) and off-diagonal ξ_ref√((k+1)(k+ν+1)).
//! The 1/x² repulsion is carried exactly by the basis.
//!
//! A coherent state whose Gaussian factor is e^{−a x²/2} has basis
//! coefficients decaying like |(a−ξ_ref)/(a+ξ_ref)|^k, which drives the
//! automatic choice of ξ_ref.

mod checks;

pub use checks::{
    ehrenfest_check, fidelity_report, liouville_check, EhrenfestReport, EhrenfestRow,
    FidelityOptions, FidelityReport, FidelityRow, LiouvilleReport, LiouvilleRow,
};

use crate::coherent::WaveFunction;
use crate::error::{Error, Result};
use crate::specfun::{
    gauss_laguerre, orthonormal_laguerre, radial_functions, radial_functions_with_derivative,
    PanelGrid,
};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

/// Largest leading block of x̂² checked against Gauss–Laguerre at construction.
pub const VERIFY_BLOCK: usize = 96;
/// Agreement required between the analytic and quadrature x̂² blocks.
pub const VERIFY_TOL: f64 = 1e-8;
/// Default truncation-deficit threshold of a projection.
pub const DEFICIT_TOL: f64 = 1e-8;

/// The truncated basis Φ_0, …, Φ_{N−1} at scale ξ_ref.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisSpec {
    pub nu: f64,
    pub xi_ref: f64,
    pub size: usize,
}

impl BasisSpec {
    pub fn new(nu: f64, xi_ref: f64, size: usize) -> Result<Self> {
        if !(nu > 0.5 && nu.is_finite()) {
            return Err(Error::invalid(format!("nu must exceed 1/2 (got {nu})")));
        }
        if !(xi_ref > 0.0 && xi_ref.is_finite()) {
            return Err(Error::invalid(format!(
                "xi_ref must be positive (got {xi_ref})"
            )));
        }
        if size < 8 {
            return Err(Error::invalid(format!(
                "basis size must be at least 8 (got {size})"
            )));
        }
        Ok(BasisSpec { nu, xi_ref, size })
    }

    pub fn with_size(&self, size: usize) -> Result<Self> {
        Self::new(self.nu, self.xi_ref, size)
    }

    /// Φ_0(x), …, Φ_{N−1}(x).
    pub fn functions(&self, x: f64) -> Vec<f64> {
        radial_functions(self.size - 1, self.nu, self.xi_ref, x)
    }

    /// Beyond this x every basis function is below ~e^{−40} of its peak.
    pub fn x_max(&self) -> f64 {
        ((4.0 * self.size as f64 + 2.0 * self.nu + 82.0) / self.xi_ref).sqrt()
    }

    /// Largest local wavenumber of the basis functions.
    fn max_wavenumber(&self) -> f64 {
        (2.0 * self.xi_ref * (2.0 * self.size as f64 + self.nu + 1.0)).sqrt()
    }

    /// Quadrature grid on [a, b] resolving the basis and an extra phase rate.
    pub(crate) fn grid(&self, a: f64, b: f64, rate: impl Fn(f64) -> f64) -> PanelGrid {
        let k = self.max_wavenumber();
        PanelGrid::logarithmic(a, b, 0.05, 3.0, |x| k + rate(x), 16)
    }

    /// Quadrature grid covering the whole basis.
    pub(crate) fn full_grid(&self) -> PanelGrid {
        let lo = (1e-30f64.powf(1.0 / (self.nu + 0.5)) / self.xi_ref).sqrt();
        self.grid(lo, self.x_max(), |_| 0.0)
    }
}

/// A dense operator in a truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub basis: BasisSpec,
    pub data: DMatrix<Complex64>,
}

impl OperatorMatrix {
    fn from_real(basis: BasisSpec, m: DMatrix<f64>) -> Self {
        OperatorMatrix {
            basis,
            data: m.map(|v| Complex64::new(v, 0.0)),
        }
    }

    pub fn size(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    /// max |M − M†|.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.size();
        let mut e = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                e = e.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        e
    }

    /// ⟨c|M|c⟩.
    pub fn expectation(&self, c: &StateVector) -> Complex64 {
        let v = nalgebra::DVector::from_column_slice(&c.coeffs);
        (v.adjoint() * &self.data * &v)[(0, 0)]
    }

    pub fn apply(&self, c: &StateVector) -> StateVector {
        let v = nalgebra::DVector::from_column_slice(&c.coeffs);
        let w = &self.data * v;
        StateVector {
            basis: c.basis,
            coeffs: w.iter().copied().collect(),
            deficit: c.deficit,
        }
    }

    /// The leading n×n block.
    pub fn leading(&self, n: usize) -> DMatrix<Complex64> {
        self.data.view((0, 0), (n, n)).into_owned()
    }
}

/// Basis coefficients of a state with the norm lost to truncation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateVector {
    pub basis: BasisSpec,
    pub coeffs: Vec<Complex64>,
    /// ‖ψ‖² − ‖c‖² at projection time.
    pub deficit: f64,
}

impl StateVector {
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩ in the common basis.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// The first n coefficients; the extra lost weight is added to the deficit.
    pub fn truncated(&self, n: usize) -> Result<StateVector> {
        let basis = self.basis.with_size(n)?;
        let dropped: f64 = self.coeffs[n.min(self.coeffs.len())..]
            .iter()
            .map(|c| c.norm_sqr())
            .sum();
        Ok(StateVector {
            basis,
            coeffs: self.coeffs[..n].to_vec(),
            deficit: self.deficit + dropped,
        })
    }

    /// Unit coefficient vector e_k.
    pub fn unit(basis: BasisSpec, k: usize) -> StateVector {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); basis.size];
        coeffs[k] = Complex64::new(1.0, 0.0);
        StateVector {
            basis,
            coeffs,
            deficit: 0.0,
        }
    }
}

impl WaveFunction for StateVector {
    fn amplitude(&self, x: f64) -> Complex64 {
        self.basis
            .functions(x)
            .iter()
            .zip(&self.coeffs)
            .map(|(f, c)| c * *f)
            .sum()
    }

    fn support(&self) -> (f64, f64) {
        let lo = (1e-30f64.powf(1.0 / (self.basis.nu + 0.5)) / self.basis.xi_ref).sqrt();
        (lo, self.basis.x_max())
    }
}

/// x̂² from its tridiagonal closed form, checked against Gauss–Laguerre on the
/// leading block.
pub fn x2_matrix(basis: &BasisSpec) -> Result<OperatorMatrix> {
    let n = basis.size;
    let m = x2_closed_form(basis);
    let block = n.min(VERIFY_BLOCK);
    let q = x2_quadrature(basis, block)?;
    let diff = (0..block)
        .flat_map(|i| (0..block).map(move |j| (i, j)))
        .map(|(i, j)| (m[(i, j)] - q[(i, j)]).abs())
        .fold(0.0f64, f64::max);
    let scale = m[(block - 1, block - 1)];
    if diff > VERIFY_TOL * scale {
        return Err(Error::no_convergence(format!(
            "x^2 matrix disagrees with quadrature by {diff:e} on the leading {block}x{block} block"
        )));
    }
    Ok(OperatorMatrix::from_real(*basis, m))
}

fn x2_closed_form(basis: &BasisSpec) -> DMatrix<f64> {
    let n = basis.size;
    let (nu, xi) = (basis.nu, basis.xi_ref);
    DMatrix::from_fn(n, n, |i, j| {
        let k = i.min(j) as f64;
        if i == j {
            (2.0 * k + nu + 1.0) / xi
        } else if i.abs_diff(j) == 1 {
            -((k + 1.0) * (k + nu + 1.0)).sqrt() / xi
        } else {
            0.0
        }
    })
}

/// ⟨Φ_i|x²|Φ_j⟩ for i, j < block from a Gauss–Laguerre rule exact for the
/// polynomial integrand.
pub fn x2_quadrature(basis: &BasisSpec, block: usize) -> Result<DMatrix<f64>> {
    let (nodes, weights) = gauss_laguerre(block + 1, basis.nu)?;
    let mut m = DMatrix::zeros(block, block);
    for (&y, &w) in nodes.iter().zip(&weights) {
        let (p, ls) = orthonormal_laguerre(block - 1, basis.nu, y);
        let wy = (w.ln() + 2.0 * ls).exp() * y / basis.xi_ref;
        for i in 0..block {
            for j in 0..block {
                m[(i, j)] += wy * p[i] * p[j];
            }
        }
    }
    Ok(m)
}

/// Ĥ_ν = diag(ω_k) − ξ_ref² x̂².
pub fn hnu_matrix(basis: &BasisSpec) -> Result<OperatorMatrix> {
    let x2 = x2_matrix(basis)?;
    let xi = basis.xi_ref;
    let n = basis.size;
    let mut h = x2.data.map(|v| -v * xi * xi);
    for k in 0..n {
        h[(k, k)] += 2.0 * xi * (2.0 * k as f64 + basis.nu + 1.0);
    }
    Ok(OperatorMatrix {
        basis: *basis,
        data: h,
    })
}

/// ⟨Φ_i|f(x̂)|Φ_j⟩ by x-space quadrature.
pub fn position_matrix(basis: &BasisSpec, f: impl Fn(f64) -> f64) -> OperatorMatrix {
    let grid = basis.full_grid();
    let n = basis.size;
    let mut phi = DMatrix::zeros(grid.len(), n);
    let mut weighted = DMatrix::zeros(grid.len(), n);
    for (r, (&x, &w)) in grid.nodes.iter().zip(&grid.weights).enumerate() {
        let v = basis.functions(x);
        let fw = w * f(x);
        for k in 0..n {
            phi[(r, k)] = v[k];
            weighted[(r, k)] = fw * v[k];
        }
    }
    OperatorMatrix::from_real(*basis, phi.transpose() * weighted)
}

/// ⟨Φ_i|p̂|Φ_j⟩ = −i∫Φ_iΦ_j′ by quadrature with analytic derivatives.
pub fn momentum_matrix(basis: &BasisSpec) -> OperatorMatrix {
    let (phi, dphi) = sampled_with_derivative(basis);
    let m = phi.transpose() * dphi;
    OperatorMatrix {
        basis: *basis,
        data: m.map(|v| Complex64::new(0.0, -v)),
    }
}

/// ⟨Φ_i|d̂|Φ_j⟩ with d̂ = (x̂p̂ + p̂x̂)/2 = −i(x∂ₓ + 1/2), by quadrature.
pub fn dilation_matrix(basis: &BasisSpec) -> OperatorMatrix {
    let grid = basis.full_grid();
    let n = basis.size;
    let mut phi = DMatrix::zeros(grid.len(), n);
    let mut dphi = DMatrix::zeros(grid.len(), n);
    for (r, (&x, &w)) in grid.nodes.iter().zip(&grid.weights).enumerate() {
        let (v, d) = radial_functions_with_derivative(n - 1, basis.nu, basis.xi_ref, x);
        for k in 0..n {
            phi[(r, k)] = w * v[k];
            dphi[(r, k)] = x * d[k] + 0.5 * v[k];
        }
    }
    let m = phi.transpose() * dphi;
    OperatorMatrix {
        basis: *basis,
        data: m.map(|v| Complex64::new(0.0, -v)),
    }
}

/// ⟨Φ_i|p̂²|Φ_j⟩ = ∫Φ_i′Φ_j′ by quadrature.
pub fn kinetic_matrix(basis: &BasisSpec) -> OperatorMatrix {
    let (_, dphi) = sampled_with_derivative(basis);
    let m = dphi.transpose() * &dphi;
    OperatorMatrix::from_real(*basis, m)
}

/// Rows √w·Φ_k(x) and √w·Φ_k′(x) over the full grid.
fn sampled_with_derivative(basis: &BasisSpec) -> (DMatrix<f64>, DMatrix<f64>) {
    let grid = basis.full_grid();
    let n = basis.size;
    let mut phi = DMatrix::zeros(grid.len(), n);
    let mut dphi = DMatrix::zeros(grid.len(), n);
    for (r, (&x, &w)) in grid.nodes.iter().zip(&grid.weights).enumerate() {
        let (v, d) = radial_functions_with_derivative(n - 1, basis.nu, basis.xi_ref, x);
        let s = w.sqrt();
        for k in 0..n {
            phi[(r, k)] = s * v[k];
            dphi[(r, k)] = s * d[k];
        }
    }
    (phi, dphi)
}

/// c_k = ⟨Φ_k|ψ⟩ by quadrature, with the truncation deficit ‖ψ‖² − ‖c‖².
pub fn project(psi: &dyn WaveFunction, basis: &BasisSpec) -> Result<StateVector> {
    let (lo, hi) = psi.support();
    let hi = hi.min(basis.x_max());
    let n = basis.size;
    if !(hi > lo) {
        return Ok(StateVector {
            basis: *basis,
            coeffs: vec![Complex64::new(0.0, 0.0); n],
            deficit: 0.0,
        });
    }
    let grid = basis.grid(lo, hi, |x| psi.phase_rate(x));
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    let mut norm = 0.0;
    for (&x, &w) in grid.nodes.iter().zip(&grid.weights) {
        let v = psi.amplitude(x);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Evaluation(x));
        }
        norm += w * v.norm_sqr();
        let f = basis.functions(x);
        for (c, fk) in coeffs.iter_mut().zip(&f) {
            *c += v * (w * fk);
        }
    }
    let kept: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    Ok(StateVector {
        basis: *basis,
        coeffs,
        deficit: (norm - kept).max(0.0),
    })
}

/// exp(−iHt) through a full eigendecomposition of a real symmetric H.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub basis: BasisSpec,
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl Propagator {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        if h.data.iter().any(|z| z.im != 0.0) {
            return Err(Error::invalid(
                "propagator needs a real symmetric Hamiltonian matrix",
            ));
        }
        let herm = h.hermiticity_error();
        if herm > 1e-12 * h.data.iter().map(|z| z.norm()).fold(1.0, f64::max) {
            return Err(Error::invalid(format!(
                "Hamiltonian matrix is not symmetric (error {herm:e})"
            )));
        }
        let real = h.data.map(|z| z.re);
        let eig = SymmetricEigen::try_new(real, 1e-15, 10_000)
            .ok_or_else(|| Error::no_convergence("symmetric eigensolver"))?;
        Ok(Propagator {
            basis: h.basis,
            energies: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        })
    }

    /// Eigenvalues of the truncated Hamiltonian, unsorted.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// e^{−iHt}c.
    pub fn propagate(&self, c: &StateVector, t: f64) -> StateVector {
        let n = self.energies.len();
        let mut modal = vec![Complex64::new(0.0, 0.0); n];
        for (j, m) in modal.iter_mut().enumerate() {
            let s: Complex64 = (0..n).map(|k| c.coeffs[k] * self.vectors[(k, j)]).sum();
            *m = s * Complex64::from_polar(1.0, -self.energies[j] * t);
        }
        let coeffs = (0..n)
            .map(|k| (0..n).map(|j| modal[j] * self.vectors[(k, j)]).sum())
            .collect();
        StateVector {
            basis: c.basis,
            coeffs,
            deficit: c.deficit,
        }
    }
}

/// e^{−iHt}c for a one-off propagation.
pub fn propagate(h: &OperatorMatrix, c: &StateVector, t: f64) -> Result<StateVector> {
    Ok(Propagator::new(h)?.propagate(c, t))
}

/// Worst coefficient decay ratio |(a−b)/(a+b)| over states with Gaussian
/// factor e^{−a x²/2}, a = (ξ − iqp)/q².
pub fn decay_ratio(b: f64, labels: &[(f64, f64, f64)]) -> f64 {
    labels
        .iter()
        .map(|&(q, p, xi)| {
            let a = Complex64::new(xi, -q * p) / (q * q);
            (a - b).norm() / (a + b).norm()
        })
        .fold(0.0, f64::max)
}

/// ξ_ref minimizing [`decay_ratio`] for labels (q, p, ξ_state).
pub fn choose_xi_ref(labels: &[(f64, f64, f64)]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::invalid("no states to fit the basis scale to"));
    }
    let mods: Vec<f64> = labels
        .iter()
        .map(|&(q, p, xi)| (xi * xi + q * q * p * p).sqrt() / (q * q))
        .collect();
    let lo = mods.iter().copied().fold(f64::INFINITY, f64::min).ln() - 1.0;
    let hi = mods.iter().copied().fold(0.0, f64::max).ln() + 1.0;
    // the worst ratio is quasi-convex in ln b; scan, then refine by golden section
    let scan = 200;
    let mut best = (f64::INFINITY, lo);
    for i in 0..=scan {
        let s = lo + (hi - lo) * i as f64 / scan as f64;
        let r = decay_ratio(s.exp(), labels);
        if r < best.0 {
            best = (r, s);
        }
    }
    let h = (hi - lo) / scan as f64;
    let (mut a, mut b) = (best.1 - h, best.1 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if decay_ratio(c.exp(), labels) < decay_ratio(d.exp(), labels) {
            b = d;
        } else {
            a = c;
        }
    }
    Ok((0.5 * (a + b)).exp())
}
