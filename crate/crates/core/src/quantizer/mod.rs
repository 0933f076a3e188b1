//! Covariant integral quantization by phase-space quadrature.
//!
//! Matrix elements ⟨Φ_i|Â_f|Φ_j⟩ = ∫ dq dp/(2πc₀) f(q,p) ⟨Φ_i|q,p⟩⟨q,p|Φ_j⟩ are
//! computed numerically for the monomial symbols q^α, p, qp and p², then
//! compared with the operators they are expected to produce: (c_α/c₀)x̂^α,
//! (c₁/c₀)p̂, (c₂/c₀)d̂ and (c₂/c₀)p̂² + ((K − 3c₂/2)/c₀)x̂^{−2}. The
//! distributional reduction of the p-integral is never used; only its end
//! results are checked.

use crate::coherent::{FrameIntegrator, FrameOptions, FrameResult, WaveFunction};
use crate::error::{Error, Result};
use crate::fiducial::{Fiducial, FiducialSpec, GridFiducial, Moment};
use crate::propagator::{
    dilation_matrix, kinetic_matrix, momentum_matrix, position_matrix, BasisSpec, OperatorMatrix,
    StateVector,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// Accuracy demanded of the measured ratios.
pub const RATIO_TOL: f64 = 1e-3;
/// Accuracy demanded of the two coefficients of Â_{p²}.
pub const P2_TOL: f64 = 1e-2;

/// The classical symbols that can be quantized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolSpec {
    QPower { alpha: f64 },
    PLinear,
    DSymbol,
    PSquared,
}

impl SymbolSpec {
    /// (a, b) with f = q^a p^b.
    pub fn exponents(&self) -> (f64, u32) {
        match *self {
            SymbolSpec::QPower { alpha } => (alpha, 0),
            SymbolSpec::PLinear => (0.0, 1),
            SymbolSpec::DSymbol => (1.0, 1),
            SymbolSpec::PSquared => (0.0, 2),
        }
    }
}

impl fmt::Display for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolSpec::QPower { alpha } => write!(f, "q^{alpha}"),
            SymbolSpec::PLinear => write!(f, "p"),
            SymbolSpec::DSymbol => write!(f, "qp"),
            SymbolSpec::PSquared => write!(f, "p^2"),
        }
    }
}

impl FromStr for SymbolSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().replace(' ', "");
        match t.as_str() {
            "p" => return Ok(SymbolSpec::PLinear),
            "qp" | "pq" | "d" => return Ok(SymbolSpec::DSymbol),
            "p^2" | "p2" | "pp" => return Ok(SymbolSpec::PSquared),
            "q" => return Ok(SymbolSpec::QPower { alpha: 1.0 }),
            _ => {}
        }
        let alpha = t
            .strip_prefix("q^")
            .and_then(|a| a.trim_matches(|c| c == '(' || c == ')').parse::<f64>().ok())
            .filter(|a| a.is_finite())
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown symbol '{s}' (expected q^<alpha>, p, qp or p^2)"
                ))
            })?;
        Ok(SymbolSpec::QPower { alpha })
    }
}

/// A fiducial that can be dilated: Φ_n or the sampled test fiducial.
#[derive(Debug, Clone, PartialEq)]
pub enum FiducialChoice {
    Phi(FiducialSpec),
    Grid(GridFiducial),
}

impl FiducialChoice {
    /// ψ_λ(x) = λ^{−1/2} ψ(x/λ).
    pub fn rescaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!(
                "scale must be positive (got {lambda})"
            )));
        }
        Ok(match self {
            FiducialChoice::Phi(f) => {
                FiducialChoice::Phi(FiducialSpec::with_xi(f.nu, f.n, f.xi / (lambda * lambda))?)
            }
            FiducialChoice::Grid(g) => FiducialChoice::Grid(g.rescaled(lambda)?),
        })
    }

    /// The dilation with c₁ = c₀.
    pub fn with_unit_c1_over_c0(&self) -> Result<Self> {
        let c0 = self.c_gamma(0.0).value()?;
        let c1 = self.c_gamma(1.0).value()?;
        self.rescaled(c1 / c0)
    }

    pub fn label(&self) -> String {
        match self {
            FiducialChoice::Phi(f) => format!("phi{}(nu={}, xi={})", f.n, f.nu, f.xi),
            FiducialChoice::Grid(g) => format!("grid(exp(-(x+1/x)), scale={})", g.scale()),
        }
    }
}

impl Fiducial for FiducialChoice {
    fn value(&self, x: f64) -> f64 {
        match self {
            FiducialChoice::Phi(f) => f.value(x),
            FiducialChoice::Grid(g) => g.value(x),
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        match self {
            FiducialChoice::Phi(f) => f.derivative(x),
            FiducialChoice::Grid(g) => g.derivative(x),
        }
    }

    fn support(&self) -> (f64, f64) {
        match self {
            FiducialChoice::Phi(f) => Fiducial::support(f),
            FiducialChoice::Grid(g) => g.support(),
        }
    }

    fn c_gamma(&self, gamma: f64) -> Moment {
        match self {
            FiducialChoice::Phi(f) => Fiducial::c_gamma(f, gamma),
            FiducialChoice::Grid(g) => g.c_gamma(gamma),
        }
    }

    fn k_constant(&self) -> Result<Moment> {
        match self {
            FiducialChoice::Phi(f) => f.k_constant(),
            FiducialChoice::Grid(g) => g.k_constant(),
        }
    }
}

/// Which basis functions serve as test vectors, and the frame tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantizerOptions {
    /// Matrices are taken on the leading `functions` basis vectors.
    pub functions: usize,
    pub frame: FrameOptions,
}

impl Default for QuantizerOptions {
    fn default() -> Self {
        QuantizerOptions {
            functions: 4,
            frame: FrameOptions::default(),
        }
    }
}

/// The basis used by the quantizer checks: Φ_k(·; 3, 1).
pub fn default_basis() -> BasisSpec {
    BasisSpec::new(3.0, 1.0, 8).expect("valid basis")
}

/// A measured Â_f on the leading basis block.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedMatrix {
    pub symbol: SymbolSpec,
    /// Hermitian part of the measured matrix.
    pub matrix: DMatrix<Complex64>,
    /// max |M − M†| before symmetrization.
    pub hermiticity_error: f64,
    pub frame: FrameResult,
}

/// Moments the symbol needs, each checked for finiteness.
fn required_moments(symbol: SymbolSpec, fiducial: &dyn Fiducial) -> Result<()> {
    fiducial.c_gamma(0.0).value()?;
    match symbol {
        SymbolSpec::QPower { alpha } => {
            fiducial.c_gamma(alpha).value()?;
        }
        SymbolSpec::PLinear => {
            fiducial.c_gamma(1.0).value()?;
        }
        SymbolSpec::DSymbol => {
            fiducial.c_gamma(2.0).value()?;
        }
        SymbolSpec::PSquared => {
            fiducial.c_gamma(2.0).value()?;
            if let Moment::Divergent { .. } = fiducial.k_constant()? {
                return Err(Error::Divergent(
                    "K = ∫ψ′²/x² is infinite for this fiducial".into(),
                ));
            }
        }
    }
    Ok(())
}

/// ⟨Φ_i|Â_f|Φ_j⟩ for i, j below `options.functions` by 2D quadrature.
pub fn quantize_elements(
    symbol: SymbolSpec,
    fiducial: &dyn Fiducial,
    basis: &BasisSpec,
    options: &QuantizerOptions,
) -> Result<QuantizedMatrix> {
    let m = options.functions;
    if m == 0 || m > basis.size {
        return Err(Error::invalid(format!(
            "test-vector count must be in 1..={} (got {m})",
            basis.size
        )));
    }
    required_moments(symbol, fiducial)?;
    let tests: Vec<StateVector> = (0..m).map(|k| StateVector::unit(*basis, k)).collect();
    let refs: Vec<&dyn WaveFunction> = tests.iter().map(|t| t as &dyn WaveFunction).collect();
    let (a, b) = symbol.exponents();
    let frame = FrameIntegrator::new(fiducial, refs, options.frame)?.integrate(a, b)?;
    if !frame.converged {
        return Err(Error::no_convergence(format!(
            "phase-space quadrature for {symbol} did not meet its tolerance (budget {:e})",
            frame.error_budget()
        )));
    }
    let raw = DMatrix::from_fn(m, m, |i, j| frame.entry(i, j));
    let hermiticity_error = (&raw - raw.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let matrix = (&raw + raw.adjoint()).map(|z| z * 0.5);
    Ok(QuantizedMatrix {
        symbol,
        matrix,
        hermiticity_error,
        frame,
    })
}

fn leading(op: &OperatorMatrix, m: usize) -> DMatrix<Complex64> {
    op.leading(m)
}

/// Re⟨A, B⟩ over matrix entries.
fn dot(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

fn max_abs(a: &DMatrix<Complex64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A measured matrix compared with a multiple of a reference operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub symbol: SymbolSpec,
    pub fiducial: String,
    /// Least-squares r in M ≈ r·T.
    pub ratio: f64,
    pub expected: f64,
    pub relative_error: f64,
    /// max|M − rT| / max|T|.
    pub proportionality_residual: f64,
    pub hermiticity_error: f64,
    pub error_budget: f64,
    pub passed: bool,
    #[serde(skip)]
    pub measured: DMatrix<Complex64>,
    /// The reference operator T on the same block.
    #[serde(skip)]
    pub target: DMatrix<Complex64>,
}

fn ratio_report(
    symbol: SymbolSpec,
    fiducial: &FiducialChoice,
    measured: &QuantizedMatrix,
    target: &DMatrix<Complex64>,
    expected: f64,
) -> RatioReport {
    let ratio = dot(target, &measured.matrix) / dot(target, target);
    let resid = max_abs(&(&measured.matrix - target.map(|z| z * ratio))) / max_abs(target);
    let relative_error = ((ratio - expected) / expected).abs();
    RatioReport {
        symbol,
        fiducial: fiducial.label(),
        ratio,
        expected,
        relative_error,
        proportionality_residual: resid,
        hermiticity_error: measured.hermiticity_error,
        error_budget: measured.frame.error_budget(),
        passed: relative_error < RATIO_TOL && resid < RATIO_TOL,
        measured: measured.matrix.clone(),
        target: target.clone(),
    }
}

/// Â_{q^α} against (c_α/c₀)x̂^α.
pub fn verify_q_power(
    alpha: f64,
    fiducial: &FiducialChoice,
    basis: &BasisSpec,
    options: &QuantizerOptions,
) -> Result<RatioReport> {
    let symbol = SymbolSpec::QPower { alpha };
    let measured = quantize_elements(symbol, fiducial, basis, options)?;
    let target = leading(
        &position_matrix(basis, |x| x.powf(alpha)),
        options.functions,
    );
    let expected = fiducial.c_gamma(alpha).value()? / fiducial.c_gamma(0.0).value()?;
    Ok(ratio_report(symbol, fiducial, &measured, &target, expected))
}

/// Â_{qp} against (c₂/c₀)d̂.
pub fn verify_d(
    fiducial: &FiducialChoice,
    basis: &BasisSpec,
    options: &QuantizerOptions,
) -> Result<RatioReport> {
    let measured = quantize_elements(SymbolSpec::DSymbol, fiducial, basis, options)?;
    let target = leading(&dilation_matrix(basis), options.functions);
    let expected = fiducial.c_gamma(2.0).value()? / fiducial.c_gamma(0.0).value()?;
    Ok(ratio_report(
        SymbolSpec::DSymbol,
        fiducial,
        &measured,
        &target,
        expected,
    ))
}

/// Â_p for a fiducial and for its dilation with c₁ = c₀.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumReport {
    pub raw: RatioReport,
    pub rescaled: RatioReport,
    /// max |Re M_ij| of the raw measurement: p̂ is purely imaginary in a real basis.
    pub max_real_part: f64,
    /// c₂/c₀ of the rescaled fiducial, necessarily above 1.
    pub rescaled_c2_over_c0: f64,
}

/// Â_p against (c₁/c₀)p̂, raw and after rescaling to c₁ = c₀.
pub fn verify_p(
    fiducial: &FiducialChoice,
    basis: &BasisSpec,
    options: &QuantizerOptions,
) -> Result<MomentumReport> {
    let target = leading(&momentum_matrix(basis), options.functions);
    let run = |f: &FiducialChoice| -> Result<(RatioReport, f64)> {
        let measured = quantize_elements(SymbolSpec::PLinear, f, basis, options)?;
        let expected = f.c_gamma(1.0).value()? / f.c_gamma(0.0).value()?;
        let re = measured
            .matrix
            .iter()
            .map(|z| z.re.abs())
            .fold(0.0, f64::max);
        Ok((
            ratio_report(SymbolSpec::PLinear, f, &measured, &target, expected),
            re,
        ))
    };
    let (raw, max_real_part) = run(fiducial)?;
    let unit = fiducial.with_unit_c1_over_c0()?;
    let (rescaled, _) = run(&unit)?;
    let rescaled_c2_over_c0 = unit.c_gamma(2.0).value()? / unit.c_gamma(0.0).value()?;
    Ok(MomentumReport {
        raw,
        rescaled,
        max_real_part,
        rescaled_c2_over_c0,
    })
}

/// Two-coefficient fit Â_{p²} ≈ a·p̂² + b·x̂^{−2}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KineticReport {
    pub fiducial: String,
    pub kinetic: f64,
    /// c₂/c₀.
    pub expected_kinetic: f64,
    pub repulsive: f64,
    /// (c₂/c₀)(K/c₂ − 3/2).
    pub expected_repulsive: f64,
    pub kinetic_error: f64,
    pub repulsive_error: f64,
    /// max|M − a p̂² − b x̂^{−2}| / max|M|.
    pub fit_residual: f64,
    pub hermiticity_error: f64,
    pub error_budget: f64,
    pub passed: bool,
    #[serde(skip)]
    pub measured: DMatrix<Complex64>,
    /// a·p̂² + b·x̂^{−2} at the fitted coefficients.
    #[serde(skip)]
    pub fitted: DMatrix<Complex64>,
}

/// Â_{p²} fitted against p̂² and x̂^{−2} by unweighted least squares.
pub fn verify_p2(
    fiducial: &FiducialChoice,
    basis: &BasisSpec,
    options: &QuantizerOptions,
) -> Result<KineticReport> {
    let measured = quantize_elements(SymbolSpec::PSquared, fiducial, basis, options)?;
    let t = leading(&kinetic_matrix(basis), options.functions);
    let v = leading(&position_matrix(basis, |x| x.powi(-2)), options.functions);
    let m = &measured.matrix;
    // normal equations of min |M − aT − bV|²
    let (tt, tv, vv) = (dot(&t, &t), dot(&t, &v), dot(&v, &v));
    let (tm, vm) = (dot(&t, m), dot(&v, m));
    let det = tt * vv - tv * tv;
    if !(det.abs() > 1e-14 * tt * vv) {
        return Err(Error::no_convergence(
            "p^2 fit is degenerate on this basis block",
        ));
    }
    let kinetic = (tm * vv - vm * tv) / det;
    let repulsive = (vm * tt - tm * tv) / det;
    let fitted = t.map(|z| z * kinetic) + v.map(|z| z * repulsive);
    let fit_residual = max_abs(&(m - &fitted)) / max_abs(m);

    let c0 = fiducial.c_gamma(0.0).value()?;
    let c2 = fiducial.c_gamma(2.0).value()?;
    let k = fiducial.k_constant()?.value()?;
    let expected_kinetic = c2 / c0;
    let expected_repulsive = (k - 1.5 * c2) / c0;
    let kinetic_error = ((kinetic - expected_kinetic) / expected_kinetic).abs();
    let repulsive_error = ((repulsive - expected_repulsive) / expected_repulsive).abs();
    Ok(KineticReport {
        fiducial: fiducial.label(),
        kinetic,
        expected_kinetic,
        repulsive,
        expected_repulsive,
        kinetic_error,
        repulsive_error,
        fit_residual,
        hermiticity_error: measured.hermiticity_error,
        error_budget: measured.frame.error_budget(),
        passed: kinetic_error < P2_TOL
            && repulsive_error < P2_TOL
            && fit_residual < P2_TOL
            && repulsive > 0.0,
        measured: m.clone(),
        fitted,
    })
}

/// K − (3/2)c₂ against ∫[y²φ′² + φ²/2]dy with φ(y) = yψ(1/y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityReport {
    pub k: f64,
    pub c2: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
}

pub fn positivity_identity(fiducial: &GridFiducial) -> Result<PositivityReport> {
    let (_, k) = fiducial.derivative_constants()?;
    let c2 = fiducial.moment(2.0);
    let lhs = k - 1.5 * c2;
    let rhs = fiducial.inverted_positivity_integral();
    Ok(PositivityReport {
        k,
        c2,
        lhs,
        rhs,
        relative_error: ((lhs - rhs) / rhs).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_parse() {
        assert_eq!(
            "q^2".parse::<SymbolSpec>().unwrap(),
            SymbolSpec::QPower { alpha: 2.0 }
        );
        assert_eq!(
            "q^-1".parse::<SymbolSpec>().unwrap(),
            SymbolSpec::QPower { alpha: -1.0 }
        );
        assert_eq!(
            "q^(0.5)".parse::<SymbolSpec>().unwrap(),
            SymbolSpec::QPower { alpha: 0.5 }
        );
        assert_eq!("qp".parse::<SymbolSpec>().unwrap(), SymbolSpec::DSymbol);
        assert_eq!("p^2".parse::<SymbolSpec>().unwrap(), SymbolSpec::PSquared);
        assert_eq!("p".parse::<SymbolSpec>().unwrap(), SymbolSpec::PLinear);
        assert!("x^2".parse::<SymbolSpec>().is_err());
        for s in ["q^2", "p", "qp", "p^2"] {
            assert_eq!(s.parse::<SymbolSpec>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn divergent_moment_is_named() {
        let phi = FiducialChoice::Phi(FiducialSpec::new(1.0, 0).unwrap());
        let err = quantize_elements(
            SymbolSpec::PSquared,
            &phi,
            &default_basis(),
            &QuantizerOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Divergent(_)));
        let err = quantize_elements(
            SymbolSpec::QPower { alpha: 3.0 },
            &phi,
            &default_basis(),
            &QuantizerOptions::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("c_3"), "{err}");
    }

    #[test]
    fn rescaling_sets_c1_equal_to_c0() {
        for f in [
            FiducialChoice::Phi(FiducialSpec::new(3.0, 1).unwrap()),
            FiducialChoice::Grid(GridFiducial::standard()),
        ] {
            let u = f.with_unit_c1_over_c0().unwrap();
            let c0 = u.c_gamma(0.0).value().unwrap();
            let c1 = u.c_gamma(1.0).value().unwrap();
            assert!((c1 / c0 - 1.0).abs() < 1e-10);
            assert!(u.c_gamma(2.0).value().unwrap() / c0 > 1.0);
        }
    }
}
