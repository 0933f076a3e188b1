//! SU(1,1) structure of the affine representation.
//!
//! Group elements are stored as the pair (α, β) of
//! [[α, β], [β̄, ᾱ]] with |α|² − |β|² = 1. The generators act on the
//! half-line as K₀ = (Ĥ + x̂²/4)/2, K₁ = (Ĥ − x̂²/4)/2 and K₂ = d̂/2 with
//! Ĥ = p̂² + C/x̂², C = ν² − 1/4. In the radial oscillator basis at ξ = 1/2,
//! K₀ is diagonal with entries η + k and η = (ν+1)/2 is the Bargmann index.
//!
//! The 2×2 image of an element uses iKⱼ ↦ −Nⱼ, which turns the affine
//! product (q,p)·(q′,p′) = (qq′, q′p + p′/q) into matrix multiplication.
//! The entries obtained with iKⱼ ↦ +Nⱼ are kept in [`v_matrix_printed`].

use crate::error::{Error, Result};
use crate::propagator::BasisSpec;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::ops::Mul;

const I: Complex64 = Complex64::new(0.0, 1.0);
const UNIMODULAR_TOL: f64 = 1e-12;

/// The element [[α, β], [β̄, ᾱ]] of SU(1,1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SU11Matrix {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl SU11Matrix {
    pub const IDENTITY: SU11Matrix = SU11Matrix {
        alpha: Complex64::new(1.0, 0.0),
        beta: Complex64::new(0.0, 0.0),
    };

    /// Checked constructor; the determinant may be off by 1e−12 relative to |α|².
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let m = SU11Matrix { alpha, beta };
        if !(alpha.is_finite() && beta.is_finite())
            || m.det_defect() > UNIMODULAR_TOL * alpha.norm_sqr().max(1.0)
        {
            return Err(Error::invalid(format!(
                "not in SU(1,1): |α|²−|β|² = {}",
                m.det()
            )));
        }
        Ok(m)
    }

    pub fn det(&self) -> f64 {
        self.alpha.norm_sqr() - self.beta.norm_sqr()
    }

    pub fn det_defect(&self) -> f64 {
        (self.det() - 1.0).abs()
    }

    pub fn to_array(&self) -> [[Complex64; 2]; 2] {
        [
            [self.alpha, self.beta],
            [self.beta.conj(), self.alpha.conj()],
        ]
    }

    pub fn inverse(&self) -> Self {
        SU11Matrix {
            alpha: self.alpha.conj(),
            beta: -self.beta,
        }
    }

    /// Largest entrywise distance to another element.
    pub fn distance(&self, other: &SU11Matrix) -> f64 {
        (self.alpha - other.alpha)
            .norm()
            .max((self.beta - other.beta).norm())
    }
}

impl Mul for SU11Matrix {
    type Output = SU11Matrix;

    fn mul(self, r: SU11Matrix) -> SU11Matrix {
        SU11Matrix {
            alpha: self.alpha * r.alpha + self.beta * r.beta.conj(),
            beta: self.alpha * r.beta + self.beta * r.alpha.conj(),
        }
    }
}

fn check_q(q: f64, p: f64) -> Result<()> {
    if !(q > 0.0 && q.is_finite() && p.is_finite()) {
        return Err(Error::invalid(format!(
            "need q > 0 and finite p, got ({q}, {p})"
        )));
    }
    Ok(())
}

/// Image of V_{q,p}: α = (q+1/q)/2 − ip, β = p + i(q−1/q)/2.
pub fn v_matrix(q: f64, p: f64) -> Result<SU11Matrix> {
    check_q(q, p)?;
    let (c, s) = ((q + 1.0 / q) / 2.0, (q - 1.0 / q) / 2.0);
    Ok(SU11Matrix {
        alpha: Complex64::new(c, -p),
        beta: Complex64::new(p, s),
    })
}

/// Entries obtained from iKⱼ ↦ +Nⱼ: α = (q+1/q)/2 + ip/q², β = −i[(q−1/q)/2 − ip/q²].
///
/// Equals `v_matrix` at the inverse of (q, p/q²); it is an anti-homomorphism.
pub fn v_matrix_printed(q: f64, p: f64) -> Result<SU11Matrix> {
    check_q(q, p)?;
    let (c, s) = ((q + 1.0 / q) / 2.0, (q - 1.0 / q) / 2.0);
    let r = p / (q * q);
    Ok(SU11Matrix {
        alpha: Complex64::new(c, r),
        beta: -I * Complex64::new(s, -r),
    })
}

/// The images of e^{2ip(K₀−K₁)/q} and e^{−2i ln q K₂}, whose product is `v_matrix`.
pub fn factor_matrices(q: f64, p: f64) -> Result<(SU11Matrix, SU11Matrix)> {
    check_q(q, p)?;
    let r = p / q;
    let shear = SU11Matrix {
        alpha: Complex64::new(1.0, -r),
        beta: Complex64::new(r, 0.0),
    };
    let boost = SU11Matrix {
        alpha: Complex64::new((q + 1.0 / q) / 2.0, 0.0),
        beta: Complex64::new(0.0, (q - 1.0 / q) / 2.0),
    };
    Ok((shear, boost))
}

/// Same factors under iKⱼ ↦ +Nⱼ; their product is `v_matrix_printed`.
pub fn factor_matrices_printed(q: f64, p: f64) -> Result<(SU11Matrix, SU11Matrix)> {
    let (a, b) = factor_matrices(q, p)?;
    Ok((
        SU11Matrix {
            alpha: a.alpha.conj(),
            beta: -a.beta,
        },
        SU11Matrix {
            alpha: b.alpha,
            beta: -b.beta,
        },
    ))
}

/// (q,p)·(q′,p′) = (qq′, q′p + p′/q).
pub fn group_law(a: (f64, f64), b: (f64, f64)) -> Result<(f64, f64)> {
    check_q(a.0, a.1)?;
    check_q(b.0, b.1)?;
    Ok((a.0 * b.0, b.0 * a.1 + b.1 / a.0))
}

/// (q,p)⁻¹ = (1/q, −p).
pub fn group_inverse(a: (f64, f64)) -> Result<(f64, f64)> {
    check_q(a.0, a.1)?;
    Ok((1.0 / a.0, -a.1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Rotation and boost parts of an element.
///
/// Left: m = p(ζ)h(θ). Right: m = h(−θ)p(ζ), with ζ the right factor ζ′.
/// `xi_c` is the displacement parameter of p(ζ), ζ = −tanh|ξ_c| e^{−i arg ξ_c}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CartanFactors {
    pub side: Side,
    pub theta: f64,
    pub zeta: Complex64,
    pub delta: f64,
    pub xi_c: Complex64,
}

/// h(θ) = diag(e^{iθ/2}, e^{−iθ/2}).
pub fn rotation(theta: f64) -> SU11Matrix {
    SU11Matrix {
        alpha: Complex64::from_polar(1.0, theta / 2.0),
        beta: Complex64::new(0.0, 0.0),
    }
}

/// p(ζ) = δ[[1, ζ], [ζ̄, 1]] with δ = (1−|ζ|²)^{−1/2}.
pub fn boost(zeta: Complex64) -> Result<SU11Matrix> {
    let r = zeta.norm_sqr();
    if !(r < 1.0) {
        return Err(Error::invalid(format!(
            "|ζ| must be below 1, got {}",
            r.sqrt()
        )));
    }
    let d = 1.0 / (1.0 - r).sqrt();
    Ok(SU11Matrix {
        alpha: Complex64::new(d, 0.0),
        beta: zeta * d,
    })
}

fn displacement(zeta: Complex64) -> Complex64 {
    let r = zeta.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    -zeta.conj() * (r.atanh() / r)
}

/// θ = 2 Arg α ∈ (−2π, 2π] on the left, its negative on the right.
pub fn cartan(m: &SU11Matrix, side: Side) -> CartanFactors {
    let delta = m.alpha.norm();
    let arg = m.alpha.arg();
    let (theta, zeta) = match side {
        Side::Left => (2.0 * arg, m.beta / m.alpha.conj()),
        Side::Right => (-2.0 * arg, m.beta / m.alpha),
    };
    CartanFactors {
        side,
        theta,
        zeta,
        delta,
        xi_c: displacement(zeta),
    }
}

impl CartanFactors {
    pub fn reassemble(&self) -> Result<SU11Matrix> {
        let p = boost(self.zeta)?;
        Ok(match self.side {
            Side::Left => p * rotation(self.theta),
            Side::Right => rotation(-self.theta) * p,
        })
    }
}

/// exp of X = ½[[iλ₀, z], [z̄, −iλ₀]], using X² = Δ·1 with Δ = (|z|² − λ₀²)/4.
pub fn exp_su11(lambda0: f64, z: Complex64) -> SU11Matrix {
    let delta = (z.norm_sqr() - lambda0 * lambda0) / 4.0;
    let (c, s) = if delta > 0.0 {
        let r = delta.sqrt();
        (r.cosh(), r.sinh() / r)
    } else if delta < 0.0 {
        let r = (-delta).sqrt();
        (r.cos(), r.sin() / r)
    } else {
        (1.0, 1.0)
    };
    SU11Matrix {
        alpha: Complex64::new(c, s * lambda0 / 2.0),
        beta: z * (s / 2.0),
    }
}

/// Truncated matrices of the generators in the Φ_k basis at ξ = 1/2.
///
/// Rows and columns near the truncation edge are inexact; compare on
/// [`AlgebraRep::interior`] blocks.
#[derive(Debug, Clone)]
pub struct AlgebraRep {
    pub nu: f64,
    pub eta: f64,
    pub omega: f64,
    pub k0: DMatrix<Complex64>,
    pub k1: DMatrix<Complex64>,
    pub k2: DMatrix<Complex64>,
    pub k_plus: DMatrix<Complex64>,
    pub k_minus: DMatrix<Complex64>,
}

/// η = (ν+1)/2.
pub fn bargmann_index(nu: f64) -> f64 {
    (nu + 1.0) / 2.0
}

/// ¼(3/4 − C) with C = ν² − 1/4.
pub fn casimir_value(nu: f64) -> f64 {
    0.25 * (0.75 - (nu * nu - 0.25))
}

/// The basis the generators are represented in.
pub fn algebra_basis(nu: f64, size: usize) -> Result<BasisSpec> {
    BasisSpec::new(nu, 0.5, size)
}

pub fn algebra_rep(nu: f64, size: usize) -> Result<AlgebraRep> {
    AlgebraRep::rotated(nu, size, 0.0)
}

impl AlgebraRep {
    /// Generators with K₁ = ½[cos ω (Ĥ − x̂²/4) + sin ω d̂], K₂ = ½[−sin ω (Ĥ − x̂²/4) + cos ω d̂].
    pub fn rotated(nu: f64, size: usize, omega: f64) -> Result<Self> {
        algebra_basis(nu, size)?;
        if !omega.is_finite() {
            return Err(Error::invalid("ω must be finite"));
        }
        let eta = bargmann_index(nu);
        let zero = Complex64::new(0.0, 0.0);
        let k0 = DMatrix::from_fn(size, size, |i, j| {
            if i == j {
                Complex64::new(eta + i as f64, 0.0)
            } else {
                zero
            }
        });
        // K₊ eₖ = −i √((k+1)(k+2η)) eₖ₊₁ at ω = 0; the rotation multiplies it by e^{−iω}
        let phase = Complex64::from_polar(1.0, -omega);
        let k_plus = DMatrix::from_fn(size, size, |i, j| {
            if i == j + 1 {
                let k = j as f64;
                -I * phase * ((k + 1.0) * (k + 2.0 * eta)).sqrt()
            } else {
                zero
            }
        });
        let k_minus = k_plus.adjoint();
        let k2 = (&k_plus + &k_minus) * Complex64::new(0.5, 0.0);
        let k1 = (&k_minus - &k_plus) / (2.0 * I);
        Ok(AlgebraRep {
            nu,
            eta,
            omega,
            k0,
            k1,
            k2,
            k_plus,
            k_minus,
        })
    }

    pub fn size(&self) -> usize {
        self.k0.nrows()
    }

    /// Leading block that excludes the last two rows and columns.
    pub fn interior(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let n = self.size().saturating_sub(2);
        m.view((0, 0), (n, n)).into_owned()
    }

    /// K₁² + K₂² − K₀².
    pub fn casimir(&self) -> DMatrix<Complex64> {
        &self.k1 * &self.k1 + &self.k2 * &self.k2 - &self.k0 * &self.k0
    }

    /// Ĥ = K₀ + cos ω K₁ − sin ω K₂.
    pub fn hamiltonian(&self) -> DMatrix<Complex64> {
        let (s, c) = self.omega.sin_cos();
        &self.k0 + &self.k1 * Complex64::new(c, 0.0) - &self.k2 * Complex64::new(s, 0.0)
    }

    /// x̂²/4 = K₀ − cos ω K₁ + sin ω K₂.
    pub fn x2_quarter(&self) -> DMatrix<Complex64> {
        let (s, c) = self.omega.sin_cos();
        &self.k0 - &self.k1 * Complex64::new(c, 0.0) + &self.k2 * Complex64::new(s, 0.0)
    }

    /// d̂/2 = sin ω K₁ + cos ω K₂.
    pub fn dilation_half(&self) -> DMatrix<Complex64> {
        let (s, c) = self.omega.sin_cos();
        &self.k1 * Complex64::new(s, 0.0) + &self.k2 * Complex64::new(c, 0.0)
    }

    /// Residuals on the interior block of the defining relations.
    pub fn check(&self) -> AlgebraCheck {
        let n = self.size();
        let id = DMatrix::<Complex64>::identity(n, n);
        let res = |m: DMatrix<Complex64>| max_abs(&self.interior(&m));
        AlgebraCheck {
            k0_k1: res(commutator(&self.k0, &self.k1) - &self.k2 * I),
            k0_k2: res(commutator(&self.k0, &self.k2) + &self.k1 * I),
            k1_k2: res(commutator(&self.k1, &self.k2) + &self.k0 * I),
            k0_kplus: res(commutator(&self.k0, &self.k_plus) - &self.k_plus),
            k0_kminus: res(commutator(&self.k0, &self.k_minus) + &self.k_minus),
            kplus_kminus: res(
                commutator(&self.k_plus, &self.k_minus) + &self.k0 * Complex64::new(2.0, 0.0)
            ),
            casimir: res(self.casimir() - id * Complex64::new(casimir_value(self.nu), 0.0)),
            adjoint: res(&self.k_minus - self.k_plus.adjoint()),
        }
    }
}

/// Largest interior residual of each relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlgebraCheck {
    pub k0_k1: f64,
    pub k0_k2: f64,
    pub k1_k2: f64,
    pub k0_kplus: f64,
    pub k0_kminus: f64,
    pub kplus_kminus: f64,
    pub casimir: f64,
    pub adjoint: f64,
}

impl AlgebraCheck {
    pub fn max(&self) -> f64 {
        [
            self.k0_k1,
            self.k0_k2,
            self.k1_k2,
            self.k0_kplus,
            self.k0_kminus,
            self.kplus_kminus,
            self.casimir,
            self.adjoint,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn commutator(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a * b - b * a
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
