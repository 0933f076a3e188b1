//! Log-gamma with full relative accuracy, including near its zeros at 1 and 2.

use crate::error::{Error, Result};
use std::f64::consts::{E, PI};
use std::sync::OnceLock;

const GAMMA_R: f64 = 10.900511;

const GAMMA_DK: [f64; 11] = [
    2.485_740_891_387_535_655_46e-5,
    1.051_423_785_817_219_742_10,
    -3.456_870_972_220_162_354_69,
    4.512_277_094_668_948_237_00,
    -2.982_852_253_235_766_557_21,
    1.056_397_115_771_267_130_77,
    -1.954_287_731_916_458_695_83e-1,
    1.709_705_434_044_412_243_07e-2,
    -5.719_261_174_043_057_812_83e-4,
    4.633_994_733_599_056_367_08e-6,
    -2.719_949_084_886_077_039_10e-9,
];

const LN_2_SQRT_E_OVER_PI: f64 =
    0.620_782_237_635_245_222_345_518_445_781_647_212_251_852_727_902_597_8;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_43;

const SERIES_TERMS: usize = 64;

/// Arguments up to this are reduced by the recurrence instead of Lanczos.
const SHIFT_LIMIT: f64 = 30.0;

/// ln Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!(
            "log_gamma requires a finite x > 0, got {x}"
        )));
    }
    Ok(ln_gamma(x))
}

/// Unchecked ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if (0.5..=1.5).contains(&x) {
        ln_gamma_1p(x - 1.0)
    } else if x > 1.5 && x <= 2.5 {
        let z = x - 2.0;
        z.ln_1p() + ln_gamma_1p(z)
    } else if x > 2.5 && x <= SHIFT_LIMIT {
        // Γ(x) = (x−1)(x−2)…(y) Γ(y) with y ∈ (1.5, 2.5]
        let mut y = x;
        let mut prod = 1.0;
        while y > 2.5 {
            y -= 1.0;
            prod *= y;
        }
        prod.ln() + ln_gamma(y)
    } else if x < 0.5 {
        // reflection into the series range
        PI.ln() - (PI * x).sin().ln() - ln_gamma(1.0 - x)
    } else {
        lanczos(x)
    }
}

/// Γ(a)/Γ(b) evaluated through logarithms.
pub fn gamma_ratio(a: f64, b: f64) -> f64 {
    (ln_gamma(a) - ln_gamma(b)).exp()
}

fn lanczos(x: f64) -> f64 {
    let s = GAMMA_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(GAMMA_DK[0], |s, (i, d)| s + d / (x + i as f64 - 1.0));
    s.ln() + LN_2_SQRT_E_OVER_PI + (x - 0.5) * ((x - 0.5 + GAMMA_R) / E).ln()
}

/// Taylor series ln Γ(1+z) = −γz + Σ_{k≥2} (−1)^k ζ(k) z^k / k, |z| ≤ 1/2.
fn ln_gamma_1p(z: f64) -> f64 {
    let zeta = zeta_table();
    let mut sum = 0.0;
    // highest powers first so the small terms accumulate before the large ones
    for k in (2..SERIES_TERMS).rev() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum = sum * z + sign * zeta[k] / k as f64;
    }
    z * (sum * z - EULER_GAMMA)
}

fn zeta_table() -> &'static [f64; SERIES_TERMS] {
    static TABLE: OnceLock<[f64; SERIES_TERMS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; SERIES_TERMS];
        for (k, v) in t.iter_mut().enumerate().skip(2) {
            *v = zeta(k as f64);
        }
        t
    })
}

/// Riemann zeta for real s ≥ 2 by Euler–Maclaurin summation.
fn zeta(s: f64) -> f64 {
    const N: usize = 12;
    // B_{2j}/(2j)!
    const B: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let n = N as f64;
    let mut tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    let mut rising = s;
    let mut power = n.powf(-s - 1.0);
    for (j, b) in B.iter().enumerate() {
        tail += b * rising * power;
        let m = 2.0 * j as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        power /= n * n;
    }
    let head: f64 = (1..N).rev().map(|k| (k as f64).powf(-s)).sum();
    head + tail
}
