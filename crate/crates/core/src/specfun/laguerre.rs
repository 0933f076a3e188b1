//! Generalized Laguerre polynomials and the orthonormal radial-oscillator family.

use super::gamma::ln_gamma;

/// L_n^ν(y) by the three-term recurrence.
pub fn laguerre(n: usize, nu: f64, y: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = nu + 1.0 - y;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + nu + 1.0 - y) * cur - (kf + nu) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// L_0^ν(y), …, L_n^ν(y).
pub fn laguerre_all(n: usize, nu: f64, y: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(nu + 1.0 - y);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + nu + 1.0 - y) * out[k] - (kf + nu) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// Orthonormal Laguerre polynomials p_k = sqrt(k!/Γ(k+ν+1)) L_k^ν for weight
/// y^ν e^{−y}, returned as `(mantissas, ln_scale)` with p_k = mantissa_k·e^{ln_scale}.
///
/// The shared scale absorbs overflow for large k and y.
pub fn orthonormal_laguerre(n: usize, nu: f64, y: f64) -> (Vec<f64>, f64) {
    const BIG: f64 = 1e150;
    let mut ln_scale = -0.5 * ln_gamma(nu + 1.0);
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push((nu + 1.0 - y) / (nu + 1.0).sqrt());
    }
    for k in 1..n {
        let kf = k as f64;
        let a = (2.0 * kf + nu + 1.0 - y) * out[k];
        let b = (kf * (kf + nu)).sqrt() * out[k - 1];
        let next = (a - b) / ((kf + 1.0) * (kf + nu + 1.0)).sqrt();
        out.push(next);
        if next.abs() > BIG {
            for v in out.iter_mut() {
                *v /= BIG;
            }
            ln_scale += BIG.ln();
        }
    }
    (out, ln_scale)
}

/// Values of the orthonormal radial functions Φ_0(x), …, Φ_n(x) for
/// parameters (ν, ξ), computed with a log-domain envelope.
pub fn radial_functions(n: usize, nu: f64, xi: f64, x: f64) -> Vec<f64> {
    if x <= 0.0 {
        return vec![0.0; n + 1];
    }
    let y = xi * x * x;
    let (mant, ln_scale) = orthonormal_laguerre(n, nu, y);
    // Φ_k = sqrt(2)·(ξy)^{1/4}·y^{ν/2}·e^{−y/2}·p_k(y)
    let ln_env = 0.5 * std::f64::consts::LN_2 + 0.25 * (xi * y).ln() + 0.5 * nu * y.ln() - 0.5 * y
        + ln_scale;
    mant.into_iter()
        .map(|m| {
            if m == 0.0 {
                0.0
            } else {
                m.signum() * (m.abs().ln() + ln_env).exp()
            }
        })
        .collect()
}

/// Values and x-derivatives of Φ_0, …, Φ_n at x.
pub fn radial_functions_with_derivative(
    n: usize,
    nu: f64,
    xi: f64,
    x: f64,
) -> (Vec<f64>, Vec<f64>) {
    let vals = radial_functions(n, nu, xi, x);
    if x <= 0.0 {
        return (vals, vec![0.0; n + 1]);
    }
    let ders = (0..=n)
        .map(|k| {
            let kf = k as f64;
            // y dL_k/dy = k L_k − (k+ν) L_{k−1}
            let mut d = ((nu + 0.5 + 2.0 * kf) / x - xi * x) * vals[k];
            if k > 0 {
                d -= 2.0 / x * (kf * (kf + nu)).sqrt() * vals[k - 1];
            }
            d
        })
        .collect();
    (vals, ders)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_closed_forms() {
        assert_eq!(laguerre(0, 2.3, 7.0), 1.0);
        assert!((laguerre(1, 3.0, 1.0) - 3.0).abs() < 1e-15);
        assert!((laguerre(2, 3.0, 1.0) - 5.5).abs() < 1e-15);
        let all = laguerre_all(5, 1.7, 2.2);
        for (k, v) in all.iter().enumerate() {
            assert!((v - laguerre(k, 1.7, 2.2)).abs() < 1e-14);
        }
    }

    #[test]
    fn orthonormal_matches_plain() {
        let nu = 2.5;
        let y = 3.7;
        let (m, s) = orthonormal_laguerre(12, nu, y);
        for (k, mk) in m.iter().enumerate() {
            let norm = (ln_gamma(k as f64 + 1.0) - ln_gamma(k as f64 + nu + 1.0))
                .exp()
                .sqrt();
            let want = norm * laguerre(k, nu, y);
            assert!((mk * s.exp() - want).abs() < 1e-13 * want.abs().max(1e-3));
        }
    }

    #[test]
    fn survives_large_order() {
        let v = radial_functions(1023, 3.0, 0.5, 60.0);
        assert!(v.iter().all(|x| x.is_finite()));
        assert!(v[1023].abs() > 0.0);
    }
}
