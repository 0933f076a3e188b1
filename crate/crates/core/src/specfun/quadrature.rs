//! Quadrature rules and integration drivers.
//!
//! Fixed rules (Gauss–Legendre, generalized Gauss–Laguerre) are built once and
//! reused; the adaptive driver is a Gauss–Kronrod 7/15 scheme that always
//! splits the interval with the largest error estimate.

use super::laguerre::orthonormal_laguerre;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::collections::BinaryHeap;

/// Default absolute tolerance of the adaptive driver.
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
/// Default relative tolerance of the adaptive driver.
pub const DEFAULT_REL_TOL: f64 = 1e-10;
/// Default bisection depth limit of the adaptive driver.
pub const DEFAULT_MAX_DEPTH: u32 = 40;

/// Largest Gauss–Laguerre order whose weights stay representable for every ν
/// used in this crate.
pub const MAX_LAGUERRE_ORDER: usize = 160;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleKind {
    /// Integrates f against x^ν e^{−x} on (0, ∞).
    GaussLaguerre { order: usize, exponent: f64 },
    /// Integrates f on [−1, 1] (mapped to the requested finite domain).
    GaussLegendre { order: usize },
    Adaptive {
        abs_tol: f64,
        rel_tol: f64,
        max_depth: u32,
    },
}

impl RuleKind {
    pub fn adaptive() -> Self {
        RuleKind::Adaptive {
            abs_tol: DEFAULT_ABS_TOL,
            rel_tol: DEFAULT_REL_TOL,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

/// Nodes and weights tagged with the kind that produced them.
///
/// For the adaptive kind the nodes and weights are the Kronrod 15-point rule
/// on [−1, 1] that the driver applies on each panel.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn build_rule(kind: RuleKind) -> Result<QuadratureRule> {
    match kind {
        RuleKind::GaussLegendre { order } => {
            if order == 0 {
                return Err(Error::invalid("Gauss–Legendre order must be at least 1"));
            }
            let (nodes, weights) = gauss_legendre(order);
            Ok(QuadratureRule {
                kind,
                nodes,
                weights,
            })
        }
        RuleKind::GaussLaguerre { order, exponent } => {
            let (nodes, weights) = gauss_laguerre(order, exponent)?;
            Ok(QuadratureRule {
                kind,
                nodes,
                weights,
            })
        }
        RuleKind::Adaptive {
            abs_tol,
            rel_tol,
            max_depth,
        } => {
            if !(abs_tol >= 0.0 && rel_tol >= 0.0)
                || (abs_tol == 0.0 && rel_tol == 0.0)
                || max_depth == 0
            {
                return Err(Error::invalid(
                    "adaptive rule needs a positive tolerance and depth",
                ));
            }
            let mut nodes: Vec<f64> = XGK
                .iter()
                .map(|x| -x)
                .chain(XGK.iter().rev().skip(1).copied())
                .collect();
            nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let weights = nodes.iter().map(|x| kronrod_weight(x.abs())).collect();
            Ok(QuadratureRule {
                kind,
                nodes,
                weights,
            })
        }
    }
}

fn kronrod_weight(ax: f64) -> f64 {
    let i = XGK
        .iter()
        .position(|x| (x - ax).abs() < 1e-15)
        .expect("kronrod node");
    WGK[i]
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// Generalized Gauss–Laguerre rule for the weight x^ν e^{−x}.
///
/// Golub–Welsch supplies starting nodes; Newton iteration on the orthonormal
/// L_n^ν polishes them and the weights come from the Christoffel function,
/// which keeps tiny weights accurate in relative terms.
pub fn gauss_laguerre(n: usize, nu: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::invalid("Gauss–Laguerre order must be at least 1"));
    }
    if !(nu > -1.0) {
        return Err(Error::invalid(format!(
            "Gauss–Laguerre exponent must exceed −1, got {nu}"
        )));
    }
    if n > MAX_LAGUERRE_ORDER {
        return Err(Error::invalid(format!(
            "Gauss–Laguerre order {n} exceeds {MAX_LAGUERRE_ORDER}: weights underflow"
        )));
    }
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * i as f64 + nu + 1.0
        } else if i + 1 == j || j + 1 == i {
            let k = i.max(j) as f64;
            (k * (k + nu)).sqrt()
        } else {
            0.0
        }
    });
    let mut guesses: Vec<f64> = SymmetricEigen::new(jacobi)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    guesses.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = n as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (i, &x0) in guesses.iter().enumerate() {
        let mut x = x0;
        let mut converged = false;
        for _ in 0..50 {
            let (p, _) = orthonormal_laguerre(n, nu, x);
            // x p_n' = n p_n − sqrt(n(n+ν)) p_{n−1}
            let dp = (nf * p[n] - (nf * (nf + nu)).sqrt() * p[n - 1]) / x;
            let dx = p[n] / dp;
            x -= dx;
            if dx.abs() <= 1e-12 * x.abs() {
                converged = true;
                break;
            }
        }
        if !converged || !(x > 0.0) {
            return Err(Error::no_convergence(format!(
                "Gauss–Laguerre node {i} (order {n}, exponent {nu})"
            )));
        }
        let (p, ln_scale) = orthonormal_laguerre(n - 1, nu, x);
        let sum: f64 = p.iter().map(|v| v * v).sum();
        let w = (-sum.ln() - 2.0 * ln_scale).exp();
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::no_convergence(format!(
                "Gauss–Laguerre weight {i} underflows (order {n}, exponent {nu})"
            )));
        }
        nodes.push(x);
        weights.push(w);
    }
    Ok((nodes, weights))
}

/// Values that an integrator can accumulate.
pub trait QuadValue: Clone + Send + Sync {
    fn scaled(&self, a: f64) -> Self;
    fn add_scaled(&mut self, a: f64, other: &Self);
    fn sub(&self, other: &Self) -> Self;
    /// Max-abs size used for tolerance tests.
    fn size(&self) -> f64;
    fn all_finite(&self) -> bool;
}

impl QuadValue for f64 {
    fn scaled(&self, a: f64) -> Self {
        self * a
    }
    fn add_scaled(&mut self, a: f64, other: &Self) {
        *self += a * other;
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn size(&self) -> f64 {
        self.abs()
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn scaled(&self, a: f64) -> Self {
        self * a
    }
    fn add_scaled(&mut self, a: f64, other: &Self) {
        *self += other * a;
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn size(&self) -> f64 {
        self.norm()
    }
    fn all_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl<T: QuadValue> QuadValue for Vec<T> {
    fn scaled(&self, a: f64) -> Self {
        self.iter().map(|v| v.scaled(a)).collect()
    }
    fn add_scaled(&mut self, a: f64, other: &Self) {
        for (s, o) in self.iter_mut().zip(other) {
            s.add_scaled(a, o);
        }
    }
    fn sub(&self, other: &Self) -> Self {
        self.iter().zip(other).map(|(a, b)| a.sub(b)).collect()
    }
    fn size(&self) -> f64 {
        self.iter().map(QuadValue::size).fold(0.0, f64::max)
    }
    fn all_finite(&self) -> bool {
        self.iter().all(QuadValue::all_finite)
    }
}

/// Integration domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Finite(f64, f64),
    /// [a, ∞) mapped by x = a + scale·t/(1−t).
    UpperInfinite {
        a: f64,
        scale: f64,
    },
}

impl Domain {
    pub fn half_line() -> Self {
        Domain::UpperInfinite { a: 0.0, scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Integrates `f` over `domain` with `rule`.
///
/// Weighted rules (Gauss–Laguerre) integrate f against their weight, shifted
/// to start at the domain's lower end; Gauss–Legendre maps [−1, 1] onto a
/// finite domain. Fixed rules report a zero error estimate and `converged`.
pub fn integrate<T, F>(f: F, domain: Domain, rule: &QuadratureRule) -> Result<Integral<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    match rule.kind {
        RuleKind::Adaptive {
            abs_tol,
            rel_tol,
            max_depth,
        } => adaptive(&f, domain, abs_tol, rel_tol, max_depth),
        RuleKind::GaussLegendre { .. } => {
            let Domain::Finite(a, b) = domain else {
                return Err(Error::invalid("Gauss–Legendre needs a finite domain"));
            };
            let h = 0.5 * (b - a);
            let c = 0.5 * (a + b);
            fixed_sum(
                &f,
                rule.nodes.iter().map(|t| c + h * t),
                rule.weights.iter().map(|w| w * h),
            )
        }
        RuleKind::GaussLaguerre { .. } => {
            let a = match domain {
                Domain::UpperInfinite { a, .. } => a,
                Domain::Finite(..) => {
                    return Err(Error::invalid(
                        "Gauss–Laguerre needs a half-infinite domain",
                    ))
                }
            };
            fixed_sum(
                &f,
                rule.nodes.iter().map(|x| a + x),
                rule.weights.iter().copied(),
            )
        }
    }
}

fn fixed_sum<T, F>(
    f: &F,
    xs: impl Iterator<Item = f64>,
    ws: impl Iterator<Item = f64>,
) -> Result<Integral<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let mut acc: Option<T> = None;
    let mut count = 0;
    for (x, w) in xs.zip(ws) {
        let v = f(x);
        if !v.all_finite() {
            return Err(Error::Evaluation(x));
        }
        match acc.as_mut() {
            Some(a) => a.add_scaled(w, &v),
            None => acc = Some(v.scaled(w)),
        }
        count += 1;
    }
    Ok(Integral {
        value: acc.expect("rule has nodes"),
        error: 0.0,
        converged: true,
        evaluations: count,
    })
}

/// Adaptive integration with the default tolerances.
pub fn integrate_adaptive<T, F>(f: F, domain: Domain) -> Result<Integral<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    adaptive(
        &f,
        domain,
        DEFAULT_ABS_TOL,
        DEFAULT_REL_TOL,
        DEFAULT_MAX_DEPTH,
    )
}

/// Adaptive integration with explicit tolerances.
pub fn integrate_adaptive_tol<T, F>(
    f: F,
    domain: Domain,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Integral<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    adaptive(&f, domain, abs_tol, rel_tol, DEFAULT_MAX_DEPTH)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Panel<T> {
    a: f64,
    b: f64,
    depth: u32,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error
            .total_cmp(&other.error)
            .then(other.a.total_cmp(&self.a))
    }
}

fn gk15<T, G>(g: &G, a: f64, b: f64) -> Result<(T, f64)>
where
    T: QuadValue,
    G: Fn(f64) -> Result<T>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut vals = Vec::with_capacity(15);
    vals.push(g(c)?);
    for x in &XGK[..7] {
        vals.push(g(c - h * x)?);
        vals.push(g(c + h * x)?);
    }
    let weight = |i: usize| if i == 0 { WGK[7] } else { WGK[(i - 1) / 2] };
    let mut kron = vals[0].scaled(WGK[7]);
    let mut gauss = vals[0].scaled(WG[3]);
    for (i, v) in vals.iter().enumerate().skip(1) {
        let j = (i - 1) / 2;
        kron.add_scaled(WGK[j], v);
        if j % 2 == 1 {
            gauss.add_scaled(WG[j / 2], v);
        }
    }
    // QUADPACK error estimate: |K − G| sharpened against the mean deviation
    let mean = kron.scaled(0.5);
    let resabs: f64 = vals
        .iter()
        .enumerate()
        .map(|(i, v)| weight(i) * v.size())
        .sum::<f64>()
        * h.abs();
    let resasc: f64 = vals
        .iter()
        .enumerate()
        .map(|(i, v)| weight(i) * v.sub(&mean).size())
        .sum::<f64>()
        * h.abs();
    let kron = kron.scaled(h);
    let gauss = gauss.scaled(h);
    let mut err = kron.sub(&gauss).size();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    err = err.max(50.0 * f64::EPSILON * resabs);
    Ok((kron, err))
}

fn adaptive<T, F>(
    f: &F,
    domain: Domain,
    abs_tol: f64,
    rel_tol: f64,
    max_depth: u32,
) -> Result<Integral<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let evals = std::cell::Cell::new(0usize);
    type Map<'a> = Box<dyn Fn(f64) -> (f64, f64) + 'a>;
    let (lo, hi, map): (f64, f64, Map) = match domain {
        Domain::Finite(a, b) => (a, b, Box::new(|t| (t, 1.0))),
        Domain::UpperInfinite { a, scale } => (
            0.0,
            1.0,
            Box::new(move |t: f64| {
                let s = 1.0 - t;
                (a + scale * t / s, scale / (s * s))
            }),
        ),
    };
    let g = |t: f64| -> Result<T> {
        evals.set(evals.get() + 1);
        let (x, jac) = map(t);
        let v = f(x);
        if !v.all_finite() {
            return Err(Error::Evaluation(x));
        }
        Ok(v.scaled(jac))
    };
    if lo == hi {
        let z = g(lo)?.scaled(0.0);
        return Ok(Integral {
            value: z,
            error: 0.0,
            converged: true,
            evaluations: evals.get(),
        });
    }
    let (v0, e0) = gk15(&g, lo, hi)?;
    let mut total = v0.clone();
    let mut total_err = e0;
    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        a: lo,
        b: hi,
        depth: 0,
        value: v0,
        error: e0,
    });
    let mut converged = false;
    const MAX_PANELS: usize = 20_000;
    loop {
        if total_err <= abs_tol.max(rel_tol * total.size()) {
            converged = true;
            break;
        }
        let Some(worst) = heap.pop() else { break };
        if worst.depth >= max_depth || heap.len() >= MAX_PANELS {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (vl, el) = gk15(&g, worst.a, mid)?;
        let (vr, er) = gk15(&g, mid, worst.b)?;
        total.add_scaled(-1.0, &worst.value);
        total.add_scaled(1.0, &vl);
        total.add_scaled(1.0, &vr);
        total_err += el + er - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            depth: worst.depth + 1,
            value: vl,
            error: el,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            depth: worst.depth + 1,
            value: vr,
            error: er,
        });
    }
    // resum in a fixed order so the result does not depend on heap history
    let mut panels: Vec<Panel<T>> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = panels[0].value.clone();
    let mut error = panels[0].error;
    for p in &panels[1..] {
        value.add_scaled(1.0, &p.value);
        error += p.error;
    }
    Ok(Integral {
        value,
        error,
        converged,
        evaluations: evals.get(),
    })
}

/// Composite Gauss–Legendre nodes on a sequence of panels.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PanelGrid {
    /// Panels with the given breakpoints, `order` points each.
    pub fn from_breaks(breaks: &[f64], order: usize) -> Self {
        let (t, w) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order * breaks.len());
        let mut weights = Vec::with_capacity(order * breaks.len());
        for pair in breaks.windows(2) {
            let h = 0.5 * (pair[1] - pair[0]);
            let c = 0.5 * (pair[1] + pair[0]);
            for (ti, wi) in t.iter().zip(&w) {
                nodes.push(c + h * ti);
                weights.push(h * wi);
            }
        }
        PanelGrid { nodes, weights }
    }

    /// Uniform panels on [a, b] no wider than `max_width`.
    pub fn uniform(a: f64, b: f64, max_width: f64, order: usize) -> Self {
        let count = (((b - a) / max_width).ceil() as usize).max(1);
        let breaks: Vec<f64> = (0..=count)
            .map(|i| a + (b - a) * i as f64 / count as f64)
            .collect();
        Self::from_breaks(&breaks, order)
    }

    /// Panels on [a, b] (a > 0) laid out in s = ln x: each panel width in s is
    /// at most `max_ds` and at most `phase_per_panel / (x·rate(x))` evaluated
    /// at its right end, so an integrand oscillating with local wavenumber
    /// `rate(x)` is resolved. Weights include the Jacobian dx = x ds.
    pub fn logarithmic(
        a: f64,
        b: f64,
        max_ds: f64,
        phase_per_panel: f64,
        rate: impl Fn(f64) -> f64,
        order: usize,
    ) -> Self {
        assert!(a > 0.0 && b > a, "logarithmic grid needs 0 < a < b");
        let (t, w) = gauss_legendre(order);
        let (sa, sb) = (a.ln(), b.ln());
        let mut breaks = vec![sa];
        let mut s = sa;
        while s < sb {
            // shrink the step until it satisfies the oscillation bound at its right end
            let mut ds = max_ds.min(sb - s);
            loop {
                let x = (s + ds).exp();
                let r = rate(x);
                let lim = if r > 0.0 {
                    phase_per_panel / (x * r)
                } else {
                    f64::INFINITY
                };
                if ds <= lim {
                    break;
                }
                ds = lim;
            }
            s = if sb - (s + ds) < 1e-12 * ds {
                sb
            } else {
                s + ds
            };
            breaks.push(s);
        }
        let mut nodes = Vec::with_capacity(order * breaks.len());
        let mut weights = Vec::with_capacity(order * breaks.len());
        for pair in breaks.windows(2) {
            let h = 0.5 * (pair[1] - pair[0]);
            let c = 0.5 * (pair[1] + pair[0]);
            for (ti, wi) in t.iter().zip(&w) {
                let x = (c + h * ti).exp();
                nodes.push(x);
                weights.push(h * wi * x);
            }
        }
        PanelGrid { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sum(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, w)| w * f(x))
            .sum()
    }
}
