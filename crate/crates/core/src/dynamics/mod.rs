//! Semiclassical label dynamics generated by H_sc = p² + ξ²/q².
//!
//! The flow is integrated in closed form:
//! q_t² = q₀² + 4q₀p₀t + 4H t² and p_t = (q₀p₀ + 2Ht)/q_t, since q_t p_t grows
//! linearly at rate 2H. Every trajectory bounces at q_min = ξ/√H.

use crate::coherent::CSParams;
use crate::error::{Error, Result};
use crate::fiducial::xi_star;
use serde::Serialize;

/// A point (q, p) of the half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(q: f64, p: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) || !p.is_finite() {
            return Err(Error::invalid(format!(
                "phase point needs q > 0 and finite p (got ({q}, {p}))"
            )));
        }
        Ok(PhasePoint { q, p })
    }
}

/// The label flow for one (ν, n), i.e. one value of ξ = ξ_{ν,n}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Semiclassical {
    pub nu: f64,
    pub n: usize,
    pub xi: f64,
}

impl Semiclassical {
    pub fn new(nu: f64, n: usize) -> Result<Self> {
        Ok(Semiclassical {
            nu,
            n,
            xi: xi_star(nu, n)?,
        })
    }

    /// H_sc = p² + ξ²/q².
    pub fn h_sc(&self, x: PhasePoint) -> f64 {
        x.p * x.p + self.xi * self.xi / (x.q * x.q)
    }

    /// The flowed point at time t (any sign).
    pub fn flow(&self, x: PhasePoint, t: f64) -> PhasePoint {
        let h = self.h_sc(x);
        let m = x.q * x.p + 2.0 * h * t;
        // q_t² = (ξ² + m²)/H is the same quadratic, written without cancellation
        let q = ((self.xi * self.xi + m * m) / h).sqrt();
        PhasePoint { q, p: m / q }
    }

    /// q_t p_t = q₀p₀ + 2Ht.
    pub fn dilation(&self, x: PhasePoint, t: f64) -> f64 {
        x.q * x.p + 2.0 * self.h_sc(x) * t
    }

    /// φ(t) = (ω̃/2ξ) arctan(q_t p_t/ξ) with ω̃/2ξ = 2n+ν+1.
    pub fn phase(&self, x: PhasePoint, t: f64) -> f64 {
        self.omega_ratio() * (self.dilation(x, t) / self.xi).atan()
    }

    /// ω̃_{ν,n}/(2ξ_{ν,n}) = 2n+ν+1.
    pub fn omega_ratio(&self) -> f64 {
        2.0 * self.n as f64 + self.nu + 1.0
    }

    /// ω̃_{ν,n}.
    pub fn omega_tilde(&self) -> f64 {
        2.0 * self.xi * self.omega_ratio()
    }

    /// Turning point ξ/√H.
    pub fn q_min(&self, x: PhasePoint) -> f64 {
        self.xi / self.h_sc(x).sqrt()
    }

    /// Time at which p_t = 0.
    pub fn bounce_time(&self, x: PhasePoint) -> f64 {
        -x.q * x.p / (2.0 * self.h_sc(x))
    }

    /// The trajectory sampled at the given times.
    pub fn trajectory(&self, x: PhasePoint, times: &[f64]) -> Trajectory {
        let points = times
            .iter()
            .map(|&t| {
                let y = self.flow(x, t);
                TrajectoryPoint {
                    t,
                    q: y.q,
                    p: y.p,
                    phi: self.phase(x, t),
                }
            })
            .collect();
        Trajectory {
            h_sc: self.h_sc(x),
            q_min: self.q_min(x),
            bounce_time: self.bounce_time(x),
            points,
        }
    }

    /// `count` uniform samples of [t0, t1], with the bounce inserted when it
    /// falls inside the interval.
    pub fn polyline(&self, x: PhasePoint, t0: f64, t1: f64, count: usize) -> Result<Trajectory> {
        if count < 2 || !(t1 > t0) {
            return Err(Error::invalid(
                "polyline needs t1 > t0 and at least two samples",
            ));
        }
        let mut times: Vec<f64> = (0..count)
            .map(|i| t0 + (t1 - t0) * i as f64 / (count - 1) as f64)
            .collect();
        let tb = self.bounce_time(x);
        if tb > t0 && tb < t1 && !times.contains(&tb) {
            let at = times.partition_point(|&t| t < tb);
            times.insert(at, tb);
        }
        Ok(self.trajectory(x, &times))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub q: f64,
    pub p: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub h_sc: f64,
    pub q_min: f64,
    pub bounce_time: f64,
    pub points: Vec<TrajectoryPoint>,
}

/// H_sc^{(ν,n)}(q, p).
pub fn h_sc(x: PhasePoint, nu: f64, n: usize) -> Result<f64> {
    Ok(Semiclassical::new(nu, n)?.h_sc(x))
}

pub fn flow(x: PhasePoint, t: f64, nu: f64, n: usize) -> Result<PhasePoint> {
    Ok(Semiclassical::new(nu, n)?.flow(x, t))
}

pub fn phase(x: PhasePoint, t: f64, nu: f64, n: usize) -> Result<f64> {
    Ok(Semiclassical::new(nu, n)?.phase(x, t))
}

/// The labels of e^{−iĤ_ν t}|q,p;ν,n⟩.
pub fn evolve_cs(cs: &CSParams, t: f64) -> Result<CSParams> {
    let sc = Semiclassical {
        nu: cs.nu(),
        n: cs.n(),
        xi: cs.xi(),
    };
    let y = sc.flow(
        PhasePoint {
            q: cs.q(),
            p: cs.p(),
        },
        t,
    );
    cs.at(y.q, y.p)
}
