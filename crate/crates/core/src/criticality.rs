//! Critical exponent of `Δu − ∂ₜ²u + |u|^p = 0` and the parameters derived
//! from it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Γ(k/2) for a positive integer `k`, from Γ(1/2) = √π, Γ(1) = 1 and
/// Γ(x + 1) = xΓ(x).
pub fn gamma_half(k: usize) -> f64 {
    assert!(k > 0, "gamma_half needs a positive argument");
    let (mut x, mut g) = if k % 2 == 0 { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    let target = k as f64 / 2.0;
    while x < target - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Volume of the unit ball in `n` dimensions.
pub fn unit_ball_volume(n: usize) -> f64 {
    PI.powf(n as f64 / 2.0) / gamma_half(n + 2)
}

/// Surface area of the unit sphere S^{n−1} ⊂ ℝⁿ. `sphere_area(1) = 2`.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

fn check_dimension(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    Ok(())
}

/// Positive root of (n−1)p² − (n+1)p − 2 = 0.
pub fn critical_exponent(n: usize) -> Result<f64> {
    check_dimension(n)?;
    let lead = (n - 1) as f64;
    let b = (n + 1) as f64;
    // Both terms of the numerator are positive, so no cancellation.
    Ok((b + (b * b + 8.0 * lead).sqrt()) / (2.0 * lead))
}

/// Every exponent-derived constant used by the blow-up argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    pub n: usize,
    pub p: f64,
    pub p_c: f64,
    /// Growth exponent n + 1 − (n − 1)p/2.
    pub a: f64,
    /// Weight exponent n(p − 1).
    pub q: f64,
    /// Hölder constant (vol Bⁿ)^{1−p}.
    #[serde(rename = "K1")]
    pub k1: f64,
    pub p_prime: f64,
}

impl ExponentSet {
    /// Exponent of (t − R) in the polynomial lower bound for ∫|u|^p dx.
    pub fn lp_growth_exponent(&self) -> f64 {
        let nm1 = (self.n - 1) as f64;
        nm1 - nm1 * self.p / 2.0
    }

    /// Exponent of (t − ρ − R) in the Radon-transform lower bound.
    pub fn radon_growth_exponent(&self) -> f64 {
        self.n as f64 - (self.n - 1) as f64 * self.p / 2.0
    }

    /// The weight exponent (n−1)p/2 − np + (n−1)p²/2, equal to 1 at p_c.
    pub fn log_weight_exponent(&self) -> f64 {
        let nm1 = (self.n - 1) as f64;
        let p = self.p;
        nm1 * p / 2.0 - self.n as f64 * p + nm1 * p * p / 2.0
    }

    pub fn is_critical(&self) -> bool {
        (self.p - self.p_c).abs() <= 1e-12 * self.p_c
    }
}

pub fn exponent_set(n: usize, p: f64) -> Result<ExponentSet> {
    check_dimension(n)?;
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(p));
    }
    let nf = n as f64;
    Ok(ExponentSet {
        n,
        p,
        p_c: critical_exponent(n)?,
        a: nf + 1.0 - (nf - 1.0) * p / 2.0,
        q: nf * (p - 1.0),
        k1: unit_ball_volume(n).powf(1.0 - p),
        p_prime: p / (p - 1.0),
    })
}

/// Residuals of the identities that hold exactly at p = p_c(n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalResiduals {
    /// |(n−1)p_c² − (n+1)p_c − 2|, relative to the largest term.
    pub quadratic: f64,
    /// |(p_c − 1)a − (q − 2)|.
    pub exponent_relation: f64,
    /// |(n−1)p_c/2 − n·p_c + (n−1)p_c²/2 − 1|.
    pub log_weight: f64,
}

impl CriticalResiduals {
    pub fn max(&self) -> f64 {
        self.quadratic.max(self.exponent_relation).max(self.log_weight)
    }

    pub fn named(&self) -> [(&'static str, f64); 3] {
        [
            ("quadratic", self.quadratic),
            ("exponent_relation", self.exponent_relation),
            ("log_weight", self.log_weight),
        ]
    }
}

pub fn verify_critical_identities(n: usize) -> Result<CriticalResiduals> {
    let set = exponent_set(n, critical_exponent(n)?)?;
    let nm1 = (n - 1) as f64;
    let p = set.p;
    let scale = (nm1 * p * p).max(1.0);
    Ok(CriticalResiduals {
        quadratic: (nm1 * p * p - (n + 1) as f64 * p - 2.0).abs() / scale,
        exponent_relation: ((p - 1.0) * set.a - (set.q - 2.0)).abs(),
        log_weight: (set.log_weight_exponent() - 1.0).abs(),
    })
}
