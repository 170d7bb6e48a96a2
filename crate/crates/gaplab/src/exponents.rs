//! Closed-form exponent algebra.
//!
//! The decay exponent of the k-th spherical-harmonic mode is the positive
//! root of
//!
//! ```text
//! c² + (d + m − 3) c − k(k + d − 3) = 0,
//! ```
//!
//! written `α_k(d, m)`; the first mode `α := α_1` controls the gradient
//! blow-up rate `(α − 1)/m` and the companion exponent `β = α/m`.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExponentError {
    #[error("dimension d must be at least 3, got {0}")]
    DimensionTooSmall(u32),
    #[error("convexity order m must be at least 2 and finite, got {0}")]
    InvalidOrder(f64),
    #[error("mode index k must be at least 1, got {0}")]
    InvalidMode(u32),
    #[error("operation requires the first mode (k = 1), got k = {0}")]
    FirstModeOnly(u32),
}

/// Validated parameter triple (d, m, k).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentParams {
    d: u32,
    m: f64,
    k: u32,
}

impl ExponentParams {
    /// First-mode parameters (k = 1).
    pub fn new(d: u32, m: f64) -> Result<Self, ExponentError> {
        Self::with_mode(d, m, 1)
    }

    pub fn with_mode(d: u32, m: f64, k: u32) -> Result<Self, ExponentError> {
        if d < 3 {
            return Err(ExponentError::DimensionTooSmall(d));
        }
        if !(m >= 2.0) || !m.is_finite() {
            return Err(ExponentError::InvalidOrder(m));
        }
        if k < 1 {
            return Err(ExponentError::InvalidMode(k));
        }
        Ok(Self { d, m, k })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn k(&self) -> u32 {
        self.k
    }
}

/// First-mode exponents derived from (d, m).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExponentResult {
    /// Positive root α ∈ (0, 1) of c² + (d+m−3)c − (d−2) = 0.
    pub alpha: f64,
    /// Gradient rate exponent (α − 1)/m ∈ (−1/m, 0).
    pub rate: f64,
    /// β = α/m ∈ (0, 1/m); the rate equals −1/m + β.
    pub beta: f64,
}

/// Positive root of c² + b c − q = 0 in the cancellation-free form
/// 2q / (b + √(b² + 4q)); b = d+m−3 dominates the discriminant for large
/// d + m, so the naive (−b + √·)/2 form loses digits there.
fn positive_root(b: f64, q: f64) -> f64 {
    2.0 * q / (b + (b * b + 4.0 * q).sqrt())
}

/// First-mode exponent α(d, m).
pub fn alpha(p: ExponentParams) -> Result<f64, ExponentError> {
    if p.k != 1 {
        return Err(ExponentError::FirstModeOnly(p.k));
    }
    Ok(alpha_k(p))
}

/// Mode-k exponent α_k(d, m): positive root of c² + (d+m−3)c − k(k+d−3) = 0.
pub fn alpha_k(p: ExponentParams) -> f64 {
    let b = p.d as f64 + p.m - 3.0;
    let k = p.k as f64;
    let q = k * (k + p.d as f64 - 3.0);
    positive_root(b, q)
}

/// Relative residual of the defining quadratic at `c`.
pub fn quadratic_residual(p: ExponentParams, c: f64) -> f64 {
    let b = p.d as f64 + p.m - 3.0;
    let k = p.k as f64;
    let q = k * (k + p.d as f64 - 3.0);
    let res = c * c + b * c - q;
    res.abs() / q.max(b * c).max(c * c)
}

/// Blow-up rate bundle for the first mode.
pub fn blowup_rate(p: ExponentParams) -> Result<ExponentResult, ExponentError> {
    let a = alpha(p)?;
    let m = p.m;
    let beta = a / m;
    let rate = (a - 1.0) / m;
    debug_assert!((rate - (-1.0 / m + beta)).abs() <= 1e-15);
    Ok(ExponentResult {
        alpha: a,
        rate,
        beta,
    })
}

/// Remainders of the large-d and large-m expansions of α, scaled by the
/// square of the expansion variable.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoticDiagnostics {
    /// |α − (1 − m/d)| · d²
    pub large_d_remainder: f64,
    /// |α − (d−2)/m| · m²
    pub large_m_remainder: f64,
}

/// α(d, m) behaves like 1 − m/d for large d and like (d−2)/m for large m;
/// both scaled remainders stay bounded.
pub fn asymptotic_check(p: ExponentParams) -> Result<AsymptoticDiagnostics, ExponentError> {
    let a = alpha(p)?;
    let d = p.d as f64;
    let m = p.m;
    Ok(AsymptoticDiagnostics {
        large_d_remainder: (a - (1.0 - m / d)).abs() * d * d,
        large_m_remainder: (a - (d - 2.0) / m).abs() * m * m,
    })
}
