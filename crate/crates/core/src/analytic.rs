//! Closed-form transition probabilities used as oracles.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Class parameters `α = Ω₀τ/2`, `β = Δ₀τ/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassParameters {
    pub alpha: f64,
    pub beta: f64,
}

impl ClassParameters {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !beta.is_finite() || !alpha.is_finite() {
            return Err(Error::Contract(format!(
                "need alpha >= 0 and finite beta, got ({alpha}, {beta})"
            )));
        }
        Ok(ClassParameters { alpha, beta })
    }

    /// From physical amplitudes in rad per unit time.
    pub fn from_physical(omega0: f64, delta0: f64, tau: f64) -> Result<Self> {
        ClassParameters::new(0.5 * omega0 * tau, 0.5 * delta0 * tau)
    }
}

/// Infinite-duration Landau-Zener probability `1 − exp(−π α²/|β|)`.
pub fn lmsz_asymptotic(alpha: f64, beta: f64) -> Result<f64> {
    if beta == 0.0 {
        return Err(Error::Domain {
            x: 0.0,
            reason: "beta = 0 has no level crossing; use the resonant formula sin²(πα)".into(),
        });
    }
    Ok(-(-PI * alpha * alpha / beta.abs()).exp_m1())
}

/// Allen-Eberly-Hioe probability `1 − cos²(π√(α²−β²)) / cosh²(πβ)`, continued
/// through `cos(i y) = cosh(y)` when `β² > α²`.
pub fn aeh_exact(alpha: f64, beta: f64) -> f64 {
    let b = beta.abs();
    let d = alpha * alpha - b * b;
    let ratio = if d >= 0.0 {
        (PI * d.sqrt()).cos() / (PI * b).cosh()
    } else {
        // cosh(πr)/cosh(πb) with r < b, written to avoid overflow.
        let r = (-d).sqrt();
        (PI * (r - b)).exp() * (1.0 + (-2.0 * PI * r).exp()) / (1.0 + (-2.0 * PI * b).exp())
    };
    (1.0 - ratio * ratio).clamp(0.0, 1.0)
}

/// Resonant Rabi probability `sin²(πα)`, evaluated as `1 − cos²(πα)` so that it
/// agrees with [`aeh_exact`] at `β = 0` bit for bit.
pub fn rabi_resonant(alpha: f64) -> f64 {
    let c = (PI * alpha).cos();
    (1.0 - c * c).clamp(0.0, 1.0)
}
