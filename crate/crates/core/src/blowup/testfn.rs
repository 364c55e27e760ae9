use crate::error::{Error, Result};
use crate::modcont::CriticalPair;
use serde::Serialize;

/// Smooth cutoff: 1 on `[0, 1/2]`, 0 on `[1, ∞)`, built from `h(x) = e^{-1/x}`.
pub fn phi_profile(rho: f64) -> f64 {
    if rho <= 0.5 {
        1.0
    } else if rho >= 1.0 {
        0.0
    } else {
        // h(1-ρ) / (h(1-ρ) + h(ρ-1/2)) = 1 / (1 + e^{1/(1-ρ) - 1/(ρ-1/2)})
        let e = 1.0 / (1.0 - rho) - 1.0 / (rho - 0.5);
        if e > 700.0 {
            0.0
        } else {
            1.0 / (1.0 + e.exp())
        }
    }
}

/// The starred profile, zero on the plateau `ρ < 1/2`.
pub fn phi_star(rho: f64) -> f64 {
    if rho < 0.5 {
        0.0
    } else {
        phi_profile(rho)
    }
}

/// `ρ = (t² + |x|⁴)/R⁴`.
pub fn rho(t: f64, x_abs: f64, r: f64) -> f64 {
    let x2 = x_abs * x_abs;
    (t * t + x2 * x2) / r.powi(4)
}

/// `φ(ρ)^{ν+2}` (or the starred version) at `(t, |x|)`.
pub fn phi_r(t: f64, x_abs: f64, r: f64, nu: f64, starred: bool) -> f64 {
    let p = rho(t, x_abs, r);
    let base = if starred { phi_star(p) } else { phi_profile(p) };
    if base == 0.0 {
        0.0
    } else {
        base.powf(nu + 2.0)
    }
}

/// Exponent `ν` of the rescaled cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestFunction {
    pub nu: f64,
}

impl TestFunction {
    /// Smallest admissible `ν = max(2/(p_c−1), 2/(q_c−1))`.
    pub fn for_pair(pair: &CriticalPair) -> Self {
        Self {
            nu: pair.min_test_exponent(),
        }
    }

    pub fn with_nu(pair: &CriticalPair, nu: f64) -> Result<Self> {
        let min = pair.min_test_exponent();
        if !(nu > 0.0) || nu < min * (1.0 - 1e-12) {
            return Err(Error::Parameter(format!("ν = {nu} below the admissible minimum {min}")));
        }
        Ok(Self { nu })
    }
}
