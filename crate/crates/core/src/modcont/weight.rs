//! The loss-of-decay weight `ℓ(t)` and its auxiliary monotonicity properties.

use super::checks::check_star;
use super::{CriticalPair, Modulus};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Both single-modulus integrals converge; no loss beyond `(1+t)^σ`.
    BothConverge,
    Mixed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EllConfig {
    pub mu1: Modulus,
    pub mu2: Modulus,
    pub q_c: f64,
    pub eps: f64,
    pub c: f64,
    pub regime: Regime,
}

impl EllConfig {
    pub fn mixed(mu1: Modulus, mu2: Modulus, q_c: f64, eps: f64, c: f64) -> Self {
        Self {
            mu1,
            mu2,
            q_c,
            eps,
            c,
            regime: Regime::Mixed,
        }
    }
}

/// `ℓ(t) = (μ₁(c(1+t)^{-ε}) / μ₂(c(1+t)^{-ε}))^{1/(q_c+1)}`, or 1 when both integrals converge.
pub fn loss_weight(cfg: &EllConfig, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    if cfg.regime == Regime::BothConverge {
        return Ok(1.0);
    }
    if !(cfg.c > 0.0 && cfg.eps > 0.0 && cfg.q_c > 1.0) {
        return Err(Error::Parameter(format!(
            "need c > 0, eps > 0, q_c > 1 (got c = {}, eps = {}, q_c = {})",
            cfg.c, cfg.eps, cfg.q_c
        )));
    }
    // work at τ = log(1/(c(1+t)^{-ε})) so that huge t stays representable
    let tau = (1.0 / cfg.c).ln() + cfg.eps * t.ln_1p();
    let ln1 = cfg.mu1.ln_eval_tau(tau)?;
    let ln2 = cfg.mu2.ln_eval_tau(tau)?;
    Ok(((ln1 - ln2) / (cfg.q_c + 1.0)).exp())
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightReport {
    /// `(1+t)^σ ℓ(t)` is nondecreasing on the grid.
    pub loss_nondecreasing: bool,
    /// `(1+t)^{-(1+p)/(pq-1)+ε} ℓ(t)` never exceeds its value at the first grid time.
    pub decay_bounded: bool,
    /// `sup (1+t)^{-(1+p)/(pq-1)+ε} ℓ(t)` over the grid, the implied constant.
    pub decay_constant: f64,
    /// Upper bound on ε from the `sμ₁' ≲ μ₁` constant.
    pub eps_limit: f64,
    pub precondition_ok: bool,
    pub pass: bool,
}

/// Checks the two auxiliary weight properties on `t_grid`.
///
/// The second property is read up to a constant: the weighted quantity must be
/// bounded by its value at the first grid time.
pub fn weight_monotonicity_check(cfg: &EllConfig, pair: &CriticalPair, t_grid: &[f64]) -> Result<WeightReport> {
    if t_grid.is_empty() {
        return Err(Error::Parameter("empty time grid".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("time grid must be increasing".into()));
    }
    let star_grid: Vec<f64> = (0..60)
        .map(|i| cfg.mu1.s_max() * 10f64.powf(-(i as f64) * 0.25))
        .collect();
    let c_star = check_star(&cfg.mu1, &star_grid)?.sup_ratio;
    let (p, q) = (pair.p_c, pair.q_c);
    let eps_limit = (q - p) * (q + 1.0) / (c_star * (p * q - 1.0));
    let precondition_ok = cfg.regime == Regime::BothConverge || cfg.eps < eps_limit;

    let decay = (1.0 + p) / (p * q - 1.0);
    let mut loss = Vec::with_capacity(t_grid.len());
    let mut bounded = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let ln_ell = loss_weight(cfg, t)?.ln();
        let lt = t.ln_1p();
        loss.push(pair.sigma * lt + ln_ell);
        bounded.push((-decay + cfg.eps) * lt + ln_ell);
    }
    let slack = 1e-12;
    let loss_nondecreasing = loss.windows(2).all(|w| w[1] >= w[0] - slack);
    let first = bounded[0];
    let sup = bounded.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let decay_bounded = sup <= first + slack;
    Ok(WeightReport {
        loss_nondecreasing,
        decay_bounded,
        decay_constant: sup.exp(),
        eps_limit,
        precondition_ok,
        pass: loss_nondecreasing && decay_bounded,
    })
}
