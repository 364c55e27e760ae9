//! Dini-type integrals `∫ s⁻¹ μ₁(s)^{β₁} μ₂(s)^{β₂} ds` and the
//! convergence classifier for the middle modulus.
//!
//! Integrals are evaluated in the variable `z = L_k(s)`, the `k`-th iterated
//! logarithm of `1/s`, chosen so that the integrand becomes a plain power of `z`
//! up to slowly varying factors.

use super::Modulus;
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_to_infinity, Estimate, QuadOptions};
use serde::{Deserialize, Serialize};

/// Exponents closer than this to 1 are treated as exactly 1.
pub const EXPONENT_TOL: f64 = 1e-12;
/// Exponents within this distance of 1 (but beyond [`EXPONENT_TOL`]) get no analytic verdict.
pub const AMBIGUITY_BAND: f64 = 1e-9;

const DOUBLINGS: usize = 400;
const DIVERGENT_RATIO: f64 = 0.98;
const TRAILING_RATIOS: usize = 4;

/// Raw normal-form exponents; unlike [`Modulus`] these may describe a non-modulus.
#[derive(Debug, Clone, PartialEq)]
struct Exponents {
    power: f64,
    logs: Vec<f64>,
}

impl Exponents {
    fn weighted(mu1: &Modulus, b1: f64, mu2: &Modulus, b2: f64) -> Self {
        let depth = mu1.log_depth().max(mu2.log_depth());
        let mut logs = vec![0.0; depth];
        for (l, &b) in logs.iter_mut().zip(mu1.log_exponents()) {
            *l += b1 * b;
        }
        for (l, &b) in logs.iter_mut().zip(mu2.log_exponents()) {
            *l += b2 * b;
        }
        for l in logs.iter_mut() {
            if (*l - 1.0).abs() <= EXPONENT_TOL {
                *l = 1.0;
            } else if l.abs() <= EXPONENT_TOL {
                *l = 0.0;
            }
        }
        while logs.last() == Some(&0.0) {
            logs.pop();
        }
        let mut power = b1 * mu1.power_exponent() + b2 * mu2.power_exponent();
        if power.abs() <= EXPONENT_TOL {
            power = 0.0;
        }
        Self { power, logs }
    }

    fn depth(&self) -> usize {
        self.logs.len()
    }

    fn b(&self, j: usize) -> f64 {
        self.logs.get(j - 1).copied().unwrap_or(0.0)
    }

    /// Natural integration level: 1 with a power factor, else the deepest log.
    fn integration_level(&self) -> usize {
        if self.power > 0.0 || self.depth() == 0 {
            1
        } else {
            self.depth()
        }
    }

    /// Level of the first log exponent that differs from 1 (1 with a power factor).
    fn decisive_level(&self) -> usize {
        if self.power > 0.0 || self.depth() == 0 {
            return 1;
        }
        (1..=self.depth()).find(|&j| self.b(j) != 1.0).unwrap_or(self.depth())
    }

    /// Smallest `τ` at which every iterated log is ≥ 1.
    fn tau_floor(&self) -> f64 {
        if self.depth() <= 1 {
            0.0
        } else {
            (0..self.depth() - 1).fold(1.0_f64, |t, _| t.exp())
        }
    }

    /// Integrand of `∫ μ dτ` after the change of variable `z = L_k(τ)`, in log form.
    fn ln_integrand(&self, level: usize, z: f64) -> f64 {
        let m = self.depth().max(level);
        // l[j-1] = L_j
        let mut l = vec![0.0; m];
        l[level - 1] = z;
        for j in (1..level).rev() {
            l[j - 1] = l[j].exp();
        }
        for j in level + 1..=m {
            l[j - 1] = l[j - 2].ln();
        }
        let mut acc = 0.0;
        if self.power != 0.0 {
            acc -= self.power * l[0];
        }
        for j in 1..=m {
            let coef = if j < level { 1.0 - self.b(j) } else { -self.b(j) };
            if coef == 0.0 {
                continue;
            }
            let ln_lj = if j < m && j < level { l[j] } else { l[j - 1].ln() };
            acc += coef * ln_lj;
        }
        acc
    }

    fn integrand(&self, level: usize, z: f64) -> f64 {
        let v = self.ln_integrand(level, z).exp();
        if v.is_nan() {
            0.0
        } else {
            v
        }
    }
}

/// `L_k(τ)` with `L₁ = τ`.
fn iterated_log(tau: f64, level: usize) -> f64 {
    (1..level).fold(tau, |l, _| l.ln())
}

/// `∫_eps^c s⁻¹ μ₁(s)^{β₁} μ₂(s)^{β₂} ds`; `eps = 0` evaluates the improper integral.
///
/// Factors with zero exponent are ignored, including their domain.
pub fn dini_integral(mu1: &Modulus, mu2: &Modulus, beta1: f64, beta2: f64, c: f64, eps: f64) -> Result<Estimate> {
    if !(beta1 >= 0.0 && beta2 >= 0.0 && beta1.is_finite() && beta2.is_finite()) {
        return Err(Error::Parameter(format!(
            "exponents must be nonnegative: {beta1}, {beta2}"
        )));
    }
    if !(c > 0.0 && eps >= 0.0 && eps < c) {
        return Err(Error::Domain(format!("need 0 ≤ eps < c, got eps = {eps}, c = {c}")));
    }
    for (mu, beta) in [(mu1, beta1), (mu2, beta2)] {
        if beta > 0.0 && c > mu.s_max() * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("c = {c} exceeds s_max = {} of {mu}", mu.s_max())));
        }
    }
    let ex = Exponents::weighted(mu1, beta1, mu2, beta2);
    let level = ex.integration_level();
    let tau_c = (1.0 / c).ln();
    let z_lo = iterated_log(tau_c, level);
    let opts = QuadOptions {
        abs_tol: 1e-9,
        rel_tol: 0.0,
        max_evals: 1_000_000,
    };
    let f = |z: f64| ex.integrand(level, z);
    if eps == 0.0 {
        integrate_to_infinity(f, z_lo, opts)
    } else {
        let z_hi = iterated_log((1.0 / eps).ln(), level);
        integrate(f, z_lo, z_hi, opts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiniStatus {
    Converges,
    Diverges,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiniVerdict {
    pub status: DiniStatus,
    pub rule: String,
    /// Truncated integral at the smallest lower limit reached by the evidence run.
    pub estimate: Option<f64>,
    /// Partial integrals over lower limits shrinking by doubling `L_level(1/s)`.
    pub evidence: Vec<f64>,
    pub level: usize,
    /// Last ratio of successive increments; tends to `2^{1-b}` for exponent `b`.
    pub increment_ratio: Option<f64>,
    pub evidence_divergent: bool,
    /// Whether the numeric evidence agrees with an analytic verdict.
    pub consistent: bool,
}

struct Evidence {
    partials: Vec<f64>,
    last_ratio: Option<f64>,
    divergent: bool,
}

fn doubling_evidence(ex: &Exponents, tau_c: f64) -> Evidence {
    let level = ex.decisive_level();
    let tau0 = tau_c.max(ex.tau_floor());
    let z0 = iterated_log(tau0, level).max(1.0);
    let opts = QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-10,
        max_evals: 100_000,
    };
    let mut partials = Vec::with_capacity(DOUBLINGS);
    let mut ratios: Vec<f64> = Vec::new();
    let mut total = 0.0;
    let mut prev_inc: Option<f64> = None;
    let mut overflow = false;
    let mut z = z0;
    for _ in 0..DOUBLINGS {
        let inc = match integrate(|x| ex.integrand(level, x), z, 2.0 * z, opts) {
            Ok(e) => e.value,
            Err(_) => {
                // a failing panel only counts as blow-up while increments are not shrinking
                overflow = ratios.last().is_none_or(|&r| r >= DIVERGENT_RATIO);
                break;
            }
        };
        z *= 2.0;
        total += inc;
        if !total.is_finite() || total > 1e300 {
            overflow = true;
            break;
        }
        partials.push(total);
        if let Some(p) = prev_inc {
            ratios.push(if p > 0.0 { inc / p } else { 0.0 });
        }
        prev_inc = Some(inc);
    }
    let tail = &ratios[ratios.len().saturating_sub(TRAILING_RATIOS)..];
    let divergent = overflow || (tail.len() == TRAILING_RATIOS && tail.iter().all(|&r| r >= DIVERGENT_RATIO));
    Evidence {
        partials,
        last_ratio: ratios.last().copied(),
        divergent,
    }
}

/// Classifies finiteness of `∫₀^c s⁻¹ μ₁^{q/(q+1)} μ₂^{1/(q+1)} ds`.
///
/// The analytic rule runs on the exponents of the middle modulus: any power factor
/// converges; otherwise the first iterated-log exponent different from 1 decides
/// (`> 1` converges, `< 1` diverges), and a chain of ones diverges.
pub fn classify_dini(mu1: &Modulus, mu2: &Modulus, q_c: f64, c: f64) -> DiniVerdict {
    let w1 = q_c / (q_c + 1.0);
    let w2 = 1.0 / (q_c + 1.0);
    let ex = Exponents::weighted(mu1, w1, mu2, w2);
    let c = c.min(mu1.s_max()).min(mu2.s_max());
    let ev = doubling_evidence(&ex, (1.0 / c).ln());

    let (status, rule) = if !(q_c > 1.0) || !c.is_finite() || c <= 0.0 {
        (DiniStatus::Unknown, format!("invalid parameters q_c = {q_c}, c = {c}"))
    } else if ex.power > 0.0 {
        (
            DiniStatus::Converges,
            format!("power factor s^{} with positive exponent", ex.power),
        )
    } else {
        match (1..=ex.depth()).find(|&j| ex.b(j) != 1.0) {
            None => (
                DiniStatus::Diverges,
                format!("weighted log exponents all equal 1 (depth {})", ex.depth()),
            ),
            Some(j) => {
                let b = ex.b(j);
                if (b - 1.0).abs() <= AMBIGUITY_BAND {
                    (
                        DiniStatus::Unknown,
                        format!("weighted exponent {b} at log level {j} is within {AMBIGUITY_BAND:e} of 1"),
                    )
                } else if b > 1.0 {
                    (
                        DiniStatus::Converges,
                        format!("weighted exponent {b} > 1 at log level {j}"),
                    )
                } else {
                    (
                        DiniStatus::Diverges,
                        format!("weighted exponent {b} < 1 at log level {j}"),
                    )
                }
            }
        }
    };
    let consistent = match status {
        DiniStatus::Converges => !ev.divergent,
        DiniStatus::Diverges => ev.divergent,
        DiniStatus::Unknown => true,
    };
    DiniVerdict {
        status,
        rule,
        estimate: ev.partials.last().copied(),
        evidence: ev.partials,
        level: ex.decisive_level(),
        increment_ratio: ev.last_ratio,
        evidence_divergent: ev.divergent,
        consistent,
    }
}

/// `μ₁^{q/(q+1)} μ₂^{1/(q+1)}` as a modulus.
pub fn middle_modulus(mu1: &Modulus, mu2: &Modulus, q_c: f64) -> Result<Modulus> {
    if !(q_c > 0.0) {
        return Err(Error::Parameter(format!("q_c must be positive, got {q_c}")));
    }
    if mu1 == mu2 {
        return Ok(mu1.clone());
    }
    Modulus::weighted_product(mu1, q_c / (q_c + 1.0), mu2, 1.0 / (q_c + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(lit: &str) -> Modulus {
        lit.parse().unwrap()
    }

    #[test]
    fn closed_forms() {
        let lp2 = m("logpow:2");
        let e = dini_integral(&lp2, &lp2, 1.0, 0.0, 0.1, 0.0).unwrap();
        assert_relative_eq!(e.value, 1.0 / 10f64.ln(), epsilon = 1e-8);
        let e = dini_integral(&lp2, &lp2, 0.0, 0.0, 0.1, 0.01).unwrap();
        assert_relative_eq!(e.value, 10f64.ln(), epsilon = 1e-8);
    }

    #[test]
    fn log_log_growth() {
        let lp1 = m("logpow:1");
        let q = 3.0;
        for eps in [1e-5f64, 1e-50, 1e-300] {
            let e = dini_integral(&lp1, &lp1, q / (q + 1.0), 1.0 / (q + 1.0), 0.1, eps).unwrap();
            let exact = (1.0 / eps).ln().ln() - 10f64.ln().ln();
            assert_relative_eq!(e.value, exact, epsilon = 1e-8);
        }
        assert!(dini_integral(&lp1, &lp1, 1.0, 0.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn iterated_improper() {
        // ∫ dτ / (τ (log τ)²) from e to ∞ = 1
        let it = m("iterlog:2:2");
        let e = dini_integral(&it, &it, 1.0, 0.0, it.s_max(), 0.0).unwrap();
        assert_relative_eq!(e.value, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn precondition_errors() {
        let lp = m("logpow:2");
        assert!(matches!(
            dini_integral(&lp, &lp, 1.0, 0.0, 0.5, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(dini_integral(&lp, &lp, 1.0, 0.0, 0.05, 0.06).is_err());
        assert!(dini_integral(&lp, &lp, -1.0, 0.0, 0.05, 0.0).is_err());
    }

    #[test]
    fn classifier_examples() {
        let v = classify_dini(&m("pow:0.5"), &m("pow:0.5"), 2.0, 0.1);
        assert_eq!(v.status, DiniStatus::Converges);
        assert!(v.consistent);
        let v = classify_dini(&m("logpow:0.5"), &m("logpow:3"), 2.0, 0.1);
        assert_eq!(v.status, DiniStatus::Converges);
        assert!(v.rule.contains("1.333"), "{}", v.rule);
        assert!(v.consistent);
        for q in [1.5, 2.0, 7.0] {
            let v = classify_dini(&m("logpow:1"), &m("logpow:1"), q, 0.1);
            assert_eq!(v.status, DiniStatus::Diverges);
            assert!(v.consistent && v.evidence_divergent);
        }
    }

    #[test]
    fn ambiguity_band_is_unknown() {
        let mu = Modulus::log_pow(1.0 + 5e-10).unwrap();
        let v = classify_dini(&mu, &mu, 2.0, 0.1);
        assert_eq!(v.status, DiniStatus::Unknown);
    }

    #[test]
    fn middle_examples() {
        let lp = m("logpow:1.5");
        assert_eq!(middle_modulus(&lp, &lp, 3.0).unwrap(), lp);
        let mm = middle_modulus(&m("logpow:0.5"), &m("logpow:3"), 2.0).unwrap();
        assert_relative_eq!(mm.log_exponents()[0], 4.0 / 3.0, epsilon = 1e-14);
        let mm = middle_modulus(&m("pow:0.5"), &m("pow:1"), 3.0).unwrap();
        assert_relative_eq!(mm.power_exponent(), 0.625, epsilon = 1e-14);
    }

    #[test]
    fn verdict_json_shape() {
        let v = classify_dini(&m("logpow:2"), &m("logpow:2"), 2.0, 0.1);
        let j = serde_json::to_value(&v).unwrap();
        for key in ["status", "rule", "estimate", "evidence"] {
            assert!(j.get(key).is_some(), "missing {key}");
        }
        assert_eq!(j["status"], "Converges");
    }
}
