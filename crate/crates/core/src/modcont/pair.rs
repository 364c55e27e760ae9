use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Exponent pair `(p_c, q_c)` on the critical curve `(1 + q)/(pq − 1) = n/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPair {
    pub n: usize,
    pub p_c: f64,
    pub q_c: f64,
    /// Loss-of-decay exponent `(q_c − p_c)/(p_c q_c − 1)`.
    pub sigma: f64,
}

impl CriticalPair {
    pub fn new(n: usize, p_c: f64, q_c: f64) -> Result<Self> {
        if !(n == 1 || n == 2) {
            return Err(Error::Parameter(format!("dimension {n} not supported (1 or 2)")));
        }
        if !(p_c > 1.0 && q_c > 1.0) {
            return Err(Error::Parameter(format!("exponents must exceed 1: ({p_c}, {q_c})")));
        }
        if q_c < p_c {
            return Err(Error::Parameter(format!("expected p_c ≤ q_c, got ({p_c}, {q_c})")));
        }
        let lhs = (1.0 + q_c) / (p_c * q_c - 1.0);
        let rhs = n as f64 / 2.0;
        if ((lhs - rhs) / rhs).abs() > 1e-12 {
            return Err(Error::Parameter(format!(
                "({p_c}, {q_c}) is off the critical curve for n = {n}: (1+q)/(pq-1) = {lhs}"
            )));
        }
        Ok(Self {
            n,
            p_c,
            q_c,
            sigma: (q_c - p_c) / (p_c * q_c - 1.0),
        })
    }

    /// Solves the critical curve for the partner `q_c ≥ p_c`.
    pub fn from_curve(n: usize, p_c: f64) -> Result<Self> {
        if !(p_c > 1.0) {
            return Err(Error::Parameter(format!("p_c must exceed 1, got {p_c}")));
        }
        let nf = n as f64;
        let denom = nf * p_c - 2.0;
        if denom <= 0.0 {
            return Err(Error::NoAdmissiblePartner(format!(
                "no finite q solves the curve for n = {n}, p_c = {p_c}"
            )));
        }
        let q = (nf + 2.0) / denom;
        if q <= 1.0 || q < p_c {
            return Err(Error::NoAdmissiblePartner(format!(
                "solved q = {q} for n = {n}, p_c = {p_c} (need q > 1 and q ≥ p_c)"
            )));
        }
        Self::new(n, p_c, q)
    }

    /// Residual of `(1 + q)/(pq − 1) − n/2`.
    pub fn curve_residual(&self) -> f64 {
        (1.0 + self.q_c) / (self.p_c * self.q_c - 1.0) - self.n as f64 / 2.0
    }

    pub fn fujita(n: usize) -> f64 {
        1.0 + 2.0 / n as f64
    }

    /// Smallest admissible test-function exponent `2/(p_c − 1)`.
    pub fn min_test_exponent(&self) -> f64 {
        (2.0 / (self.p_c - 1.0)).max(2.0 / (self.q_c - 1.0))
    }
}
