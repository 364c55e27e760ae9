//! Moduli of continuity built from power and iterated-logarithm atoms.
//!
//! Every supported modulus has the normal form
//!
//! ```text
//! μ(s) = s^a · L₁(s)^{-b₁} · L₂(s)^{-b₂} ··· L_m(s)^{-b_m},
//! L₁(s) = log(1/s),  L_{k+1}(s) = log L_k(s)
//! ```
//!
//! so products and real powers of atoms reduce to exponent arithmetic. Evaluation
//! goes through the log-scale coordinate `τ = log(1/s)`, which keeps very small
//! arguments representable.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Deepest iterated logarithm whose domain is representable in `f64`.
pub const MAX_LOG_DEPTH: usize = 3;

const DEFAULT_LOG_CAP: f64 = 0.1;
const DEFAULT_POWER_CAP: f64 = 1.0;
const EXPONENT_EPS: f64 = 1e-12;

/// One factor of the literal syntax.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Atom {
    /// `s^α`
    Power(f64),
    /// `(log 1/s)^{-α}`
    LogPow(f64),
    /// `(log 1/s)^{-1} ··· (log^{(m)} 1/s)^{-α}`
    IterLogPow { depth: usize, alpha: f64 },
}

/// A modulus of continuity in normal form.
///
/// Serializes as its literal, e.g. `"logpow:1.5"` or `"pow:0.5@0.2"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Modulus {
    power: f64,
    logs: Vec<f64>,
    s_max: f64,
}

impl Modulus {
    pub fn power(alpha: f64) -> Result<Self> {
        Self::from_atoms(&[(Atom::Power(alpha), 1.0)])
    }

    pub fn log_pow(alpha: f64) -> Result<Self> {
        Self::from_atoms(&[(Atom::LogPow(alpha), 1.0)])
    }

    pub fn iter_log_pow(depth: usize, alpha: f64) -> Result<Self> {
        Self::from_atoms(&[(Atom::IterLogPow { depth, alpha }, 1.0)])
    }

    /// Product of weighted atoms, `Π atomᵢ^{wᵢ}`.
    pub fn from_atoms(atoms: &[(Atom, f64)]) -> Result<Self> {
        let mut power = 0.0;
        let mut logs: Vec<f64> = Vec::new();
        for &(atom, w) in atoms {
            if !w.is_finite() {
                return Err(Error::Domain(format!("non-finite atom weight {w}")));
            }
            match atom {
                Atom::Power(a) => power += w * a,
                Atom::LogPow(a) => add_logs(&mut logs, &[a], w),
                Atom::IterLogPow { depth, alpha } => {
                    if depth == 0 {
                        return Err(Error::Domain("iterated-log depth must be ≥ 1".into()));
                    }
                    let mut chain = vec![1.0; depth];
                    chain[depth - 1] = alpha;
                    add_logs(&mut logs, &chain, w);
                }
            }
        }
        Self::from_exponents(power, logs)
    }

    /// Builds a modulus directly from its normal-form exponents.
    pub fn from_exponents(power: f64, mut logs: Vec<f64>) -> Result<Self> {
        while logs.last() == Some(&0.0) {
            logs.pop();
        }
        if !power.is_finite() || logs.iter().any(|b| !b.is_finite()) {
            return Err(Error::Domain("non-finite exponent".into()));
        }
        if logs.len() > MAX_LOG_DEPTH {
            return Err(Error::Domain(format!(
                "iterated-log depth {} exceeds {MAX_LOG_DEPTH}; its domain underflows f64",
                logs.len()
            )));
        }
        let s_max = natural_s_max(logs.len());
        let m = Self { power, logs, s_max };
        m.validate()?;
        Ok(m)
    }

    /// Replaces the domain cap. All iterated logarithms must stay positive on `(0, s_max]`.
    pub fn with_s_max(mut self, s_max: f64) -> Result<Self> {
        if !(s_max > 0.0 && s_max.is_finite()) {
            return Err(Error::Domain(format!("s_max must be positive, got {s_max}")));
        }
        let depth = self.logs.len();
        if depth > 0 {
            // positivity of L_depth: L₁ > T_{depth-2}
            let bound = if depth == 1 { 0.0 } else { tower(depth - 2) };
            if (1.0 / s_max).ln() <= bound {
                return Err(Error::Domain(format!("s_max = {s_max} leaves L_{depth} nonpositive")));
            }
        } else if s_max > 1e300 {
            return Err(Error::Domain("s_max too large".into()));
        }
        self.s_max = s_max;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        // μ(0⁺) = 0 needs the leading nonzero exponent to be positive
        let lead = std::iter::once(self.power)
            .chain(self.logs.iter().copied())
            .find(|&e| e != 0.0);
        match lead {
            Some(e) if e > 0.0 => {}
            _ => {
                return Err(Error::Domain(format!(
                    "{self} does not vanish at 0 (leading exponent must be positive)"
                )))
            }
        }
        if self.power < 0.0 {
            return Err(Error::Domain("power exponent must be nonnegative".into()));
        }
        // strict monotonicity: positive elasticity on a log-spaced sample
        let tau0 = self.tau_min();
        for i in 0..=64 {
            let tau = tau0 * (1.0 + 1e-9) * 2f64.powf(i as f64 * 0.5);
            let e = self.elasticity_tau(tau);
            if !(e > 0.0) {
                return Err(Error::Domain(format!(
                    "{self} is not strictly increasing near s = exp(-{tau})"
                )));
            }
        }
        Ok(())
    }

    pub fn power_exponent(&self) -> f64 {
        self.power
    }

    /// Exponents `b₁..b_m` of the iterated-log chain.
    pub fn log_exponents(&self) -> &[f64] {
        &self.logs
    }

    pub fn log_depth(&self) -> usize {
        self.logs.len()
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// `log(1/s_max)`, the smallest admissible log-scale coordinate.
    pub fn tau_min(&self) -> f64 {
        (1.0 / self.s_max).ln()
    }

    fn check_tau(&self, tau: f64) -> Result<()> {
        if tau.is_nan() || tau < self.tau_min() * (1.0 - 1e-12) - 1e-15 {
            return Err(Error::Domain(format!(
                "argument exp(-{tau}) exceeds s_max = {}",
                self.s_max
            )));
        }
        Ok(())
    }

    fn check_s(&self, s: f64) -> Result<()> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!("argument {s} must be positive")));
        }
        if s > self.s_max * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("argument {s} exceeds s_max = {}", self.s_max)));
        }
        Ok(())
    }

    /// `L₁..L_m` at log-scale coordinate `τ`.
    fn chain(&self, tau: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.logs.len());
        let mut l = tau;
        for k in 0..self.logs.len() {
            if k > 0 {
                l = l.ln();
            }
            out.push(l);
        }
        out
    }

    /// `log μ(s)` at `τ = log(1/s)`, without domain checks.
    pub(crate) fn ln_eval_tau_unchecked(&self, tau: f64) -> f64 {
        let mut v = -self.power * tau;
        let mut l = tau;
        for (k, &b) in self.logs.iter().enumerate() {
            if k > 0 {
                l = l.ln();
            }
            if b != 0.0 {
                v -= b * l.ln();
            }
        }
        v
    }

    /// `log μ(s)` for `s = exp(-τ)`.
    pub fn ln_eval_tau(&self, tau: f64) -> Result<f64> {
        self.check_tau(tau)?;
        Ok(self.ln_eval_tau_unchecked(tau))
    }

    /// `μ(exp(-τ))`.
    pub fn eval_tau(&self, tau: f64) -> Result<f64> {
        Ok(self.ln_eval_tau(tau)?.exp())
    }

    /// `μ(s)`, with `μ(0) = 0`.
    pub fn eval(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        self.check_s(s)?;
        Ok(self.ln_eval_tau_unchecked(-s.ln()).exp())
    }

    /// `μ(min(s, s_max))` for `s ≥ 0`: the modulus frozen beyond its domain.
    pub fn eval_clamped(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else if s >= self.s_max {
            self.ln_eval_tau_unchecked(self.tau_min()).exp()
        } else {
            self.ln_eval_tau_unchecked(-s.ln()).exp()
        }
    }

    /// Logarithmic derivative `s μ'(s) / μ(s)` at `τ = log(1/s)`.
    pub(crate) fn elasticity_tau(&self, tau: f64) -> f64 {
        let mut e = self.power;
        let mut p = 1.0;
        for (&b, l) in self.logs.iter().zip(self.chain(tau)) {
            p *= l;
            e += b / p;
        }
        e
    }

    /// `s (d/ds)` of the elasticity at `τ`.
    fn elasticity_slope_tau(&self, tau: f64) -> f64 {
        let mut p = 1.0;
        let mut inv_sum = 0.0;
        let mut out = 0.0;
        for (&b, l) in self.logs.iter().zip(self.chain(tau)) {
            p *= l;
            inv_sum += 1.0 / p;
            out += b / p * inv_sum;
        }
        out
    }

    /// Scale-free derivative `s^k μ^{(k)}(s) / μ(s)` for `k ∈ {1, 2}`.
    pub fn scaled_deriv_ratio(&self, s: f64, order: u8) -> Result<f64> {
        self.check_s(s)?;
        let tau = -s.ln();
        self.scaled_deriv_ratio_tau(tau, order)
    }

    pub(crate) fn scaled_deriv_ratio_tau(&self, tau: f64, order: u8) -> Result<f64> {
        let e = self.elasticity_tau(tau);
        match order {
            1 => Ok(e),
            2 => Ok(e * e + self.elasticity_slope_tau(tau) - e),
            _ => Err(Error::Domain(format!("derivative order {order} not supported"))),
        }
    }

    /// Exact `μ^{(k)}(s)` for `k ∈ {1, 2}`.
    pub fn deriv(&self, s: f64, order: u8) -> Result<f64> {
        let r = self.scaled_deriv_ratio(s, order)?;
        let mu = self.eval(s)?;
        Ok(r * mu / s.powi(order as i32))
    }

    /// `μ₁^{w₁} μ₂^{w₂}` in normal form; the domain is the intersection of both domains.
    pub fn weighted_product(a: &Modulus, wa: f64, b: &Modulus, wb: f64) -> Result<Self> {
        let mut logs = Vec::new();
        add_logs(&mut logs, &a.logs, wa);
        add_logs(&mut logs, &b.logs, wb);
        let power = wa * a.power + wb * b.power;
        let m = Self::from_exponents(power, logs)?;
        let s_max = a.s_max.min(b.s_max).min(m.s_max);
        m.with_s_max(s_max)
    }

    /// Decomposes the normal form back into literal atoms.
    pub fn atoms(&self) -> Vec<(Atom, f64)> {
        let mut out = Vec::new();
        if self.power != 0.0 {
            out.push((Atom::Power(self.power), 1.0));
        }
        let m = self.logs.len();
        if m == 1 {
            out.push((Atom::LogPow(self.logs[0]), 1.0));
        } else if m > 1 {
            if self.logs[..m - 1].iter().all(|&b| (b - 1.0).abs() <= EXPONENT_EPS) {
                out.push((
                    Atom::IterLogPow {
                        depth: m,
                        alpha: self.logs[m - 1],
                    },
                    1.0,
                ));
            } else {
                // general chain: one weighted iterlog atom per level
                let mut rest = self.logs.clone();
                for depth in (1..=m).rev() {
                    let w = rest[depth - 1];
                    if w != 0.0 {
                        let atom = if depth == 1 {
                            Atom::LogPow(1.0)
                        } else {
                            Atom::IterLogPow { depth, alpha: 1.0 }
                        };
                        out.push((atom, w));
                        for r in rest.iter_mut().take(depth) {
                            *r -= w;
                        }
                    }
                }
            }
        }
        out
    }
}

fn add_logs(logs: &mut Vec<f64>, add: &[f64], w: f64) {
    if logs.len() < add.len() {
        logs.resize(add.len(), 0.0);
    }
    for (l, a) in logs.iter_mut().zip(add) {
        *l += w * a;
    }
}

/// `T₀ = 1, T_{k+1} = exp(T_k)`.
fn tower(k: usize) -> f64 {
    (0..k).fold(1.0, |t, _| t.exp())
}

/// Default cap: 1 for pure powers, otherwise 0.1 tightened so that `L_m ≥ 1`.
fn natural_s_max(depth: usize) -> f64 {
    if depth == 0 {
        return DEFAULT_POWER_CAP;
    }
    let need = tower(depth - 1);
    DEFAULT_LOG_CAP.min((-need).exp())
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .atoms()
            .into_iter()
            .map(|(atom, w)| {
                let base = match atom {
                    Atom::Power(a) => format!("pow:{}", fmt_num(a)),
                    Atom::LogPow(a) => format!("logpow:{}", fmt_num(a)),
                    Atom::IterLogPow { depth, alpha } => {
                        format!("iterlog:{depth}:{}", fmt_num(alpha))
                    }
                };
                if w == 1.0 {
                    base
                } else {
                    format!("{base}^{}", fmt_num(w))
                }
            })
            .collect();
        if parts.is_empty() {
            write!(f, "1")?;
        } else {
            write!(f, "{}", parts.join("*"))?;
        }
        if self.s_max != natural_s_max(self.logs.len()) {
            write!(f, "@{}", fmt_num(self.s_max))?;
        }
        Ok(())
    }
}

/// Parses `pow:0.5`, `logpow:1.5`, `iterlog:2:1.0`, optional `^w` weights,
/// products joined by `*`, and an optional `@s_max` suffix.
impl FromStr for Modulus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (body, cap) = match s.split_once('@') {
            Some((b, c)) => (b, Some(parse_f64(c)?)),
            None => (s, None),
        };
        let mut atoms = Vec::new();
        for term in body.split('*') {
            let term = term.trim();
            if term.is_empty() {
                return Err(Error::Parse(format!("empty factor in modulus literal {s:?}")));
            }
            let (atom_txt, w) = match term.split_once('^') {
                Some((a, w)) => (a, parse_f64(w)?),
                None => (term, 1.0),
            };
            let fields: Vec<&str> = atom_txt.split(':').map(str::trim).collect();
            let atom = match fields.as_slice() {
                ["pow", a] => Atom::Power(parse_f64(a)?),
                ["logpow", a] => Atom::LogPow(parse_f64(a)?),
                ["iterlog", m, a] => Atom::IterLogPow {
                    depth: m
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad iterlog depth {m:?}")))?,
                    alpha: parse_f64(a)?,
                },
                _ => return Err(Error::Parse(format!("unknown modulus atom {term:?}"))),
            };
            atoms.push((atom, w));
        }
        let m = Modulus::from_atoms(&atoms)?;
        match cap {
            Some(c) => m.with_s_max(c),
            None => Ok(m),
        }
    }
}

impl TryFrom<String> for Modulus {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Modulus> for String {
    fn from(m: Modulus) -> String {
        m.to_string()
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad number {s:?}")))
}
