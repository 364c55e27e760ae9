use crate::error::{Error, Result};
use crate::modcont::CriticalPair;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Solves the critical curve for the partner exponent of `p_c`.
pub fn curve_qc(n: usize, p_c: f64) -> Result<CriticalPair> {
    CriticalPair::from_curve(n, p_c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unknown {
    U,
    V,
}

impl Unknown {
    pub fn label(self) -> &'static str {
        match self {
            Unknown::U => "u",
            Unknown::V => "v",
        }
    }
}

impl fmt::Display for Unknown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Unknown {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u" => Ok(Unknown::U),
            "v" => Ok(Unknown::V),
            _ => Err(Error::Parse(format!("unknown must be u or v, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormKind {
    #[serde(rename = "L2")]
    L2,
    #[serde(rename = "Linf")]
    Linf,
    #[serde(rename = "gradL2")]
    GradL2,
}

impl NormKind {
    pub fn label(self) -> &'static str {
        match self {
            NormKind::L2 => "L2",
            NormKind::Linf => "Linf",
            NormKind::GradL2 => "gradL2",
        }
    }

    pub fn of(self, p: &crate::spectral::NormProbe) -> f64 {
        match self {
            NormKind::L2 => p.l2,
            NormKind::Linf => p.linf,
            NormKind::GradL2 => p.h1,
        }
    }

    /// Derivative order of an `L²`-scale norm.
    pub fn order(self) -> u8 {
        match self {
            NormKind::GradL2 => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for NormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L2" | "l2" => Ok(NormKind::L2),
            "Linf" | "linf" => Ok(NormKind::Linf),
            "gradL2" | "h1" | "grad" => Ok(NormKind::GradL2),
            _ => Err(Error::Parse(format!("unknown norm {s:?}"))),
        }
    }
}

/// Decay exponent of the global-existence estimates; `u` carries the loss `σ`.
pub fn predicted_exponents(pair: &CriticalPair, unknown: Unknown, norm: NormKind) -> f64 {
    let n = pair.n as f64;
    let base = match norm {
        NormKind::Linf => -n / 2.0,
        _ => -n / 4.0 - norm.order() as f64 / 2.0,
    };
    match unknown {
        Unknown::U => base + pair.sigma,
        Unknown::V => base,
    }
}

/// Exponents of the linear flow (no loss).
pub fn linear_exponent(n: usize, norm: NormKind) -> f64 {
    let n = n as f64;
    match norm {
        NormKind::Linf => -n / 2.0,
        _ => -n / 4.0 - norm.order() as f64 / 2.0,
    }
}
