//! Exact Fourier multipliers of the damped wave operator `∂ₜ² − Δ + ∂ₜ`.
//!
//! For each frequency `ξ` the multiplier solves `m'' + m' + |ξ|² m = 0`; `K0` starts
//! from `(1, 0)` and `K1` from `(0, 1)`.

use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kernel {
    K0,
    K1,
    DtK0,
    DtK1,
}

impl FromStr for Kernel {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "k0" => Ok(Kernel::K0),
            "k1" => Ok(Kernel::K1),
            "dtk0" => Ok(Kernel::DtK0),
            "dtk1" => Ok(Kernel::DtK1),
            _ => Err(crate::Error::Parse(format!("unknown kernel {s:?}"))),
        }
    }
}

/// All four multipliers at one `(t, |ξ|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multipliers {
    pub k0: f64,
    pub k1: f64,
    pub dt_k0: f64,
    pub dt_k1: f64,
}

impl Multipliers {
    pub fn get(&self, which: Kernel) -> f64 {
        match which {
            Kernel::K0 => self.k0,
            Kernel::K1 => self.k1,
            Kernel::DtK0 => self.dt_k0,
            Kernel::DtK1 => self.dt_k1,
        }
    }
}

/// Largest `|γ t|` handled by the power series around the double root.
const SERIES_RADIUS: f64 = 1.0;

/// `sinh(γt)/γ` and `cosh(γt)` as series in `x = γ²t²` (valid for either sign of `x`).
fn series(x: f64, t: f64) -> (f64, f64) {
    let mut s = 0.0;
    let mut c = 0.0;
    let mut term_c = 1.0; // x^k / (2k)!
    let mut term_s = 1.0; // x^k / (2k+1)!
    for k in 0..30 {
        c += term_c;
        s += term_s;
        let kk = k as f64;
        term_c *= x / ((2.0 * kk + 1.0) * (2.0 * kk + 2.0));
        term_s *= x / ((2.0 * kk + 2.0) * (2.0 * kk + 3.0));
        if term_c.abs() < 1e-18 * c.abs() && term_s.abs() < 1e-18 * s.abs() {
            break;
        }
    }
    (t * s, c)
}

pub fn multipliers(t: f64, xi_abs: f64) -> Multipliers {
    let xi2 = xi_abs * xi_abs;
    let disc = 1.0 - 4.0 * xi2;
    let gamma2 = disc / 4.0;
    let damp = (-0.5 * t).exp();
    if (gamma2 * t * t).abs() <= SERIES_RADIUS * SERIES_RADIUS {
        let (s, c) = series(gamma2 * t * t, t);
        let k1 = damp * s;
        return Multipliers {
            k0: damp * (c + 0.5 * s),
            k1,
            dt_k0: -xi2 * k1,
            dt_k1: damp * (c - 0.5 * s),
        };
    }
    if disc < 0.0 {
        let omega = (-disc).sqrt() / 2.0;
        let (sn, cs) = (omega * t).sin_cos();
        let k1 = damp * sn / omega;
        Multipliers {
            k0: damp * (cs + sn / (2.0 * omega)),
            k1,
            dt_k0: -xi2 * k1,
            dt_k1: damp * (cs - sn / (2.0 * omega)),
        }
    } else {
        let root = disc.sqrt();
        // λ₊ without cancellation for small |ξ|
        let lp = -2.0 * xi2 / (1.0 + root);
        let lm = -1.0 - lp;
        let ep = (lp * t).exp();
        let em = (lm * t).exp();
        let k1 = (ep - em) / root;
        Multipliers {
            k0: (-lm * ep + lp * em) / root,
            k1,
            dt_k0: -xi2 * k1,
            dt_k1: (lp * ep - lm * em) / root,
        }
    }
}

/// Multiplier `m(t, |ξ|)` for one kernel.
pub fn kernel_multiplier(t: f64, xi_abs: f64, which: Kernel) -> f64 {
    multipliers(t, xi_abs).get(which)
}
