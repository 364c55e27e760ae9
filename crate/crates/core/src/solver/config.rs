use crate::error::{Error, Result};
use crate::modcont::{classify_dini, CriticalPair, DiniStatus, EllConfig, Modulus, Regime};
use crate::spectral::{Grid, GridField};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `exp(-|x|²/w²)`
    Gaussian,
    /// `(x₁/w) exp(-|x|²/w²)`, zero mean.
    GaussianDerivative,
    /// `exp(1 - 1/(1 - |x|²/R²))` on `|x| < R`, with `R = support_radius`.
    Bump,
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Profile::Gaussian),
            "gaussian-derivative" => Ok(Profile::GaussianDerivative),
            "bump" => Ok(Profile::Bump),
            _ => Err(Error::Config(format!("unknown profile {s:?}"))),
        }
    }
}

fn d_profile() -> Profile {
    Profile::Gaussian
}
fn d_one() -> f64 {
    1.0
}
fn d_zero() -> f64 {
    0.0
}
fn d_dt() -> f64 {
    0.05
}
fn d_threshold() -> f64 {
    1e6
}
fn d_true() -> bool {
    true
}
fn d_c() -> f64 {
    0.1
}
fn d_ell_eps() -> f64 {
    0.01
}
fn d_eps0() -> f64 {
    0.1
}

/// Simulation parameters; read from a flat TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub n: usize,
    pub p_c: f64,
    /// Solved from the critical curve when absent.
    #[serde(default)]
    pub q_c: Option<f64>,
    pub mu1: Modulus,
    pub mu2: Modulus,
    pub amplitude: f64,
    #[serde(default = "d_profile")]
    pub profile: Profile,
    #[serde(default = "d_one")]
    pub width: f64,
    /// Radius beyond which the data is treated as zero (box sizing, bump support).
    #[serde(default)]
    pub support_radius: Option<f64>,
    #[serde(default = "d_one")]
    pub u0: f64,
    #[serde(default = "d_zero")]
    pub u1: f64,
    #[serde(default = "d_one")]
    pub v0: f64,
    #[serde(default = "d_zero")]
    pub v1: f64,
    #[serde(default = "d_dt")]
    pub dt: f64,
    pub t_max: f64,
    #[serde(default = "d_threshold")]
    pub blowup_threshold: f64,
    #[serde(default = "d_one")]
    pub probe_dt: f64,
    #[serde(default)]
    pub grid_points: Option<usize>,
    #[serde(default)]
    pub half_length: Option<f64>,
    #[serde(default = "d_true")]
    pub nonlinear: bool,
    /// Freeze `μ` at `μ(s_max)` for larger arguments instead of failing.
    #[serde(default = "d_true")]
    pub clamp: bool,
    #[serde(default)]
    pub snapshot_dt: Option<f64>,
    /// Small constant `c` in `ℓ(t)`.
    #[serde(default = "d_c")]
    pub c: f64,
    /// Exponent `ε` in `ℓ(t)`.
    #[serde(default = "d_ell_eps")]
    pub ell_eps: f64,
    /// Small-data bound for Picard runs.
    #[serde(default = "d_eps0")]
    pub eps0: f64,
}

impl SimConfig {
    /// A config with defaults for everything except the physics.
    pub fn new(n: usize, p_c: f64, mu1: Modulus, mu2: Modulus, amplitude: f64, t_max: f64) -> Self {
        Self {
            name: None,
            n,
            p_c,
            q_c: None,
            mu1,
            mu2,
            amplitude,
            profile: Profile::Gaussian,
            width: 1.0,
            support_radius: None,
            u0: 1.0,
            u1: 0.0,
            v0: 1.0,
            v1: 0.0,
            dt: d_dt(),
            t_max,
            blowup_threshold: d_threshold(),
            probe_dt: 1.0,
            grid_points: None,
            half_length: None,
            nonlinear: true,
            clamp: true,
            snapshot_dt: None,
            c: d_c(),
            ell_eps: d_ell_eps(),
            eps0: d_eps0(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn pair(&self) -> Result<CriticalPair> {
        match self.q_c {
            Some(q) => CriticalPair::new(self.n, self.p_c, q),
            None => CriticalPair::from_curve(self.n, self.p_c),
        }
    }

    pub fn validate(&self) -> Result<CriticalPair> {
        let pair = self.pair()?;
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        pos("dt", self.dt)?;
        pos("t_max", self.t_max)?;
        pos("width", self.width)?;
        pos("probe_dt", self.probe_dt)?;
        pos("c", self.c)?;
        pos("ell_eps", self.ell_eps)?;
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::Config(format!("amplitude must be ≥ 0, got {}", self.amplitude)));
        }
        if !(self.blowup_threshold > self.amplitude * self.data_weight_max()) {
            return Err(Error::Config("blowup_threshold must exceed the data amplitude".into()));
        }
        if let Some(r) = self.support_radius {
            pos("support_radius", r)?;
        }
        if let Some(s) = self.snapshot_dt {
            pos("snapshot_dt", s)?;
        }
        if self.dt > self.t_max {
            return Err(Error::Config("dt exceeds t_max".into()));
        }
        Ok(pair)
    }

    fn data_weight_max(&self) -> f64 {
        [self.u0, self.u1, self.v0, self.v1]
            .iter()
            .fold(0.0f64, |m, w| m.max(w.abs()))
    }

    /// Radius used for box sizing.
    pub fn effective_support(&self) -> f64 {
        self.support_radius.unwrap_or(match self.profile {
            Profile::Bump => 1.0,
            _ => 8.0 * self.width,
        })
    }

    pub fn grid(&self) -> Result<Grid> {
        match self.half_length {
            Some(l) => Grid::new(
                self.n,
                l,
                self.grid_points.unwrap_or(if self.n == 1 {
                    crate::spectral::DEFAULT_POINTS_1D
                } else {
                    crate::spectral::DEFAULT_POINTS_2D
                }),
            ),
            None => Grid::auto(self.n, self.effective_support(), self.t_max, self.grid_points),
        }
    }

    /// The unit-amplitude data profile `g`.
    pub fn profile_field(&self, grid: Grid) -> GridField {
        let w = self.width;
        let r_sup = self.effective_support();
        match self.profile {
            Profile::Gaussian => GridField::radial(grid, |r| (-(r * r) / (w * w)).exp()),
            Profile::GaussianDerivative => GridField::from_fn(grid, |x| {
                let r2: f64 = x.iter().map(|c| c * c).sum();
                x[0] / w * (-r2 / (w * w)).exp()
            }),
            Profile::Bump => GridField::radial(grid, |r| {
                let z = r / r_sup;
                if z < 1.0 {
                    (1.0 - 1.0 / (1.0 - z * z)).exp()
                } else {
                    0.0
                }
            }),
        }
    }

    /// `(u0, u1, v0, v1)` on `grid`.
    pub fn data(&self, grid: Grid) -> [GridField; 4] {
        let g = self.profile_field(grid);
        [self.u0, self.u1, self.v0, self.v1].map(|w| g.scaled(self.amplitude * w))
    }

    /// Weight configuration for `ℓ(t)`; the regime follows the single-modulus Dini integrals.
    pub fn ell_config(&self) -> Result<EllConfig> {
        let pair = self.pair()?;
        let c = self.c.min(self.mu1.s_max()).min(self.mu2.s_max());
        let single = |m: &Modulus| classify_dini(m, m, pair.q_c, c).status == DiniStatus::Converges;
        let regime = if single(&self.mu1) && single(&self.mu2) {
            Regime::BothConverge
        } else {
            Regime::Mixed
        };
        Ok(EllConfig {
            mu1: self.mu1.clone(),
            mu2: self.mu2.clone(),
            q_c: pair.q_c,
            eps: self.ell_eps,
            c,
            regime,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
n = 1
p_c = 2.5
mu1 = "pow:0.5"
mu2 = "pow:0.5"
amplitude = 0.01
t_max = 50.0
dt = 0.1
"#;

    #[test]
    fn parses_flat_toml() {
        let cfg = SimConfig::from_toml_str(SAMPLE).unwrap();
        let pair = cfg.pair().unwrap();
        assert_eq!(pair.q_c, 6.0);
        assert_eq!(cfg.profile, Profile::Gaussian);
        assert_eq!(cfg.blowup_threshold, 1e6);
        let back = SimConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(SimConfig::from_toml_str(&format!("{SAMPLE}\nbogus = 1\n")).is_err());
        assert!(SimConfig::from_toml_str(&SAMPLE.replace("dt = 0.1", "dt = -1.0")).is_err());
        assert!(SimConfig::from_toml_str(&SAMPLE.replace("\"pow:0.5\"", "\"pow:x\"")).is_err());
        let big = SAMPLE.replace("amplitude = 0.01", "amplitude = 2e6");
        assert!(SimConfig::from_toml_str(&big).is_err());
        assert!(SimConfig::from_toml_str(&format!("{SAMPLE}\nq_c = 5.0\n")).is_err());
    }

    #[test]
    fn auto_grid_covers_horizon() {
        let cfg = SimConfig::from_toml_str(SAMPLE).unwrap();
        let g = cfg.grid().unwrap();
        assert!(g.half_length >= 1.1 * 50.0);
        assert_eq!(g.points, 8192);
    }

    #[test]
    fn ell_regime_follows_moduli() {
        let cfg = SimConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(cfg.ell_config().unwrap().regime, Regime::BothConverge);
        let mut mixed = cfg.clone();
        mixed.mu1 = "logpow:1".parse().unwrap();
        mixed.mu2 = "logpow:3".parse().unwrap();
        assert_eq!(mixed.ell_config().unwrap().regime, Regime::Mixed);
    }
}
