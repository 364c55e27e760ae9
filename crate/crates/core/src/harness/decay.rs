use super::curve::{linear_exponent, NormKind, Unknown};
use crate::error::{Error, Result};
use crate::modcont::{loss_weight, EllConfig};
use crate::solver::Profile;
use crate::spectral::{
    evolve_spectra, norms_with, Fourier, Grid, GridField, NormProbe, DEFAULT_POINTS_1D, DEFAULT_POINTS_2D,
};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

pub const MIN_PROBES: usize = 20;
pub const FIT_START: f64 = 10.0;
pub const EXPONENT_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub unknown: Unknown,
    pub norm: NormKind,
    pub window: (f64, f64),
    pub probes_used: usize,
    pub fitted: f64,
    /// 95% Student-t interval of the slope.
    pub ci: (f64, f64),
    pub predicted: f64,
    /// Slope after dividing the norms by `ℓ(t)`.
    pub compensated: Option<f64>,
    pub verdict: Verdict,
    /// Decays at least as fast as predicted, up to the tolerance.
    pub within_bound: bool,
}

impl DecayReport {
    /// Exponent used for the verdict.
    pub fn effective(&self) -> f64 {
        self.compensated.unwrap_or(self.fitted)
    }
}

struct Fit {
    slope: f64,
    half_width: f64,
}

fn least_squares(pts: &[(f64, f64)]) -> Fit {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
    let dof = m - 2.0;
    let se = (ssr / dof / sxx).sqrt();
    let tq = StudentsT::new(0.0, 1.0, dof)
        .map(|d| d.inverse_cdf(0.975))
        .unwrap_or(f64::NAN);
    Fit {
        slope,
        half_width: tq * se,
    }
}

/// Least-squares slope of `log(norm)` against `log(1+t)` over the probes in `window`.
pub fn fit_decay(
    probes: &[NormProbe],
    unknown: Unknown,
    norm: NormKind,
    window: (f64, f64),
    predicted: f64,
    ell: Option<&dyn Fn(f64) -> f64>,
) -> Result<DecayReport> {
    let (t1, t2) = window;
    if !(t1 >= FIT_START) || !(t2 >= 10.0 * t1 * (1.0 - 1e-12)) {
        return Err(Error::Parameter(format!(
            "fit window [{t1}, {t2}] must start at t ≥ {FIT_START} and span a decade"
        )));
    }
    let sel: Vec<&NormProbe> = probes
        .iter()
        .filter(|p| p.unknown == unknown.label() && p.t >= t1 * (1.0 - 1e-12) && p.t <= t2 * (1.0 + 1e-12))
        .collect();
    if sel.len() < MIN_PROBES {
        return Err(Error::InsufficientData(format!(
            "{} probes of {unknown} in [{t1}, {t2}], need {MIN_PROBES}",
            sel.len()
        )));
    }
    let mut raw = Vec::with_capacity(sel.len());
    for p in &sel {
        let v = norm.of(p);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("{norm} norm of {unknown} is {v} at t = {}", p.t)));
        }
        raw.push(((1.0 + p.t).ln(), v.ln()));
    }
    let fit = least_squares(&raw);
    let compensated = match ell {
        Some(ell) => {
            let mut pts = Vec::with_capacity(raw.len());
            for (p, &(x, y)) in sel.iter().zip(&raw) {
                let l = ell(p.t);
                if !(l > 0.0) || !l.is_finite() {
                    return Err(Error::Domain(format!("ℓ({}) = {l}", p.t)));
                }
                pts.push((x, y - l.ln()));
            }
            Some(least_squares(&pts).slope)
        }
        None => None,
    };
    let effective = compensated.unwrap_or(fit.slope);
    let verdict = if (effective - predicted).abs() <= EXPONENT_TOLERANCE {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(DecayReport {
        unknown,
        norm,
        window,
        probes_used: sel.len(),
        fitted: fit.slope,
        ci: (fit.slope - fit.half_width, fit.slope + fit.half_width),
        predicted,
        compensated,
        verdict,
        within_bound: effective <= predicted + EXPONENT_TOLERANCE,
    })
}

/// `ℓ(t)` of a weight configuration as a plain function; non-finite on failure.
pub fn ell_fn(cfg: &EllConfig) -> impl Fn(f64) -> f64 + '_ {
    move |t| loss_weight(cfg, t).unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatsumuraSpec {
    pub n: usize,
    pub profile: Profile,
    pub width: f64,
    pub t_max: f64,
    #[serde(default)]
    pub points: Option<usize>,
    /// Number of log-spaced probe times in `[10, t_max]`.
    #[serde(default = "default_probe_count")]
    pub probe_count: usize,
}

fn default_probe_count() -> usize {
    60
}

impl MatsumuraSpec {
    pub fn new(n: usize, profile: Profile, t_max: f64) -> Self {
        Self {
            n,
            profile,
            width: 1.0,
            t_max,
            points: None,
            probe_count: default_probe_count(),
        }
    }

    pub fn data(&self, grid: Grid) -> GridField {
        let w = self.width;
        match self.profile {
            Profile::GaussianDerivative => GridField::from_fn(grid, |x| {
                let r2: f64 = x.iter().map(|c| c * c).sum();
                x[0] / w * (-r2 / (w * w)).exp()
            }),
            Profile::Bump => GridField::radial(grid, |r| {
                let z = r / w;
                if z < 1.0 {
                    (1.0 - 1.0 / (1.0 - z * z)).exp()
                } else {
                    0.0
                }
            }),
            Profile::Gaussian => GridField::radial(grid, |r| (-(r * r) / (w * w)).exp()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatsumuraReport {
    pub n: usize,
    pub profile: Profile,
    pub t_max: f64,
    pub data_integral: f64,
    pub probes: Vec<NormProbe>,
    pub reports: Vec<DecayReport>,
}

/// Linear flow of `(w₀, w₁) = (g, g)` sampled at log-spaced times and fitted per norm.
pub fn matsumura_check(spec: &MatsumuraSpec) -> Result<MatsumuraReport> {
    if !(spec.n == 1 || spec.n == 2) {
        return Err(Error::Parameter(format!("dimension {} not supported", spec.n)));
    }
    if !(spec.t_max >= 10.0 * FIT_START) {
        return Err(Error::Parameter(format!(
            "t_max = {} too short for a one-decade fit",
            spec.t_max
        )));
    }
    let support = match spec.profile {
        Profile::Bump => spec.width,
        _ => 8.0 * spec.width,
    };
    let points = spec.points.unwrap_or(if spec.n == 1 {
        DEFAULT_POINTS_1D
    } else {
        DEFAULT_POINTS_2D
    });
    let grid = Grid::auto(spec.n, support, spec.t_max, Some(points))?;
    let fourier = Fourier::new(grid);
    let g = spec.data(grid);
    let s = fourier.forward(&g.values);
    let m = spec.probe_count.max(MIN_PROBES);
    let (a, b) = (FIT_START.ln(), spec.t_max.ln());
    let times: Vec<f64> = (0..m)
        .map(|i| (a + (b - a) * i as f64 / (m - 1) as f64).exp())
        .collect();
    let probes = crate::parallel::par_map(&times, |&t| -> Result<NormProbe> {
        let (w, _) = evolve_spectra(&fourier, &s, &s, t);
        let field = GridField {
            grid,
            values: fourier.inverse(w.clone()),
        };
        let mut p = norms_with(&fourier, &field, Some(&w))?;
        p.t = t;
        p.unknown = "u".into();
        Ok(p)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let window = (FIT_START, spec.t_max);
    let mut kinds = vec![NormKind::L2, NormKind::Linf];
    if spec.n == 1 {
        kinds.push(NormKind::GradL2);
    }
    let reports = kinds
        .into_iter()
        .map(|k| fit_decay(&probes, Unknown::U, k, window, linear_exponent(spec.n, k), None))
        .collect::<Result<Vec<_>>>()?;
    Ok(MatsumuraReport {
        n: spec.n,
        profile: spec.profile,
        t_max: spec.t_max,
        data_integral: g.integral(),
        probes,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modcont::Modulus;

    fn synthetic(f: impl Fn(f64) -> f64) -> Vec<NormProbe> {
        (0..100)
            .map(|i| {
                let t = 10.0 * 100f64.powf(i as f64 / 99.0);
                let v = f(t);
                NormProbe {
                    t,
                    unknown: "u".into(),
                    l1: v,
                    l2: v,
                    linf: v,
                    h1: v,
                }
            })
            .collect()
    }

    #[test]
    fn exact_power_law() {
        let probes = synthetic(|t| 3.0 * (1.0 + t).powf(-0.5));
        let r = fit_decay(&probes, Unknown::U, NormKind::L2, (10.0, 1000.0), -0.5, None).unwrap();
        assert!((r.fitted + 0.5).abs() < 1e-6);
        assert!(r.ci.0.is_finite() && r.ci.1.is_finite());
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn ell_compensation() {
        let mu1 = Modulus::log_pow(1.0).unwrap();
        let mu2 = Modulus::log_pow(3.0).unwrap();
        let cfg = EllConfig::mixed(mu1, mu2, 6.0, 0.5, 0.1);
        let probes = synthetic(|t| (1.0 + t).powf(-0.5) * loss_weight(&cfg, t).unwrap());
        let r = fit_decay(
            &probes,
            Unknown::U,
            NormKind::Linf,
            (10.0, 1000.0),
            -0.5,
            Some(&ell_fn(&cfg)),
        )
        .unwrap();
        assert!((r.compensated.unwrap() + 0.5).abs() < 0.02);

        let e = std::f64::consts::E;
        let ell = |t: f64| (e + t).ln().powf(2.0 / 3.0);
        let probes = synthetic(|t| (1.0 + t).powf(-0.5) * ell(t));
        let r = fit_decay(&probes, Unknown::U, NormKind::Linf, (10.0, 1000.0), -0.5, Some(&ell)).unwrap();
        assert!(r.fitted > -0.5 + 0.05);
        assert!((r.compensated.unwrap() + 0.5).abs() < 0.02);
    }

    #[test]
    fn too_few_probes() {
        let probes: Vec<NormProbe> = synthetic(|t| t.recip()).into_iter().step_by(10).collect();
        assert!(matches!(
            fit_decay(&probes, Unknown::U, NormKind::L2, (10.0, 1000.0), -1.0, None),
            Err(Error::InsufficientData(_))
        ));
        assert!(fit_decay(&probes, Unknown::U, NormKind::L2, (5.0, 1000.0), -1.0, None).is_err());
    }
}
