use super::curve::{predicted_exponents, NormKind, Unknown};
use super::decay::{ell_fn, fit_decay, DecayReport, Verdict, FIT_START};
use super::plot::{loglog_svg, slope_guide, Series};
use crate::error::{Error, Result};
use crate::modcont::{classify_dini, DiniStatus, Modulus};
use crate::parallel::par_map;
use crate::solver::{simulate, SimConfig, SimOutcome, SimStatus};
use crate::spectral::{write_probes, NormProbe};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

/// Amplitudes at or below this count as small data for the consistency flag.
pub const SMALL_AMPLITUDE: f64 = 0.05;

pub const SUMMARY_HEADER: &str = "name,n,p_c,q_c,mu1,mu2,amplitude,classifier,status,t_end,t_star,steps,retried_steps,\
u_linf_fit,u_linf_pred,v_linf_fit,v_linf_pred,u_l2_fit,u_l2_pred,v_l2_fit,v_l2_pred,decay_verdict,consistent,error";

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub runs: Vec<SimConfig>,
    pub out_dir: PathBuf,
    pub seed: u64,
}

const SWEEP_KEYS: [&str; 4] = ["sweep_amplitude", "sweep_moduli", "sweep_p_c", "seed"];

impl SweepSpec {
    /// A base config plus list-valued `sweep_amplitude`, `sweep_moduli` (`"mu1;mu2"`) and `sweep_p_c`
    /// keys; runs are the cartesian product, named `<name>-NNN`.
    pub fn from_toml_str(text: &str, out_dir: PathBuf, seed: Option<u64>) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut take = |k: &str| table.remove(k);
        let list_f64 = |v: Option<toml::Value>, key: &str| -> Result<Option<Vec<f64>>> {
            match v {
                None => Ok(None),
                Some(toml::Value::Array(a)) => a
                    .into_iter()
                    .map(|x| match x {
                        toml::Value::Float(f) => Ok(f),
                        toml::Value::Integer(i) => Ok(i as f64),
                        other => Err(Error::Config(format!("{key}: expected numbers, got {other}"))),
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(Some),
                Some(other) => Err(Error::Config(format!("{key}: expected an array, got {other}"))),
            }
        };
        let amps = list_f64(take("sweep_amplitude"), "sweep_amplitude")?;
        let ps = list_f64(take("sweep_p_c"), "sweep_p_c")?;
        let moduli: Option<Vec<(Modulus, Modulus)>> = match take("sweep_moduli") {
            None => None,
            Some(toml::Value::Array(a)) => Some(
                a.into_iter()
                    .map(|x| {
                        let s = x
                            .as_str()
                            .ok_or_else(|| Error::Config("sweep_moduli entries must be strings".into()))?;
                        let (a, b) = s
                            .split_once(';')
                            .ok_or_else(|| Error::Config(format!("sweep_moduli entry {s:?} must be \"mu1;mu2\"")))?;
                        Ok((a.trim().parse::<Modulus>()?, b.trim().parse::<Modulus>()?))
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            Some(other) => return Err(Error::Config(format!("sweep_moduli: expected an array, got {other}"))),
        };
        let file_seed = match take("seed") {
            None => None,
            Some(toml::Value::Integer(i)) if i >= 0 => Some(i as u64),
            Some(other) => {
                return Err(Error::Config(format!(
                    "seed: expected a nonnegative integer, got {other}"
                )))
            }
        };
        debug_assert!(SWEEP_KEYS.iter().all(|k| !table.contains_key(*k)));
        let base: SimConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let prefix = base.name.clone().unwrap_or_else(|| "run".into());
        let amps = amps.unwrap_or_else(|| vec![base.amplitude]);
        let ps = ps.unwrap_or_else(|| vec![base.p_c]);
        let moduli = moduli.unwrap_or_else(|| vec![(base.mu1.clone(), base.mu2.clone())]);
        let mut runs = Vec::new();
        for &p in &ps {
            for (m1, m2) in &moduli {
                for &a in &amps {
                    let mut c = base.clone();
                    c.p_c = p;
                    if ps.len() > 1 {
                        c.q_c = None;
                    }
                    c.mu1 = m1.clone();
                    c.mu2 = m2.clone();
                    c.amplitude = a;
                    c.name = Some(format!("{prefix}-{:03}", runs.len()));
                    runs.push(c);
                }
            }
        }
        Ok(Self {
            runs,
            out_dir,
            seed: seed.or(file_seed).unwrap_or(0),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs.is_empty() {
            return Err(Error::Config("sweep has no runs".into()));
        }
        let mut seen = HashSet::new();
        for (i, r) in self.runs.iter().enumerate() {
            let name = run_name(r, i);
            if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
                return Err(Error::Config(format!("invalid run name {name:?}")));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::Config(format!("duplicate run name {name:?}")));
            }
        }
        Ok(())
    }
}

fn run_name(cfg: &SimConfig, i: usize) -> String {
    cfg.name.clone().unwrap_or_else(|| format!("run-{i:03}"))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SummaryRow {
    pub name: String,
    pub n: usize,
    pub p_c: f64,
    pub q_c: Option<f64>,
    pub mu1: String,
    pub mu2: String,
    pub amplitude: f64,
    pub classifier: String,
    pub status: String,
    pub t_end: Option<f64>,
    pub t_star: Option<f64>,
    pub steps: Option<usize>,
    pub retried_steps: Option<usize>,
    pub u_linf_fit: Option<f64>,
    pub u_linf_pred: Option<f64>,
    pub v_linf_fit: Option<f64>,
    pub v_linf_pred: Option<f64>,
    pub u_l2_fit: Option<f64>,
    pub u_l2_pred: Option<f64>,
    pub v_l2_fit: Option<f64>,
    pub v_l2_pred: Option<f64>,
    pub decay_verdict: String,
    pub consistent: bool,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub seed: u64,
    pub rows: Vec<SummaryRow>,
    pub inconsistent: Vec<String>,
    pub failed: Vec<String>,
}

impl SweepSummary {
    pub fn to_csv(&self) -> Result<String> {
        summary_csv(&self.rows)
    }
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
        .map_err(|e| Error::Io(e.to_string()))?;
    Ok(format!("{SUMMARY_HEADER}\n{body}"))
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != SUMMARY_HEADER {
        return Err(Error::Parse(format!("unexpected summary header {header:?}")));
    }
    r.deserialize().map(|x| x.map_err(Error::from)).collect()
}

/// Decay fits of a finished run over `[10, t_end]`, or `None` when the run is too short.
pub fn run_fits(cfg: &SimConfig, outcome: &SimOutcome) -> Result<Option<Vec<DecayReport>>> {
    let t_end = outcome.probes.last().map(|p| p.t).unwrap_or(0.0);
    if !matches!(outcome.status, SimStatus::ReachedTmax) || t_end < 10.0 * FIT_START {
        return Ok(None);
    }
    let pair = cfg.validate()?;
    let ell_cfg = cfg.ell_config()?;
    let ell = ell_fn(&ell_cfg);
    let mut out = Vec::new();
    for unknown in [Unknown::U, Unknown::V] {
        for norm in [NormKind::Linf, NormKind::L2] {
            let comp: Option<&dyn Fn(f64) -> f64> = if unknown == Unknown::U { Some(&ell) } else { None };
            out.push(fit_decay(
                &outcome.probes,
                unknown,
                norm,
                (FIT_START, t_end),
                predicted_exponents(&pair, unknown, norm),
                comp,
            )?);
        }
    }
    Ok(Some(out))
}

/// Log-log norm plot with the predicted slopes anchored at the first fitted probe.
pub fn norms_plot(title: &str, probes: &[NormProbe], fits: Option<&[DecayReport]>) -> String {
    let series_for = |u: &str, color: &'static str| Series {
        label: format!("{u} Linf"),
        color,
        points: probes
            .iter()
            .filter(|p| p.unknown == u)
            .map(|p| (1.0 + p.t, p.linf))
            .collect(),
        dashed: false,
    };
    let mut series = vec![series_for("u", "#1f5fbf"), series_for("v", "#c0392b")];
    if let Some(fits) = fits {
        for f in fits.iter().filter(|f| f.norm == NormKind::Linf) {
            let anchor = probes
                .iter()
                .find(|p| p.unknown == f.unknown.label() && p.t >= f.window.0)
                .map(|p| (1.0 + p.t, p.linf));
            if let Some(a) = anchor {
                let color = if f.unknown == Unknown::U { "#7fa7e6" } else { "#e39b93" };
                series.push(slope_guide(
                    format!("{} predicted {:.3}", f.unknown, f.predicted),
                    color,
                    f.predicted,
                    a,
                    1.0 + f.window.1,
                ));
            }
        }
    }
    loglog_svg(title, "1 + t", "sup norm", &series)
}

fn fit_of(fits: &Option<Vec<DecayReport>>, u: Unknown, k: NormKind) -> (Option<f64>, Option<f64>) {
    match fits {
        Some(v) => v
            .iter()
            .find(|f| f.unknown == u && f.norm == k)
            .map(|f| (Some(f.effective()), Some(f.predicted)))
            .unwrap_or((None, None)),
        None => (None, None),
    }
}

fn run_one(cfg: &SimConfig, name: &str, dir: &Path) -> SummaryRow {
    let mut row = SummaryRow {
        name: name.to_string(),
        n: cfg.n,
        p_c: cfg.p_c,
        q_c: None,
        mu1: cfg.mu1.to_string(),
        mu2: cfg.mu2.to_string(),
        amplitude: cfg.amplitude,
        classifier: String::new(),
        status: "Error".into(),
        t_end: None,
        t_star: None,
        steps: None,
        retried_steps: None,
        u_linf_fit: None,
        u_linf_pred: None,
        v_linf_fit: None,
        v_linf_pred: None,
        u_l2_fit: None,
        u_l2_pred: None,
        v_l2_fit: None,
        v_l2_pred: None,
        decay_verdict: "n/a".into(),
        consistent: true,
        error: String::new(),
    };
    let result = (|| -> Result<()> {
        let pair = cfg.validate()?;
        row.q_c = Some(pair.q_c);
        let c = cfg.c.min(cfg.mu1.s_max()).min(cfg.mu2.s_max());
        let verdict = classify_dini(&cfg.mu1, &cfg.mu2, pair.q_c, c);
        row.classifier = format!("{:?}", verdict.status);
        let outcome = simulate(cfg)?;
        row.status = outcome.status.label().to_string();
        row.t_end = outcome.probes.last().map(|p| p.t);
        row.t_star = outcome.status.t_star();
        row.steps = Some(outcome.steps);
        row.retried_steps = Some(outcome.retried_steps);
        let fits = run_fits(cfg, &outcome)?;
        (row.u_linf_fit, row.u_linf_pred) = fit_of(&fits, Unknown::U, NormKind::Linf);
        (row.v_linf_fit, row.v_linf_pred) = fit_of(&fits, Unknown::V, NormKind::Linf);
        (row.u_l2_fit, row.u_l2_pred) = fit_of(&fits, Unknown::U, NormKind::L2);
        (row.v_l2_fit, row.v_l2_pred) = fit_of(&fits, Unknown::V, NormKind::L2);
        if let Some(f) = &fits {
            row.decay_verdict = if f.iter().all(|r| r.verdict == Verdict::Pass) {
                "pass"
            } else {
                "fail"
            }
            .into();
        }
        row.consistent = !(verdict.status == DiniStatus::Converges
            && cfg.amplitude <= SMALL_AMPLITUDE
            && !matches!(outcome.status, SimStatus::ReachedTmax));
        fs::create_dir_all(dir)?;
        write_probes(&dir.join("probes.csv"), &outcome.probes)?;
        let record = serde_json::json!({
            "name": name,
            "config": cfg,
            "status": outcome.status,
            "steps": outcome.steps,
            "retried_steps": outcome.retried_steps,
            "classifier": verdict,
            "fits": fits,
        });
        fs::write(dir.join("outcome.json"), serde_json::to_string_pretty(&record)?)?;
        fs::write(
            dir.join("norms.svg"),
            norms_plot(name, &outcome.probes, fits.as_deref()),
        )?;
        Ok(())
    })();
    if let Err(e) = result {
        row.error = e.to_string();
    }
    row
}

/// Runs every config of the sweep concurrently; failures are recorded per row.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepSummary> {
    spec.validate()?;
    fs::create_dir_all(&spec.out_dir)?;
    let jobs: Vec<(usize, &SimConfig)> = spec.runs.iter().enumerate().collect();
    let rows = par_map(&jobs, |&(i, cfg)| {
        let name = run_name(cfg, i);
        run_one(cfg, &name, &spec.out_dir.join(&name))
    });
    let summary = SweepSummary {
        seed: spec.seed,
        inconsistent: rows.iter().filter(|r| !r.consistent).map(|r| r.name.clone()).collect(),
        failed: rows
            .iter()
            .filter(|r| !r.error.is_empty())
            .map(|r| r.name.clone())
            .collect(),
        rows,
    };
    fs::write(spec.out_dir.join("summary.csv"), summary.to_csv()?)?;
    fs::write(
        spec.out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(summary)
}

/// Markdown digest of a sweep directory.
pub fn report(dir: &Path) -> Result<String> {
    let rows = read_summary(&dir.join("summary.csv"))?;
    let fmt = |x: Option<f64>| x.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
    let mut s = String::from("# Sweep report\n\n");
    let bad: Vec<&SummaryRow> = rows.iter().filter(|r| !r.consistent).collect();
    if !bad.is_empty() {
        s.push_str("**Inconsistent rows** (classifier Converges at small amplitude without reaching T_max):\n\n");
        for r in &bad {
            s.push_str(&format!("- {} ({})\n", r.name, r.status));
        }
        s.push('\n');
    }
    s.push_str("| run | μ₁ | μ₂ | ε | classifier | status | t* | u L∞ fit / pred | v L∞ fit / pred | decay |\n");
    s.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
    for r in &rows {
        s.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} / {} | {} / {} | {} |\n",
            r.name,
            r.mu1,
            r.mu2,
            r.amplitude,
            r.classifier,
            if r.error.is_empty() {
                r.status.clone()
            } else {
                format!("error: {}", r.error)
            },
            fmt(r.t_star),
            fmt(r.u_linf_fit),
            fmt(r.u_linf_pred),
            fmt(r.v_linf_fit),
            fmt(r.v_linf_pred),
            r.decay_verdict
        ));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
name = "s"
n = 1
p_c = 2.5
mu1 = "pow:0.5"
mu2 = "pow:0.5"
amplitude = 0.01
t_max = 2.0
dt = 0.1
grid_points = 256
sweep_amplitude = [0.01, 0.02]
sweep_moduli = ["pow:0.5;pow:0.5", "logpow:1;logpow:1"]
"#;

    #[test]
    fn parses_product() {
        let spec = SweepSpec::from_toml_str(BASE, "x".into(), None).unwrap();
        assert_eq!(spec.runs.len(), 4);
        assert_eq!(spec.runs[3].name.as_deref(), Some("s-003"));
        spec.validate().unwrap();
        let empty = SweepSpec {
            runs: vec![],
            out_dir: "x".into(),
            seed: 0,
        };
        assert!(empty.validate().is_err());
        let mut dup = spec.clone();
        dup.runs[1].name = dup.runs[0].name.clone();
        assert!(dup.validate().is_err());
    }

    #[test]
    fn header_matches_row_fields() {
        let spec = SweepSpec::from_toml_str(BASE, "x".into(), None).unwrap();
        let row = run_one(&spec.runs[0], "t", &tempfile::tempdir().unwrap().path().join("t"));
        let csv = summary_csv(std::slice::from_ref(&row)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("summary.csv"), &csv).unwrap();
        assert_eq!(read_summary(&dir.path().join("summary.csv")).unwrap(), vec![row]);
        assert!(report(dir.path()).unwrap().contains("| t |"));
    }
}
