use crate::{BlowupArgs, ClassifyArgs, Cli, Command, CurveArgs, LinearDecayArgs, PicardArgs, SweepArgs};
use anyhow::{bail, Context, Result};
use critwave::blowup::{
    default_ladder, g_and_big_g, inverse_mass_profile, jensen_check, ladder, ode_inequality_check, ConvexPhi,
    TestFunction, Trajectory, DERIV_STEP,
};
use critwave::harness::plot::{loglog_svg, slope_guide, Series};
use critwave::harness::{
    curve_qc, gn_monte_carlo, linear_exponent, matsumura_check, norms_plot, predicted_exponents, report, run_fits,
    run_sweep, GnSpec, MatsumuraSpec, NormKind, SweepSpec, Unknown,
};
use critwave::modcont::{classify_dini, CriticalPair, Modulus};
use critwave::solver::{picard_iterate, simulate_with, Profile, RunHooks, SimConfig, SimState};
use critwave::spectral::{write_probes, write_snapshot, Grid};
use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};

pub fn run(cli: Cli) -> Result<()> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let out = cli.out.clone();
    let seed = cli.seed;
    let summary = match cli.command {
        Command::Classify(a) => classify(&a)?,
        Command::Curve(a) => curve(&a)?,
        Command::LinearDecay(a) => linear_decay(&a, &out, seed.unwrap_or(0))?,
        Command::Simulate(a) => simulate(&a.config, &out)?,
        Command::Picard(a) => picard(&a, &out)?,
        Command::BlowupScan(a) => blowup_scan(&a, &out)?,
        Command::Sweep(a) => sweep(&a, &out, seed)?,
        Command::Report(a) => {
            let dir = a.dir.unwrap_or_else(|| out.clone());
            let md = report(&dir)?;
            fs::write(dir.join("report.md"), &md)?;
            return emit(&md);
        }
    };
    emit(&(serde_json::to_string_pretty(&summary)? + "\n"))
}

// a closed pipe (e.g. `| head`) is not an error
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn load(path: &Path) -> Result<SimConfig> {
    SimConfig::from_file(path).with_context(|| format!("loading {}", path.display()))
}

fn run_dir(out: &Path, cfg: &SimConfig) -> PathBuf {
    match &cfg.name {
        Some(n) => out.join(n),
        None => out.to_path_buf(),
    }
}

fn classify(a: &ClassifyArgs) -> Result<Value> {
    let mu1: Modulus = a.mu1.parse()?;
    let mu2: Modulus = a.mu2.parse()?;
    let q_c = match (a.q_c, a.n, a.p_c) {
        (Some(q), _, _) => q,
        (None, Some(n), Some(p)) => curve_qc(n, p)?.q_c,
        _ => bail!("give --q-c, or both --n and --p-c"),
    };
    let c = a.c.min(mu1.s_max()).min(mu2.s_max());
    Ok(json!({ "q_c": q_c, "c": c, "verdict": classify_dini(&mu1, &mu2, q_c, c) }))
}

fn exponent_table(pair: &CriticalPair) -> Value {
    let mut rows = Vec::new();
    for u in [Unknown::U, Unknown::V] {
        for k in [NormKind::L2, NormKind::GradL2, NormKind::Linf] {
            rows.push(json!({
                "unknown": u,
                "norm": k,
                "predicted": predicted_exponents(pair, u, k),
                "linear": linear_exponent(pair.n, k),
            }));
        }
    }
    Value::Array(rows)
}

fn curve(a: &CurveArgs) -> Result<Value> {
    let pair = curve_qc(a.n, a.p_c)?;
    Ok(json!({ "pair": pair, "exponents": exponent_table(&pair) }))
}

fn linear_decay(a: &LinearDecayArgs, out: &Path, seed: u64) -> Result<Value> {
    let profile: Profile = a.profile.parse()?;
    let t_max = a.t_max.unwrap_or(if a.n == 1 { 800.0 } else { 200.0 });
    let mut spec = MatsumuraSpec::new(a.n, profile, t_max);
    spec.width = a.width;
    spec.points = a.points;
    let rep = matsumura_check(&spec)?;
    fs::create_dir_all(out)?;
    write_probes(&out.join("linear_probes.csv"), &rep.probes)?;

    let colors = ["#1f5fbf", "#c0392b", "#27ae60"];
    let mut series = Vec::new();
    for (r, color) in rep.reports.iter().zip(colors) {
        let pts: Vec<(f64, f64)> = rep.probes.iter().map(|p| (1.0 + p.t, r.norm.of(p))).collect();
        if let Some(&anchor) = pts.first() {
            series.push(slope_guide(
                format!("{} predicted {:.3}", r.norm, r.predicted),
                color,
                r.predicted,
                anchor,
                1.0 + t_max,
            ));
        }
        series.push(Series {
            label: format!("{} fit {:.3}", r.norm, r.fitted),
            color,
            points: pts,
            dashed: false,
        });
    }
    fs::write(
        out.join("linear_decay.svg"),
        loglog_svg("linear decay", "1 + t", "norm", &series),
    )?;

    let gn = if a.gn_draws > 0 {
        let grid = Grid::new(1, 20.0, 1024)?;
        let gspec = GnSpec {
            j: 0,
            m: 1,
            theta: 0.25,
            r: 4.0,
            r1: 2.0,
            r2: 2.0,
        };
        Some(gn_monte_carlo(grid, &gspec, a.gn_draws, seed)?)
    } else {
        None
    };
    let summary = json!({
        "n": rep.n,
        "profile": rep.profile,
        "t_max": rep.t_max,
        "data_integral": rep.data_integral,
        "reports": rep.reports,
        "gn_monte_carlo": gn,
        "seed": seed,
        "probes_csv_path": out.join("linear_probes.csv"),
    });
    write_json(&out.join("linear_decay.json"), &summary)?;
    Ok(summary)
}

fn simulate(config: &Path, out: &Path) -> Result<Value> {
    let cfg = load(config)?;
    let dir = run_dir(out, &cfg);
    fs::create_dir_all(&dir)?;
    let snaps = dir.join("snapshots");
    if cfg.snapshot_dt.is_some() {
        fs::create_dir_all(&snaps)?;
    }
    let mut index = 0usize;
    let mut save = |s: &SimState| -> critwave::Result<()> {
        write_snapshot(&snaps.join(format!("u-{index:05}.bin")), &s.u, s.t, "u")?;
        write_snapshot(&snaps.join(format!("v-{index:05}.bin")), &s.v, s.t, "v")?;
        index += 1;
        Ok(())
    };
    let outcome = simulate_with(
        &cfg,
        RunHooks {
            on_snapshot: Some(&mut save),
            ..Default::default()
        },
    )?;
    let probes_path = dir.join("probes.csv");
    write_probes(&probes_path, &outcome.probes)?;
    let fits = run_fits(&cfg, &outcome)?;
    fs::write(
        dir.join("norms.svg"),
        norms_plot(
            cfg.name.as_deref().unwrap_or("simulation"),
            &outcome.probes,
            fits.as_deref(),
        ),
    )?;
    let grid = cfg.grid()?;
    let mut summary = json!({
        "status": outcome.status.label(),
        "probes_csv_path": probes_path,
        "config_echo": cfg,
        "wall_time_s": outcome.wall_time_s,
        "steps": outcome.steps,
        "retried_steps": outcome.retried_steps,
        "box_half_length": grid.half_length,
        "grid_points": grid.points,
        "fits": fits,
    });
    if let Some(t) = outcome.status.t_star() {
        summary["t_star"] = json!(t);
    }
    write_json(&dir.join("outcome.json"), &summary)?;
    Ok(summary)
}

fn picard(a: &PicardArgs, out: &Path) -> Result<Value> {
    let cfg = load(&a.config)?;
    let horizon = a.horizon.unwrap_or(cfg.t_max);
    let rep = picard_iterate(&cfg, a.iterations, horizon)?;
    let dir = run_dir(out, &cfg);
    fs::create_dir_all(&dir)?;
    let mut csv = String::from("k,distance\n");
    for (k, d) in rep.distances.iter().enumerate() {
        csv.push_str(&format!("{},{d:e}\n", k + 1));
    }
    fs::write(dir.join("picard.csv"), csv)?;
    let summary = json!({ "config_echo": cfg, "report": rep });
    write_json(&dir.join("picard.json"), &summary)?;
    Ok(summary)
}

fn parse_ladder(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        bail!("--ladder expects R0,ratio,count, got {text:?}");
    }
    let r0: f64 = parts[0].parse().context("ladder R0")?;
    let ratio: f64 = parts[1].parse().context("ladder ratio")?;
    let count: usize = parts[2].parse().context("ladder count")?;
    Ok(ladder(r0, ratio, count)?)
}

fn blowup_scan(a: &BlowupArgs, out: &Path) -> Result<Value> {
    let mut cfg = load(&a.config)?;
    let pair = cfg.validate()?;
    let radii = match &a.ladder {
        Some(text) => parse_ladder(text)?,
        None => default_ladder(cfg.t_max),
    };
    let Some(&top) = radii.last() else {
        bail!(
            "t_max = {} is too short for the default ladder starting at R = 4",
            cfg.t_max
        );
    };
    if cfg.snapshot_dt.is_none() {
        cfg.snapshot_dt = Some(0.25);
        log::info!("snapshot_dt not set, using 0.25");
    }
    let crop = top * DERIV_STEP.exp() * 1.01;
    let (traj, outcome) = Trajectory::record(&cfg, crop)?;
    if !traj.admissible_data {
        log::warn!("data is not of the form u0 = v0 = 0 with positive velocities; the ledger is descriptive only");
    }
    let tf = match a.nu {
        Some(nu) => TestFunction::with_nu(&pair, nu)?,
        None => TestFunction::for_pair(&pair),
    };
    let mut ledger = g_and_big_g(&traj, &pair, &cfg.mu1, &cfg.mu2, tf.nu, &radii)?;
    let r0 = a.r0.unwrap_or(radii[0]);
    let ode = ode_inequality_check(&ledger, &pair, &cfg.mu1, &cfg.mu2, a.c0, r0, traj.admissible_data);
    if let Ok(rep) = &ode {
        ledger.attach(rep);
    }
    let dir = run_dir(out, &cfg);
    fs::create_dir_all(&dir)?;
    let ledger_path = dir.join("ledger.csv");
    fs::write(&ledger_path, ledger.to_csv()?)?;

    let jensen = ConvexPhi::new(pair.q_c, &cfg.mu2, a.phi_cap.min(cfg.mu2.s_max())).and_then(|phi| {
        let j = jensen_check(&traj, &phi, radii[0], tf.nu)?;
        let m = inverse_mass_profile(&traj, &phi, &radii)?;
        Ok((j, m))
    });
    let (jensen_json, mass_json) = match jensen {
        Ok((j, m)) => (json!(j), json!(m)),
        Err(e) => (json!({ "error": e.to_string() }), Value::Null),
    };
    let ode_json = match ode {
        Ok(r) => json!(r),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let summary = json!({
        "status": outcome.status.label(),
        "t_star": outcome.status.t_star(),
        "horizon": traj.horizon(),
        "nu": tf.nu,
        "ladder": radii,
        "ledger_csv_path": ledger_path,
        "max_deriv_residual": ledger.max_deriv_residual(),
        "oracle_gap": ledger.oracle_gap,
        "g_nondecreasing": ledger.g_nondecreasing(),
        "ode": ode_json,
        "jensen": jensen_json,
        "inverse_mass": mass_json,
        "admissible_data": traj.admissible_data,
        "config_echo": cfg,
    });
    write_json(&dir.join("blowup.json"), &summary)?;
    Ok(summary)
}

fn sweep(a: &SweepArgs, out: &Path, seed: Option<u64>) -> Result<Value> {
    let text = fs::read_to_string(&a.spec).with_context(|| format!("reading {}", a.spec.display()))?;
    let spec = SweepSpec::from_toml_str(&text, out.to_path_buf(), seed)?;
    let summary = run_sweep(&spec)?;
    if !summary.inconsistent.is_empty() {
        eprintln!(
            "WARNING: runs contradicting their classifier verdict: {}",
            summary.inconsistent.join(", ")
        );
    }
    if !summary.failed.is_empty() {
        eprintln!("warning: failed runs: {}", summary.failed.join(", "));
    }
    Ok(json!({
        "seed": summary.seed,
        "runs": summary.rows.len(),
        "inconsistent": summary.inconsistent,
        "failed": summary.failed,
        "summary_csv_path": out.join("summary.csv"),
    }))
}
