//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Exits 0 once every criterion has been evaluated, whatever the verdicts, so the
//! workspace test run reports the table instead of aborting on it. Set
//! `CRITWAVE_ACCEPTANCE_STRICT=1` to turn any FAIL into a nonzero exit.

use critwave::blowup::{
    default_ladder, g_and_big_g, jensen_check, qstar_exponent, ConvexPhi, TestFunction, Trajectory,
};
use critwave::harness::{matsumura_check, run_fits, run_sweep, MatsumuraSpec, NormKind, SweepSpec, Unknown, Verdict};
use critwave::modcont::{classify_dini, dini_integral, DiniStatus, Modulus};
use critwave::solver::{picard_iterate, simulate, simulate_with, Profile, RunHooks, SimConfig, SimStatus};
use critwave::spectral::{kernel_multiplier, linear_evolve, multipliers, Kernel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn m(lit: &str) -> Modulus {
    lit.parse().unwrap()
}

fn ac1() -> Outcome {
    use DiniStatus::*;
    let started = Instant::now();
    // (mu1, mu2, q_c, expected)
    let table: Vec<(&str, &str, f64, DiniStatus)> = vec![
        ("pow:0.1", "pow:0.1", 6.0, Converges),
        ("pow:0.5", "pow:0.5", 6.0, Converges),
        ("pow:1", "pow:1", 4.0, Converges),
        ("pow:0.3", "pow:1", 4.0, Converges),
        ("logpow:1.1", "logpow:1.1", 6.0, Converges),
        ("logpow:1.5", "logpow:3", 4.0, Converges),
        ("iterlog:2:1.1", "iterlog:2:1.1", 6.0, Converges),
        ("iterlog:3:2", "iterlog:3:2", 4.0, Converges),
        // one side diverges alone, weighted exponent above 1
        ("logpow:1", "logpow:1.5", 6.0, Converges),
        ("logpow:1.5", "logpow:0.5", 6.0, Converges),
        ("logpow:0.9", "logpow:2", 4.0, Converges),
        ("iterlog:2:1", "iterlog:2:1.5", 6.0, Converges),
        ("iterlog:2:1.5", "iterlog:2:0.5", 6.0, Converges),
        // weighted exponent at most 1
        ("logpow:1", "logpow:1", 6.0, Diverges),
        ("logpow:0.5", "logpow:0.5", 4.0, Diverges),
        ("logpow:1.05", "logpow:0.5", 6.0, Diverges),
        ("logpow:0.5", "logpow:3", 6.0, Diverges),
        ("logpow:1.2", "logpow:0.2", 4.0, Diverges),
        ("iterlog:2:1", "iterlog:2:1", 6.0, Diverges),
        ("iterlog:3:0.5", "iterlog:3:0.8", 4.0, Diverges),
        ("iterlog:2:1.1", "iterlog:2:0.2", 4.0, Diverges),
    ];
    let mut wrong = Vec::new();
    for (a, b, q, want) in &table {
        let (mu1, mu2) = (m(a), m(b));
        let c = 0.1f64.min(mu1.s_max()).min(mu2.s_max());
        let v = classify_dini(&mu1, &mu2, *q, c);
        if v.status != *want {
            wrong.push(format!("{a},{b},q={q}: {:?}", v.status));
        }
    }
    let secs = started.elapsed().as_secs_f64();
    (
        wrong.is_empty() && secs < 1.0,
        format!(
            "{}/{} verdicts agree in {secs:.2}s {}",
            table.len() - wrong.len(),
            table.len(),
            wrong.join("; ")
        ),
    )
}

fn rk4(xi: f64, w0: f64, w1: f64, t: f64) -> (f64, f64) {
    let steps = ((t * xi.max(1.0) / 2e-4).ceil() as usize).max(1);
    let h = t / steps as f64;
    let f = |w: f64, z: f64| (z, -z - xi * xi * w);
    let (mut w, mut z) = (w0, w1);
    for _ in 0..steps {
        let k1 = f(w, z);
        let k2 = f(w + 0.5 * h * k1.0, z + 0.5 * h * k1.1);
        let k3 = f(w + 0.5 * h * k2.0, z + 0.5 * h * k2.1);
        let k4 = f(w + h * k3.0, z + h * k3.1);
        w += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        z += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    (w, z)
}

fn ac2() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let t = rng.gen_range(0.0..30.0);
        let xi = rng.gen_range(0.0..4.0);
        let mu = multipliers(t, xi);
        let (a, _) = rk4(xi, 1.0, 0.0, t);
        let (b, _) = rk4(xi, 0.0, 1.0, t);
        worst = worst
            .max((mu.k0 - a).abs() / a.abs().max(1e-300))
            .max((mu.k1 - b).abs() / b.abs().max(1e-300));
    }
    let mut zero: f64 = 0.0;
    for t in [0.0, 0.5, 1.0, 7.0, 50.0] {
        zero = zero
            .max((kernel_multiplier(t, 0.0, Kernel::K0) - 1.0).abs())
            .max((kernel_multiplier(t, 0.0, Kernel::K1) - (1.0 - (-t).exp())).abs());
    }
    let secs = started.elapsed().as_secs_f64();
    (
        worst <= 1e-9 && zero <= 1e-12 && secs < 10.0,
        format!("max rel err {worst:.2e}, zero-mode err {zero:.1e}, {secs:.1}s"),
    )
}

fn ac3() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, t_max) in [(1, 800.0), (2, 200.0)] {
        let rep = matsumura_check(&MatsumuraSpec::new(n, Profile::Gaussian, t_max)).unwrap();
        for r in &rep.reports {
            ok &= r.verdict == Verdict::Pass;
            parts.push(format!("n={n} {} {:.3} (pred {:.2})", r.norm, r.fitted, r.predicted));
        }
    }
    (ok, parts.join(", "))
}

fn ac4() -> Outcome {
    let mu = m("pow:0.5");
    let mut cfg = SimConfig::new(1, 2.5, mu.clone(), mu, 1e-2, 800.0);
    cfg.dt = 0.1;
    let out = simulate(&cfg).unwrap();
    if out.status != SimStatus::ReachedTmax {
        return (false, format!("status {}", out.status.label()));
    }
    let fits = run_fits(&cfg, &out).unwrap().unwrap();
    let pick = |u: Unknown| {
        fits.iter()
            .find(|f| f.unknown == u && f.norm == NormKind::Linf)
            .unwrap()
    };
    let (fu, fv) = (pick(Unknown::U), pick(Unknown::V));
    let pass = (fv.effective() + 0.5).abs() <= 0.1 && (fu.effective() + 0.25).abs() <= 0.1;
    (
        pass,
        format!(
            "ReachedTmax; v Linf {:.3} (target -0.5), u Linf {:.3} (target -0.25, l-compensated; within upper bound: {})",
            fv.effective(),
            fu.effective(),
            fu.within_bound
        ),
    )
}

fn manufactured_error(dt: f64) -> f64 {
    let amp = 0.5;
    let mu = m("pow:0.5");
    let mut c = SimConfig::new(1, 2.5, mu.clone(), mu.clone(), amp, 1.0);
    c.grid_points = Some(256);
    c.half_length = Some(20.0);
    c.dt = dt;
    c.u1 = -1.0;
    c.v1 = -1.0;
    let pair = c.validate().unwrap();
    let grid = c.grid().unwrap();
    let axis = grid.axis();
    let g: Vec<f64> = axis.iter().map(|x| amp * (-x * x).exp()).collect();
    let lap: Vec<f64> = axis.iter().zip(&g).map(|(x, gv)| (4.0 * x * x - 2.0) * gv).collect();
    let forcing = move |t: f64| {
        let e = (-t).exp();
        let mut fu = Vec::with_capacity(g.len());
        let mut fv = Vec::with_capacity(g.len());
        for (gv, lv) in g.iter().zip(&lap) {
            let s = (e * gv).abs();
            fu.push(-e * lv - s.powf(pair.p_c) * mu.eval_clamped(s));
            fv.push(-e * lv - s.powf(pair.q_c) * mu.eval_clamped(s));
        }
        (fu, fv)
    };
    let fin = simulate_with(
        &c,
        RunHooks {
            forcing: Some(&forcing),
            keep_final: true,
            ..Default::default()
        },
    )
    .unwrap()
    .final_state
    .unwrap();
    let cell = grid.cell();
    let exact: Vec<f64> = axis.iter().map(|x| amp * (-1.0f64).exp() * (-x * x).exp()).collect();
    let err = |w: &[f64]| (w.iter().zip(&exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>() * cell).sqrt();
    err(&fin.u.values).max(err(&fin.v.values))
}

fn ac5() -> Outcome {
    let errs: Vec<f64> = [0.1, 0.05, 0.025, 0.0125]
        .iter()
        .map(|&dt| manufactured_error(dt))
        .collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let mu = m("pow:0.5");
    let mut c = SimConfig::new(1, 2.5, mu.clone(), mu, 1.0, 5.0);
    c.nonlinear = false;
    c.grid_points = Some(512);
    c.half_length = Some(40.0);
    c.dt = 0.1;
    c.u1 = 0.5;
    let fin = simulate_with(
        &c,
        RunHooks {
            keep_final: true,
            ..Default::default()
        },
    )
    .unwrap()
    .final_state
    .unwrap();
    let grid = c.grid().unwrap();
    let [u0, u1, ..] = c.data(grid);
    let (w, _) = linear_evolve(&u0, &u1, 5.0).unwrap();
    let gap = (fin
        .u
        .values
        .iter()
        .zip(&w.values)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        * grid.cell())
    .sqrt();
    (
        orders.iter().all(|&o| o >= 1.9) && gap <= 1e-10,
        format!(
            "orders {:?}, linear L2 gap {gap:.1e}",
            orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>()
        ),
    )
}

fn ac6() -> Outcome {
    let mu = m("pow:0.5");
    let mut c = SimConfig::new(1, 2.5, mu.clone(), mu, 1e-3, 10.0);
    c.grid_points = Some(512);
    c.half_length = Some(40.0);
    c.dt = 0.1;
    let rep = picard_iterate(&c, 8, 10.0).unwrap();
    let factor = rep.contraction_factor.unwrap_or(f64::INFINITY);
    (
        rep.distances.len() >= 5 && rep.monotone && factor < 0.9,
        format!(
            "{} iterations, monotone {}, factor {factor:.2e}",
            rep.distances.len(),
            rep.monotone
        ),
    )
}

fn ac7() -> Outcome {
    let radii = [2.0, 4.0, 8.0, 20.0];
    let e1 = qstar_exponent(1, &radii, 0.02).unwrap();
    let e2 = qstar_exponent(2, &radii, 0.05).unwrap();

    let mu = m("logpow:1");
    let mut cfg = SimConfig::new(1, 2.5, mu.clone(), mu.clone(), 0.5, 100.0);
    cfg.u0 = 0.0;
    cfg.v0 = 0.0;
    cfg.u1 = 1.0;
    cfg.v1 = 1.0;
    cfg.grid_points = Some(2048);
    cfg.snapshot_dt = Some(0.25);
    let pair = cfg.pair().unwrap();
    let (traj, _) = Trajectory::record(&cfg, 12.0).unwrap();
    let nu = TestFunction::for_pair(&pair).nu;
    let radii = default_ladder(traj.horizon());
    let ledger = g_and_big_g(&traj, &pair, &mu, &mu, nu, &radii).unwrap();
    let resid = ledger.max_deriv_residual();
    let phi = ConvexPhi::new(pair.q_c, &mu, 0.1).unwrap();
    let mut violations = 0;
    for &r in &radii {
        violations += jensen_check(&traj, &phi, r, nu).unwrap().violations;
    }

    let blow = |dt: f64| {
        let mut c = SimConfig::new(1, 2.5, mu.clone(), mu.clone(), 50.0, 5.0);
        c.u0 = 0.0;
        c.v0 = 0.0;
        c.u1 = 1.0;
        c.v1 = 1.0;
        c.grid_points = Some(2048);
        c.dt = dt;
        simulate(&c).unwrap().status.t_star()
    };
    let (ta, tb) = (blow(0.005), blow(0.0025));
    let drift = match (ta, tb) {
        (Some(a), Some(b)) => (a - b).abs() / b,
        _ => f64::INFINITY,
    };
    (
        (e1 - 3.0).abs() <= 0.05 && (e2 - 4.0).abs() <= 0.05 && resid <= 0.05 && violations == 0 && drift <= 0.05,
        format!(
            "Q* exponents {e1:.3}/{e2:.3}, G'R=g residual {:.2}%, Jensen violations {violations}, t* {:?}/{:?} drift {:.1}%",
            100.0 * resid,
            ta,
            tb,
            100.0 * drift
        ),
    )
}

fn ac8() -> Outcome {
    let lp2 = m("logpow:2");
    let a = dini_integral(&lp2, &lp2, 1.0, 0.0, 0.1, 0.0).unwrap().value;
    let b = dini_integral(&lp2, &lp2, 0.0, 0.0, 0.1, 0.01).unwrap().value;
    let ea = (a - 1.0 / 10f64.ln()).abs();
    let eb = (b - 10f64.ln()).abs();
    // partial sums against ln ln(1/ε): each squaring of 1/ε adds ln 2
    let lp1 = m("logpow:1");
    let q = 6.0;
    let partial: Vec<f64> = [1e-4, 1e-8, 1e-16, 1e-32, 1e-64, 1e-128, 1e-256]
        .iter()
        .map(|&eps| {
            dini_integral(&lp1, &lp1, q / (q + 1.0), 1.0 / (q + 1.0), 0.1, eps)
                .unwrap()
                .value
        })
        .collect();
    let steps: Vec<f64> = partial.windows(2).map(|w| w[1] - w[0]).collect();
    let loglog = steps.iter().all(|s| (s - 2f64.ln()).abs() < 1e-6);
    let v = classify_dini(&lp1, &lp1, q, 0.1);
    (
        ea <= 1e-8 && eb <= 1e-8 && loglog && v.evidence_divergent,
        format!(
            "closed-form errors {ea:.1e}/{eb:.1e}; partial-sum steps {:.6} (ln 2 = 0.693147)",
            steps[0]
        ),
    )
}

fn ac9() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let pow = m("pow:0.5");
    let log = m("logpow:1");
    let spec = |dir: &std::path::Path| {
        let mut a = SimConfig::new(1, 2.5, pow.clone(), pow.clone(), 0.01, 120.0);
        a.name = Some("a".into());
        a.dt = 0.1;
        a.grid_points = Some(2048);
        let mut b = SimConfig::new(1, 2.5, log.clone(), log.clone(), 50.0, 2.0);
        b.name = Some("b".into());
        b.u0 = 0.0;
        b.v0 = 0.0;
        b.u1 = 1.0;
        b.v1 = 1.0;
        b.dt = 0.005;
        b.grid_points = Some(2048);
        SweepSpec {
            runs: vec![a, b],
            out_dir: dir.to_path_buf(),
            seed: 1234,
        }
    };
    for d in &dirs {
        run_sweep(&spec(d.path())).unwrap();
    }
    let files = [
        "summary.csv",
        "summary.json",
        "a/probes.csv",
        "b/probes.csv",
        "a/outcome.json",
    ];
    let same = files
        .iter()
        .filter(|f| std::fs::read(dirs[0].path().join(f)).unwrap() == std::fs::read(dirs[1].path().join(f)).unwrap())
        .count();
    (
        same == files.len(),
        format!("{same}/{} files byte-identical", files.len()),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("AC1 classifier table", ac1),
        ("AC2 multiplier exactness", ac2),
        ("AC3 Matsumura rates", ac3),
        ("AC4 nonlinear decay", ac4),
        ("AC5 solver order", ac5),
        ("AC6 Picard contraction", ac6),
        ("AC7 blow-up machinery", ac7),
        ("AC8 Dini quadrature", ac8),
        ("AC9 determinism", ac9),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let started = Instant::now();
        let (ok, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            (false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        failed += !ok as usize;
        println!(
            "{} {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/9 PASS", 9 - failed);
    if failed > 0 && std::env::var("CRITWAVE_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
