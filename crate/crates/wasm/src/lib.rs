//! JSON-returning bindings used by the static demo page in `www/`.

use critwave::harness::curve_qc;
use critwave::modcont::{classify_dini, Modulus};
use critwave::solver::{simulate, SimConfig};
use critwave::spectral::multipliers;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn wrap(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn parse(lit: &str) -> Result<Modulus, String> {
    lit.parse().map_err(|e: critwave::Error| e.to_string())
}

/// Dini verdict for `(mu1, mu2)` with `q_c` solved from `(n, p_c)`.
#[wasm_bindgen]
pub fn classify(mu1: &str, mu2: &str, n: usize, p_c: f64) -> String {
    wrap((|| {
        let (a, b) = (parse(mu1)?, parse(mu2)?);
        let pair = curve_qc(n, p_c).map_err(|e| e.to_string())?;
        let c = 0.1f64.min(a.s_max()).min(b.s_max());
        Ok(json!({ "pair": pair, "verdict": classify_dini(&a, &b, pair.q_c, c) }))
    })())
}

/// `K0`, `K1` multipliers at time `t` on `count` frequencies in `[0, xi_max]`.
#[wasm_bindgen]
pub fn kernel_curves(t: f64, xi_max: f64, count: usize) -> String {
    wrap((|| {
        if !(t >= 0.0 && xi_max > 0.0 && count >= 2) {
            return Err("need t ≥ 0, xi_max > 0 and at least two samples".into());
        }
        let xi: Vec<f64> = (0..count).map(|i| xi_max * i as f64 / (count - 1) as f64).collect();
        let (k0, k1): (Vec<f64>, Vec<f64>) = xi
            .iter()
            .map(|&x| {
                let m = multipliers(t, x);
                (m.k0, m.k1)
            })
            .unzip();
        Ok(json!({ "xi": xi, "k0": k0, "k1": k1 }))
    })())
}

/// Small 1D run; returns the sup-norm history of `u` and `v`.
#[wasm_bindgen]
pub fn evolve_1d(p_c: f64, mu1: &str, mu2: &str, amplitude: f64, t_max: f64) -> String {
    wrap((|| {
        let mut cfg = SimConfig::new(1, p_c, parse(mu1)?, parse(mu2)?, amplitude, t_max);
        cfg.grid_points = Some(1024);
        cfg.dt = 0.02;
        cfg.probe_dt = cfg.dt;
        cfg.u0 = 0.0;
        cfg.v0 = 0.0;
        cfg.u1 = 1.0;
        cfg.v1 = 1.0;
        let out = simulate(&cfg).map_err(|e| e.to_string())?;
        let series = |name: &str| -> Vec<[f64; 2]> {
            out.probes
                .iter()
                .filter(|p| p.unknown == name)
                .map(|p| [p.t, p.linf])
                .collect()
        };
        Ok(json!({
            "status": out.status.label(),
            "t_star": out.status.t_star(),
            "u": series("u"),
            "v": series("v"),
        }))
    })())
}
