//! Picard iteration of the Duhamel map on a fixed time grid.

use super::config::SimConfig;
use super::integrator::{k1_moment, zero_spectrum};
use super::nonlinear::power_modulus;
use crate::error::Result;
use crate::modcont::loss_weight;
use crate::quad::GaussRule;
use crate::spectral::{evolve_spectra, gradient_l2, Fourier, Spectrum};
use serde::Serialize;

/// Distances at or below `FLOOR_ULPS · ε_mach · ‖Ψ(0)‖` count as converged.
const FLOOR_ULPS: f64 = 64.0;

#[derive(Debug, Clone, Serialize)]
pub struct PicardReport {
    /// `‖Ψᵏ(0) − Ψᵏ⁻¹(0)‖_{X(T)}` for `k = 1..`.
    pub distances: Vec<f64>,
    /// Ratios of consecutive distances above the round-off floor.
    pub ratios: Vec<f64>,
    /// Largest ratio above the floor; `None` if fewer than two such distances.
    pub contraction_factor: Option<f64>,
    pub round_off_floor: f64,
    pub monotone: bool,
    pub no_contraction: bool,
    pub non_finite: bool,
    /// Amplitude at or below the configured small-data bound.
    pub small_data: bool,
    pub horizon: f64,
    pub dt: f64,
}

/// Runs `iterations` Picard steps `(u, v) ↦ Ψ(u, v)` from `(0, 0)` on `[0, horizon]`.
pub fn picard_iterate(cfg: &SimConfig, iterations: usize, horizon: f64) -> Result<PicardReport> {
    let pair = cfg.validate()?;
    let mut run_cfg = cfg.clone();
    run_cfg.t_max = horizon;
    let grid = run_cfg.grid()?;
    let fourier = Fourier::new(grid);
    let xi = grid.wavenumber_magnitudes();
    let m = ((horizon / cfg.dt).round() as usize).max(1);
    let h = horizon / m as f64;
    let times: Vec<f64> = (0..=m).map(|i| i as f64 * h).collect();

    // linear part at every grid time
    let [u0, u1, v0, v1] = run_cfg.data(grid);
    let (su0, su1) = fourier.forward_pair(&u0.values, &u1.values);
    let (sv0, sv1) = fourier.forward_pair(&v0.values, &v1.values);
    let lin_u: Vec<Spectrum> = times
        .iter()
        .map(|&t| evolve_spectra(&fourier, &su0, &su1, t).0)
        .collect();
    let lin_v: Vec<Spectrum> = times
        .iter()
        .map(|&t| evolve_spectra(&fourier, &sv0, &sv1, t).0)
        .collect();

    // product-integration weights per lag d: P_d multiplies N_{i-d}, Q_d multiplies N_{i-d+1}
    let rule = GaussRule::new(16);
    let mut p_w = vec![vec![0.0; xi.len()]; m + 1];
    let mut q_w = vec![vec![0.0; xi.len()]; m + 1];
    let mut memo: std::collections::HashMap<u64, usize> = std::collections::HashMap::new();
    for (k, &x) in xi.iter().enumerate() {
        if let Some(&src) = memo.get(&x.to_bits()) {
            for d in 1..=m {
                p_w[d][k] = p_w[d][src];
                q_w[d][k] = q_w[d][src];
            }
            continue;
        }
        memo.insert(x.to_bits(), k);
        for d in 1..=m {
            let (a, b) = ((d - 1) as f64 * h, d as f64 * h);
            p_w[d][k] = k1_moment(&rule, x, a, b, |s| (s - a) / h);
            q_w[d][k] = k1_moment(&rule, x, a, b, |s| (b - s) / h);
        }
    }

    let ell = run_cfg.ell_config()?;
    let nf = cfg.n as f64;
    let sigma = pair.sigma;
    let weights: Vec<[f64; 6]> = times
        .iter()
        .map(|&t| -> Result<[f64; 6]> {
            let l = loss_weight(&ell, t)?;
            let w = 1.0 + t;
            Ok([
                w.powf(nf / 4.0 - sigma) / l,
                w.powf(nf / 4.0 + 0.5 - sigma) / l,
                w.powf(nf / 2.0 - sigma) / l,
                w.powf(nf / 4.0),
                w.powf(nf / 4.0 + 0.5),
                w.powf(nf / 2.0),
            ])
        })
        .collect::<Result<_>>()?;
    let cell = grid.cell();
    let x_norm = |du: &[Spectrum], dv: &[Spectrum]| -> f64 {
        let mut sup: f64 = 0.0;
        for i in 0..=m {
            let (pu, pv) = fourier.inverse_pair(&du[i], &dv[i]);
            let l2 = |x: &[f64]| (x.iter().map(|a| a * a).sum::<f64>() * cell).sqrt();
            let linf = |x: &[f64]| {
                x.iter().fold(
                    0.0f64,
                    |acc, a| if a.is_finite() { acc.max(a.abs()) } else { f64::INFINITY },
                )
            };
            let w = &weights[i];
            let val = w[0] * l2(&pu)
                + w[1] * gradient_l2(&fourier, &du[i])
                + w[2] * linf(&pu)
                + w[3] * l2(&pv)
                + w[4] * gradient_l2(&fourier, &dv[i])
                + w[5] * linf(&pv);
            sup = if val.is_nan() { f64::INFINITY } else { sup.max(val) };
        }
        sup
    };

    let len = xi.len();
    let mut cur_u: Vec<Spectrum> = vec![zero_spectrum(len); m + 1];
    let mut cur_v: Vec<Spectrum> = vec![zero_spectrum(len); m + 1];
    let mut distances = Vec::with_capacity(iterations);
    let mut non_finite = false;
    for _ in 0..iterations {
        // sources along the current iterate
        let mut nu: Vec<Spectrum> = Vec::with_capacity(m + 1);
        let mut nv: Vec<Spectrum> = Vec::with_capacity(m + 1);
        let mut buf_u = vec![0.0; len];
        let mut buf_v = vec![0.0; len];
        for i in 0..=m {
            let (pu, pv) = fourier.inverse_pair(&cur_u[i], &cur_v[i]);
            if cfg.nonlinear {
                power_modulus(&pv, pair.p_c, &cfg.mu1, cfg.clamp, &mut buf_u)?;
                power_modulus(&pu, pair.q_c, &cfg.mu2, cfg.clamp, &mut buf_v)?;
            }
            let (a, b) = fourier.forward_pair(&buf_u, &buf_v);
            nu.push(a);
            nv.push(b);
        }
        let mut next_u = lin_u.clone();
        let mut next_v = lin_v.clone();
        if cfg.nonlinear {
            for i in 1..=m {
                for d in 1..=i {
                    let (j0, j1) = (i - d, i - d + 1);
                    let (pw, qw) = (&p_w[d], &q_w[d]);
                    let (ou, ov) = (&mut next_u[i], &mut next_v[i]);
                    for k in 0..len {
                        ou[k] += nu[j0][k] * pw[k] + nu[j1][k] * qw[k];
                        ov[k] += nv[j0][k] * pw[k] + nv[j1][k] * qw[k];
                    }
                }
            }
        }
        let du: Vec<Spectrum> = next_u
            .iter()
            .zip(&cur_u)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        let dv: Vec<Spectrum> = next_v
            .iter()
            .zip(&cur_v)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        let d = x_norm(&du, &dv);
        distances.push(d);
        cur_u = next_u;
        cur_v = next_v;
        if !d.is_finite() {
            non_finite = true;
            break;
        }
    }

    let floor = FLOOR_ULPS * f64::EPSILON * distances.first().copied().unwrap_or(0.0);
    let mut ratios = Vec::new();
    let mut monotone = true;
    let mut growth_run = 0;
    let mut no_contraction = non_finite;
    for w in distances.windows(2) {
        if w[1] <= floor {
            growth_run = 0;
            continue;
        }
        if w[0] > floor {
            ratios.push(w[1] / w[0]);
        }
        if w[1] > w[0] {
            monotone = false;
            growth_run += 1;
            if growth_run >= 3 {
                no_contraction = true;
            }
        } else {
            growth_run = 0;
        }
    }
    if non_finite {
        monotone = false;
    }
    let contraction_factor = ratios
        .iter()
        .copied()
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
    Ok(PicardReport {
        distances,
        ratios,
        contraction_factor,
        round_off_floor: floor,
        monotone,
        no_contraction,
        non_finite,
        small_data: cfg.amplitude <= cfg.eps0,
        horizon,
        dt: h,
    })
}
