use super::config::SimConfig;
use super::integrator::{Forcing, Integrator, SimState, SpectralState, StepCoeffs};
use crate::error::{Error, Result};
use crate::spectral::{gradient_l2, GridField, NormProbe};
use serde::{Deserialize, Serialize};

/// Largest number of successive step halvings tried on a non-finite step.
pub const MAX_HALVINGS: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum SimStatus {
    ReachedTmax,
    /// `t_star`: first step time at which a sup norm exceeded the threshold.
    BlowUpDetected {
        t_star: f64,
    },
    NumericalFailure {
        t: f64,
    },
}

impl SimStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SimStatus::ReachedTmax => "ReachedTmax",
            SimStatus::BlowUpDetected { .. } => "BlowUpDetected",
            SimStatus::NumericalFailure { .. } => "NumericalFailure",
        }
    }

    pub fn t_star(&self) -> Option<f64> {
        match self {
            SimStatus::BlowUpDetected { t_star } => Some(*t_star),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub status: SimStatus,
    pub probes: Vec<NormProbe>,
    pub wall_time_s: f64,
    pub steps: usize,
    /// Steps that needed halving.
    pub retried_steps: usize,
    pub final_state: Option<SimState>,
}

impl SimOutcome {
    pub fn probes_for(&self, unknown: &str) -> Vec<NormProbe> {
        self.probes.iter().filter(|p| p.unknown == unknown).cloned().collect()
    }
}

/// Called with each recorded physical state.
pub type SnapshotHook<'a> = &'a mut dyn FnMut(&SimState) -> Result<()>;

/// Optional hooks for [`simulate_with`].
#[derive(Default)]
pub struct RunHooks<'a> {
    pub forcing: Option<Forcing<'a>>,
    pub on_snapshot: Option<SnapshotHook<'a>>,
    pub keep_final: bool,
}

pub fn simulate(cfg: &SimConfig) -> Result<SimOutcome> {
    simulate_with(cfg, RunHooks::default())
}

fn probe_row(t: f64, unknown: &str, vals: &[f64], spec_h1: f64, cell: f64) -> NormProbe {
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    let mut linf: f64 = 0.0;
    for &v in vals {
        let a = v.abs();
        l1 += a;
        l2 += a * a;
        linf = linf.max(a);
    }
    NormProbe {
        t,
        unknown: unknown.into(),
        l1: l1 * cell,
        l2: (l2 * cell).sqrt(),
        linf,
        h1: spec_h1,
    }
}

// wasm32-unknown-unknown has no monotonic clock; timings read as zero there
#[cfg(not(target_arch = "wasm32"))]
fn clock() -> f64 {
    use std::sync::OnceLock;
    use std::time::Instant;
    static START: OnceLock<Instant> = OnceLock::new();
    START.get_or_init(Instant::now).elapsed().as_secs_f64()
}

#[cfg(target_arch = "wasm32")]
fn clock() -> f64 {
    0.0
}

fn count(span: f64, dt: f64) -> usize {
    ((span / dt).round() as usize).max(1)
}

pub fn simulate_with(cfg: &SimConfig, mut hooks: RunHooks) -> Result<SimOutcome> {
    let started = clock();
    let pair = cfg.validate()?;
    let grid = cfg.grid()?;
    let integ = Integrator::new(
        grid,
        pair.p_c,
        pair.q_c,
        cfg.mu1.clone(),
        cfg.mu2.clone(),
        cfg.clamp,
        cfg.nonlinear,
    );
    let [u0, u1, v0, v1] = cfg.data(grid);
    let init = SimState {
        u: u0,
        ut: u1,
        v: v0,
        vt: v1,
        t: 0.0,
    };
    let mut state = integ.to_spectral(&init);
    let steps = count(cfg.t_max, cfg.dt);
    let dt = cfg.t_max / steps as f64;
    let probe_every = count(cfg.probe_dt, dt);
    let snap_every = cfg.snapshot_dt.map(|s| count(s, dt));
    // coefficient sets for h = dt / 2^level, built on demand
    let mut levels: Vec<StepCoeffs> = vec![integ.coeffs(dt)];
    let cell = grid.cell();
    let mut probes = Vec::new();
    let mut retried = 0;
    let mut status = SimStatus::ReachedTmax;

    for i in 0..=steps {
        let t = i as f64 * dt;
        state.t = t;
        let (u, v) = integ.fourier.inverse_pair(&state.u, &state.v);
        let sup = u.iter().chain(&v).fold(
            0.0f64,
            |m, x| if x.is_finite() { m.max(x.abs()) } else { f64::INFINITY },
        );
        if !sup.is_finite() {
            status = SimStatus::NumericalFailure { t };
            break;
        }
        if i % probe_every == 0 || i == steps || sup > cfg.blowup_threshold {
            probes.push(probe_row(t, "u", &u, gradient_l2(&integ.fourier, &state.u), cell));
            probes.push(probe_row(t, "v", &v, gradient_l2(&integ.fourier, &state.v), cell));
        }
        if let (Some(every), Some(cb)) = (snap_every, hooks.on_snapshot.as_deref_mut()) {
            if i % every == 0 {
                cb(&integ.to_physical(&state))?;
            }
        }
        if sup > cfg.blowup_threshold {
            status = SimStatus::BlowUpDetected { t_star: t };
            break;
        }
        if i == steps {
            break;
        }
        match advance(&integ, &state, &mut levels, (&u, &v), hooks.forcing) {
            Ok((next, halved)) => {
                retried += halved as usize;
                state = next;
            }
            Err(Error::NonFiniteOutput { .. }) => {
                status = SimStatus::NumericalFailure { t };
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let final_state = hooks.keep_final.then(|| integ.to_physical(&state));
    Ok(SimOutcome {
        status,
        probes,
        wall_time_s: clock() - started,
        steps,
        retried_steps: retried,
        final_state,
    })
}

/// One step of length `levels[0].h`, retried with up to [`MAX_HALVINGS`] halvings.
fn advance(
    integ: &Integrator,
    state: &SpectralState,
    levels: &mut Vec<StepCoeffs>,
    phys: (&[f64], &[f64]),
    forcing: Option<Forcing>,
) -> Result<(SpectralState, bool)> {
    match integ.step(state, &levels[0], Some(phys), forcing) {
        Ok(s) => return Ok((s, false)),
        Err(Error::NonFiniteOutput { .. }) => {}
        Err(e) => return Err(e),
    }
    for level in 1..=MAX_HALVINGS as usize {
        while levels.len() <= level {
            let h = levels[levels.len() - 1].h / 2.0;
            levels.push(integ.coeffs(h));
        }
        let c = &levels[level];
        let mut s = state.clone();
        let mut ok = true;
        for _ in 0..(1usize << level) {
            match integ.step(&s, c, None, forcing) {
                Ok(next) => s = next,
                Err(Error::NonFiniteOutput { .. }) => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if ok {
            return Ok((s, true));
        }
    }
    Err(Error::NonFiniteOutput {
        t: state.t + levels[0].h,
    })
}

/// Advances a physical state by one step of `cfg.dt` (standalone form of the stepper).
pub fn step(state: &SimState, cfg: &SimConfig) -> Result<SimState> {
    state.check()?;
    for f in [&state.u, &state.ut, &state.v, &state.vt] {
        f.check_finite()?;
    }
    let pair = cfg.validate()?;
    let integ = Integrator::new(
        state.u.grid,
        pair.p_c,
        pair.q_c,
        cfg.mu1.clone(),
        cfg.mu2.clone(),
        cfg.clamp,
        cfg.nonlinear,
    );
    let s = integ.to_spectral(state);
    let next = integ.step(&s, &integ.coeffs(cfg.dt), None, None)?;
    Ok(integ.to_physical(&next))
}

/// Zero field helper for callers building states by hand.
pub fn zero_state(grid: crate::spectral::Grid) -> SimState {
    let z = GridField::zeros(grid);
    SimState {
        u: z.clone(),
        ut: z.clone(),
        v: z.clone(),
        vt: z,
        t: 0.0,
    }
}
