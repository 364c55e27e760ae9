use crate::error::{Error, Result};
use crate::solver::{simulate_with, RunHooks, SimConfig, SimOutcome, SimState};

/// Snapshots of `(u, v)` restricted to the ball `|x| ≤ r_max`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub n: usize,
    /// `|x|` of every retained grid point.
    pub radius: Vec<f64>,
    /// Lebesgue measure of one grid cell.
    pub cell: f64,
    pub times: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    /// Zero initial positions and positive-mean velocities.
    pub admissible_data: bool,
}

impl Trajectory {
    pub fn new(n: usize, radius: Vec<f64>, cell: f64) -> Self {
        Self {
            n,
            radius,
            cell,
            times: Vec::new(),
            u: Vec::new(),
            v: Vec::new(),
            admissible_data: false,
        }
    }

    /// Appends a snapshot from a full-grid state, keeping the points inside the ball.
    pub fn push_state(&mut self, s: &SimState, keep: &[usize]) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if s.t <= last {
                return Err(Error::Parameter(format!("snapshot time {} not increasing", s.t)));
            }
        }
        self.times.push(s.t);
        self.u.push(keep.iter().map(|&i| s.u.values[i]).collect());
        self.v.push(keep.iter().map(|&i| s.v.values[i]).collect());
        Ok(())
    }

    /// Runs `cfg`, keeping snapshots every `cfg.snapshot_dt` inside `|x| ≤ r_max`.
    pub fn record(cfg: &SimConfig, r_max: f64) -> Result<(Self, SimOutcome)> {
        if cfg.snapshot_dt.is_none() {
            return Err(Error::Config("snapshot_dt must be set to record a trajectory".into()));
        }
        let grid = cfg.grid()?;
        if r_max > grid.half_length {
            return Err(Error::Coverage(format!(
                "crop radius {r_max} exceeds box half-length {}",
                grid.half_length
            )));
        }
        let axis = grid.axis();
        let mut keep = Vec::new();
        let mut radius = Vec::new();
        if grid.n == 1 {
            for (i, &x) in axis.iter().enumerate() {
                if x.abs() <= r_max {
                    keep.push(i);
                    radius.push(x.abs());
                }
            }
        } else {
            for (i, &x) in axis.iter().enumerate() {
                for (j, &y) in axis.iter().enumerate() {
                    let r = x.hypot(y);
                    if r <= r_max {
                        keep.push(i * grid.points + j);
                        radius.push(r);
                    }
                }
            }
        }
        let mut traj = Trajectory::new(grid.n, radius, grid.cell());
        traj.admissible_data =
            cfg.u0 == 0.0 && cfg.v0 == 0.0 && cfg.u1 * cfg.amplitude > 0.0 && cfg.v1 * cfg.amplitude > 0.0;
        let mut cb = |s: &SimState| traj.push_state(s, &keep);
        let outcome = simulate_with(
            cfg,
            RunHooks {
                on_snapshot: Some(&mut cb),
                ..Default::default()
            },
        )?;
        Ok((traj, outcome))
    }

    /// A trajectory sampled from closed-form radial fields `(t, |x|) ↦ (u, v)`.
    pub fn synthetic(n: usize, r_max: f64, dx: f64, times: &[f64], f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let m = (r_max / dx).floor() as i64;
        let mut radius = Vec::new();
        if n == 1 {
            for i in -m..=m {
                radius.push((i as f64 * dx).abs());
            }
        } else {
            for i in -m..=m {
                for j in -m..=m {
                    let r = (i as f64 * dx).hypot(j as f64 * dx);
                    if r <= r_max {
                        radius.push(r);
                    }
                }
            }
        }
        let mut traj = Trajectory::new(n, radius, dx.powi(n as i32));
        for &t in times {
            let (u, v): (Vec<f64>, Vec<f64>) = traj.radius.iter().map(|&r| f(t, r)).unzip();
            traj.times.push(t);
            traj.u.push(u);
            traj.v.push(v);
        }
        traj
    }

    pub fn horizon(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn r_max(&self) -> f64 {
        self.radius.iter().fold(0.0, |m: f64, &r| m.max(r))
    }

    /// Every `k`-th snapshot, always keeping the first and last.
    pub fn thinned(&self, k: usize) -> Self {
        let k = k.max(1);
        let last = self.times.len().saturating_sub(1);
        let idx: Vec<usize> = (0..self.times.len()).filter(|&i| i % k == 0 || i == last).collect();
        Self {
            n: self.n,
            radius: self.radius.clone(),
            cell: self.cell,
            times: idx.iter().map(|&i| self.times[i]).collect(),
            u: idx.iter().map(|&i| self.u[i].clone()).collect(),
            v: idx.iter().map(|&i| self.v[i].clone()).collect(),
            admissible_data: self.admissible_data,
        }
    }

    /// Trapezoid weights over the snapshot times.
    pub fn time_weights(&self) -> Vec<f64> {
        let m = self.times.len();
        let mut w = vec![0.0; m];
        for i in 1..m {
            let h = self.times[i] - self.times[i - 1];
            w[i - 1] += 0.5 * h;
            w[i] += 0.5 * h;
        }
        w
    }

    /// Fails unless the snapshots reach `t = R²` and the crop covers `|x| ≤ R`.
    pub fn check_covers(&self, r: f64) -> Result<()> {
        if !(r > 0.0) {
            return Err(Error::Parameter(format!("R must be positive, got {r}")));
        }
        let need = r * r;
        if self.times.len() < 2 || self.horizon() < need * (1.0 - 1e-9) {
            return Err(Error::Coverage(format!(
                "trajectory ends at t = {} but R = {r} needs t = {need}",
                self.horizon()
            )));
        }
        let dx = self.cell.powf(1.0 / self.n as f64);
        if self.r_max() + dx < r {
            return Err(Error::Coverage(format!(
                "fields cover |x| ≤ {} but R = {r}",
                self.r_max()
            )));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.u.iter().chain(&self.v).all(|s| s.iter().all(|&x| x == 0.0))
    }
}
