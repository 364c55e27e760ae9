use super::testfn::phi_r;
use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::modcont::{convexity_check, Modulus};
use serde::Serialize;

/// `Φ(s) = s^q μ(s)` on `[0, c0]`, continued by its second-order Taylor polynomial beyond `c0`.
#[derive(Debug, Clone)]
pub struct ConvexPhi {
    q: f64,
    mu: Modulus,
    c0: f64,
    v0: f64,
    d1: f64,
    d2: f64,
}

impl ConvexPhi {
    /// Requires `Φ` convex on `(0, c0]` as seen by [`convexity_check`].
    pub fn new(q: f64, mu: &Modulus, c0: f64) -> Result<Self> {
        let report = convexity_check(mu, q, c0, 2000)?;
        if !report.pass {
            return Err(Error::Domain(format!("Φ not convex on (0, {c0}]")));
        }
        let m = mu.eval(c0)?;
        let e1 = mu.scaled_deriv_ratio(c0, 1)?;
        let e2 = mu.scaled_deriv_ratio(c0, 2)?;
        let v0 = c0.powf(q) * m;
        let d1 = c0.powf(q - 1.0) * m * (q + e1);
        let d2 = c0.powf(q - 2.0) * m * (q * (q - 1.0) + 2.0 * q * e1 + e2);
        if d2 < 0.0 {
            return Err(Error::Domain(format!("Φ'' < 0 at c0 = {c0}")));
        }
        Ok(Self {
            q,
            mu: mu.clone(),
            c0,
            v0,
            d1,
            d2,
        })
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn eval(&self, s: f64) -> f64 {
        let a = s.abs();
        if a == 0.0 {
            0.0
        } else if a <= self.c0 {
            a.powf(self.q) * self.mu.eval_clamped(a)
        } else {
            let h = a - self.c0;
            self.v0 + self.d1 * h + 0.5 * self.d2 * h * h
        }
    }

    /// `Φ^{-1}(y)` by bisection, relative tolerance `1e-10`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) || !y.is_finite() {
            return Err(Error::Domain(format!("Φ^-1 needs a finite y ≥ 0, got {y}")));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let mut lo = 0.0;
        let mut hi = self.c0;
        while self.eval(hi) < y {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Domain(format!("Φ^-1({y}) out of range")));
            }
        }
        for _ in 0..400 {
            if hi - lo <= 1e-10 * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JensenReport {
    pub snapshots: usize,
    pub violations: usize,
    /// Largest `Φ(mean f) − mean Φ(f)`; nonpositive means the inequality held everywhere.
    pub worst_gap: f64,
    pub space_time_gap: f64,
    pub pass: bool,
}

const JENSEN_SLACK: f64 = 1e-12;

/// Discrete Jensen `Φ(mean f) ≤ mean Φ(f)` with `f = |u| (φ*_R)^{ν/(ν+2)}` on the `Q*_R` slice of each snapshot.
pub fn jensen_check(traj: &Trajectory, phi: &ConvexPhi, r: f64, nu: f64) -> Result<JensenReport> {
    traj.check_covers(r)?;
    let wt = traj.time_weights();
    let inner_t = r * r / 2f64.sqrt();
    let inner_x = r / 2f64.powf(0.25);
    let mut report = JensenReport {
        snapshots: 0,
        violations: 0,
        worst_gap: f64::NEG_INFINITY,
        space_time_gap: 0.0,
        pass: true,
    };
    let (mut st_w, mut st_f, mut st_phi) = (0.0, 0.0, 0.0);
    for (k, &t) in traj.times.iter().enumerate() {
        if t > r * r {
            break;
        }
        let (mut sw, mut sf, mut sphi) = (0.0, 0.0, 0.0);
        for (i, &x) in traj.radius.iter().enumerate() {
            if x > r || (t <= inner_t && x <= inner_x) {
                continue;
            }
            let cut = phi_r(t, x, r, nu, true);
            let f = traj.u[k][i].abs() * if cut == 0.0 { 0.0 } else { cut.powf(nu / (nu + 2.0)) };
            let w = traj.cell;
            sw += w;
            sf += w * f;
            sphi += w * phi.eval(f);
        }
        if sw == 0.0 {
            continue;
        }
        report.snapshots += 1;
        let lhs = phi.eval(sf / sw);
        let rhs = sphi / sw;
        let gap = lhs - rhs;
        report.worst_gap = report.worst_gap.max(gap);
        if gap > JENSEN_SLACK * rhs.abs().max(f64::MIN_POSITIVE) && gap > JENSEN_SLACK {
            report.violations += 1;
        }
        st_w += wt[k] * sw;
        st_f += wt[k] * sf;
        st_phi += wt[k] * sphi;
    }
    if st_w > 0.0 {
        report.space_time_gap = phi.eval(st_f / st_w) - st_phi / st_w;
        if report.space_time_gap > JENSEN_SLACK {
            report.violations += 1;
        }
    }
    report.pass = report.violations == 0;
    Ok(report)
}

/// Riemann measure of `Q*_R` on a midpoint grid of spacing `h` in `t` and in every `x` direction.
pub fn qstar_measure(n: usize, r: f64, h: f64) -> Result<f64> {
    if !(n == 1 || n == 2) {
        return Err(Error::Parameter(format!("dimension {n} not supported")));
    }
    if !(r > 0.0) || !(h > 0.0) {
        return Err(Error::Parameter("R and h must be positive".into()));
    }
    // midpoints (k + 1/2) h in [0, a]
    let count_t = |a: f64| ((a / h + 0.5).floor()).max(0.0);
    let full = count_t(r * r);
    let inner = count_t(r * r / 2f64.sqrt());
    let inner_x = r / 2f64.powf(0.25);
    let m = (r / h).ceil() as i64;
    let mut cells = 0.0;
    let coord = |i: i64| (i as f64 + 0.5) * h;
    if n == 1 {
        for i in -m..m {
            let x = coord(i).abs();
            if x <= r {
                cells += if x <= inner_x { full - inner } else { full };
            }
        }
    } else {
        for i in -m..m {
            for j in -m..m {
                let x = coord(i).hypot(coord(j));
                if x <= r {
                    cells += if x <= inner_x { full - inner } else { full };
                }
            }
        }
    }
    Ok(cells * h.powi(n as i32 + 1))
}

/// Least-squares slope of `ln |Q*_R|` against `ln R`.
pub fn qstar_exponent(n: usize, radii: &[f64], h: f64) -> Result<f64> {
    if radii.len() < 2 {
        return Err(Error::InsufficientData("need at least two radii".into()));
    }
    let pts = radii
        .iter()
        .map(|&r| Ok((r.ln(), qstar_measure(n, r, h)?.ln())))
        .collect::<Result<Vec<_>>>()?;
    Ok(ls_slope(&pts))
}

pub(crate) fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseMassReport {
    pub radii: Vec<f64>,
    /// `Φ^{-1}(∫_{Q_R} Φ(|u|))` per radius.
    pub values: Vec<f64>,
    pub nondecreasing: bool,
}

/// `Φ^{-1}` of the `Φ(|u|)`-mass of `Q_R`, which can only grow with `R`.
pub fn inverse_mass_profile(traj: &Trajectory, phi: &ConvexPhi, radii: &[f64]) -> Result<InverseMassReport> {
    let wt = traj.time_weights();
    let mut values = Vec::with_capacity(radii.len());
    for &r in radii {
        traj.check_covers(r)?;
        let mut mass = 0.0;
        for (k, &t) in traj.times.iter().enumerate() {
            if t > r * r {
                break;
            }
            for (i, &x) in traj.radius.iter().enumerate() {
                if x <= r {
                    mass += wt[k] * traj.cell * phi.eval(traj.u[k][i]);
                }
            }
        }
        values.push(phi.inverse(mass)?);
    }
    let nondecreasing = values.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9));
    Ok(InverseMassReport {
        radii: radii.to_vec(),
        values,
        nondecreasing,
    })
}
