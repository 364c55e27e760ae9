use super::testfn::{phi_profile, phi_star};
use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::modcont::{CriticalPair, Modulus};
use crate::parallel::par_map;
use crate::quad::GaussRule;
use serde::Serialize;

/// `s^p μ(s)` with `μ` frozen beyond its domain.
pub fn phi_power(s: f64, p: f64, mu: &Modulus) -> f64 {
    let a = s.abs();
    if a == 0.0 {
        0.0
    } else {
        a.powf(p) * mu.eval_clamped(a)
    }
}

/// Space-time samples `(t² + |x|⁴, weight, Φ_p(|v|), Φ_q(|u|))` with nonzero integrand.
#[derive(Debug, Clone)]
pub struct Samples {
    pub r4: Vec<f64>,
    pub w: Vec<f64>,
    pub fp: Vec<f64>,
    pub fq: Vec<f64>,
}

impl Samples {
    pub fn build(traj: &Trajectory, r_max: f64, integrand: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let wt = traj.time_weights();
        let lim = r_max.powi(4);
        let x4: Vec<f64> = traj.radius.iter().map(|r| r.powi(4)).collect();
        let mut s = Samples {
            r4: Vec::new(),
            w: Vec::new(),
            fp: Vec::new(),
            fq: Vec::new(),
        };
        for (k, &t) in traj.times.iter().enumerate() {
            if wt[k] == 0.0 {
                continue;
            }
            for (i, &x) in x4.iter().enumerate() {
                let r4 = t * t + x;
                if r4 >= lim {
                    continue;
                }
                let (fp, fq) = integrand(traj.u[k][i], traj.v[k][i]);
                if fp == 0.0 && fq == 0.0 {
                    continue;
                }
                s.r4.push(r4);
                s.w.push(wt[k] * traj.cell);
                s.fp.push(fp);
                s.fq.push(fq);
            }
        }
        // sort by r4 so that annuli map to contiguous ranges
        let mut idx: Vec<usize> = (0..s.r4.len()).collect();
        idx.sort_by(|&a, &b| s.r4[a].total_cmp(&s.r4[b]));
        let pick = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Samples {
            r4: pick(&s.r4),
            w: pick(&s.w),
            fp: pick(&s.fp),
            fq: pick(&s.fq),
        }
    }

    fn range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let a = self.r4.partition_point(|&x| x < lo);
        let b = self.r4.partition_point(|&x| x < hi);
        a..b.max(a)
    }

    fn physical(traj: &Trajectory, pair: &CriticalPair, mu1: &Modulus, mu2: &Modulus, r_max: f64) -> Self {
        Self::build(traj, r_max, |u, v| {
            (phi_power(v, pair.p_c, mu1), phi_power(u, pair.q_c, mu2))
        })
    }

    /// `Σ w f_p k(r4)`, `Σ w f_q k(r4)` for a radial weight `k`.
    pub fn weighted(&self, k: impl Fn(f64) -> (f64, f64)) -> (f64, f64) {
        self.weighted_in(0.0, f64::INFINITY, k)
    }

    /// As [`Samples::weighted`], restricted to `lo ≤ r4 < hi`.
    pub fn weighted_in(&self, lo: f64, hi: f64, k: impl Fn(f64) -> (f64, f64)) -> (f64, f64) {
        let mut a = 0.0;
        let mut b = 0.0;
        for i in self.range(lo, hi) {
            let (kp, kq) = k(self.r4[i]);
            a += self.w[i] * self.fp[i] * kp;
            b += self.w[i] * self.fq[i] * kq;
        }
        (a, b)
    }

    /// `(g_p(λ), g_q(λ))`.
    pub fn g(&self, lambda: f64, nu: f64, pair: &CriticalPair) -> (f64, f64) {
        let l4 = lambda.powi(4);
        let (ep, eq) = (nu * pair.p_c, nu * pair.q_c);
        self.weighted_in(0.5 * l4, l4, |r4| {
            let f = phi_star(r4 / l4);
            if f == 0.0 {
                (0.0, 0.0)
            } else {
                (f.powf(ep), f.powf(eq))
            }
        })
    }
}

/// `(I_R, J_R)` for an arbitrary pointwise integrand `(u, v) ↦ (f_I, f_J)`.
pub fn functional_with(
    traj: &Trajectory,
    r: f64,
    nu: f64,
    integrand: impl Fn(f64, f64) -> (f64, f64),
) -> Result<(f64, f64)> {
    traj.check_covers(r)?;
    let s = Samples::build(traj, r, integrand);
    let r4 = r.powi(4);
    Ok(s.weighted(|x| {
        let f = phi_profile(x / r4);
        let k = if f == 0.0 { 0.0 } else { f.powf(nu + 2.0) };
        (k, k)
    }))
}

/// `I_R = ∫∫ Φ_p(|v|) φ_R` and `J_R = ∫∫ Φ_q(|u|) φ_R`.
pub fn functionals(
    traj: &Trajectory,
    pair: &CriticalPair,
    mu1: &Modulus,
    mu2: &Modulus,
    r: f64,
    nu: f64,
) -> Result<(f64, f64)> {
    functional_with(traj, r, nu, |u, v| {
        (phi_power(v, pair.p_c, mu1), phi_power(u, pair.q_c, mu2))
    })
}

/// Relative change of `(I_R, J_R)` when every other snapshot is dropped.
pub fn cadence_sensitivity(
    traj: &Trajectory,
    pair: &CriticalPair,
    mu1: &Modulus,
    mu2: &Modulus,
    r: f64,
    nu: f64,
) -> Result<f64> {
    let fine = functionals(traj, pair, mu1, mu2, r, nu)?;
    let coarse = functionals(&traj.thinned(2), pair, mu1, mu2, r, nu)?;
    let rel = |a: f64, b: f64| {
        if a == 0.0 && b == 0.0 {
            0.0
        } else {
            (a - b).abs() / a.abs().max(b.abs())
        }
    };
    Ok(rel(fine.0, coarse.0).max(rel(fine.1, coarse.1)))
}

/// `ψ_k(a) = ∫_a^1 φ(ρ)^k ρ^{-1} dρ` on `[1/2, 1]`, tabulated.
#[derive(Debug, Clone)]
pub struct PsiTable {
    h: f64,
    vals: Vec<f64>,
}

const PSI_NODES: usize = 4096;

impl PsiTable {
    pub fn new(k: f64) -> Self {
        let rule = GaussRule::new(8);
        let h = 0.5 / PSI_NODES as f64;
        let mut vals = vec![0.0; PSI_NODES + 1];
        for i in (0..PSI_NODES).rev() {
            let a = 0.5 + i as f64 * h;
            let cellv = rule.integrate(|r| phi_profile(r).powf(k) / r, a, a + h);
            vals[i] = vals[i + 1] + cellv;
        }
        Self { h, vals }
    }

    pub fn eval(&self, a: f64) -> f64 {
        if a >= 1.0 {
            return 0.0;
        }
        let a = a.max(0.5);
        let x = (a - 0.5) / self.h;
        let i = (x.floor() as usize).min(PSI_NODES - 1);
        let f = x - i as f64;
        self.vals[i] * (1.0 - f) + self.vals[i + 1] * f
    }
}

/// `G(R)` from the swapped integral `¼ ∫∫ Φ ψ(max(ρ_R, ½))`.
pub fn big_g_swapped(samples: &Samples, r: f64, nu: f64, pair: &CriticalPair) -> (f64, f64) {
    let tp = PsiTable::new(nu * pair.p_c);
    let tq = PsiTable::new(nu * pair.q_c);
    let r4 = r.powi(4);
    let (a, b) = samples.weighted(|x| {
        let rho = x / r4;
        (tp.eval(rho), tq.eval(rho))
    });
    (0.25 * a, 0.25 * b)
}

#[derive(Debug, Clone, Serialize)]
pub struct LedgerRow {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "I_R")]
    pub i_r: f64,
    #[serde(rename = "J_R")]
    pub j_r: f64,
    pub g_p: f64,
    pub g_q: f64,
    #[serde(rename = "G_p")]
    pub big_g_p: f64,
    #[serde(rename = "G_q")]
    pub big_g_q: f64,
    pub res1: Option<f64>,
    pub res2: Option<f64>,
    #[serde(rename = "C_emp")]
    pub c_emp: Option<f64>,
}

pub const LEDGER_HEADER: &str = "R,I_R,J_R,g_p,g_q,G_p,G_q,res1,res2,C_emp";

#[derive(Debug, Clone, Serialize)]
pub struct BlowupLedger {
    pub n: usize,
    pub nu: f64,
    pub rows: Vec<LedgerRow>,
    /// `|G'(R) R − g(R)| / g(R)` from central differences, per row (p and q).
    pub deriv_residual_p: Vec<f64>,
    pub deriv_residual_q: Vec<f64>,
    /// Largest relative gap between the λ-quadrature `G` and the swapped-integral `G`.
    pub oracle_gap: f64,
}

impl BlowupLedger {
    pub fn max_deriv_residual(&self) -> f64 {
        self.deriv_residual_p
            .iter()
            .chain(&self.deriv_residual_q)
            .fold(0.0, |m: f64, &x| m.max(x))
    }

    pub fn g_nondecreasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].big_g_p >= w[0].big_g_p && w[1].big_g_q >= w[0].big_g_q)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.big_g_p == 0.0 && r.big_g_q == 0.0)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        let mut out = String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))?;
        if self.rows.is_empty() {
            out = format!("{LEDGER_HEADER}\n");
        }
        Ok(out)
    }
}

/// Geometric ladder `r0·ratio^k`, `k < count`.
pub fn ladder(r0: f64, ratio: f64, count: usize) -> Result<Vec<f64>> {
    if !(r0 > 0.0) || !(ratio > 1.0) || count == 0 {
        return Err(Error::Parameter(format!("bad ladder ({r0}, {ratio}, {count})")));
    }
    Ok((0..count).map(|k| r0 * ratio.powi(k as i32)).collect())
}

/// Default ladder from `R₀ = 4`, ratio 1.25, up to the trajectory horizon.
pub fn default_ladder(horizon: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = 4.0;
    while r * r <= horizon * (1.0 + 1e-9) {
        out.push(r);
        r *= 1.25;
    }
    out
}

/// Half-width of the central difference in `ln R`.
pub const DERIV_STEP: f64 = 0.05;
// panels per unit of ln λ
const PANELS_PER_LOG: f64 = 40.0;
// G is integrated from λ = R_min·e^{-LOG_DEPTH}
const LOG_DEPTH: f64 = 8.0;

pub fn g_and_big_g(
    traj: &Trajectory,
    pair: &CriticalPair,
    mu1: &Modulus,
    mu2: &Modulus,
    nu: f64,
    radii: &[f64],
) -> Result<BlowupLedger> {
    if radii.is_empty() {
        return Err(Error::Parameter("empty R ladder".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("R ladder must be increasing".into()));
    }
    let r_top = *radii.last().unwrap() * DERIV_STEP.exp();
    traj.check_covers(*radii.last().unwrap())?;
    let samples = Samples::physical(traj, pair, mu1, mu2, r_top);

    // y = ln λ targets: every ladder point and its ±δ neighbours
    let mut targets: Vec<f64> = radii
        .iter()
        .flat_map(|r| [r.ln() - DERIV_STEP, r.ln(), r.ln() + DERIV_STEP])
        .collect();
    targets.sort_by(f64::total_cmp);
    targets.dedup();
    let y0 = radii[0].ln() - LOG_DEPTH;

    // Gauss nodes on panels between consecutive targets
    let rule = GaussRule::new(4);
    let mut nodes = Vec::new();
    let mut owner = Vec::new();
    let mut prev = y0;
    for (k, &y) in targets.iter().enumerate() {
        let panels = (((y - prev) * PANELS_PER_LOG).ceil() as usize).max(1);
        let h = (y - prev) / panels as f64;
        for j in 0..panels {
            let a = prev + j as f64 * h;
            for (x, w) in rule.points(a, a + h) {
                nodes.push((x, w));
                owner.push(k);
            }
        }
        prev = y;
    }
    let gvals = par_map(&nodes, |&(y, _)| samples.g(y.exp(), nu, pair));
    let mut seg = vec![(0.0, 0.0); targets.len()];
    for ((&(_, w), g), &k) in nodes.iter().zip(&gvals).zip(&owner) {
        seg[k].0 += w * g.0;
        seg[k].1 += w * g.1;
    }
    let mut cum = Vec::with_capacity(targets.len());
    let mut acc = (0.0, 0.0);
    for s in &seg {
        acc.0 += s.0;
        acc.1 += s.1;
        cum.push(acc);
    }
    let at = |y: f64| -> (f64, f64) {
        let i = targets
            .iter()
            .position(|&t| (t - y).abs() < 1e-12)
            .expect("target present");
        cum[i]
    };

    let per_r = par_map(radii, |&r| {
        let (i_r, j_r) = samples.weighted({
            let r4 = r.powi(4);
            move |x| {
                let f = phi_profile(x / r4);
                let k = if f == 0.0 { 0.0 } else { f.powf(nu + 2.0) };
                (k, k)
            }
        });
        let g = samples.g(r, nu, pair);
        let swapped = big_g_swapped(&samples, r, nu, pair);
        (i_r, j_r, g, swapped)
    });

    let rel = |a: f64, b: f64| {
        let s = a.abs().max(b.abs());
        if s == 0.0 {
            0.0
        } else {
            (a - b).abs() / s
        }
    };
    let mut rows = Vec::new();
    let mut dp = Vec::new();
    let mut dq = Vec::new();
    let mut gap: f64 = 0.0;
    for (&r, &(i_r, j_r, g, sw)) in radii.iter().zip(&per_r) {
        let y = r.ln();
        let big = at(y);
        let lo = at(y - DERIV_STEP);
        let hi = at(y + DERIV_STEP);
        let dgp = (hi.0 - lo.0) / (2.0 * DERIV_STEP);
        let dgq = (hi.1 - lo.1) / (2.0 * DERIV_STEP);
        dp.push(rel(dgp, g.0));
        dq.push(rel(dgq, g.1));
        gap = gap.max(rel(big.0, sw.0)).max(rel(big.1, sw.1));
        rows.push(LedgerRow {
            r,
            i_r,
            j_r,
            g_p: g.0,
            g_q: g.1,
            big_g_p: big.0,
            big_g_q: big.1,
            res1: None,
            res2: None,
            c_emp: None,
        });
    }
    Ok(BlowupLedger {
        n: pair.n,
        nu,
        rows,
        deriv_residual_p: dp,
        deriv_residual_q: dq,
        oracle_gap: gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OdeStatus {
    Applicable,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct OdePoint {
    pub r: f64,
    pub theta1: f64,
    pub theta2: f64,
    /// `G_p'(r) / (θ₁ G_q^{p})` and `G_q'(r) / (θ₂ G_p^{q})`.
    pub ratio1: f64,
    pub ratio2: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OdeReport {
    pub status: OdeStatus,
    pub r0: f64,
    pub c0: f64,
    pub points: Vec<OdePoint>,
    /// Largest constant for which both inequalities hold at every ladder point.
    pub min_c: Option<f64>,
    pub positive: bool,
    /// `(C₀, min C)` for rescaled `C₀`.
    pub sensitivity: Vec<(f64, Option<f64>)>,
    /// Whether the trajectory came from zero positions and positive-mean velocities.
    pub admissible_data: bool,
}

pub fn theta(r: f64, n: usize, p: f64, mu: &Modulus, c0: f64) -> f64 {
    let nf = n as f64;
    r.powf(-(nf * (p - 1.0) - 1.0)) * mu.eval_clamped(c0 * r.powf(-nf))
}

fn ode_points(
    ledger: &BlowupLedger,
    pair: &CriticalPair,
    mu1: &Modulus,
    mu2: &Modulus,
    c0: f64,
    r0: f64,
) -> Vec<OdePoint> {
    ledger
        .rows
        .iter()
        .filter(|row| row.r > r0 * (1.0 + 1e-12))
        .map(|row| {
            let t1 = theta(row.r, pair.n, pair.p_c, mu1, c0);
            let t2 = theta(row.r, pair.n, pair.q_c, mu2, c0);
            let ratio1 = (row.g_p / row.r) / (t1 * row.big_g_q.powf(pair.p_c));
            let ratio2 = (row.g_q / row.r) / (t2 * row.big_g_p.powf(pair.q_c));
            OdePoint {
                r: row.r,
                theta1: t1,
                theta2: t2,
                ratio1,
                ratio2,
                c: ratio1.min(ratio2),
            }
        })
        .collect()
}

fn min_constant(points: &[OdePoint]) -> Option<f64> {
    let m = points.iter().map(|p| p.c).fold(f64::INFINITY, f64::min);
    m.is_finite().then_some(m)
}

/// Empirical constants in `G_p' ≥ C θ₁ G_q^{p}`, `G_q' ≥ C θ₂ G_p^{q}` for ladder points above `r0`.
pub fn ode_inequality_check(
    ledger: &BlowupLedger,
    pair: &CriticalPair,
    mu1: &Modulus,
    mu2: &Modulus,
    c0: f64,
    r0: f64,
    admissible_data: bool,
) -> Result<OdeReport> {
    if !(c0 > 0.0) {
        return Err(Error::Parameter(format!("C0 must be positive, got {c0}")));
    }
    let above = ledger.rows.iter().filter(|r| r.r > r0 * (1.0 + 1e-12)).count();
    if above < 4 {
        return Err(Error::LedgerTooShort(format!(
            "{above} ladder points above R0 = {r0}, need 4"
        )));
    }
    if ledger.is_zero() {
        return Ok(OdeReport {
            status: OdeStatus::NotApplicable,
            r0,
            c0,
            points: Vec::new(),
            min_c: None,
            positive: false,
            sensitivity: Vec::new(),
            admissible_data,
        });
    }
    let points = ode_points(ledger, pair, mu1, mu2, c0, r0);
    let min_c = min_constant(&points);
    let sensitivity = [0.1, 1.0, 10.0]
        .iter()
        .map(|&f| (c0 * f, min_constant(&ode_points(ledger, pair, mu1, mu2, c0 * f, r0))))
        .collect();
    Ok(OdeReport {
        status: OdeStatus::Applicable,
        r0,
        c0,
        positive: min_c.is_some_and(|c| c > 0.0),
        min_c,
        points,
        sensitivity,
        admissible_data,
    })
}

impl BlowupLedger {
    /// Fills `res1`, `res2` (ratio minus the ladder minimum) and `C_emp` from a report.
    pub fn attach(&mut self, report: &OdeReport) {
        let Some(m) = report.min_c else { return };
        for row in &mut self.rows {
            if let Some(p) = report.points.iter().find(|p| p.r == row.r) {
                row.res1 = Some(p.ratio1 - m);
                row.res2 = Some(p.ratio2 - m);
                row.c_emp = Some(p.c);
            }
        }
    }
}
