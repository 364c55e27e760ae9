//! Structural checks on moduli: the `sμ' ≲ μ` bound, the little-o conditions,
//! and convexity of `s^p μ(s)`.

use super::Modulus;
use crate::error::{Error, Result};
use serde::Serialize;

pub const DEFAULT_STAR_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Serialize)]
pub struct StarReport {
    pub sup_ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// `sup s μ'(s)/μ(s)` over the grid.
pub fn check_star(mu: &Modulus, grid: &[f64]) -> Result<StarReport> {
    check_star_with(mu, grid, DEFAULT_STAR_THRESHOLD)
}

pub fn check_star_with(mu: &Modulus, grid: &[f64], threshold: f64) -> Result<StarReport> {
    if grid.is_empty() {
        return Err(Error::Parameter("empty sample grid".into()));
    }
    let mut sup: f64 = 0.0;
    for &s in grid {
        let r = mu.scaled_deriv_ratio(s, 1)?;
        sup = sup.max(r.abs());
    }
    Ok(StarReport {
        sup_ratio: sup,
        threshold,
        pass: sup.is_finite() && sup <= threshold,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LittleOReport {
    pub ratios: Vec<f64>,
    /// Ratio at the deep probe `s = exp(-FAR_TAU)`.
    pub far_ratio: f64,
    pub monotone: bool,
    pub pass: bool,
}

/// Log-scale coordinate of the asymptotic probe used by [`check_littleo`].
pub const FAR_TAU: f64 = 1e8;
pub const LITTLEO_LIMIT: f64 = 0.01;

/// Ratios `s^k |μ^{(k)}(s)| / μ(s)` along a sequence decreasing to 0.
///
/// Passes when the ratios decrease strictly and are below [`LITTLEO_LIMIT`]
/// either at the last sample or at the deep probe `τ = FAR_TAU`.
pub fn check_littleo(mu: &Modulus, order: u8, s_seq: &[f64]) -> Result<LittleOReport> {
    if s_seq.len() < 2 {
        return Err(Error::Parameter("need at least two samples".into()));
    }
    if s_seq.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Parameter("sample sequence must be strictly decreasing".into()));
    }
    let ratios = s_seq
        .iter()
        .map(|&s| mu.scaled_deriv_ratio(s, order).map(f64::abs))
        .collect::<Result<Vec<_>>>()?;
    let far_ratio = mu.scaled_deriv_ratio_tau(FAR_TAU, order)?.abs();
    let monotone = ratios.windows(2).all(|w| w[1] < w[0]);
    let last = *ratios.last().unwrap();
    let pass = monotone && (last < LITTLEO_LIMIT || far_ratio < LITTLEO_LIMIT);
    Ok(LittleOReport {
        ratios,
        far_ratio,
        monotone,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub min_second_difference: f64,
    pub pass: bool,
}

/// Nonnegativity of second differences of `Φ(s) = s^p μ(s)` on a uniform grid of `(0, c0]`.
pub fn convexity_check(mu: &Modulus, p: f64, c0: f64, grid_size: usize) -> Result<ConvexityReport> {
    if !(p > 1.0) {
        return Err(Error::Parameter(format!("p must exceed 1, got {p}")));
    }
    if grid_size < 3 {
        return Err(Error::Parameter("grid needs at least 3 points".into()));
    }
    if c0 > mu.s_max() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("c0 = {c0} exceeds s_max = {}", mu.s_max())));
    }
    let h = c0 / grid_size as f64;
    let phi = |s: f64| -> Result<f64> { Ok(s.powf(p) * mu.eval(s)?) };
    // include s = 0 so the grid is uniform on [0, c0]
    let vals = (0..=grid_size)
        .map(|i| phi((i as f64 * h).min(c0)))
        .collect::<Result<Vec<_>>>()?;
    let mut min_d2 = f64::INFINITY;
    for w in vals.windows(3) {
        let d2 = w[0] - 2.0 * w[1] + w[2];
        // scale-aware rounding slack
        let slack = 1e-14 * (w[0].abs() + 2.0 * w[1].abs() + w[2].abs());
        min_d2 = min_d2.min(d2 + slack);
    }
    Ok(ConvexityReport {
        min_second_difference: min_d2,
        pass: min_d2 >= 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn log_grid(hi: f64, count: usize) -> Vec<f64> {
        (0..count).map(|i| hi * 10f64.powf(-(i as f64) * 0.25)).collect()
    }

    #[test]
    fn star_examples() {
        let r = check_star(&Modulus::power(0.5).unwrap(), &log_grid(1.0, 40)).unwrap();
        assert_relative_eq!(r.sup_ratio, 0.5, epsilon = 1e-14);
        assert!(r.pass);
        let r = check_star(&Modulus::log_pow(1.0).unwrap(), &log_grid(0.1, 40)).unwrap();
        assert_relative_eq!(r.sup_ratio, 1.0 / 10f64.ln(), epsilon = 1e-14);
        assert!(r.pass);
        let prod: Modulus = "pow:1*logpow:1".parse().unwrap();
        let r = check_star(&prod, &log_grid(0.1, 40)).unwrap();
        assert!(r.pass && r.sup_ratio <= 1.0 + 1.0 / 10f64.ln() + 1e-14);
    }

    #[test]
    fn littleo_examples() {
        let seq: Vec<f64> = (2..=8).map(|i| 10f64.powi(-i)).collect();
        let r = check_littleo(&Modulus::log_pow(2.0).unwrap(), 1, &seq).unwrap();
        for (i, ratio) in (2..=8).zip(&r.ratios) {
            assert_relative_eq!(*ratio, 2.0 / (i as f64 * 10f64.ln()), max_relative = 1e-13);
        }
        assert!(r.pass);
        let r = check_littleo(&Modulus::power(0.5).unwrap(), 1, &seq).unwrap();
        assert!(r.ratios.iter().all(|&x| (x - 0.5).abs() < 1e-14));
        assert!(!r.pass);
        let r = check_littleo(&Modulus::log_pow(1.0).unwrap(), 2, &seq).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn littleo_rejects_unsorted() {
        let r = check_littleo(&Modulus::log_pow(2.0).unwrap(), 1, &[0.01, 0.05]);
        assert!(matches!(r, Err(Error::Parameter(_))));
    }

    #[test]
    fn convexity_examples() {
        assert!(
            convexity_check(&Modulus::power(1.0).unwrap(), 2.0, 0.1, 200)
                .unwrap()
                .pass
        );
        assert!(
            convexity_check(&Modulus::log_pow(1.0).unwrap(), 2.0, 0.01, 200)
                .unwrap()
                .pass
        );
        // evaluated outcome only; the second differences are the oracle
        let r = convexity_check(&Modulus::power(0.1).unwrap(), 1.05, 0.5, 200).unwrap();
        assert!(r.min_second_difference.is_finite());
        assert!(convexity_check(&Modulus::log_pow(1.0).unwrap(), 2.0, 0.5, 10).is_err());
    }
}
