use crate::error::{Error, Result};
use crate::modcont::Modulus;
use crate::quad::{integrate, QuadOptions};
use crate::spectral::{Fourier, Grid, GridField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct ConvolutionSpec {
    pub mu1: Modulus,
    pub mu2: Modulus,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma: f64,
    /// Scale `C` inside `μ(C(1+τ)^{-γ})`.
    pub c: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvolutionReport {
    pub t: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub ratios: Vec<f64>,
    pub sup_ratio: f64,
    /// `2^{max(α,0)+1}`, the constant produced by splitting at `t/2`.
    pub bound: f64,
    pub pass: bool,
}

/// Compares `∫₀ᵗ (1+t−τ)^{-α}(1+τ)^{-1}M(τ)dτ` with `(1+t)^{-α}∫₀ᵗ(1+τ)^{-1}M(τ)dτ`.
pub fn lemma142_check(spec: &ConvolutionSpec, t_grid: &[f64]) -> Result<ConvolutionReport> {
    let ConvolutionSpec {
        mu1,
        mu2,
        alpha,
        beta1,
        beta2,
        gamma,
        c,
    } = spec;
    let (alpha, beta1, beta2, gamma, c) = (*alpha, *beta1, *beta2, *gamma, *c);
    if !(alpha <= 1.0) || !(beta1 >= 0.0 && beta2 >= 0.0 && gamma >= 0.0) {
        return Err(Error::Parameter(format!(
            "need α ≤ 1 and β₁, β₂, γ ≥ 0, got ({alpha}, {beta1}, {beta2}, {gamma})"
        )));
    }
    if !(c > 0.0) {
        return Err(Error::Parameter(format!("C must be positive, got {c}")));
    }
    let m = |tau: f64| {
        let s = c * (1.0 + tau).powf(-gamma);
        let a = if beta1 == 0.0 {
            1.0
        } else {
            mu1.eval_clamped(s).powf(beta1)
        };
        let b = if beta2 == 0.0 {
            1.0
        } else {
            mu2.eval_clamped(s).powf(beta2)
        };
        a * b / (1.0 + tau)
    };
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-10,
        max_evals: 2_000_000,
    };
    // (1+τ)-scaled variable x = ln(1+τ) keeps the integrands smooth over many decades
    let over = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| -> Result<f64> {
        let (xa, xb) = ((1.0 + a).ln(), (1.0 + b).ln());
        Ok(integrate(
            |x| {
                let tau = x.exp() - 1.0;
                f(tau) * x.exp()
            },
            xa,
            xb,
            opts,
        )?
        .value)
    };
    let mut out = ConvolutionReport {
        t: t_grid.to_vec(),
        left: Vec::new(),
        right: Vec::new(),
        ratios: Vec::new(),
        sup_ratio: 0.0,
        bound: 2f64.powf(alpha.max(0.0) + 1.0),
        pass: true,
    };
    for &t in t_grid {
        if !(t > 0.0) {
            return Err(Error::Parameter(format!("t must be positive, got {t}")));
        }
        let kernel = |tau: f64| (1.0 + t - tau).powf(-alpha) * m(tau);
        // the near-diagonal half is integrated in the reflected variable t − τ
        let near = |r: f64| (1.0 + r).powf(-alpha) * m(t - r);
        let left = over(&kernel, 0.0, 0.5 * t)? + over(&near, 0.0, 0.5 * t)?;
        let right = (1.0 + t).powf(-alpha) * over(&m, 0.0, t)?;
        let ratio = left / right;
        out.left.push(left);
        out.right.push(right);
        out.ratios.push(ratio);
        out.sup_ratio = out.sup_ratio.max(ratio);
    }
    out.pass = out.sup_ratio.is_finite() && out.sup_ratio <= out.bound;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GnSpec {
    pub j: u32,
    pub m: u32,
    pub theta: f64,
    pub r: f64,
    pub r1: f64,
    pub r2: f64,
}

impl GnSpec {
    /// Exponent bookkeeping and the admissible range of `θ`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let nf = n as f64;
        let GnSpec { j, m, theta, r, r1, r2 } = *self;
        if j >= m {
            return Err(Error::Parameter(format!("need j < m, got j = {j}, m = {m}")));
        }
        for x in [r, r1, r2] {
            if !(x >= 1.0) {
                return Err(Error::Parameter(format!("Lebesgue exponents must be ≥ 1, got {x}")));
            }
        }
        let jm = j as f64 / m as f64;
        if !(theta >= jm && theta <= 1.0) {
            return Err(Error::Parameter(format!("θ = {theta} outside [{jm}, 1]")));
        }
        let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
        let lhs = j as f64 - nf * inv(r);
        let rhs = (m as f64 - nf * inv(r1)) * theta - nf * inv(r2) * (1.0 - theta);
        if (lhs - rhs).abs() > 1e-12 {
            return Err(Error::Parameter(format!(
                "bookkeeping violated: j − n/r = {lhs} but (m − n/r₁)θ − (n/r₂)(1−θ) = {rhs}"
            )));
        }
        let gap = m as f64 - nf * inv(r1) - j as f64;
        if gap >= 0.0 && (gap - gap.round()).abs() < 1e-12 && theta >= 1.0 {
            return Err(Error::Parameter(
                "θ = 1 not admissible when (m − n/r₁) − j is an integer".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GnReport {
    pub lhs: f64,
    pub grad_m_norm: f64,
    pub base_norm: f64,
    pub bound: f64,
    pub ratio: f64,
}

fn lp_norm(values: &[f64], cell: f64, r: f64) -> f64 {
    if r.is_infinite() {
        values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    } else {
        (values.iter().map(|v| v.abs().powf(r)).sum::<f64>() * cell).powf(1.0 / r)
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Pointwise Frobenius norm of the order-`j` derivative tensor, computed spectrally.
pub fn derivative_magnitude(fourier: &Fourier, f: &GridField, j: u32) -> Vec<f64> {
    if j == 0 {
        return f.values.iter().map(|v| v.abs()).collect();
    }
    let g = f.grid;
    let spec = fourier.forward(&f.values);
    let w = g.axis_wavenumbers();
    let n = g.points;
    let ik = |k: usize, power: u32| -> Complex64 {
        // odd derivatives drop the unpaired Nyquist mode
        let xi = if k == n / 2 && power % 2 == 1 { 0.0 } else { w[k] };
        Complex64::new(0.0, xi).powu(power)
    };
    let mut acc = vec![0.0; f.values.len()];
    let splits: Vec<(u32, f64)> = if g.n == 1 {
        vec![(j, 1.0)]
    } else {
        (0..=j).map(|a| (a, binomial(j, a))).collect()
    };
    for (a, mult) in splits {
        let mut s = spec.clone();
        for (idx, z) in s.iter_mut().enumerate() {
            *z *= if g.n == 1 {
                ik(idx, a)
            } else {
                ik(idx / n, a) * ik(idx % n, j - a)
            };
        }
        for (o, v) in acc.iter_mut().zip(fourier.inverse(s)) {
            *o += mult * v * v;
        }
    }
    acc.into_iter().map(f64::sqrt).collect()
}

/// `‖∇ʲf‖_{L^r}` against `‖∇^m f‖^θ_{L^{r₁}} ‖f‖^{1−θ}_{L^{r₂}}`.
pub fn gn_check(field: &GridField, spec: &GnSpec) -> Result<GnReport> {
    spec.validate(field.grid.n)?;
    field.check_finite()?;
    let fourier = Fourier::new(field.grid);
    let cell = field.grid.cell();
    let lhs = lp_norm(&derivative_magnitude(&fourier, field, spec.j), cell, spec.r);
    let grad_m_norm = lp_norm(&derivative_magnitude(&fourier, field, spec.m), cell, spec.r1);
    let base_norm = lp_norm(&field.values, cell, spec.r2);
    let bound = grad_m_norm.powf(spec.theta) * base_norm.powf(1.0 - spec.theta);
    Ok(GnReport {
        lhs,
        grad_m_norm,
        base_norm,
        bound,
        ratio: lhs / bound,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GnFamilyReport {
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub finite: bool,
}

impl GnFamilyReport {
    fn from_ratios(ratios: Vec<f64>) -> Self {
        let max_ratio = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let finite = ratios.iter().all(|r| r.is_finite());
        Self {
            ratios,
            max_ratio,
            min_ratio,
            finite,
        }
    }
}

/// Ratios over random band-limited fields under a Gaussian envelope.
pub fn gn_monte_carlo(grid: Grid, spec: &GnSpec, draws: usize, seed: u64) -> Result<GnFamilyReport> {
    spec.validate(grid.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = 8;
    let mut ratios = Vec::with_capacity(draws);
    for _ in 0..draws {
        let width = rng.gen_range(1.0..4.0);
        let k0 = rng.gen_range(0.2..1.5);
        let coeffs: Vec<(f64, f64, f64)> = (0..modes)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        let f = GridField::from_fn(grid, |x| {
            let r2: f64 = x.iter().map(|c| c * c).sum();
            let y = x.get(1).copied().unwrap_or(0.0);
            let wave: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, &(a, b, ph))| a * (k0 * k as f64 * (x[0] + b * y) + ph).cos())
                .sum();
            (-r2 / (width * width)).exp() * wave
        });
        ratios.push(gn_check(&f, spec)?.ratio);
    }
    Ok(GnFamilyReport::from_ratios(ratios))
}

/// Ratios for the dilated Gaussians `exp(−λ²|x|²)`.
pub fn gn_dilation(grid: Grid, spec: &GnSpec, lambdas: &[f64]) -> Result<GnFamilyReport> {
    let ratios = lambdas
        .iter()
        .map(|&l| gn_check(&GridField::radial(grid, |r| (-(l * r).powi(2)).exp()), spec).map(|r| r.ratio))
        .collect::<Result<Vec<_>>>()?;
    Ok(GnFamilyReport::from_ratios(ratios))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(alpha: f64, beta1: f64, gamma: f64, mu1: Modulus) -> ConvolutionSpec {
        ConvolutionSpec {
            mu2: mu1.clone(),
            mu1,
            alpha,
            beta1,
            beta2: 0.0,
            gamma,
            c: 0.1,
        }
    }

    #[test]
    fn convolution_closed_form() {
        let mu = Modulus::log_pow(1.0).unwrap();
        let t = [10.0, 100.0, 1000.0, 1e4];
        let rep = lemma142_check(&spec(1.0, 0.0, 0.0, mu.clone()), &t).unwrap();
        for (i, &tt) in t.iter().enumerate() {
            let exact = 2.0 * (1.0 + tt).ln() / (2.0 + tt);
            assert!((rep.left[i] / exact - 1.0).abs() < 1e-8);
            assert!((rep.ratios[i] - 2.0 * (1.0 + tt) / (2.0 + tt)).abs() < 1e-8);
        }
        assert!(rep.sup_ratio < 2.0 && rep.pass);
        let flat = lemma142_check(&spec(0.0, 1.0, 1.0, mu), &t).unwrap();
        assert!(flat.ratios.iter().all(|r| (r - 1.0).abs() < 1e-9));
    }

    #[test]
    fn convolution_with_modulus() {
        let mu = Modulus::log_pow(2.0).unwrap();
        let rep = lemma142_check(&spec(0.5, 1.0, 1.0, mu), &[10.0, 100.0, 1000.0, 1e4]).unwrap();
        assert!(rep.pass, "{:?}", rep.ratios);
        assert!(lemma142_check(&spec(1.5, 0.0, 0.0, Modulus::log_pow(1.0).unwrap()), &[1.0]).is_err());
    }

    #[test]
    fn bookkeeping() {
        let bad = GnSpec {
            j: 0,
            m: 1,
            theta: 0.5,
            r: 4.0,
            r1: 2.0,
            r2: 2.0,
        };
        assert!(matches!(bad.validate(1), Err(Error::Parameter(_))));
        let good = GnSpec { theta: 0.25, ..bad };
        good.validate(1).unwrap();
        assert!(GnSpec { j: 1, m: 1, ..good }.validate(1).is_err());
    }

    #[test]
    fn gn_constant_and_dilation() {
        let grid = Grid::new(1, 40.0, 2048).unwrap();
        let s = GnSpec {
            j: 0,
            m: 1,
            theta: 0.25,
            r: 4.0,
            r1: 2.0,
            r2: 2.0,
        };
        let rep = gn_check(
            &GridField::constant(grid, 2.0),
            &GnSpec {
                j: 0,
                m: 1,
                theta: 0.0,
                r: 2.0,
                r1: 2.0,
                r2: 2.0,
            },
        )
        .unwrap();
        assert!((rep.ratio - 1.0).abs() < 1e-12);
        let fam = gn_dilation(grid, &s, &[0.5, 0.75, 1.0, 1.5, 2.0]).unwrap();
        assert!(fam.max_ratio / fam.min_ratio - 1.0 < 0.03, "{:?}", fam.ratios);
    }

    #[test]
    fn gn_random_fields() {
        let grid = Grid::new(1, 40.0, 2048).unwrap();
        let s = GnSpec {
            j: 0,
            m: 1,
            theta: 0.25,
            r: 4.0,
            r1: 2.0,
            r2: 2.0,
        };
        let a = gn_monte_carlo(grid, &s, 50, 11).unwrap();
        let b = gn_monte_carlo(grid, &s, 50, 11).unwrap();
        assert!(a.finite && a.max_ratio < 2.0);
        assert_eq!(a.ratios, b.ratios);
    }

    #[test]
    fn derivative_tensor_2d() {
        let grid = Grid::new(2, 20.0, 128).unwrap();
        let f = GridField::radial(grid, |r| (-r * r).exp());
        let fourier = Fourier::new(grid);
        let d1 = derivative_magnitude(&fourier, &f, 1);
        // |∇ e^{-r²}| = 2r e^{-r²}
        let axis = grid.axis();
        let (i, j) = (70, 64);
        let r = axis[i].hypot(axis[j]);
        assert!((d1[i * 128 + j] - 2.0 * r * (-r * r).exp()).abs() < 1e-8);
    }
}
