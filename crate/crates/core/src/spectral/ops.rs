use super::fft::{Fourier, Spectrum};
use super::grid::GridField;
use super::kernel::{multipliers, Kernel};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest tolerated imaginary residue (relative) after a real multiplier.
pub const IMAG_RESIDUE_TOL: f64 = 1e-12;

/// `K(t) ∗ f` through the exact per-mode multiplier.
pub fn apply_kernel(f: &GridField, t: f64, which: Kernel) -> Result<GridField> {
    apply_kernel_with(&Fourier::new(f.grid), f, t, which)
}

pub fn apply_kernel_with(fourier: &Fourier, f: &GridField, t: f64, which: Kernel) -> Result<GridField> {
    f.check_finite()?;
    fourier.grid().check_same(&f.grid)?;
    if !(t >= 0.0) {
        return Err(Error::Parameter(format!("time must be nonnegative, got {t}")));
    }
    let mut spec = fourier.forward(&f.values);
    for (z, xi) in spec.iter_mut().zip(f.grid.wavenumber_magnitudes()) {
        *z *= multipliers(t, xi).get(which);
    }
    let (values, resid) = fourier.inverse_checked(spec);
    if resid > IMAG_RESIDUE_TOL {
        log::warn!("imaginary residue {resid:e} after applying {which:?}");
    }
    Ok(GridField { grid: f.grid, values })
}

/// `(w, w_t)` at time `t` for data `(w0, w1)`.
pub fn linear_evolve(w0: &GridField, w1: &GridField, t: f64) -> Result<(GridField, GridField)> {
    w0.grid.check_same(&w1.grid)?;
    let fourier = Fourier::new(w0.grid);
    let s0 = fourier.forward(&w0.values);
    let s1 = fourier.forward(&w1.values);
    let (a, b) = evolve_spectra(&fourier, &s0, &s1, t);
    let (w, wt) = fourier.inverse_pair(&a, &b);
    Ok((
        GridField {
            grid: w0.grid,
            values: w,
        },
        GridField {
            grid: w0.grid,
            values: wt,
        },
    ))
}

/// Linear flow of spectral data `(ŵ₀, ŵ₁)` over time `t`.
pub fn evolve_spectra(
    fourier: &Fourier,
    s0: &[num_complex::Complex64],
    s1: &[num_complex::Complex64],
    t: f64,
) -> (Spectrum, Spectrum) {
    let xi = fourier.grid().wavenumber_magnitudes();
    let mut w = Vec::with_capacity(xi.len());
    let mut wt = Vec::with_capacity(xi.len());
    for ((&a, &b), &x) in s0.iter().zip(s1).zip(&xi) {
        let m = multipliers(t, x);
        w.push(a * m.k0 + b * m.k1);
        wt.push(a * m.dt_k0 + b * m.dt_k1);
    }
    (w, wt)
}

/// One row of the norm probe stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormProbe {
    pub t: f64,
    pub unknown: String,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub h1: f64,
}

/// Riemann-sum norms plus the spectral `‖∇f‖_{L²}`.
pub fn norms(f: &GridField) -> Result<NormProbe> {
    norms_with(&Fourier::new(f.grid), f, None)
}

/// Norms reusing a transform; `spec` may supply the already computed spectrum of `f`.
pub fn norms_with(fourier: &Fourier, f: &GridField, spec: Option<&[num_complex::Complex64]>) -> Result<NormProbe> {
    f.check_finite()?;
    let cell = f.grid.cell();
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    let mut linf: f64 = 0.0;
    for &v in &f.values {
        let a = v.abs();
        l1 += a;
        l2 += a * a;
        linf = linf.max(a);
    }
    let owned;
    let s = match spec {
        Some(s) => s,
        None => {
            owned = fourier.forward(&f.values);
            &owned[..]
        }
    };
    Ok(NormProbe {
        t: 0.0,
        unknown: String::new(),
        l1: l1 * cell,
        l2: (l2 * cell).sqrt(),
        linf,
        h1: gradient_l2(fourier, s),
    })
}

/// `‖∇f‖_{L²}` from the spectrum by Parseval.
pub fn gradient_l2(fourier: &Fourier, spec: &[num_complex::Complex64]) -> f64 {
    let g = fourier.grid();
    let xi = g.wavenumber_magnitudes();
    let sum: f64 = spec.iter().zip(&xi).map(|(z, x)| x * x * z.norm_sqr()).sum();
    (sum * g.cell() / g.len() as f64).sqrt()
}

/// `|ξ|^j` applied spectrally; for `j = 1` this has the same `L²` norm as `∇f`.
pub fn fractional_derivative(fourier: &Fourier, f: &GridField, order: f64) -> GridField {
    let mut spec = fourier.forward(&f.values);
    for (z, xi) in spec.iter_mut().zip(f.grid.wavenumber_magnitudes()) {
        *z *= if xi == 0.0 {
            if order == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            xi.powf(order)
        };
    }
    GridField {
        grid: f.grid,
        values: fourier.inverse(spec),
    }
}

/// Components of `∇f` (one per axis).
pub fn gradient(fourier: &Fourier, f: &GridField) -> Vec<GridField> {
    let g = f.grid;
    let spec = fourier.forward(&f.values);
    let w = g.axis_wavenumbers();
    let n = g.points;
    (0..g.n)
        .map(|axis| {
            let mut s = spec.clone();
            for (idx, z) in s.iter_mut().enumerate() {
                let k = if g.n == 1 {
                    idx
                } else if axis == 0 {
                    idx / n
                } else {
                    idx % n
                };
                // drop the unpaired Nyquist mode to keep the derivative real
                let xi = if k == n / 2 { 0.0 } else { w[k] };
                *z *= num_complex::Complex64::new(0.0, xi);
            }
            GridField {
                grid: g,
                values: fourier.inverse(s),
            }
        })
        .collect()
}
