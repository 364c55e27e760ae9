//! Second-order exponential time differencing for the coupled system.
//!
//! The linear group is applied exactly per mode. The Duhamel integral of the source
//! is evaluated exactly for the linear interpolant of the source between the step
//! endpoints; the endpoint value at `t + h` comes from an exponential Euler predictor.

use super::nonlinear::power_modulus;
use crate::error::{Error, Result};
use crate::modcont::Modulus;
use crate::quad::GaussRule;
use crate::spectral::{multipliers, Fourier, Grid, GridField, Spectrum};
use num_complex::Complex64;

/// Per-mode coefficients for one step length.
#[derive(Debug, Clone)]
pub struct StepCoeffs {
    pub h: f64,
    k0: Vec<f64>,
    k1: Vec<f64>,
    dk0: Vec<f64>,
    dk1: Vec<f64>,
    /// `∫₀ʰ K1`
    a1: Vec<f64>,
    /// `∫₀ʰ s K1(s) ds`
    b1: Vec<f64>,
}

/// `∫_a^b K1(s) w(s) ds` on Gauss–Legendre panels short enough to resolve the oscillation.
pub(crate) fn k1_moment(rule: &GaussRule, xi: f64, a: f64, b: f64, w: impl Fn(f64) -> f64) -> f64 {
    let omega = (xi * xi - 0.25).max(0.0).sqrt();
    let panels = (((b - a) * omega.max(1.0)) / 1.5).ceil().max(1.0) as usize;
    let step = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * step;
            rule.integrate(|s| multipliers(s, xi).k1 * w(s), lo, lo + step)
        })
        .sum()
}

impl StepCoeffs {
    pub fn new(xi: &[f64], h: f64) -> Self {
        let rule = GaussRule::new(16);
        let n = xi.len();
        let mut c = Self {
            h,
            k0: Vec::with_capacity(n),
            k1: Vec::with_capacity(n),
            dk0: Vec::with_capacity(n),
            dk1: Vec::with_capacity(n),
            a1: Vec::with_capacity(n),
            b1: Vec::with_capacity(n),
        };
        // many modes share |ξ| in 2D; cache on the exact value
        let mut cache: std::collections::HashMap<u64, [f64; 6]> = std::collections::HashMap::new();
        for &x in xi {
            let v = *cache.entry(x.to_bits()).or_insert_with(|| {
                let m = multipliers(h, x);
                [
                    m.k0,
                    m.k1,
                    m.dt_k0,
                    m.dt_k1,
                    k1_moment(&rule, x, 0.0, h, |_| 1.0),
                    k1_moment(&rule, x, 0.0, h, |s| s),
                ]
            });
            c.k0.push(v[0]);
            c.k1.push(v[1]);
            c.dk0.push(v[2]);
            c.dk1.push(v[3]);
            c.a1.push(v[4]);
            c.b1.push(v[5]);
        }
        c
    }
}

/// State of both unknowns in Fourier space.
#[derive(Debug, Clone)]
pub struct SpectralState {
    pub t: f64,
    pub u: Spectrum,
    pub ut: Spectrum,
    pub v: Spectrum,
    pub vt: Spectrum,
}

impl SpectralState {
    pub fn is_finite(&self) -> bool {
        [&self.u, &self.ut, &self.v, &self.vt]
            .iter()
            .all(|s| s.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}

/// Physical-space snapshot of the coupled system.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub u: GridField,
    pub ut: GridField,
    pub v: GridField,
    pub vt: GridField,
    pub t: f64,
}

impl SimState {
    pub fn check(&self) -> Result<()> {
        let g = self.u.grid;
        for f in [&self.ut, &self.v, &self.vt] {
            g.check_same(&f.grid)?;
        }
        Ok(())
    }
}

/// Source terms added to the right-hand sides, as functions of time.
pub type Forcing<'a> = &'a (dyn Fn(f64) -> (Vec<f64>, Vec<f64>) + Sync);

pub struct Integrator {
    pub fourier: Fourier,
    pub grid: Grid,
    xi: Vec<f64>,
    p: f64,
    q: f64,
    mu1: Modulus,
    mu2: Modulus,
    clamp: bool,
    nonlinear: bool,
}

impl Integrator {
    #[allow(clippy::too_many_arguments)]
    pub fn new(grid: Grid, p: f64, q: f64, mu1: Modulus, mu2: Modulus, clamp: bool, nonlinear: bool) -> Self {
        Self {
            fourier: Fourier::new(grid),
            grid,
            xi: grid.wavenumber_magnitudes(),
            p,
            q,
            mu1,
            mu2,
            clamp,
            nonlinear,
        }
    }

    pub fn coeffs(&self, h: f64) -> StepCoeffs {
        StepCoeffs::new(&self.xi, h)
    }

    pub fn to_spectral(&self, s: &SimState) -> SpectralState {
        let (u, v) = self.fourier.forward_pair(&s.u.values, &s.v.values);
        let (ut, vt) = self.fourier.forward_pair(&s.ut.values, &s.vt.values);
        SpectralState { t: s.t, u, ut, v, vt }
    }

    pub fn to_physical(&self, s: &SpectralState) -> SimState {
        let (u, v) = self.fourier.inverse_pair(&s.u, &s.v);
        let (ut, vt) = self.fourier.inverse_pair(&s.ut, &s.vt);
        let g = self.grid;
        SimState {
            u: GridField { grid: g, values: u },
            ut: GridField { grid: g, values: ut },
            v: GridField { grid: g, values: v },
            vt: GridField { grid: g, values: vt },
            t: s.t,
        }
    }

    /// Spectra of the two sources at time `t` given physical `u`, `v`.
    fn sources(&self, u: &[f64], v: &[f64], t: f64, forcing: Option<Forcing>) -> Result<(Spectrum, Spectrum)> {
        let len = u.len();
        let mut nu = vec![0.0; len];
        let mut nv = vec![0.0; len];
        if self.nonlinear {
            power_modulus(v, self.p, &self.mu1, self.clamp, &mut nu)?;
            power_modulus(u, self.q, &self.mu2, self.clamp, &mut nv)?;
        }
        if let Some(f) = forcing {
            let (fu, fv) = f(t);
            for (a, b) in nu.iter_mut().zip(&fu) {
                *a += b;
            }
            for (a, b) in nv.iter_mut().zip(&fv) {
                *a += b;
            }
        }
        Ok(self.fourier.forward_pair(&nu, &nv))
    }

    fn has_source(&self, forcing: Option<Forcing>) -> bool {
        self.nonlinear || forcing.is_some()
    }

    /// Advances by `c.h`. `phys` may carry the physical `(u, v)` of `s` if already known.
    pub fn step(
        &self,
        s: &SpectralState,
        c: &StepCoeffs,
        phys: Option<(&[f64], &[f64])>,
        forcing: Option<Forcing>,
    ) -> Result<SpectralState> {
        let m = s.u.len();
        let mut out = SpectralState {
            t: s.t + c.h,
            u: Vec::with_capacity(m),
            ut: Vec::with_capacity(m),
            v: Vec::with_capacity(m),
            vt: Vec::with_capacity(m),
        };
        for k in 0..m {
            out.u.push(s.u[k] * c.k0[k] + s.ut[k] * c.k1[k]);
            out.ut.push(s.u[k] * c.dk0[k] + s.ut[k] * c.dk1[k]);
            out.v.push(s.v[k] * c.k0[k] + s.vt[k] * c.k1[k]);
            out.vt.push(s.v[k] * c.dk0[k] + s.vt[k] * c.dk1[k]);
        }
        if !self.has_source(forcing) {
            return Ok(out);
        }
        let owned;
        let (u0, v0) = match phys {
            Some(p) => p,
            None => {
                owned = self.fourier.inverse_pair(&s.u, &s.v);
                (&owned.0[..], &owned.1[..])
            }
        };
        let (nu0, nv0) = self.sources(u0, v0, s.t, forcing)?;
        // exponential Euler predictor for the endpoint values
        let pu: Spectrum = (0..m).map(|k| out.u[k] + nu0[k] * c.a1[k]).collect();
        let pv: Spectrum = (0..m).map(|k| out.v[k] + nv0[k] * c.a1[k]).collect();
        let (u1, v1) = self.fourier.inverse_pair(&pu, &pv);
        if u1.iter().chain(&v1).any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteOutput { t: out.t });
        }
        let (nu1, nv1) = self.sources(&u1, &v1, out.t, forcing)?;
        let h = c.h;
        for k in 0..m {
            let w0 = c.b1[k] / h;
            let w1 = c.a1[k] - w0;
            let d0 = c.k1[k] - c.a1[k] / h;
            let d1 = c.a1[k] / h;
            out.u[k] += nu0[k] * w0 + nu1[k] * w1;
            out.v[k] += nv0[k] * w0 + nv1[k] * w1;
            out.ut[k] += nu0[k] * d0 + nu1[k] * d1;
            out.vt[k] += nv0[k] * d0 + nv1[k] * d1;
        }
        if !out.is_finite() {
            return Err(Error::NonFiniteOutput { t: out.t });
        }
        Ok(out)
    }
}

pub(crate) fn zero_spectrum(len: usize) -> Spectrum {
    vec![Complex64::new(0.0, 0.0); len]
}
