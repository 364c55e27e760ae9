//! Forward and inverse transforms of grid fields.
//!
//! The forward transform is unnormalized; the inverse divides by the number of nodes.

use super::grid::Grid;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Spectral coefficients in FFT storage order.
pub type Spectrum = Vec<Complex64>;

/// Shared transform plans for one grid. Cheap to clone.
#[derive(Clone)]
pub struct Fourier {
    grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("grid", &self.grid).finish()
    }
}

#[cfg(feature = "parallel")]
fn rows_mut(data: &mut [Complex64], width: usize, f: impl Fn(&mut [Complex64]) + Sync + Send) {
    use rayon::prelude::*;
    data.par_chunks_mut(width).for_each(f);
}

#[cfg(not(feature = "parallel"))]
fn rows_mut(data: &mut [Complex64], width: usize, f: impl Fn(&mut [Complex64]) + Sync + Send) {
    data.chunks_mut(width).for_each(f);
}

fn transpose(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); data.len()];
    const B: usize = 32;
    for ib in (0..n).step_by(B) {
        for jb in (0..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                for j in jb..(jb + B).min(n) {
                    out[j * n + i] = data[i * n + j];
                }
            }
        }
    }
    out
}

impl Fourier {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            fwd: planner.plan_fft_forward(grid.points),
            inv: planner.plan_fft_inverse(grid.points),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn run(&self, data: &mut Vec<Complex64>, plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.points;
        let process = |row: &mut [Complex64]| {
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            plan.process_with_scratch(row, &mut scratch);
        };
        match self.grid.n {
            1 => process(data),
            _ => {
                rows_mut(data, n, process);
                let mut t = transpose(data, n);
                rows_mut(&mut t, n, process);
                *data = transpose(&t, n);
            }
        }
    }

    pub fn forward_complex(&self, mut data: Vec<Complex64>) -> Spectrum {
        self.run(&mut data, &self.fwd);
        data
    }

    pub fn inverse_complex(&self, mut data: Spectrum) -> Vec<Complex64> {
        self.run(&mut data, &self.inv);
        let scale = 1.0 / self.grid.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
        data
    }

    pub fn forward(&self, values: &[f64]) -> Spectrum {
        self.forward_complex(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Inverse transform keeping the real part.
    pub fn inverse(&self, spec: Spectrum) -> Vec<f64> {
        self.inverse_complex(spec).into_iter().map(|z| z.re).collect()
    }

    /// Inverse transform that also reports `max |Im| / max |Re|`.
    pub fn inverse_checked(&self, spec: Spectrum) -> (Vec<f64>, f64) {
        let z = self.inverse_complex(spec);
        let re_max = z.iter().fold(0.0f64, |m, c| m.max(c.re.abs()));
        let im_max = z.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
        let resid = if re_max > 0.0 { im_max / re_max } else { im_max };
        (z.into_iter().map(|c| c.re).collect(), resid)
    }

    /// Transforms two real fields with one complex transform.
    pub fn forward_pair(&self, a: &[f64], b: &[f64]) -> (Spectrum, Spectrum) {
        let z = self.forward_complex(a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect());
        let half = Complex64::new(0.5, 0.0);
        let mut sa = Vec::with_capacity(z.len());
        let mut sb = Vec::with_capacity(z.len());
        for (k, &zk) in z.iter().enumerate() {
            let zm = z[self.grid.mirror(k)].conj();
            sa.push((zk + zm) * half);
            // (zk - zm) / 2i
            let d = (zk - zm) * half;
            sb.push(Complex64::new(d.im, -d.re));
        }
        (sa, sb)
    }

    /// Inverse of two Hermitian spectra with one complex transform.
    pub fn inverse_pair(&self, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let z = self.inverse_complex(
            a.iter()
                .zip(b)
                .map(|(&x, &y)| x + Complex64::new(-y.im, y.re))
                .collect(),
        );
        z.into_iter().map(|c| (c.re, c.im)).unzip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn field(grid: &Grid, seed: u64) -> Vec<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn parseval_and_round_trip() {
        for grid in [Grid::new(1, 5.0, 64).unwrap(), Grid::new(2, 5.0, 32).unwrap()] {
            let f = Fourier::new(grid);
            let v = field(&grid, 7);
            let s = f.forward(&v);
            let e_phys: f64 = v.iter().map(|x| x * x).sum();
            let e_spec: f64 = s.iter().map(|z| z.norm_sqr()).sum::<f64>() / grid.len() as f64;
            assert_relative_eq!(e_phys, e_spec, max_relative = 1e-12);
            let back = f.inverse(s);
            for (a, b) in v.iter().zip(&back) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn paired_transforms_match_single() {
        for grid in [Grid::new(1, 5.0, 64).unwrap(), Grid::new(2, 5.0, 16).unwrap()] {
            let f = Fourier::new(grid);
            let a = field(&grid, 1);
            let b = field(&grid, 2);
            let (sa, sb) = f.forward_pair(&a, &b);
            let (ra, rb) = (f.forward(&a), f.forward(&b));
            for k in 0..grid.len() {
                assert!((sa[k] - ra[k]).norm() < 1e-12);
                assert!((sb[k] - rb[k]).norm() < 1e-12);
            }
            let (ia, ib) = f.inverse_pair(&sa, &sb);
            for k in 0..grid.len() {
                assert!((ia[k] - a[k]).abs() < 1e-14 && (ib[k] - b[k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn two_dimensional_mode_lands_in_expected_slot() {
        let grid = Grid::new(2, std::f64::consts::PI, 16).unwrap();
        // cos(x) * cos(2y) has modes (±1, ±2)
        let v: Vec<f64> = {
            let ax = grid.axis();
            let mut v = Vec::new();
            for &x in &ax {
                for &y in &ax {
                    v.push(x.cos() * (2.0 * y).cos());
                }
            }
            v
        };
        let s = Fourier::new(grid).forward(&v);
        let idx = 16 + 2;
        assert!(s[idx].norm() > 1.0);
        assert!(s[3 * 16 + 2].norm() < 1e-10);
    }
}
