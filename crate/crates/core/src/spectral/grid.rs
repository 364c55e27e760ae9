use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_POINTS_1D: usize = 8192;
pub const DEFAULT_POINTS_2D: usize = 1024;
/// Box margin over `support + T_max`.
pub const BOX_MARGIN: f64 = 1.1;

/// Uniform periodic box `[-L, L)ⁿ` with `N` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub half_length: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(n: usize, half_length: f64, points: usize) -> Result<Self> {
        if !(n == 1 || n == 2) {
            return Err(Error::Parameter(format!("dimension must be 1 or 2, got {n}")));
        }
        if points < 16 || !points.is_power_of_two() {
            return Err(Error::Parameter(format!(
                "points per axis must be a power of two ≥ 16, got {points}"
            )));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::Parameter(format!(
                "half-length must be positive, got {half_length}"
            )));
        }
        Ok(Self { n, half_length, points })
    }

    /// Box sized so that unit-speed propagation cannot wrap around before `t_max`.
    pub fn auto(n: usize, support_radius: f64, t_max: f64, points: Option<usize>) -> Result<Self> {
        let points = points.unwrap_or(if n == 1 { DEFAULT_POINTS_1D } else { DEFAULT_POINTS_2D });
        Self::new(n, BOX_MARGIN * (support_radius + t_max), points)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.points as f64
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of one cell, `dxⁿ`.
    pub fn cell(&self) -> f64 {
        self.dx().powi(self.n as i32)
    }

    pub fn measure(&self) -> f64 {
        (2.0 * self.half_length).powi(self.n as i32)
    }

    /// Node coordinates along one axis.
    pub fn axis(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.points).map(|i| -self.half_length + i as f64 * dx).collect()
    }

    /// Signed wavenumber index for FFT slot `k`.
    pub fn signed_index(&self, k: usize) -> i64 {
        let n = self.points as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// `ξ` along one axis in FFT order.
    pub fn axis_wavenumbers(&self) -> Vec<f64> {
        let s = PI / self.half_length;
        (0..self.points).map(|k| s * self.signed_index(k) as f64).collect()
    }

    /// `|ξ|` for every mode in FFT storage order.
    pub fn wavenumber_magnitudes(&self) -> Vec<f64> {
        let w = self.axis_wavenumbers();
        match self.n {
            1 => w.iter().map(|x| x.abs()).collect(),
            _ => {
                let mut out = Vec::with_capacity(self.len());
                for a in &w {
                    for b in &w {
                        out.push(a.hypot(*b));
                    }
                }
                out
            }
        }
    }

    /// Storage index of the mode `-k`.
    pub fn mirror(&self, idx: usize) -> usize {
        let n = self.points;
        let neg = |k: usize| if k == 0 { 0 } else { n - k };
        match self.n {
            1 => neg(idx),
            _ => neg(idx / n) * n + neg(idx % n),
        }
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Real field on a [`Grid`], row-major for `n = 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x)` with `x` of length `n`.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let axis = grid.axis();
        let values = match grid.n {
            1 => axis.iter().map(|&x| f(&[x])).collect(),
            _ => {
                let mut v = Vec::with_capacity(grid.len());
                for &x in &axis {
                    for &y in &axis {
                        v.push(f(&[x, y]));
                    }
                }
                v
            }
        };
        Self { grid, values }
    }

    /// Radial profile `f(|x|)`.
    pub fn radial(grid: Grid, mut f: impl FnMut(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| f(x.iter().map(|c| c * c).sum::<f64>().sqrt()))
    }

    pub fn check_finite(&self) -> Result<()> {
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput(format!("value {} at node {i}", self.values[i])));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rules() {
        assert!(Grid::new(1, 10.0, 8).is_err());
        assert!(Grid::new(1, 10.0, 24).is_err());
        assert!(Grid::new(3, 10.0, 16).is_err());
        let g = Grid::new(1, 10.0, 16).unwrap();
        assert_eq!(g.dx(), 1.25);
        let w = g.axis_wavenumbers();
        assert_eq!(w[1], PI / 10.0);
        assert_eq!(w[8], -8.0 * PI / 10.0);
        let a = Grid::auto(1, 5.0, 100.0, None).unwrap();
        assert!((a.half_length - 115.5).abs() < 1e-12);
        assert_eq!(a.points, 8192);
    }

    #[test]
    fn mirror_is_involution() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.mirror(g.mirror(i)), i);
        }
        assert_eq!(g.mirror(0), 0);
        assert_eq!(g.mirror(1), 15);
        assert_eq!(g.mirror(16), 15 * 16);
    }
}
