//! Periodic-box spectral engine for the linear damped wave flow.

mod fft;
mod grid;
mod io;
mod kernel;
mod ops;

pub use fft::{Fourier, Spectrum};
pub use grid::{Grid, GridField, BOX_MARGIN, DEFAULT_POINTS_1D, DEFAULT_POINTS_2D};
pub use io::{read_probes, read_snapshot, write_probes, write_snapshot, ProbeWriter, SnapshotMeta, PROBE_HEADER};
pub use kernel::{kernel_multiplier, multipliers, Kernel, Multipliers};
pub use ops::{
    apply_kernel, apply_kernel_with, evolve_spectra, fractional_derivative, gradient, gradient_l2, linear_evolve,
    norms, norms_with, NormProbe,
};
