//! Nonlinear time integration of the coupled damped wave system.

mod config;
mod integrator;
mod nonlinear;
mod picard;
mod simulate;

pub use config::{Profile, SimConfig};
pub use integrator::{Forcing, Integrator, SimState, SpectralState, StepCoeffs};
pub use nonlinear::{nonlinearity, power_modulus};
pub use picard::{picard_iterate, PicardReport};
pub use simulate::{
    simulate, simulate_with, step, zero_state, RunHooks, SimOutcome, SimStatus, SnapshotHook, MAX_HALVINGS,
};
