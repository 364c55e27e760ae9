//! Moduli of continuity, the critical curve, and the Dini-type classification.

mod checks;
mod dini;
mod modulus;
mod pair;
mod weight;

pub use checks::{
    check_littleo, check_star, check_star_with, convexity_check, ConvexityReport, LittleOReport, StarReport,
    DEFAULT_STAR_THRESHOLD,
};
pub use dini::{classify_dini, dini_integral, middle_modulus, DiniStatus, DiniVerdict};
pub use modulus::{Atom, Modulus, MAX_LOG_DEPTH};
pub use pair::CriticalPair;
pub use weight::{loss_weight, weight_monotonicity_check, EllConfig, Regime, WeightReport};
