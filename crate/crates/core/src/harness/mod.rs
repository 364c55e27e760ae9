//! Experiment orchestration: curve utilities, decay fits, lemma checks and sweeps.

mod curve;
mod decay;
mod lemmas;
pub mod plot;
mod sweep;

pub use curve::{curve_qc, linear_exponent, predicted_exponents, NormKind, Unknown};
pub use decay::{
    ell_fn, fit_decay, matsumura_check, DecayReport, MatsumuraReport, MatsumuraSpec, Verdict, EXPONENT_TOLERANCE,
    FIT_START, MIN_PROBES,
};
pub use lemmas::{
    derivative_magnitude, gn_check, gn_dilation, gn_monte_carlo, lemma142_check, ConvolutionReport, ConvolutionSpec,
    GnFamilyReport, GnReport, GnSpec,
};
pub use sweep::{
    norms_plot, read_summary, report, run_fits, run_sweep, summary_csv, SummaryRow, SweepSpec, SweepSummary,
    SMALL_AMPLITUDE, SUMMARY_HEADER,
};
