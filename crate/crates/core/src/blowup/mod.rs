//! Test functions, blow-up functionals and the empirical ODE inequality system.

mod checks;
mod ledger;
mod testfn;
mod trajectory;

pub use checks::{
    inverse_mass_profile, jensen_check, qstar_exponent, qstar_measure, ConvexPhi, InverseMassReport, JensenReport,
};
pub use ledger::{
    big_g_swapped, cadence_sensitivity, default_ladder, functional_with, functionals, g_and_big_g, ladder,
    ode_inequality_check, phi_power, theta, BlowupLedger, LedgerRow, OdePoint, OdeReport, OdeStatus, PsiTable, Samples,
    DERIV_STEP, LEDGER_HEADER,
};
pub use testfn::{phi_profile, phi_r, phi_star, rho, TestFunction};
pub use trajectory::Trajectory;
