//! Parameter sweeps with log-log slope fits and pass/fail reports.

mod fit;
mod report;
mod spec;
mod studies;

pub use fit::{fit_loglog_slope, SlopeFit};
pub use report::{Check, Fingerprint, StudyReport, Value};
pub use spec::{LatticeRef, StudyKind, StudySpec, Tolerances};
pub use studies::{
    run_convergence_study, run_corrector_pressure_study, run_divlift_scaling_study,
    run_periodic_regularity_study, run_poincare_study, run_study, run_uniform_estimate_study,
};
