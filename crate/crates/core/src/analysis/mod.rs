//! Verification tooling: field metrics, the per-step mass ledger, an
//! independent Lax-Friedrichs solver and grid self-convergence studies.

mod convergence;
mod ledger;
mod metrics;
mod oracle;

pub use convergence::{convergence_study, ConvergenceLevel, ConvergenceReport, Scheme};
pub use ledger::{mass_ledger, LedgerEntry};
pub use metrics::{
    compare, front_position, l1_distance, max_abs_error, rmse, total_variation, ComparisonReport,
};
pub use oracle::lax_friedrichs_oracle;

pub use crate::solver::FieldSnapshot;
