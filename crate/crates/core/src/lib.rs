//! Extended Aw-Rascle traffic model with on/off-ramp source terms.
//!
//! The system `U_t + F(U)_x = R(U)` with `U = (k, k (v + p(k)))` is advanced
//! by a MacCormack predictor-corrector followed by central-dispersion
//! smoothing ([`solver`]). [`scenario`] builds initial states and parses the
//! config format, and [`analysis`] holds the verification tools: mass
//! ledger, total variation, RMSE, a Lax-Friedrichs reference solver and grid
//! self-convergence.

pub mod analysis;
pub mod error;
pub mod field_csv;
pub mod model;
pub mod scenario;
pub mod solver;

pub use error::{
    AnalysisError, CsvError, DomainError, ScenarioError, SolverError, ValidationError,
};
pub use model::{Grid, ModelParams, RampConfig, Schedule, SourceCase, State};
pub use scenario::{load_scenario, load_scenario_file, ScenarioSpec};
pub use solver::{BoundaryMode, FieldSnapshot, SimulationRecord, Smoothing, Solver, StepAudit};
