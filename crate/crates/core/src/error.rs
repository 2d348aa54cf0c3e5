use thiserror::Error;

/// A value fell outside the domain of a model function.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{quantity} = {value} is outside the admissible range [{min}, {max}]")]
pub struct DomainError {
    pub quantity: &'static str,
    pub value: f64,
    pub min: f64,
    pub max: f64,
}

/// A parameter or scenario invariant does not hold.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid {field}: {message}")]
pub struct ValidationError {
    /// Dotted path of the offending field, e.g. `params.smoothing_weight`.
    pub field: String,
    pub message: String,
}

impl ValidationError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("CFL number {cfl:.6} exceeds the hard limit {limit}")]
    CflViolation { cfl: f64, limit: f64 },
    #[error("non-finite value in {stage} at cell {cell}")]
    NonFinite { stage: &'static str, cell: usize },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("horizon {horizon} s is not a non-negative integer multiple of dt = {dt} s")]
    BadHorizon { horizon: f64, dt: f64 },
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<SolverError>,
    },
}

impl SolverError {
    /// Step index attached by `run`, if any.
    pub fn step(&self) -> Option<usize> {
        match self {
            SolverError::AtStep { step, .. } => Some(*step),
            _ => None,
        }
    }

    /// The underlying error with any step annotation removed.
    pub fn root(&self) -> &SolverError {
        match self {
            SolverError::AtStep { source, .. } => source.root(),
            other => other,
        }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}
