use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    #[error("CFL condition violated: dt = {dt:.6e} exceeds the stability limit {limit:.6e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("shape mismatch for {what}: expected {expected}, found {found}")]
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("requested {requested} eigenpairs but only {available} degrees of freedom exist")]
    EigenCount { requested: usize, available: usize },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("solution blew up at step {step} (t = {time:.6})")]
    BlowUp { step: usize, time: f64 },

    #[error(
        "initial data incompatible with boundary forcing: residual {residual:.3e} > tolerance {tolerance:.3e}"
    )]
    Compatibility { residual: f64, tolerance: f64 },

    #[error("damping coefficient must be nonnegative (node {node}: {value})")]
    NegativeDamping { node: usize, value: f64 },

    #[error(
        "spectral basis captures only {captured:.6} of the {what} energy (need >= {required})"
    )]
    InsufficientBasis {
        what: &'static str,
        captured: f64,
        required: f64,
    },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("initial data not admissible: vanishing-set fraction {fraction:.4} >= {threshold}")]
    Inadmissible { fraction: f64, threshold: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad inputs).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Cfl { .. }
                | Error::Eigen(_)
                | Error::LinearSolve(_)
                | Error::BlowUp { .. }
                | Error::InsufficientBasis { .. }
        )
    }
}
