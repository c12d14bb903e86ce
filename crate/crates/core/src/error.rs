use num_complex::Complex64;
use thiserror::Error;

/// Coarse error families, used for CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorFamily {
    Config,
    TailConditions,
    Convergence,
    Certificate,
}

impl ErrorFamily {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorFamily::Config => 10,
            ErrorFamily::TailConditions => 20,
            ErrorFamily::Convergence => 30,
            ErrorFamily::Certificate => 40,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown builtin potential `{0}`")]
    UnknownPotential(String),

    #[error("potential `{label}` rejected: {reason}")]
    InvalidPotential { label: String, reason: String },

    #[error("non-finite potential value at x = {x}")]
    NonFinite { x: f64 },

    #[error("cone condition violated at x = {x} for E = {e}: square-root branch is ambiguous")]
    BranchAmbiguity { x: f64, e: Complex64 },

    #[error("tail conditions not satisfiable within horizon {horizon} for E = {e}")]
    TailConditions { e: Complex64, horizon: f64 },

    #[error("field length mismatch: {0} vs {1}")]
    MeshMismatch(usize, usize),

    #[error("{stage}: no convergence for E = {e} after {iters} iterations")]
    NoConvergence {
        stage: &'static str,
        e: Complex64,
        iters: usize,
    },

    #[error("iterate left the contraction ball (distance {dist:.3e} > {eps}) for E = {e}")]
    BallExit { e: Complex64, dist: f64, eps: f64 },

    #[error("{stage}: certificate failed for E = {e}: {detail}")]
    Certificate {
        stage: &'static str,
        e: Complex64,
        detail: String,
    },

    #[error("ODE step size underflow at x = {x} for E = {e}")]
    StepUnderflow { x: f64, e: Complex64 },

    #[error("width undefined: level {v} is below the potential minimum {min}")]
    ZeroWidth { v: f64, min: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("possible multiple eigenvalue near E = {e}: |dP| = {dp:.3e}")]
    Multiplicity { e: Complex64, dp: f64 },

    #[error("{stage}: {inner}")]
    Stage { stage: &'static str, inner: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps `self` with a pipeline stage label.
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            inner: Box::new(self),
        }
    }

    pub fn family(&self) -> ErrorFamily {
        match self {
            Error::Config(_)
            | Error::UnknownPotential(_)
            | Error::InvalidPotential { .. }
            | Error::MeshMismatch(..)
            | Error::Unsupported(_)
            | Error::ZeroWidth { .. }
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => ErrorFamily::Config,
            Error::NonFinite { .. }
            | Error::BranchAmbiguity { .. }
            | Error::TailConditions { .. } => ErrorFamily::TailConditions,
            Error::NoConvergence { .. }
            | Error::BallExit { .. }
            | Error::StepUnderflow { .. }
            | Error::Multiplicity { .. } => ErrorFamily::Convergence,
            Error::Certificate { .. } => ErrorFamily::Certificate,
            Error::Stage { inner, .. } => inner.family(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
