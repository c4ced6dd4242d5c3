use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the documented domain of an operation.
    #[error("invalid input: {0}")]
    Validation(String),

    /// Two-photon spectrum too close to degenerate for the partial-fraction
    /// closed form; use the matrix-exponential propagator instead.
    #[error("near-degenerate spectrum (relative gap {gap:.3e}); use the expm propagator")]
    Degenerate { gap: f64 },

    #[error("integration failed at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("g2 undefined for cavity {cavity}: mean photon number {mean:.3e}")]
    UndefinedCorrelation { cavity: usize, mean: f64 },

    #[error("steady state not unique: kernel multiplicity {multiplicity}")]
    DegenerateKernel { multiplicity: usize },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("numerical invariant violated: {0}")]
    Invariant(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::UnsupportedRegime(_) | Error::Json { .. } => 2,
            Error::Degenerate { .. }
            | Error::Integration { .. }
            | Error::UndefinedCorrelation { .. }
            | Error::DegenerateKernel { .. }
            | Error::Invariant(_) => 3,
            Error::Io { .. } => 4,
        }
    }
}
