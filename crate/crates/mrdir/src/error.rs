//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by model construction, data ingestion, sampling and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// Structural or prior parameter outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Dimension mismatch between parameter vectors, genotype spec or statistics.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Genotype with zero or undefined variance (allele frequency outside (0,1)).
    #[error("degenerate genotype: {0}")]
    DegenerateGenotype(String),

    /// Malformed or inconsistent input data.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Covariance matrix with an eigenvalue below the admissible floor.
    #[error("covariance matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    /// Instrument-exposure covariance is exactly zero; the ratio estimate is undefined.
    #[error("weak instrument: variant {variant} has zero covariance with the exposure")]
    WeakInstrument { variant: usize },

    /// Likelihood returned NaN at a sampled point.
    #[error("likelihood evaluated to NaN at point {point:?}")]
    LikelihoodNaN { point: Vec<f64> },

    /// Nested-sampling run hit its iteration cap before the evidence converged.
    #[error(
        "sampler did not converge: {iterations} iterations, log_z={log_z:.6}, \
         remaining log-volume {log_volume_remaining:.3}"
    )]
    NotConverged {
        iterations: usize,
        log_z: f64,
        log_volume_remaining: f64,
    },

    /// I/O failure while reading or writing files.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// CSV parse failure.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// TOML deserialization failure.
    #[error("toml error: {0}")]
    TomlDe(#[from] toml::de::Error),

    /// TOML serialization failure.
    #[error("toml error: {0}")]
    TomlSer(#[from] toml::ser::Error),
}

impl Error {
    /// Process exit code for the CLI: usage/input errors map to 2,
    /// sampler non-convergence to 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotConverged { .. } => 3,
            _ => 2,
        }
    }
}
