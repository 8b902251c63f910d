use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A benchmark or run configuration failed validation. `path` is the
    /// field path inside the document (e.g. `nets[2].endpoints[1]`).
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("chiplet larger than canvas: {chiplet} needs {span_rows}x{span_cols} cells on a {grid_n}x{grid_n} grid")]
    ChipletTooLarge {
        chiplet: String,
        span_rows: usize,
        span_cols: usize,
        grid_n: usize,
    },

    #[error("masked action violation: {0}")]
    MaskedActionViolation(String),

    #[error("placement deadlock: no feasible cell for chiplet {chiplet} at step {step}")]
    PlacementDeadlock { chiplet: String, step: usize },

    #[error("thermal solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    ThermalNonConvergence { iterations: usize, residual: f64 },

    #[error("non-finite value during update: {0}")]
    NonFinite(String),

    #[error("point ({wl}, {temp}) lies outside the reference box ({ref_wl}, {ref_temp})")]
    OutsideReference {
        wl: f64,
        temp: f64,
        ref_wl: f64,
        ref_temp: f64,
    },

    #[error("could not construct a legal layout after {0} attempts")]
    NoLegalLayout(usize),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
