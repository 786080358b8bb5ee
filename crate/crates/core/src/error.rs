use std::path::PathBuf;

use thiserror::Error;

use crate::solver::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    /// The inverse Laplacian is undefined on the constant mode.
    #[error("gauge error: mean mode is {0:e}, Biot-Savart requires a zero-mean field")]
    Gauge(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error in `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("exponents (p={p}, q={q}, r={r}) are outside the uniqueness region ({class}); see region_classify")]
    Classification {
        p: f64,
        q: f64,
        r: f64,
        class: String,
    },

    #[error(transparent)]
    Unstable(Box<Instability>),

    #[error("bad snapshot header: {0}")]
    BadSnapshotHeader(String),

    #[error("truncated snapshot at byte offset {offset}: expected {expected} bytes in total")]
    TruncatedSnapshot { offset: u64, expected: u64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Non-finite state encountered while time stepping.
#[derive(Debug, Error)]
#[error(
    "non-finite field at t={time} (step {step}); dt={dt} vs whistler CFL limit {whistler_limit:e} \
     (cfl_safety={cfl_safety})"
)]
pub struct Instability {
    pub time: f64,
    pub step: usize,
    pub dt: f64,
    pub whistler_limit: f64,
    pub cfl_safety: f64,
    /// Everything recorded up to and including the last finite state.
    pub partial: Option<Trajectory>,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
