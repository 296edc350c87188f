use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum MintError {
    #[error("degenerate wall: endpoints coincide at ({x}, {y})")]
    DegenerateWall { x: f64, y: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("ranging outage: no path estimates for bs {bs_id} at position {position_index}")]
    RangingOutage { position_index: usize, bs_id: usize },

    #[error("SINR is unbounded: noise and diffuse power are both zero")]
    InfiniteSinr,

    #[error("Fisher information is singular (condition number {condition:.3e})")]
    SingularFim { condition: f64 },

    #[error("pulse band [{lo:.4e}, {hi:.4e}] Hz is not covered by the measured band [{measured_lo:.4e}, {measured_hi:.4e}] Hz")]
    BandMismatch {
        lo: f64,
        hi: f64,
        measured_lo: f64,
        measured_hi: f64,
    },

    #[error("window [{start:.4e}, {end:.4e}] s lies outside the frame")]
    WindowOutsideFrame { start: f64, end: f64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl MintError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        MintError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        MintError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, MintError>;
