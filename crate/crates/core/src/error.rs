use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The transfer function modulus `exp(-Im E)` would exceed `exp(limit)` at `(kx, ky)`.
    #[error(
        "amplification guard tripped at (kx, ky) = ({kx:.6e}, {ky:.6e}) rad/m: \
         modulus exponent {exponent:.6e} exceeds {limit}"
    )]
    Amplification {
        kx: f64,
        ky: f64,
        exponent: f64,
        limit: f64,
    },

    #[error("grid too large for direct transform: {nx}x{ny} exceeds {max} samples")]
    GridTooLarge { nx: usize, ny: usize, max: usize },

    #[error("raster {path}: {reason}")]
    Raster { path: PathBuf, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidGrid(_)
            | Error::InvalidParameter(_)
            | Error::GridMismatch
            | Error::GridTooLarge { .. } => 2,
            Error::Raster { .. } => 3,
            Error::Amplification { .. } => 4,
            Error::Io { .. } => 5,
        }
    }
}
