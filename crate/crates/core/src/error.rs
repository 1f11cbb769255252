use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The analytic class number was not within the guard distance of an
    /// integer, which means the floating point evaluation cannot be trusted.
    #[error("rounding guard violated for D={discriminant} (d={radicand}): h estimate {estimate} is {distance:.3e} from an integer (guard {guard})")]
    RoundingGuardViolation {
        radicand: u64,
        discriminant: u64,
        estimate: f64,
        distance: f64,
        guard: f64,
    },

    /// A prime radicand produced an even class number.
    #[error("even class number h={h} for prime radicand p={p}")]
    EvenClassNumber { p: u64, h: u64 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("{path}: checksum mismatch in chunk {chunk}")]
    ChecksumMismatch { path: PathBuf, chunk: usize },

    #[error("{path}: unsupported table format version {found} (expected {expected})")]
    UnsupportedVersion { path: PathBuf, found: String, expected: u32 },

    #[error("{path}:{line}: {message}")]
    Format { path: PathBuf, line: usize, message: String },

    #[error("checkpoint mismatch: {0}")]
    CheckpointMismatch(String),

    #[error("chunk starting at d={start} is not contiguous with frontier {frontier}")]
    NonContiguous { start: u64, frontier: u64 },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Guard and invariant violations, as opposed to bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::RoundingGuardViolation { .. } | Error::EvenClassNumber { .. } | Error::Consistency(_)
        )
    }
}
