use thiserror::Error;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quaternion norm {norm} deviates from 1 by more than the repair limit")]
    NotUnit { norm: f64 },
    #[error("rotation matrix is not orthonormal (max deviation {deviation})")]
    NotOrthonormal { deviation: f64 },
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },
    #[error("path parameter {tau} outside [0, 1]")]
    TauOutOfRange { tau: f64 },
    #[error("displacement has no well-defined screw axis")]
    NoMotion,
    #[error("trajectory needs at least {min} poses, got {got}")]
    TooShort { min: usize, got: usize },
    #[error("timestamps must be strictly increasing (index {index})")]
    NonMonotonicTime { index: usize },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("samples per segment must be positive")]
    ZeroSamples,
    #[error("step bounds must be positive")]
    InvalidStep,
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(&'static str),
    #[error("invalid region of interest dimensions")]
    InvalidRegion,
    #[error("duplicate object id `{0}`")]
    DuplicateObject(alloc::string::String),
    #[error("object `{0}` missing from scene")]
    UnknownObject(alloc::string::String),
    #[error("invalid screw parameters: {0}")]
    InvalidScrew(&'static str),
    #[error("invalid synthetic spec: {0}")]
    InvalidSynth(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
