use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Image, field, or curve dimensions are invalid for the requested operation.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Sample or pixel values violate a range invariant.
    #[error("value error: {0}")]
    Value(String),

    /// A region of interest does not fit inside its host image.
    #[error("roi out of bounds: {0}")]
    Bounds(String),

    /// No column in the search window stands out as the fiducial marker.
    #[error("fiducial not found: {0}")]
    FiducialNotFound(String),

    /// Too few samples for the requested fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The least-squares system is rank deficient.
    #[error("ill-conditioned system: {0}")]
    Conditioning(String),

    /// The curve is too flat to invert.
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    /// Invalid configuration parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// Division by a zero or negative baseline.
    #[error("division error: {0}")]
    Division(String),

    /// A calibration profile failed to parse or has an unsupported version.
    #[error("profile error: {0}")]
    Profile(String),

    /// Unsupported or malformed file format.
    #[error("unsupported format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
