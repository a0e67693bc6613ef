use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample count {0} must be a power of two and at least 16")]
    InvalidSampleCount(usize),
    #[error("sample count mismatch: expected {expected}, got {got}")]
    SampleMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("evaluation failed: {0}")]
    Evaluation(String),
    #[error("curve derivative vanishes at sample {index}")]
    IrregularCurve { index: usize },
    #[error("point lies within {distance:e} of the curve")]
    TooCloseToCurve { distance: f64 },
    #[error("value {value} is not within {tolerance:e} of an integer")]
    NotNearInteger { value: f64, tolerance: f64 },
    #[error("boundary zeros are not isolated")]
    NonIsolatedBoundaryZeros,
    #[error("function is identically zero (or zeros do not stabilise under refinement)")]
    IdenticallyZeroSuspect,
    #[error("polynomial vanishes on the curve (min |P| = {min_abs:e})")]
    VanishesOnCurve { min_abs: f64 },
    #[error("family is not holomorphic in the disc variable: negative Fourier mass {mass:e}")]
    HolomorphyViolation { mass: f64 },
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("invalid minor selection: {0}")]
    InvalidMinor(String),
    #[error("grid point ({0}, {1}) is off grid")]
    OffGrid(usize, usize),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("embedding differential has real rank {rank} < {expected}")]
    RankDeficient { rank: usize, expected: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
