use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("at least one coefficient required")]
    EmptyCoefficients,

    #[error("invalid coefficient a_{index} = {value}: coefficients must be finite and positive")]
    InvalidCoefficient { index: usize, value: f64 },

    #[error("invalid coefficient family: {0}")]
    InvalidFamily(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("point {0} is not in the index set")]
    NotInSet(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("measure has {measure} weights but the index set has {points} points")]
    SizeMismatch { measure: usize, points: usize },

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
