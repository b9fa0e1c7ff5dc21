use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("mass matrix is not positive definite after constraint elimination")]
    SingularMass,
    #[error("eigensolver failed: {0}")]
    EigenFailure(String),
    #[error("invalid sensor selection: {0}")]
    InvalidSensor(String),
    #[error("degenerate mode shape: {0}")]
    DegenerateShape(String),
    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),
    #[error("posterior evaluation failed: {0}")]
    EvaluationFailure(String),
    #[error(
        "pre-screening produced no sample with positive posterior; \
         raise the noise coefficients (eta) or widen the search box"
    )]
    EmptyScreen,
    #[error("histogram is empty")]
    EmptyHistogram,
    #[error("sample {value} in dimension {dim} lies outside [{lo}, {hi}]")]
    OutOfBox { dim: usize, value: f64, lo: f64, hi: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
