use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("expression error at offset {offset}: {message}")]
    Expression { offset: usize, message: String },

    #[error("type error: {0}")]
    Type(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("numerical range error at node {node} (theta = {angle}): {message}")]
    NumericalRange { node: usize, angle: f64, message: String },

    #[error("parametrization error: {0}")]
    Parametrization(String),

    #[error("orientation error: {0}")]
    Orientation(String),

    #[error("convergence domain error: {0}")]
    ConvergenceDomain(String),

    #[error("no convergence after {iterations} iterations (last residual {last:e})")]
    NonConvergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("point query failed at w = {point}: {message}")]
    PointQuery { point: Complex64, message: String },

    #[error("evaluation failed at z = {point}: {message}")]
    Evaluation { point: Complex64, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status: 1 for configuration-type failures, 2 for numerical ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Data(_)
            | Error::Expression { .. }
            | Error::Type(_)
            | Error::Invariant(_)
            | Error::Parametrization(_)
            | Error::Orientation(_)
            | Error::Io(_) => 1,
            Error::Domain(_)
            | Error::NumericalRange { .. }
            | Error::ConvergenceDomain(_)
            | Error::NonConvergence { .. }
            | Error::PointQuery { .. }
            | Error::Evaluation { .. } => 2,
        }
    }
}
