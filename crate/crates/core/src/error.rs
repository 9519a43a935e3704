use thiserror::Error;

/// Everything that can go wrong between reading a problem and reporting a p-value.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {field}: {detail}")]
    DimensionMismatch { field: &'static str, detail: String },

    #[error("{field} is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd {
        field: &'static str,
        min_eigenvalue: f64,
    },

    #[error("{field} is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { field: &'static str, asymmetry: f64 },

    #[error("invalid groups: {0}")]
    BadGroups(String),

    #[error("invalid {field}: {detail}")]
    InvalidInput { field: &'static str, detail: String },

    #[error("maximizer is not unique: top two candidates {first} and {second} are tied")]
    TieAtMax { first: f64, second: f64 },

    #[error("negative determinant factor {factor:e} at z = {z}")]
    NegativeFactor { factor: f64, z: f64 },

    #[error("integration domain is empty or reversed: [{a}, {b}]")]
    DomainError { a: f64, b: f64 },

    #[error("pivot inputs violate {0}")]
    InvalidPivot(String),

    #[error("survival function is not monotone in the mean near delta = {delta}")]
    NonMonotone { delta: f64 },

    #[error("G is numerically singular (condition estimate {condition:e})")]
    SingularG { condition: f64 },

    #[error("solver hit {iterations} iterations (best value {best_value}, residual {residual:e})")]
    MaxIterations {
        iterations: usize,
        best_value: f64,
        residual: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Input errors are the caller's fault; everything else is a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::NotPsd { .. }
                | Error::NotSymmetric { .. }
                | Error::BadGroups(_)
                | Error::InvalidInput { .. }
                | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
