use thiserror::Error;

/// Errors raised anywhere in the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{func}: argument {arg} outside the supported domain")]
    Domain { func: &'static str, arg: f64 },

    #[error("{func}: pole at {arg}")]
    Pole { func: &'static str, arg: f64 },

    #[error("{func}: result overflows f64 at argument {arg}")]
    Overflow { func: &'static str, arg: f64 },

    #[error("{func}: integer b = {b} is not supported")]
    IntegerB { func: &'static str, b: f64 },

    #[error("quadrature did not converge: estimate {estimate}, error {error}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate basis: {0}")]
    Degenerate(String),

    #[error("tabulation failure: {0}")]
    Tabulation(String),

    #[error("replica {index} failed: {source}")]
    Replica {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
