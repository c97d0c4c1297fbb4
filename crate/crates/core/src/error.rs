use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("partitions of different weight ({0} vs {1}) cannot be compared")]
    WeightMismatch(usize, usize),

    #[error("gamma pole in factor {factor} of the multivariate gamma (argument {arg})")]
    GammaPole { factor: usize, arg: f64 },

    #[error("hypergeometric series does not terminate: neither {a} nor {b} is a nonpositive integer")]
    NonTerminating { a: f64, b: f64 },

    #[error("denominator parameter {0} hits a pole of the series")]
    DenominatorPole(f64),

    #[error("series term overflow at degree {degree} (log magnitude {log_magnitude:.1})")]
    Overflow { degree: usize, log_magnitude: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("model parameters are not in the polynomial regime: {0}")]
    NotPolynomial(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
