use thiserror::Error;

/// Errors raised by the evaluation kernels and the sweep harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{value} is not invertible modulo {modulus}")]
    NotInvertible { value: i64, modulus: u64 },

    #[error("modulus {0} is even; an odd modulus is required")]
    EvenModulus(u64),

    #[error("bad input: {0}")]
    BadInput(String),

    #[error("moduli {0} and {1} are not coprime")]
    NonCoprime(u64, u64),

    #[error("input too large: {0}")]
    TooLarge(String),

    #[error("support contains 0 mod {0} where an inverse is required")]
    ZeroInSupport(u64),

    #[error("parameters out of range: {0}")]
    OutOfRange(String),

    #[error("no calibration entry for target `{0}`")]
    MissingCalibration(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
