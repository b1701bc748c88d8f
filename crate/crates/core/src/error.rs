use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("unknown measure family `{0}`")]
    UnknownFamily(String),

    #[error("family `{family}` does not provide {capability}")]
    CapabilityMissing { family: String, capability: &'static str },

    #[error("point {z} lies on the support of `{family}`")]
    OnSupport { family: String, z: Complex64 },

    #[error("x = {x} is outside the domain of {what}")]
    OutOfDomain { what: &'static str, x: f64 },

    #[error("nodes {a} and {b} are closer than the collision threshold {threshold:e}")]
    NodeCollision { a: f64, b: f64, threshold: f64 },

    #[error("tensor grid of {points} points exceeds the limit of {limit}")]
    GridTooLarge { points: u128, limit: u128 },

    #[error("integration budget exhausted: best value {value} with error estimate {error_estimate:e}")]
    BudgetExhausted { value: f64, error_estimate: f64 },

    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },

    #[error("tridiagonal eigen-iteration did not converge for a {size}x{size} matrix")]
    EigenFailure { size: usize },

    #[error("denominator underflow at x = {x} (level {level})")]
    DegenerateDenominator { level: usize, x: f64 },

    #[error("continued fraction denominator vanished at level {level} for z = {z}")]
    ZeroDivision { level: usize, z: Complex64 },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("unknown check `{0}`")]
    UnknownCheck(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
