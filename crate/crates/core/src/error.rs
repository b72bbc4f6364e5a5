use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("argument {0} lies outside the convergence domain of the jump transform")]
    OutsideDomain(f64),
    #[error("pole of the Laplace exponent at {re}{im:+}i")]
    Pole { re: f64, im: f64 },
    #[error("polynomial degree {degree} exceeds cap {cap}")]
    DegreeCap { degree: usize, cap: usize },
    #[error("repeated roots {a} and {b} (distance below {tol:e})")]
    RepeatedRoot { a: String, b: String, tol: f64 },
    #[error("scale function build failed: {0}")]
    ScaleBuild(String),
    #[error("root bracket could not be found: {0}")]
    BracketFailure(String),
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("tail truncation failed: {0}")]
    TailTruncation(String),
    #[error("negative density {value:e} at y = {y}")]
    NegativeDensity { y: f64, value: f64 },
    #[error("cost function rejected: {0}")]
    InvalidCost(String),
}

pub type Result<T> = std::result::Result<T, Error>;
