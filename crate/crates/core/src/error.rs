use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: expected one of [{}], found {found}", expected.join(", "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },

    #[error("polynomial degree {degree} exceeds the configured maximum {max}")]
    DegreeOverflow { degree: usize, max: usize },

    #[error("quadrature on [{a}, {b}] did not converge: achieved error {achieved:e}, target {target:e}")]
    Quadrature {
        a: f64,
        b: f64,
        achieved: f64,
        target: f64,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("limit of {quantity} diverges")]
    Divergent { quantity: String },

    #[error("Lipschitz bound {bound} violated at t={t}: quotient {quotient}")]
    LipschitzViolation {
        t: f64,
        u: Vec<f64>,
        v: Vec<f64>,
        quotient: f64,
        bound: f64,
    },

    #[error("kernel tail {tail:e} still above tolerance at truncation radius {radius}")]
    TruncationUnreachable { radius: f64, tail: f64 },

    #[error("function spec: {0}")]
    FunctionSpec(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
