use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("filter factorization ill-conditioned: reconstruction error {err:.3e} exceeds {tol:.3e}")]
    IllConditionedFactorization { err: f64, tol: f64 },

    #[error("quadrature did not converge: last two refinements differ by {diff:.3e}")]
    QuadratureNonConvergence { diff: f64 },

    #[error("desk-scale budget exceeded: {what} = {value} > {limit}")]
    BudgetExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("unknown test function `{0}`")]
    UnknownTestFunction(String),

    #[error("malformed network: {0}")]
    MalformedNetwork(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
