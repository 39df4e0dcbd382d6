use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} failed to converge: {detail}")]
    Convergence { what: &'static str, detail: String },

    #[error("dimension mismatch: {0}")]
    Mismatch(String),

    /// The input carries energy in modes the quadrature cannot resolve.
    #[error("input not representable at quadrature order {order}: tail residual {residual:e}")]
    Unresolved { order: usize, residual: f64 },

    #[error("A undefined for the zero function")]
    ZeroFunction,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("construction annihilated the input: {0}")]
    Degenerate(String),

    /// A checked inequality failed; for a correct implementation this never fires.
    #[error("inequality violated: {value} exceeds {bound}")]
    BoundViolated { value: f64, bound: f64 },

    #[error("LP solver failure: {0}")]
    Solver(String),

    #[error("bisection bracket invalid: lower probe r0={lower} feasible={lower_feasible}, upper probe r0={upper} feasible={upper_feasible}")]
    Bracket {
        lower: f64,
        lower_feasible: bool,
        upper: f64,
        upper_feasible: bool,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
