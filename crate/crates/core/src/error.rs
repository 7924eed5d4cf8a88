use thiserror::Error;

/// Errors produced by grid construction, quadrature, weight precompute,
/// transforms, and the time loop.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid kernel: {0}")]
    Kernel(String),

    #[error(
        "quadrature did not converge: value {value:.6e}, error estimate {estimate:.3e}, \
         requested {requested:.3e}"
    )]
    Quadrature {
        value: f64,
        estimate: f64,
        requested: f64,
    },

    #[error("non-finite {what}{}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    NonFinite {
        what: &'static str,
        step: Option<usize>,
    },

    #[error("weight cache: {0}")]
    Cache(String),

    #[error("weight table mismatch on {field}: expected {expected}, found {found}")]
    TableMismatch {
        field: &'static str,
        expected: String,
        found: String,
    },

    #[error(
        "inverse transform imaginary residue {residual:.3e} exceeds bound {bound:.3e}; \
         weight table or transform convention is inconsistent"
    )]
    ImaginaryResidue { residual: f64, bound: f64 },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
