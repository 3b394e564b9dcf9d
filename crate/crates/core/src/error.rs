use thiserror::Error;

/// Errors raised while building grids, operators and propagators or while
/// stepping a problem forward in time.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("stencil of {n} nodes does not fit a grid of {grid_len} nodes")]
    StencilTooLarge { n: usize, grid_len: usize },
    #[error("invalid stencil: {0}")]
    InvalidStencil(String),
    #[error("duplicate stencil nodes at positions {0} and {1}")]
    DuplicateNodes(usize, usize),
    #[error("derivative order {order} needs more than {n} nodes")]
    OrderTooHigh { order: usize, n: usize },
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("series did not converge after {0} terms")]
    NoConvergence(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("multistep history holds {have} of {need} required evaluations")]
    NotWarmedUp { have: usize, need: usize },
    #[error("solution left the finite range at step {step} (t = {t})")]
    Diverged {
        step: usize,
        t: f64,
        /// Last state that was still finite.
        last_finite: Vec<f64>,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
