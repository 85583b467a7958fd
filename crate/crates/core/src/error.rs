use thiserror::Error;

use crate::certificate::Certificate;

/// Errors produced by the approximation pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The row generator violated its declared contract.
    #[error("malformed matrix spec: {0}")]
    MalformedSpec(String),

    #[error("invalid boundary correction: {0}")]
    InvalidBoundary(String),

    #[error("invalid spectral envelope: {0}")]
    InvalidEnvelope(String),

    /// Index or window outside the representable range.
    #[error("index range error: {0}")]
    Range(String),

    #[error("window of dimension {dim} is degenerate for this operation")]
    DegenerateWindow { dim: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// Sparse path expansion outgrew the caller's node budget.
    #[error("path frontier of {frontier} nodes at depth {depth} exceeds budget {budget}")]
    BudgetExceeded {
        frontier: usize,
        depth: u64,
        budget: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular operator: {0}")]
    Singular(String),

    /// The binomial series does not converge for these parameters.
    #[error("divergent series: alpha = {alpha} requires a positive lower spectral bound (c = 0)")]
    DivergentSeries { alpha: f64 },

    /// The window grew to the dimension limit before the bound met the tolerance.
    #[error(
        "not converged: best bound {:e} at P = {}, Q = {}",
        best.bound,
        best.window.p(),
        best.window.q()
    )]
    NotConverged { best: Box<Certificate> },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
