//! Tail-risk networks from nodewise quantile predictive regressions.
//!
//! The pipeline: fit one-step-ahead VaR/CoVaR forecasts for every pair of
//! assets, assemble the symmetric VaR–ΔCoVaR risk matrix, read its
//! off-diagonal as a weighted graph, rank nodes by centrality, order
//! features by centrality exclusion (FOCE), and solve the minimum-variance
//! portfolio on the surviving set. A separate module estimates precision
//! matrices by debiased nodewise Lasso.

pub mod centrality;
pub mod foce;
pub mod io;
pub mod pipeline;
pub mod portfolio;
pub mod precision;
pub mod quantile;
pub mod sim;
pub mod tail_risk;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("design matrix is rank deficient (rank {rank} < {cols} columns)")]
    RankDeficient { rank: usize, cols: usize },
    #[error("matrix is singular or not positive definite (min eigenvalue {min_eigenvalue})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("non-positive VaR magnitude {value} at node {node}; sign convention violated upstream")]
    NonPositiveVar { node: usize, value: f64 },
    #[error("quantile fit failed for node {node}{}: {source}", pair.map(|p| format!(" conditioning on node {p}")).unwrap_or_default())]
    NodeFit {
        node: usize,
        pair: Option<usize>,
        source: Box<Error>,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("graph error: {0}")]
    Graph(String),
    #[error("Katz alpha {alpha} exceeds the convergence bound 1/lambda1 = {bound}")]
    KatzDiverges { alpha: f64, bound: f64 },
    #[error("degenerate scores: {0}")]
    DegenerateScores(String),
    #[error("graphs up to {max} nodes are supported for this operation, got {got}")]
    UnsupportedSize { max: usize, got: usize },
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse {
                path: String::new(),
                line: 0,
                message: format!("{other:?}"),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
