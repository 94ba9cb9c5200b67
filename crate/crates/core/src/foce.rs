//! Feature Ordering by Centrality Exclusion.
//!
//! Iteratively removes the most central node of the graph induced by the
//! surviving risk-matrix block, records the removal order and an objective
//! trace, and stops when consecutive objective values differ by at most
//! epsilon (or one node remains).

use nalgebra::DMatrix;

use crate::centrality::{self, Adjacency, CentralityKind};
use crate::tail_risk::RiskMatrix;
use crate::{Error, Result};

/// Objective F evaluated on the surviving submatrix after each removal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoceObjective {
    /// 1 / (1' Gamma_S^{-1} 1), the minimum-variance loss, when the block is
    /// positive definite; falls back to the spectral radius otherwise.
    MinVarianceLoss,
    SpectralRadius,
}

#[derive(Debug, Clone)]
pub struct FoceConfig {
    pub centrality_kind: CentralityKind,
    pub epsilon: f64,
    pub objective: FoceObjective,
}

impl FoceConfig {
    pub fn new(centrality_kind: CentralityKind, epsilon: f64, objective: FoceObjective) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be nonnegative, got {epsilon}"
            )));
        }
        Ok(Self {
            centrality_kind,
            epsilon,
            objective,
        })
    }
}

#[derive(Debug, Clone)]
pub struct FoceOrdering {
    /// Node indices in removal order (full ordering down to one survivor).
    pub removed: Vec<usize>,
    /// F evaluated on the surviving set after each removal.
    pub objective_trace: Vec<f64>,
    /// Number of removals before the stopping rule fired.
    pub stop_index: usize,
    /// Nodes surviving at the stopping point.
    pub selected_set: Vec<usize>,
    /// Steps where the configured centrality failed and degree centrality
    /// was used instead.
    pub fallback_steps: Vec<usize>,
}

fn submatrix(gamma: &DMatrix<f64>, keep: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(keep.len(), keep.len(), |a, b| gamma[(keep[a], keep[b])])
}

fn evaluate_objective(block: &DMatrix<f64>, objective: FoceObjective) -> f64 {
    match objective {
        FoceObjective::MinVarianceLoss => {
            if let Some(ch) = block.clone().cholesky() {
                let ones = nalgebra::DVector::from_element(block.nrows(), 1.0);
                let sol = ch.solve(&ones);
                let denom = ones.dot(&sol);
                if denom > 0.0 {
                    return 1.0 / denom;
                }
            }
            spectral_radius_of(block)
        }
        FoceObjective::SpectralRadius => spectral_radius_of(block),
    }
}

fn spectral_radius_of(block: &DMatrix<f64>) -> f64 {
    block
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, &v| m.max(v.abs()))
}

fn adjacency_of_block(block: &DMatrix<f64>, keep: &[usize]) -> Result<Adjacency> {
    let mut w = block.clone();
    for i in 0..w.nrows() {
        w[(i, i)] = 0.0;
    }
    Adjacency::new(w, keep.iter().map(|i| i.to_string()).collect())
}

/// Run the exclusion loop. The ordering always continues to a single
/// survivor; `stop_index` marks where the stopping rule fired.
pub fn foce_order(gamma: &RiskMatrix, cfg: &FoceConfig) -> Result<FoceOrdering> {
    let n = gamma.dim();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "FOCE needs at least 2 nodes, got {n}"
        )));
    }
    if cfg.objective == FoceObjective::MinVarianceLoss && !gamma.is_positive_definite {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: gamma.min_eigenvalue,
        });
    }

    let mut surviving: Vec<usize> = (0..n).collect();
    let mut removed = Vec::new();
    let mut trace = Vec::new();
    let mut fallback_steps = Vec::new();
    let mut stop_index = None;
    let mut prev_f = evaluate_objective(&gamma.gamma, cfg.objective);

    while surviving.len() > 1 {
        let block = submatrix(&gamma.gamma, &surviving);
        let adj = adjacency_of_block(&block, &surviving)?;
        let scores = match centrality::compute(&adj, cfg.centrality_kind) {
            Ok(s) => s,
            Err(_) => {
                fallback_steps.push(removed.len());
                centrality::degree(&adj)?
            }
        };
        // argmax with lowest-index (in the surviving list) tie-break
        let mut best = 0usize;
        for i in 1..surviving.len() {
            if scores.scores[i] > scores.scores[best] {
                best = i;
            }
        }
        let node = surviving.remove(best);
        removed.push(node);

        let after = submatrix(&gamma.gamma, &surviving);
        let f = evaluate_objective(&after, cfg.objective);
        trace.push(f);
        if stop_index.is_none() && (f - prev_f).abs() <= cfg.epsilon {
            stop_index = Some(removed.len());
        }
        prev_f = f;
    }

    let stop_index = stop_index.unwrap_or(removed.len());
    let mut selected_set: Vec<usize> = (0..n).filter(|i| !removed[..stop_index].contains(i)).collect();
    selected_set.sort_unstable();

    Ok(FoceOrdering {
        removed,
        objective_trace: trace,
        stop_index,
        selected_set,
        fallback_steps,
    })
}

/// True iff every estimated matrix reproduces the population removal prefix
/// (up to the population ordering's stop index).
pub fn oracle_property_check(
    gamma_population: &RiskMatrix,
    cfg: &FoceConfig,
    gamma_estimates: &[RiskMatrix],
) -> Result<bool> {
    let pop = foce_order(gamma_population, cfg)?;
    let prefix = &pop.removed[..pop.stop_index];
    for est in gamma_estimates {
        if est.dim() != gamma_population.dim() {
            return Err(Error::InvalidArgument(format!(
                "dimension mismatch: {} vs {}",
                est.dim(),
                gamma_population.dim()
            )));
        }
        let ord = foce_order(est, cfg)?;
        if ord.removed.len() < prefix.len() || &ord.removed[..prefix.len()] != prefix {
            return Ok(false);
        }
    }
    Ok(true)
}
