//! Minimum-variance portfolio selection over the risk matrix, the
//! quadratic-loss decomposition, and the eigenvector positive-definiteness
//! report.

use nalgebra::DVector;

use crate::tail_risk::RiskMatrix;
use crate::{Error, Result};

/// Fully-invested portfolio weights (short selling allowed).
#[derive(Debug, Clone)]
pub struct PortfolioWeights {
    pub weights: DVector<f64>,
    /// Gross exposure sum |w_i|.
    pub gross: f64,
}

impl PortfolioWeights {
    pub fn new(weights: DVector<f64>) -> Result<Self> {
        if weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite weights".into()));
        }
        let total: f64 = weights.sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "weights must sum to 1, got {total}"
            )));
        }
        let gross = weights.iter().map(|v| v.abs()).sum();
        Ok(Self { weights, gross })
    }
}

/// w* = Gamma^{-1} 1 / (1' Gamma^{-1} 1).
pub fn min_variance_weights(gamma: &RiskMatrix) -> Result<PortfolioWeights> {
    if !gamma.is_positive_definite {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: gamma.min_eigenvalue,
        });
    }
    let ch = gamma
        .gamma
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite {
            min_eigenvalue: gamma.min_eigenvalue,
        })?;
    let ones = DVector::from_element(gamma.dim(), 1.0);
    let sol = ch.solve(&ones);
    let denom = ones.dot(&sol);
    PortfolioWeights::new(sol / denom)
}

/// Q(Gamma, w) = w' Gamma w.
pub fn quadratic_loss(gamma: &RiskMatrix, w: &PortfolioWeights) -> Result<f64> {
    if w.weights.len() != gamma.dim() {
        return Err(Error::InvalidArgument(format!(
            "weight length {} does not match matrix dimension {}",
            w.weights.len(),
            gamma.dim()
        )));
    }
    Ok(w.weights.dot(&(&gamma.gamma * &w.weights)))
}

/// Split the quadratic loss into the network part w' (Gamma - diag) w and
/// the idiosyncratic part sum w_i^2 Gamma_ii.
pub fn loss_decomposition(gamma: &RiskMatrix, w: &PortfolioWeights) -> Result<(f64, f64)> {
    if w.weights.len() != gamma.dim() {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    let n = gamma.dim();
    let mut network = 0.0;
    let mut idio = 0.0;
    for i in 0..n {
        idio += w.weights[i] * w.weights[i] * gamma.gamma[(i, i)];
        for j in 0..n {
            if j != i {
                network += w.weights[i] * w.weights[j] * gamma.gamma[(i, j)];
            }
        }
    }
    Ok((network, idio))
}

/// Per-eigenvector report on the positive-definiteness condition: for each
/// eigenvector u_k, sum_i u_ik^2 must exceed
/// -sum_i sum_{j != i} u_ik u_jk * Gamma_ij / Gamma_kk.
#[derive(Debug, Clone)]
pub struct DefinitenessReport {
    /// Left-hand side, right-hand side, and verdict per eigenvector index.
    pub per_k: Vec<(f64, f64, bool)>,
    pub min_eigenvalue: f64,
    /// Overall verdict: min eigenvalue strictly positive.
    pub positive_definite: bool,
}

pub fn assumption_check(gamma: &RiskMatrix) -> Result<DefinitenessReport> {
    let n = gamma.dim();
    for i in 0..n {
        if gamma.gamma[(i, i)] <= 0.0 {
            return Err(Error::Domain(format!(
                "non-positive diagonal entry at {i}"
            )));
        }
    }
    let eig = gamma.gamma.clone().symmetric_eigen();
    let mut per_k = Vec::with_capacity(n);
    for k in 0..n {
        let u = eig.eigenvectors.column(k);
        let lhs: f64 = u.iter().map(|&v| v * v).sum();
        let mut rhs = 0.0;
        for i in 0..n {
            for j in 0..n {
                if j != i {
                    rhs -= u[i] * u[j] * gamma.gamma[(i, j)] / gamma.gamma[(k, k)];
                }
            }
        }
        per_k.push((lhs, rhs, lhs > rhs));
    }
    let min_eigenvalue = eig.eigenvalues.min();
    Ok(DefinitenessReport {
        per_k,
        min_eigenvalue,
        positive_definite: min_eigenvalue > 0.0,
    })
}
