//! Precision-matrix estimation by nodewise Lasso with the -1
//! self-coefficient constraint and the debiased residual covariance.
//!
//! Each column j of the centered data is regressed on the others by
//! minimizing (1/n) sum_t (gamma' y_t)^2 + 2 lambda |gamma|_1 over the set
//! { gamma : gamma_j = -1 }, solved by cyclic coordinate descent. Residual
//! covariances get the first-order bias correction before assembly into
//! omega_hat[j1][j2] = v_hat[j1][j2] / (v_hat[j1][j1] * v_hat[j2][j2]).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::{Error, Result};

/// One nodewise Lasso fit.
#[derive(Debug, Clone)]
pub struct NodewiseFit {
    pub node: usize,
    /// Length-p coefficient vector with alpha[node] = -1 fixed.
    pub alpha: DVector<f64>,
    pub lambda: f64,
    /// residuals_t = -alpha' y_t.
    pub residuals: DVector<f64>,
}

/// Debiased residual covariance and assembled precision estimate.
#[derive(Debug, Clone)]
pub struct PrecisionEstimate {
    pub v_hat: DMatrix<f64>,
    pub omega_hat: DMatrix<f64>,
    pub lambdas: DVector<f64>,
}

const CD_TOL: f64 = 1e-10;
const CD_MAX_SWEEPS: usize = 10_000;

/// Nodewise Lasso on centered data by cyclic coordinate descent.
pub fn fit_nodewise(y: &DMatrix<f64>, node: usize, lambda: f64) -> Result<NodewiseFit> {
    let (n, p) = y.shape();
    if lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "lambda must be nonnegative, got {lambda}"
        )));
    }
    if node >= p {
        return Err(Error::InvalidArgument(format!(
            "node {node} out of range for {p} columns"
        )));
    }
    if n <= 2 {
        return Err(Error::InvalidArgument(format!(
            "need more than 2 observations, got {n}"
        )));
    }

    let mut alpha = DVector::zeros(p);
    alpha[node] = -1.0;
    // running fit r_t = gamma' y_t, starting from gamma = -e_node
    let mut fitted = DVector::from_fn(n, |t, _| -y[(t, node)]);
    let col_ss: Vec<f64> = (0..p)
        .map(|k| y.column(k).iter().map(|v| v * v).sum::<f64>() / n as f64)
        .collect();

    for _ in 0..CD_MAX_SWEEPS {
        let mut max_change = 0.0f64;
        for k in 0..p {
            if k == node || col_ss[k] == 0.0 {
                continue;
            }
            let old = alpha[k];
            // partial residual correlation: z = -(1/n) sum y_tk (r_t - old * y_tk)
            let mut dot = 0.0;
            for t in 0..n {
                dot += y[(t, k)] * (fitted[t] - old * y[(t, k)]);
            }
            let z = -dot / n as f64;
            let new = soft_threshold(z, lambda) / col_ss[k];
            if new != old {
                let delta = new - old;
                for t in 0..n {
                    fitted[t] += delta * y[(t, k)];
                }
                alpha[k] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < CD_TOL {
            break;
        }
    }

    let residuals = -fitted;
    Ok(NodewiseFit {
        node,
        alpha,
        lambda,
        residuals,
    })
}

fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

/// KKT residual for a fit: max over free coordinates of the violation of
/// |(2/n) sum y_tk (gamma' y_t)| <= 2 lambda (with sign equality on the
/// active set). Used by tests and diagnostics.
pub fn kkt_violation(y: &DMatrix<f64>, fit: &NodewiseFit) -> f64 {
    let (n, p) = y.shape();
    let fitted = DVector::from_fn(n, |t, _| -fit.residuals[t]);
    let mut worst = 0.0f64;
    for k in 0..p {
        if k == fit.node {
            continue;
        }
        let grad = 2.0 / n as f64 * y.column(k).dot(&fitted);
        let viol = if fit.alpha[k] == 0.0 {
            (grad.abs() - 2.0 * fit.lambda).max(0.0)
        } else {
            (grad + 2.0 * fit.lambda * fit.alpha[k].signum()).abs()
        };
        worst = worst.max(viol);
    }
    worst
}

/// Debiased residual covariance: diagonal is the plain residual second
/// moment; off-diagonals carry the first-order Lasso bias correction.
pub fn debiased_v(fits: &[NodewiseFit], y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, p) = y.shape();
    if fits.len() != p {
        return Err(Error::InvalidArgument(format!(
            "expected {p} fits, got {}",
            fits.len()
        )));
    }
    for (j, f) in fits.iter().enumerate() {
        if f.node != j || f.residuals.len() != n {
            return Err(Error::InvalidArgument(
                "fits must be ordered by node and share the data".into(),
            ));
        }
    }
    let mut v = DMatrix::zeros(p, p);
    for j1 in 0..p {
        v[(j1, j1)] = fits[j1].residuals.iter().map(|e| e * e).sum::<f64>() / n as f64;
    }
    for j1 in 0..p {
        for j2 in j1 + 1..p {
            let e1 = &fits[j1].residuals;
            let e2 = &fits[j2].residuals;
            let cross: f64 = (0..n).map(|t| e1[t] * e2[t]).sum();
            let sq2: f64 = e2.iter().map(|e| e * e).sum();
            let sq1: f64 = e1.iter().map(|e| e * e).sum();
            let value = -(cross
                + fits[j1].alpha[j2] * sq2
                + fits[j2].alpha[j1] * sq1)
                / n as f64;
            v[(j1, j2)] = value;
            v[(j2, j1)] = value;
        }
    }
    Ok(v)
}

/// omega[j1][j2] = v[j1][j2] / (v[j1][j1] * v[j2][j2]), i.e.
/// {diag V}^-1 V {diag V}^-1.
pub fn precision_assemble(v_hat: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = v_hat.nrows();
    if v_hat.ncols() != p {
        return Err(Error::InvalidArgument("v_hat must be square".into()));
    }
    for j in 0..p {
        if v_hat[(j, j)] <= 0.0 {
            return Err(Error::Domain(format!(
                "non-positive v_hat diagonal {} at {j}",
                v_hat[(j, j)]
            )));
        }
    }
    Ok(DMatrix::from_fn(p, p, |a, b| {
        v_hat[(a, b)] / (v_hat[(a, a)] * v_hat[(b, b)])
    }))
}

/// Center the columns of Y, run the p nodewise fits concurrently, and
/// assemble the precision estimate.
pub fn estimate_precision(y: &DMatrix<f64>, lambdas: &DVector<f64>) -> Result<PrecisionEstimate> {
    let (n, p) = y.shape();
    if n <= 10 {
        return Err(Error::InvalidArgument(format!(
            "need more than 10 observations, got {n}"
        )));
    }
    if p < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 columns, got {p}")));
    }
    if lambdas.len() != p {
        return Err(Error::InvalidArgument(format!(
            "expected {p} lambdas, got {}",
            lambdas.len()
        )));
    }
    let mut centered = y.clone();
    for k in 0..p {
        let mean = centered.column(k).sum() / n as f64;
        for t in 0..n {
            centered[(t, k)] -= mean;
        }
    }
    let fits: Vec<Result<NodewiseFit>> = (0..p)
        .into_par_iter()
        .map(|j| fit_nodewise(&centered, j, lambdas[j]))
        .collect();
    let fits: Vec<NodewiseFit> = fits.into_iter().collect::<Result<_>>()?;
    let v_hat = debiased_v(&fits, &centered)?;
    let omega_hat = precision_assemble(&v_hat)?;
    Ok(PrecisionEstimate {
        v_hat,
        omega_hat,
        lambdas: lambdas.clone(),
    })
}

/// Default per-node tuning parameter c * sqrt(log p / n) with c = 0.5.
pub fn default_lambdas(n: usize, p: usize, scale: f64) -> DVector<f64> {
    let lambda = scale * ((p as f64).ln() / n as f64).sqrt();
    DVector::from_element(p, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn centered_gaussian(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let normal = rand_distr::StandardNormal;
        let mut y = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(normal));
        for k in 0..p {
            let mean = y.column(k).sum() / n as f64;
            for t in 0..n {
                y[(t, k)] -= mean;
            }
        }
        y
    }

    #[test]
    fn huge_lambda_full_shrinkage() {
        let y = centered_gaussian(50, 4, 1);
        let fit = fit_nodewise(&y, 2, 1e6).unwrap();
        for k in 0..4 {
            if k != 2 {
                assert_eq!(fit.alpha[k], 0.0);
            }
        }
        assert_eq!(fit.alpha[2], -1.0);
        for t in 0..50 {
            assert_abs_diff_eq!(fit.residuals[t], y[(t, 2)], epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_lambda_matches_ols_oracle() {
        let y = centered_gaussian(60, 3, 2);
        let fit = fit_nodewise(&y, 0, 0.0).unwrap();
        // normal-equations oracle: regress y0 on (y1, y2)
        let x = DMatrix::from_fn(60, 2, |t, c| y[(t, c + 1)]);
        let target = DVector::from_fn(60, |t, _| y[(t, 0)]);
        let beta = (x.transpose() * &x)
            .try_inverse()
            .unwrap()
            * x.transpose()
            * target;
        assert_abs_diff_eq!(fit.alpha[1], beta[0], epsilon = 1e-8);
        assert_abs_diff_eq!(fit.alpha[2], beta[1], epsilon = 1e-8);
    }

    #[test]
    fn single_predictor_soft_threshold_closed_form() {
        let y = centered_gaussian(40, 2, 3);
        let lambda = 0.07;
        let fit = fit_nodewise(&y, 0, lambda).unwrap();
        let n = 40.0;
        // closed form: argmin (1/n) sum (x a - y0)^2 + 2 lambda |a|
        let z = y.column(1).dot(&y.column(0)) / n;
        let ss = y.column(1).dot(&y.column(1)) / n;
        let expected = soft_threshold(z, lambda) / ss;
        assert_abs_diff_eq!(fit.alpha[1], expected, epsilon = 1e-10);
    }

    #[test]
    fn negative_lambda_rejected() {
        let y = centered_gaussian(20, 2, 4);
        assert!(fit_nodewise(&y, 0, -0.1).is_err());
    }

    #[test]
    fn kkt_satisfied_random_inputs() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for seed in 0..20 {
            let n = rng.gen_range(30..80);
            let p = rng.gen_range(2..7);
            let y = centered_gaussian(n, p, 100 + seed);
            let lambda = rng.gen_range(0.0..0.3);
            let node = rng.gen_range(0..p);
            let fit = fit_nodewise(&y, node, lambda).unwrap();
            assert!(
                kkt_violation(&y, &fit) <= 1e-8,
                "KKT violated at seed {seed}: {}",
                kkt_violation(&y, &fit)
            );
        }
    }

    #[test]
    fn debiased_v_collapses_to_negated_column_covariance_at_full_shrinkage() {
        // With all free coefficients shrunk to zero, residuals are the raw
        // columns and the off-diagonal correction terms vanish; the
        // off-diagonal formula then evaluates to minus the sample column
        // covariance while the diagonal stays the raw second moment.
        let y = centered_gaussian(100, 3, 6);
        let fits: Vec<NodewiseFit> = (0..3).map(|j| fit_nodewise(&y, j, 1e9).unwrap()).collect();
        let v = debiased_v(&fits, &y).unwrap();
        let n = 100.0;
        for j1 in 0..3 {
            for j2 in 0..3 {
                let cov = y.column(j1).dot(&y.column(j2)) / n;
                let expected = if j1 == j2 { cov } else { -cov };
                assert_abs_diff_eq!(v[(j1, j2)], expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn debiased_v_symmetric_bit_exact() {
        let y = centered_gaussian(80, 4, 7);
        let lam = 0.05;
        let fits: Vec<NodewiseFit> = (0..4).map(|j| fit_nodewise(&y, j, lam).unwrap()).collect();
        let v = debiased_v(&fits, &y).unwrap();
        assert_eq!(v, v.transpose());
    }

    #[test]
    fn independent_columns_small_off_diagonal() {
        let y = centered_gaussian(5000, 2, 8);
        let fits: Vec<NodewiseFit> = (0..2)
            .map(|j| fit_nodewise(&y, j, 0.05).unwrap())
            .collect();
        let v = debiased_v(&fits, &y).unwrap();
        assert!(v[(0, 1)].abs() < 0.05, "v12 = {}", v[(0, 1)]);
    }

    #[test]
    fn precision_assemble_cases() {
        let id = precision_assemble(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(id, DMatrix::identity(3, 3));
        let v = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 2.0]);
        let omega = precision_assemble(&v).unwrap();
        assert_abs_diff_eq!(omega[(0, 1)], 0.125, epsilon = 1e-14);
        assert_abs_diff_eq!(omega[(0, 0)], 0.5, epsilon = 1e-14);
        // matrix-product oracle
        let dinv = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.5]));
        let oracle = &dinv * &v * &dinv;
        for (a, b) in omega.iter().zip(oracle.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert!(precision_assemble(&DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn lambda_zero_small_p_matches_inverse_covariance() {
        // With lambda = 0 and p << n, omega approximates the inverse sample
        // covariance entrywise within 10/sqrt(n).
        let n = 4000;
        let p = 3;
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let normal = rand_distr::StandardNormal;
        // correlated columns
        let mut y = DMatrix::zeros(n, p);
        for t in 0..n {
            let z0: f64 = rng.sample(normal);
            let z1: f64 = rng.sample(normal);
            let z2: f64 = rng.sample(normal);
            y[(t, 0)] = z0;
            y[(t, 1)] = 0.5 * z0 + z1;
            y[(t, 2)] = 0.3 * z1 + z2;
        }
        let est = estimate_precision(&y, &DVector::zeros(p)).unwrap();
        // direct inverse oracle on the centered sample covariance
        let mut yc = y.clone();
        for k in 0..p {
            let mean = yc.column(k).sum() / n as f64;
            for t in 0..n {
                yc[(t, k)] -= mean;
            }
        }
        let cov = yc.transpose() * &yc / n as f64;
        let inv = cov.try_inverse().unwrap();
        let tol = 10.0 / (n as f64).sqrt();
        for j1 in 0..p {
            for j2 in 0..p {
                assert!(
                    (est.omega_hat[(j1, j2)] - inv[(j1, j2)]).abs() < tol,
                    "({j1},{j2}): {} vs {}",
                    est.omega_hat[(j1, j2)],
                    inv[(j1, j2)]
                );
            }
        }
    }

    #[test]
    fn independence_off_diagonal_shrinks_with_n() {
        let omega_at = |n: usize, seed: u64| {
            let y = centered_gaussian(n, 2, seed);
            let lam = default_lambdas(n, 2, 0.5);
            estimate_precision(&y, &lam).unwrap().omega_hat[(0, 1)].abs()
        };
        let mut small = Vec::new();
        let mut large = Vec::new();
        for s in 0..9 {
            small.push(omega_at(500, 200 + s));
            large.push(omega_at(5000, 300 + s));
        }
        small.sort_by(|a, b| a.partial_cmp(b).unwrap());
        large.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(large[4] < small[4], "median {} !< {}", large[4], small[4]);
    }
}
