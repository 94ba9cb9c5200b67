//! Linear quantile regression: check-loss evaluation, fitting, prediction.
//!
//! Fitting minimizes the empirical check loss with a majorize–minimize
//! scheme on a smoothed loss, annealing the smoothing parameter, followed
//! by a vertex polishing step. The convex objective attains its optimum at
//! a point with at least `k` zero residuals, so polishing searches small
//! bases among the near-zero residuals for the exact minimizer.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// A quantile level strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileLevel(f64);

impl QuantileLevel {
    pub fn new(tau: f64) -> Result<Self> {
        if !tau.is_finite() || tau <= 0.0 || tau >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "quantile level must lie in (0,1), got {tau}"
            )));
        }
        Ok(Self(tau))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Regression design with an intercept column of ones as column 0.
#[derive(Debug, Clone)]
pub struct Design {
    values: DMatrix<f64>,
}

impl Design {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        let (n, k) = values.shape();
        if n < k {
            return Err(Error::InvalidArgument(format!(
                "need at least as many rows as columns, got {n}x{k}"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "design contains non-finite entries".into(),
            ));
        }
        if (0..n).any(|i| values[(i, 0)] != 1.0) {
            return Err(Error::InvalidArgument(
                "column 0 of the design must be all ones".into(),
            ));
        }
        Ok(Self { values })
    }

    /// Intercept-plus-regressors design from raw regressor rows.
    pub fn with_intercept(regressors: &DMatrix<f64>) -> Result<Self> {
        let n = regressors.nrows();
        let mut values = DMatrix::zeros(n, regressors.ncols() + 1);
        values.column_mut(0).fill(1.0);
        values
            .view_mut((0, 1), (n, regressors.ncols()))
            .copy_from(regressors);
        Self::new(values)
    }

    /// Intercept-only design of `n` rows.
    pub fn intercept_only(n: usize) -> Result<Self> {
        Self::new(DMatrix::from_element(n, 1, 1.0))
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }
}

/// Result of a quantile regression fit.
#[derive(Debug, Clone)]
pub struct QuantileFit {
    pub coefficients: DVector<f64>,
    pub tau: QuantileLevel,
    pub objective: f64,
    pub residuals: DVector<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// The check function `rho_tau(u) = u * (tau - 1{u < 0})`.
pub fn check_loss(u: f64, tau: QuantileLevel) -> Result<f64> {
    if !u.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite residual {u}")));
    }
    let t = tau.value();
    Ok(if u < 0.0 { (t - 1.0) * u } else { t * u })
}

fn objective_of(residuals: &DVector<f64>, tau: QuantileLevel) -> f64 {
    let t = tau.value();
    residuals
        .iter()
        .map(|&u| if u < 0.0 { (t - 1.0) * u } else { t * u })
        .sum()
}

const MAX_ITER: usize = 200;
const ZERO_RESIDUAL_TOL: f64 = 1e-10;
const GRAD_TOL: f64 = 1e-6;

/// Fit a linear quantile regression by minimizing the empirical check loss.
pub fn fit_quantile(x: &Design, y: &DVector<f64>, tau: QuantileLevel) -> Result<QuantileFit> {
    let (n, k) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::InvalidArgument(format!(
            "response length {} does not match {} design rows",
            y.len(),
            n
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "response contains non-finite entries".into(),
        ));
    }
    let rank = x.values().clone().svd(false, false).rank(1e-10 * (n as f64).sqrt());
    if rank < k {
        return Err(Error::RankDeficient { rank, cols: k });
    }

    let xm = x.values();
    let t = tau.value();

    // Least-squares start.
    let mut beta = xm
        .clone()
        .svd(true, true)
        .solve(y, 1e-12)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut residuals = y - xm * &beta;
    let mut iterations = 0usize;

    // MM on the smoothed loss 0.5*sqrt(u^2 + d^2) + (tau - 0.5)*u, annealing d.
    // The quadratic majorizer at u0 yields a weighted least-squares step.
    let mut delta = 1e-2;
    while delta >= 1e-8 {
        let mut prev_smooth = smoothed_objective(&residuals, t, delta);
        loop {
            if iterations >= MAX_ITER {
                break;
            }
            iterations += 1;
            // Weighted normal equations: X'WX b = X'(W y + (tau - 0.5)/2 * 1)
            // with W_tt = 1 / (4*sqrt(u_t^2 + d^2)).
            let mut xtwx = DMatrix::zeros(k, k);
            let mut rhs = DVector::zeros(k);
            for row in 0..n {
                let s = (residuals[row] * residuals[row] + delta * delta).sqrt();
                let w = 1.0 / (4.0 * s);
                let xr = xm.row(row);
                for a in 0..k {
                    rhs[a] += xr[a] * (w * y[row] + 0.5 * (t - 0.5));
                    for b in 0..k {
                        xtwx[(a, b)] += w * xr[a] * xr[b];
                    }
                }
            }
            let step = match xtwx.cholesky() {
                Some(ch) => ch.solve(&rhs),
                None => break,
            };
            let cand_res = y - xm * &step;
            let cand_smooth = smoothed_objective(&cand_res, t, delta);
            if cand_smooth > prev_smooth {
                break;
            }
            beta = step;
            residuals = cand_res;
            let improved = prev_smooth - cand_smooth >= 1e-12 * (1.0 + prev_smooth.abs());
            prev_smooth = cand_smooth;
            if !improved {
                break;
            }
        }
        delta *= 1e-2;
    }

    // Vertex polishing: the optimum interpolates at least k observations.
    let mut best_obj = objective_of(&residuals, tau);
    if k <= n {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            residuals[a]
                .abs()
                .partial_cmp(&residuals[b].abs())
                .unwrap()
        });
        let pool: Vec<usize> = order.into_iter().take((k + 4).min(n)).collect();
        for subset in combinations(pool.len(), k) {
            let idx: Vec<usize> = subset.iter().map(|&i| pool[i]).collect();
            let mut xs = DMatrix::zeros(k, k);
            let mut ys = DVector::zeros(k);
            for (r, &i) in idx.iter().enumerate() {
                xs.row_mut(r).copy_from(&xm.row(i));
                ys[r] = y[i];
            }
            let Some(cand) = xs.lu().solve(&ys) else {
                continue;
            };
            let cand_res = y - xm * &cand;
            let cand_obj = objective_of(&cand_res, tau);
            if cand_obj < best_obj - 1e-15 * (1.0 + best_obj.abs()) {
                best_obj = cand_obj;
                beta = cand;
                residuals = cand_res;
            }
        }
    }

    let converged = subgradient_ok(xm, &residuals, t);
    Ok(QuantileFit {
        objective: objective_of(&residuals, tau),
        coefficients: beta,
        tau,
        residuals,
        converged,
        iterations,
    })
}

fn smoothed_objective(residuals: &DVector<f64>, tau: f64, delta: f64) -> f64 {
    residuals
        .iter()
        .map(|&u| 0.5 * (u * u + delta * delta).sqrt() + (tau - 0.5) * u)
        .sum()
}

/// Subgradient membership at the fitted point: for each column, the gradient
/// interval spanned by the free (near-zero) residuals must cover zero.
fn subgradient_ok(xm: &DMatrix<f64>, residuals: &DVector<f64>, tau: f64) -> bool {
    let (n, k) = xm.shape();
    let max_x = xm.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let tol = k as f64 * max_x.max(1.0) * GRAD_TOL;
    for j in 0..k {
        let mut fixed = 0.0;
        let mut lo = 0.0;
        let mut hi = 0.0;
        for i in 0..n {
            let xij = xm[(i, j)];
            if residuals[i].abs() <= ZERO_RESIDUAL_TOL {
                // psi free in [tau-1, tau]
                let a = xij * (tau - 1.0);
                let b = xij * tau;
                lo += a.min(b);
                hi += a.max(b);
            } else {
                let psi = if residuals[i] < 0.0 { tau - 1.0 } else { tau };
                fixed += xij * psi;
            }
        }
        if fixed + lo > tol || fixed + hi < -tol {
            return false;
        }
    }
    true
}

/// All k-subsets of {0, .., m-1} in lexicographic order.
fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > m {
        return out;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if c[i] != i + m - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        c[i] += 1;
        for j in i + 1..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// Evaluate the fitted regression at a new regressor vector.
pub fn predict(fit: &QuantileFit, x: &DVector<f64>) -> Result<f64> {
    if x.len() != fit.coefficients.len() {
        return Err(Error::InvalidArgument(format!(
            "regressor length {} does not match {} coefficients",
            x.len(),
            fit.coefficients.len()
        )));
    }
    Ok(fit.coefficients.dot(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn tau(t: f64) -> QuantileLevel {
        QuantileLevel::new(t).unwrap()
    }

    #[test]
    fn check_loss_definition() {
        assert_eq!(check_loss(0.0, tau(0.5)).unwrap(), 0.0);
        assert_abs_diff_eq!(check_loss(1.0, tau(0.25)).unwrap(), 0.25);
        assert_abs_diff_eq!(check_loss(-1.0, tau(0.25)).unwrap(), 0.75);
        assert_abs_diff_eq!(check_loss(2.5, tau(0.95)).unwrap(), 2.375);
        assert!(check_loss(f64::NAN, tau(0.5)).is_err());
    }

    #[test]
    fn quantile_level_bounds() {
        assert!(QuantileLevel::new(0.0).is_err());
        assert!(QuantileLevel::new(1.0).is_err());
        assert!(QuantileLevel::new(f64::NAN).is_err());
        assert!(QuantileLevel::new(0.05).is_ok());
    }

    #[test]
    fn intercept_only_median() {
        let x = Design::intercept_only(5).unwrap();
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let fit = fit_quantile(&x, &y, tau(0.5)).unwrap();
        assert_abs_diff_eq!(fit.coefficients[0], 3.0, epsilon = 1e-10);
        assert!(fit.converged);
    }

    #[test]
    fn flat_minimum_objective_matches_order_statistic_scan() {
        // tau = 0.25 with n = 4 has a flat minimizing set; compare objective
        // values against the brute-force scan over order statistics, where a
        // minimum of the piecewise-linear objective is attained.
        let x = Design::intercept_only(4).unwrap();
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let t = tau(0.25);
        let fit = fit_quantile(&x, &y, t).unwrap();
        let best = y
            .iter()
            .map(|&c| {
                y.iter()
                    .map(|&v| check_loss(v - c, t).unwrap())
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(fit.objective, best, epsilon = 1e-10);
    }

    #[test]
    fn objective_equals_check_loss_of_residuals() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let n = 40;
        let regs = DMatrix::from_fn(n, 2, |_, _| rng.gen_range(-1.0..1.0));
        let x = Design::with_intercept(&regs).unwrap();
        let y = DVector::from_fn(n, |i, _| regs[(i, 0)] + rng.gen_range(-1.0..1.0));
        let t = tau(0.3);
        let fit = fit_quantile(&x, &y, t).unwrap();
        let direct: f64 = fit
            .residuals
            .iter()
            .map(|&u| check_loss(u, t).unwrap())
            .sum();
        assert_abs_diff_eq!(fit.objective, direct, epsilon = 1e-12);
        // residuals are y - X b exactly
        let recompute = &y - x.values() * &fit.coefficients;
        assert_eq!(fit.residuals, recompute);
    }

    #[test]
    fn equivariance() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let n = 35;
        let regs = DMatrix::from_fn(n, 2, |_, _| rng.gen_range(-1.0..1.0));
        let x = Design::with_intercept(&regs).unwrap();
        let y = DVector::from_fn(n, |i, _| 0.5 * regs[(i, 1)] + rng.gen_range(-1.0..1.0));
        let t = tau(0.75);
        let base = fit_quantile(&x, &y, t).unwrap();

        // Scale equivariance.
        let scaled = fit_quantile(&x, &(2.5 * &y), t).unwrap();
        for j in 0..3 {
            assert_abs_diff_eq!(scaled.coefficients[j], 2.5 * base.coefficients[j], epsilon = 1e-8);
        }

        // Shift equivariance: y + X b shifts coefficients by b.
        let b = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let shifted = fit_quantile(&x, &(&y + x.values() * &b), t).unwrap();
        for j in 0..3 {
            assert_abs_diff_eq!(shifted.coefficients[j], base.coefficients[j] + b[j], epsilon = 1e-8);
        }
    }

    #[test]
    fn rank_deficient_design_rejected() {
        let mut values = DMatrix::zeros(10, 3);
        values.column_mut(0).fill(1.0);
        values.column_mut(1).fill(2.0); // collinear with the intercept
        for i in 0..10 {
            values[(i, 2)] = i as f64;
        }
        let x = Design::new(values).unwrap();
        let y = DVector::from_fn(10, |i, _| i as f64);
        match fit_quantile(&x, &y, tau(0.5)) {
            Err(Error::RankDeficient { rank, cols }) => {
                assert_eq!(rank, 2);
                assert_eq!(cols, 3);
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn predict_dot_product() {
        let fit = QuantileFit {
            coefficients: DVector::from_vec(vec![1.0, 2.0]),
            tau: tau(0.5),
            objective: 0.0,
            residuals: DVector::zeros(0),
            converged: true,
            iterations: 0,
        };
        assert_eq!(predict(&fit, &DVector::from_vec(vec![1.0, 0.5])).unwrap(), 2.0);
        assert!(predict(&fit, &DVector::from_vec(vec![1.0])).is_err());
    }

    #[test]
    fn intercept_only_matches_empirical_quantile() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for &t in &[0.05, 0.25, 0.5, 0.75, 0.95] {
            for n in [5usize, 17, 50] {
                let y = DVector::from_fn(n, |_, _| rng.gen_range(-5.0..5.0));
                let x = Design::intercept_only(n).unwrap();
                let fit = fit_quantile(&x, &y, tau(t)).unwrap();
                // objective must equal the minimum over the order statistics
                let best = y
                    .iter()
                    .map(|&c| {
                        y.iter()
                            .map(|&v| check_loss(v - c, tau(t)).unwrap())
                            .sum::<f64>()
                    })
                    .fold(f64::INFINITY, f64::min);
                assert_abs_diff_eq!(fit.objective, best, epsilon = 1e-10);
            }
        }
    }
}
