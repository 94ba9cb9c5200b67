//! Nodewise VaR/CoVaR forecasting and assembly of the VaR–ΔCoVaR risk matrix.
//!
//! Each node gets a predictive quantile regression of its return on the
//! lagged state vector (VaR), and each ordered pair a second-stage
//! regression that adds the conditioning node's contemporaneous return
//! (CoVaR). One-step forecasts are evaluated at the last observed state,
//! with the fitted VaR substituted for the conditioning return. Raw
//! forecasts are negated so losses become positive magnitudes, and the
//! directional matrix is symmetrized.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::quantile::{fit_quantile, Design, QuantileFit, QuantileLevel};
use crate::{Error, Result};

/// Aligned return and state-variable series.
#[derive(Debug, Clone)]
pub struct PanelData {
    pub asset_names: Vec<String>,
    /// N x T matrix of returns.
    pub returns: DMatrix<f64>,
    pub state_names: Vec<String>,
    /// p x T matrix of state variables.
    pub state: DMatrix<f64>,
    pub timestamps: Vec<String>,
}

impl PanelData {
    pub fn new(
        asset_names: Vec<String>,
        returns: DMatrix<f64>,
        state_names: Vec<String>,
        state: DMatrix<f64>,
        timestamps: Vec<String>,
    ) -> Result<Self> {
        let n = returns.nrows();
        let t = returns.ncols();
        let p = state.nrows();
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 assets, got {n}")));
        }
        if t < p + 3 {
            return Err(Error::InvalidArgument(format!(
                "need at least p+3 = {} observations for the largest regression, got {t}",
                p + 3
            )));
        }
        if state.ncols() != t {
            return Err(Error::InvalidArgument(format!(
                "state has {} periods but returns has {t}",
                state.ncols()
            )));
        }
        if asset_names.len() != n || state_names.len() != p || timestamps.len() != t {
            return Err(Error::InvalidArgument("name/label lengths do not match data".into()));
        }
        if returns.iter().chain(state.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("panel contains non-finite entries".into()));
        }
        if timestamps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("timestamps must be strictly increasing".into()));
        }
        Ok(Self {
            asset_names,
            returns,
            state_names,
            state,
            timestamps,
        })
    }

    pub fn n_assets(&self) -> usize {
        self.returns.nrows()
    }

    pub fn n_state(&self) -> usize {
        self.state.nrows()
    }

    pub fn n_periods(&self) -> usize {
        self.returns.ncols()
    }

    /// Restrict the panel to the time range [start, start+len).
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.n_periods() {
            return Err(Error::InvalidArgument(format!(
                "window [{start}, {}) exceeds {} periods",
                start + len,
                self.n_periods()
            )));
        }
        PanelData::new(
            self.asset_names.clone(),
            self.returns.columns(start, len).into_owned(),
            self.state_names.clone(),
            self.state.columns(start, len).into_owned(),
            self.timestamps[start..start + len].to_vec(),
        )
    }

    /// Design aligning rows t = 1..T-1 of (1, X_{t-1}) with responses R_{., t}.
    fn var_design(&self) -> Result<Design> {
        let t = self.n_periods();
        let lagged = DMatrix::from_fn(t - 1, self.n_state(), |row, j| self.state[(j, row)]);
        Design::with_intercept(&lagged)
    }

    fn response(&self, node: usize) -> DVector<f64> {
        let t = self.n_periods();
        DVector::from_fn(t - 1, |row, _| self.returns[(node, row + 1)])
    }

    /// Last observed state vector, used to evaluate one-step forecasts.
    fn last_state(&self) -> DVector<f64> {
        let t = self.n_periods();
        DVector::from_fn(self.n_state(), |j, _| self.state[(j, t - 1)])
    }
}

/// One-step VaR/CoVaR/ΔCoVaR forecasts under the positive-sign convention.
#[derive(Debug, Clone)]
pub struct TailForecasts {
    /// var_plus[i] = |negated VaR forecast of node i|.
    pub var_plus: DVector<f64>,
    /// covar[(j, i)] = negated one-step CoVaR of node j conditional on node i.
    pub covar: DMatrix<f64>,
    /// delta_covar[(j, i)] = covar[(j, i)] - negated VaR of node j.
    pub delta_covar: DMatrix<f64>,
    pub tau: QuantileLevel,
}

/// Symmetric VaR–ΔCoVaR risk matrix with positive-definiteness diagnostics.
#[derive(Debug, Clone)]
pub struct RiskMatrix {
    pub gamma: DMatrix<f64>,
    pub tau: QuantileLevel,
    pub is_positive_definite: bool,
    pub min_eigenvalue: f64,
}

const PD_TOL: f64 = 1e-10;

impl RiskMatrix {
    /// Wrap an externally supplied symmetric matrix, computing the diagnostics.
    pub fn from_symmetric(gamma: DMatrix<f64>, tau: QuantileLevel) -> Result<Self> {
        if gamma.nrows() != gamma.ncols() {
            return Err(Error::InvalidArgument("risk matrix must be square".into()));
        }
        if gamma != gamma.transpose() {
            return Err(Error::InvalidArgument("risk matrix must be symmetric".into()));
        }
        let eig = gamma.clone().symmetric_eigen();
        let min_eigenvalue = eig.eigenvalues.min();
        let max_eigenvalue = eig.eigenvalues.max();
        let is_positive_definite = min_eigenvalue > PD_TOL * max_eigenvalue.abs().max(1.0);
        Ok(Self {
            gamma,
            tau,
            is_positive_definite,
            min_eigenvalue,
        })
    }

    pub fn dim(&self) -> usize {
        self.gamma.nrows()
    }
}

/// Fit the node's VaR regression and return the one-step raw-sign forecast.
pub fn fit_var_node(
    panel: &PanelData,
    node: usize,
    tau: QuantileLevel,
) -> Result<(QuantileFit, f64)> {
    let design = panel.var_design().map_err(|e| annotate(e, node, None))?;
    let fit = fit_quantile(&design, &panel.response(node), tau)
        .map_err(|e| annotate(e, node, None))?;
    let xt = panel.last_state();
    let mut forecast = fit.coefficients[0];
    for j in 0..xt.len() {
        forecast += fit.coefficients[j + 1] * xt[j];
    }
    Ok((fit, forecast))
}

/// Fit the pair CoVaR regression of node `j` conditional on node `i`,
/// substituting `var_forecast_i` for node i's realized return.
pub fn fit_covar_pair(
    panel: &PanelData,
    j: usize,
    i: usize,
    var_forecast_i: f64,
    tau: QuantileLevel,
) -> Result<f64> {
    if j == i {
        return Err(Error::InvalidArgument(format!(
            "CoVaR pair requires distinct nodes, got ({j}, {i})"
        )));
    }
    let t = panel.n_periods();
    let p = panel.n_state();
    // Regressors: (X_{t-1}, R_{(i),t}) for t = 1..T-1.
    let regs = DMatrix::from_fn(t - 1, p + 1, |row, col| {
        if col < p {
            panel.state[(col, row)]
        } else {
            panel.returns[(i, row + 1)]
        }
    });
    let design = Design::with_intercept(&regs).map_err(|e| annotate(e, j, Some(i)))?;
    let fit = fit_quantile(&design, &panel.response(j), tau)
        .map_err(|e| annotate(e, j, Some(i)))?;
    let xt = panel.last_state();
    let mut forecast = fit.coefficients[0];
    for s in 0..p {
        forecast += fit.coefficients[s + 1] * xt[s];
    }
    forecast += fit.coefficients[p + 1] * var_forecast_i;
    Ok(forecast)
}

fn annotate(e: Error, node: usize, pair: Option<usize>) -> Error {
    Error::NodeFit {
        node,
        pair,
        source: Box::new(e),
    }
}

/// Run all N VaR fits and N(N-1) CoVaR fits and apply the sign convention:
/// raw forecasts are negated so losses become positive magnitudes.
pub fn forecast_all(panel: &PanelData, tau: QuantileLevel) -> Result<TailForecasts> {
    let n = panel.n_assets();

    let var_raw: Vec<(usize, Result<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| (i, fit_var_node(panel, i, tau).map(|(_, f)| f)))
        .collect();
    let mut var_forecast = vec![0.0; n];
    for (i, r) in var_raw {
        var_forecast[i] = r?;
    }

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (j, i)))
        .collect();
    let covar_raw: Vec<((usize, usize), Result<f64>)> = pairs
        .into_par_iter()
        .map(|(j, i)| {
            (
                (j, i),
                fit_covar_pair(panel, j, i, var_forecast[i], tau),
            )
        })
        .collect();

    let mut covar = DMatrix::zeros(n, n);
    let mut delta_covar = DMatrix::zeros(n, n);
    // Negate: quantile forecasts of returns at small tau are typically
    // negative; the matrix works with positive loss magnitudes.
    let var_neg: Vec<f64> = var_forecast.iter().map(|&v| -v).collect();
    for ((j, i), r) in covar_raw {
        let c = -r?;
        covar[(j, i)] = c;
        delta_covar[(j, i)] = c - var_neg[j];
    }
    let var_plus = DVector::from_fn(n, |i, _| var_neg[i].abs());

    Ok(TailForecasts {
        var_plus,
        covar,
        delta_covar,
        tau,
    })
}

/// Assemble the symmetric risk matrix from forecasts:
/// diagonal VaR+, off-diagonal geometric-mean-scaled ΔCoVaR, symmetrized.
pub fn build_risk_matrix(f: &TailForecasts) -> Result<RiskMatrix> {
    let n = f.var_plus.len();
    for i in 0..n {
        if f.var_plus[i] <= 0.0 {
            return Err(Error::NonPositiveVar {
                node: i,
                value: f.var_plus[i],
            });
        }
    }
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = f.var_plus[i];
        for j in 0..n {
            if j != i {
                m[(j, i)] = (f.var_plus[j] * f.var_plus[i]).sqrt() * f.delta_covar[(j, i)];
            }
        }
    }
    let mut gamma = DMatrix::zeros(n, n);
    for a in 0..n {
        gamma[(a, a)] = m[(a, a)];
        for b in a + 1..n {
            let v = 0.5 * (m[(a, b)] + m[(b, a)]);
            gamma[(a, b)] = v;
            gamma[(b, a)] = v;
        }
    }
    RiskMatrix::from_symmetric(gamma, f.tau)
}

/// Square-root-diagonal decomposition Gamma = D * core * D.
pub fn decompose_dod(gamma: &RiskMatrix) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = gamma.dim();
    for i in 0..n {
        if gamma.gamma[(i, i)] <= 0.0 {
            return Err(Error::Domain(format!(
                "non-positive diagonal entry {} at {i}",
                gamma.gamma[(i, i)]
            )));
        }
    }
    let diag_sqrt = DVector::from_fn(n, |i, _| gamma.gamma[(i, i)].sqrt());
    let core = DMatrix::from_fn(n, n, |i, j| gamma.gamma[(i, j)] / (diag_sqrt[i] * diag_sqrt[j]));
    Ok((diag_sqrt, core))
}

/// Invert a positive-definite risk matrix via Cholesky factorization.
pub fn precision_of(gamma: &RiskMatrix) -> Result<DMatrix<f64>> {
    if !gamma.is_positive_definite {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: gamma.min_eigenvalue,
        });
    }
    gamma
        .gamma
        .clone()
        .cholesky()
        .map(|ch| ch.inverse())
        .ok_or(Error::NotPositiveDefinite {
            min_eigenvalue: gamma.min_eigenvalue,
        })
}

/// Rolling one-step forecasts: fit on [s, s+window) for s = 0, step, 2*step, ...
/// Returns each window's risk matrix tagged with its forecast timestamp.
pub fn rolling_forecast(
    panel: &PanelData,
    window: usize,
    step: usize,
    tau: QuantileLevel,
) -> Result<Vec<(String, RiskMatrix)>> {
    if window < panel.n_state() + 3 {
        return Err(Error::InvalidArgument(format!(
            "window {window} is smaller than p+3 = {}",
            panel.n_state() + 3
        )));
    }
    if window > panel.n_periods() {
        return Err(Error::InvalidArgument(format!(
            "window {window} exceeds {} periods",
            panel.n_periods()
        )));
    }
    if step == 0 {
        return Err(Error::InvalidArgument("step must be positive".into()));
    }
    let mut out = Vec::new();
    let mut start = 0usize;
    while start + window <= panel.n_periods() {
        let sub = panel.window(start, window)?;
        let forecasts = forecast_all(&sub, tau)?;
        let matrix = build_risk_matrix(&forecasts)?;
        out.push((sub.timestamps.last().unwrap().clone(), matrix));
        start += step;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn tau(t: f64) -> QuantileLevel {
        QuantileLevel::new(t).unwrap()
    }

    fn toy_panel(returns: DMatrix<f64>, state: DMatrix<f64>) -> PanelData {
        let n = returns.nrows();
        let p = state.nrows();
        let t = returns.ncols();
        PanelData::new(
            (0..n).map(|i| format!("a{i}")).collect(),
            returns,
            (0..p).map(|i| format!("s{i}")).collect(),
            state,
            (0..t).map(|i| format!("{i:05}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_series_degenerate_var() {
        let t = 50;
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let returns = DMatrix::from_fn(2, t, |i, _| if i == 0 { 0.7 } else { rng.gen_range(-1.0..1.0) });
        let state = DMatrix::from_fn(1, t, |_, _| rng.gen_range(-1.0..1.0));
        let panel = toy_panel(returns, state);
        let (_, f) = fit_var_node(&panel, 0, tau(0.05)).unwrap();
        assert_abs_diff_eq!(f, 0.7, epsilon = 1e-8);
    }

    #[test]
    fn var_forecast_matches_dgp_quantile() {
        // R_t = 0.5 * X_{t-1} + eps, eps ~ N(0,1): the tau-quantile forecast
        // is 0.5 * X_T + Phi^{-1}(tau).
        let t = 5000;
        let mut rng = ChaCha20Rng::seed_from_u64(42);
        let state = DMatrix::from_fn(1, t, |_, _| rng.gen_range(-2.0..2.0));
        let mut returns = DMatrix::zeros(2, t);
        let normal = rand_distr::StandardNormal;
        for col in 1..t {
            for row in 0..2 {
                let e: f64 = rng.sample(normal);
                returns[(row, col)] = 0.5 * state[(0, col - 1)] + e;
            }
        }
        let panel = toy_panel(returns, state.clone());
        let (_, f) = fit_var_node(&panel, 0, tau(0.05)).unwrap();
        let phi_inv_005 = -1.6448536269514722;
        let expected = 0.5 * state[(0, t - 1)] + phi_inv_005;
        assert!((f - expected).abs() < 0.15, "forecast {f} vs {expected}");
    }

    #[test]
    fn identical_series_covar_equals_var() {
        let t = 200;
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let state = DMatrix::from_fn(1, t, |_, _| rng.gen_range(-1.0..1.0));
        let base = DVector::from_fn(t, |i, _| 0.3 * if i > 0 { state[(0, i - 1)] } else { 0.0 } + rng.gen_range(-1.0..1.0));
        let returns = DMatrix::from_fn(2, t, |_, col| base[col]);
        let panel = toy_panel(returns, state);
        let (_, var0) = fit_var_node(&panel, 0, tau(0.05)).unwrap();
        let covar = fit_covar_pair(&panel, 1, 0, var0, tau(0.05)).unwrap();
        assert_abs_diff_eq!(covar, var0, epsilon = 1e-6);
    }

    #[test]
    fn covar_pair_rejects_same_node() {
        let t = 30;
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let returns = DMatrix::from_fn(2, t, |_, _| rng.gen_range(-1.0..1.0));
        let state = DMatrix::from_fn(1, t, |_, _| rng.gen_range(-1.0..1.0));
        let panel = toy_panel(returns, state);
        assert!(fit_covar_pair(&panel, 1, 1, 0.0, tau(0.05)).is_err());
    }

    #[test]
    fn identical_series_zero_delta_covar() {
        let t = 120;
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let state = DMatrix::from_fn(1, t, |_, _| rng.gen_range(-1.0..1.0));
        let base: Vec<f64> = (0..t).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let returns = DMatrix::from_fn(3, t, |_, col| base[col]);
        let panel = toy_panel(returns, state);
        let f = forecast_all(&panel, tau(0.05)).unwrap();
        for j in 0..3 {
            for i in 0..3 {
                if i != j {
                    assert_abs_diff_eq!(f.delta_covar[(j, i)], 0.0, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn risk_matrix_worked_example() {
        let f = TailForecasts {
            var_plus: DVector::from_vec(vec![1.0, 4.0]),
            covar: DMatrix::zeros(2, 2),
            delta_covar: DMatrix::from_fn(2, 2, |j, i| match (j, i) {
                (0, 1) => 0.3,
                (1, 0) => 0.1,
                _ => 0.0,
            }),
            tau: tau(0.05),
        };
        let rm = build_risk_matrix(&f).unwrap();
        assert_abs_diff_eq!(rm.gamma[(0, 0)], 1.0);
        assert_abs_diff_eq!(rm.gamma[(1, 1)], 4.0);
        assert_abs_diff_eq!(rm.gamma[(0, 1)], 0.4, epsilon = 1e-14);
        assert_abs_diff_eq!(rm.gamma[(1, 0)], 0.4, epsilon = 1e-14);
    }

    #[test]
    fn risk_matrix_symmetry_and_diagonal() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        for _ in 0..20 {
            let n = rng.gen_range(2..6);
            let f = TailForecasts {
                var_plus: DVector::from_fn(n, |_, _| rng.gen_range(0.1..3.0)),
                covar: DMatrix::zeros(n, n),
                delta_covar: DMatrix::from_fn(n, n, |_, _| rng.gen_range(-0.5..0.5)),
                tau: tau(0.05),
            };
            let rm = build_risk_matrix(&f).unwrap();
            assert_eq!(rm.gamma, rm.gamma.transpose());
            for i in 0..n {
                assert_eq!(rm.gamma[(i, i)], f.var_plus[i]);
            }
        }
    }

    #[test]
    fn non_positive_var_rejected() {
        let f = TailForecasts {
            var_plus: DVector::from_vec(vec![1.0, 0.0]),
            covar: DMatrix::zeros(2, 2),
            delta_covar: DMatrix::zeros(2, 2),
            tau: tau(0.05),
        };
        assert!(matches!(
            build_risk_matrix(&f),
            Err(Error::NonPositiveVar { node: 1, .. })
        ));
    }

    #[test]
    fn dod_decomposition() {
        let gamma = RiskMatrix::from_symmetric(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 4.0]),
            tau(0.05),
        )
        .unwrap();
        let (d, core) = decompose_dod(&gamma).unwrap();
        assert_abs_diff_eq!(d[0], 1.0);
        assert_abs_diff_eq!(d[1], 2.0);
        assert_abs_diff_eq!(core[(0, 1)], 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(core[(0, 0)], 1.0);
        // round trip
        let rebuilt = DMatrix::from_fn(2, 2, |i, j| d[i] * core[(i, j)] * d[j]);
        for (a, b) in rebuilt.iter().zip(gamma.gamma.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn dod_round_trip_random() {
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        for _ in 0..100 {
            let n = rng.gen_range(2..7);
            let gamma = sim::random_pd_matrix(n, &mut rng);
            let rm = RiskMatrix::from_symmetric(gamma.clone(), tau(0.05)).unwrap();
            let (d, core) = decompose_dod(&rm).unwrap();
            for i in 0..n {
                assert_abs_diff_eq!(core[(i, i)], 1.0, epsilon = 1e-12);
                for j in 0..n {
                    assert_abs_diff_eq!(d[i] * core[(i, j)] * d[j], gamma[(i, j)], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn precision_identity_and_diagonal() {
        let rm = RiskMatrix::from_symmetric(DMatrix::identity(3, 3), tau(0.05)).unwrap();
        let inv = precision_of(&rm).unwrap();
        for (a, b) in inv.iter().zip(DMatrix::identity(3, 3).iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        let rm2 = RiskMatrix::from_symmetric(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]),
            tau(0.05),
        )
        .unwrap();
        let inv2 = precision_of(&rm2).unwrap();
        assert_abs_diff_eq!(inv2[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(inv2[(1, 1)], 0.25, epsilon = 1e-12);
    }

    #[test]
    fn precision_matches_elimination_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(29);
        let gamma = sim::random_pd_matrix(5, &mut rng);
        let rm = RiskMatrix::from_symmetric(gamma.clone(), tau(0.05)).unwrap();
        let inv = precision_of(&rm).unwrap();
        let oracle = gauss_jordan_inverse(&gamma);
        for (a, b) in inv.iter().zip(oracle.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
        let prod = &gamma * &inv;
        for (i, v) in prod.iter().enumerate() {
            let expect = if i % 6 == 0 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(*v, expect, epsilon = 1e-8);
        }
    }

    #[test]
    fn precision_rejects_indefinite() {
        let rm = RiskMatrix::from_symmetric(
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]),
            tau(0.05),
        )
        .unwrap();
        assert!(!rm.is_positive_definite);
        assert!(precision_of(&rm).is_err());
    }

    // Independent Gaussian elimination oracle for precision_of.
    fn gauss_jordan_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = m.nrows();
        let mut a = m.clone();
        let mut inv = DMatrix::<f64>::identity(n, n);
        for col in 0..n {
            let mut pivot = col;
            for r in col + 1..n {
                if a[(r, col)].abs() > a[(pivot, col)].abs() {
                    pivot = r;
                }
            }
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let d = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= d;
                inv[(col, j)] /= d;
            }
            for r in 0..n {
                if r != col {
                    let f = a[(r, col)];
                    for j in 0..n {
                        a[(r, j)] -= f * a[(col, j)];
                        inv[(r, j)] -= f * inv[(col, j)];
                    }
                }
            }
        }
        inv
    }

    #[test]
    fn rolling_window_counts() {
        let t = 40;
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        let returns = DMatrix::from_fn(2, t, |_, _| rng.gen_range(-1.0..1.0));
        let state = DMatrix::from_fn(1, t, |_, _| rng.gen_range(-1.0..1.0));
        let panel = toy_panel(returns, state);
        let tau5 = tau(0.05);
        assert_eq!(rolling_forecast(&panel, 40, 10, tau5).unwrap().len(), 1);
        assert_eq!(rolling_forecast(&panel, 30, 10, tau5).unwrap().len(), 2);
        assert!(rolling_forecast(&panel, 3, 10, tau5).is_err());
    }
}
