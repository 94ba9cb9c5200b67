//! Synthetic data generators: the multivariate regression design used by
//! the simulation study and a return-panel generator with closed-form
//! population tail quantiles for testing the forecasting pipeline.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::tail_risk::PanelData;
use crate::{Error, Result};

/// Simulation design: n observations, m responses, p predictors, and a
/// rank-r coefficient matrix. Predictor rows are Gaussian with Toeplitz
/// covariance `ar_decay^|i-j|`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SimSpec {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub rank: usize,
    pub ar_decay: f64,
    pub seed: u64,
}

impl Default for SimSpec {
    fn default() -> Self {
        Self {
            n: 100,
            m: 100,
            p: 100,
            rank: 10,
            ar_decay: 0.5,
            seed: 0,
        }
    }
}

/// Output of `simulate_dgp`.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub gamma_true: DMatrix<f64>,
}

/// Random symmetric positive-definite matrix with eigenvalues in
/// roughly [0.1, 2.1]: Q diag(d) Q' for a random orthogonal Q.
pub fn random_pd_matrix(n: usize, rng: &mut ChaCha20Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = a.qr().q();
    let d = DVector::from_fn(n, |_, _| 0.1 + 2.0 * rng.gen::<f64>());
    let mut g = &q * DMatrix::from_diagonal(&d) * q.transpose();
    // mirror the upper triangle so the result is bit-exactly symmetric
    for i in 0..n {
        for j in 0..i {
            g[(i, j)] = g[(j, i)];
        }
    }
    g
}

fn standard_normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha20Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Cholesky factor of the Toeplitz matrix decay^|i-j|.
fn toeplitz_chol(p: usize, decay: f64) -> Result<DMatrix<f64>> {
    let sigma = DMatrix::from_fn(p, p, |i, j| decay.powi((i as i32 - j as i32).abs()));
    sigma
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::Domain("Toeplitz covariance not positive definite".into()))
}

/// Draw X with Toeplitz-correlated rows, a rank-r coefficient matrix from
/// random SVD factors, and Y = X Gamma + standard Gaussian noise.
pub fn simulate_dgp(spec: &SimSpec) -> Result<SimOutput> {
    if spec.n == 0 || spec.m == 0 || spec.p == 0 {
        return Err(Error::InvalidArgument("n, m, p must be positive".into()));
    }
    if spec.rank > spec.p.min(spec.m) {
        return Err(Error::InvalidArgument(format!(
            "rank {} exceeds min(p, m) = {}",
            spec.rank,
            spec.p.min(spec.m)
        )));
    }
    if !(0.0..1.0).contains(&spec.ar_decay) {
        return Err(Error::InvalidArgument(format!(
            "ar_decay must lie in [0, 1), got {}",
            spec.ar_decay
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let chol = toeplitz_chol(spec.p, spec.ar_decay)?;
    let z = standard_normal_matrix(spec.n, spec.p, &mut rng);
    let x = &z * chol.transpose();

    // rank-r Gamma from the SVD factors of a random p x m draw
    let raw = standard_normal_matrix(spec.p, spec.m, &mut rng);
    let svd = raw.svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let vt = svd.v_t.as_ref().expect("svd with v_t");
    let r = spec.rank;
    let mut gamma = DMatrix::zeros(spec.p, spec.m);
    for k in 0..r {
        let s = svd.singular_values[k];
        for i in 0..spec.p {
            for j in 0..spec.m {
                gamma[(i, j)] += s * u[(i, k)] * vt[(k, j)];
            }
        }
    }
    // scale to unit average squared entry so signal strength is stable in p, m
    let frob2 = gamma.iter().map(|g| g * g).sum::<f64>();
    if frob2 > 0.0 {
        gamma *= ((spec.p * spec.m) as f64 / frob2).sqrt();
    }

    let eps = standard_normal_matrix(spec.n, spec.m, &mut rng);
    let y = &x * &gamma + eps;
    Ok(SimOutput { x, y, gamma_true: gamma })
}

/// Loading of each return on the first lagged state variable in
/// `simulate_return_panel`; population VaR of node i given the last state
/// x is RETURN_STATE_LOADING * x[0] + Phi^-1(tau).
pub const RETURN_STATE_LOADING: f64 = 0.5;
const STATE_AR_COEF: f64 = 0.5;

/// Return panel with AR(1) Gaussian state variables and returns that load
/// on the first lagged state variable plus cross-sectionally correlated
/// standard Gaussian shocks:
///
///   x_{t} = 0.5 x_{t-1} + sqrt(0.75) z_t        (each state, stationary)
///   r_{i,t} = 0.5 x_{0,t-1} + e_{i,t},  corr(e) = dependence
///
/// so population VaR and CoVaR follow from bivariate-normal quantile
/// algebra. `dependence` must be symmetric PSD with unit diagonal.
pub fn simulate_return_panel(
    n_assets: usize,
    p_state: usize,
    t_len: usize,
    dependence: &DMatrix<f64>,
    seed: u64,
) -> Result<PanelData> {
    if n_assets < 2 || p_state == 0 {
        return Err(Error::InvalidArgument(
            "need at least 2 assets and 1 state variable".into(),
        ));
    }
    if t_len < p_state + 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least {} periods, got {t_len}",
            p_state + 3
        )));
    }
    if dependence.shape() != (n_assets, n_assets) {
        return Err(Error::InvalidArgument(format!(
            "dependence must be {n_assets}x{n_assets}, got {}x{}",
            dependence.nrows(),
            dependence.ncols()
        )));
    }
    if (dependence - dependence.transpose()).amax() > 1e-12 {
        return Err(Error::InvalidArgument("dependence must be symmetric".into()));
    }
    if (0..n_assets).any(|i| (dependence[(i, i)] - 1.0).abs() > 1e-12) {
        return Err(Error::InvalidArgument(
            "dependence must have unit diagonal".into(),
        ));
    }
    let eig = dependence.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l < -1e-10) {
        return Err(Error::InvalidArgument(
            "dependence must be positive semidefinite".into(),
        ));
    }
    // PSD square root via the eigendecomposition (Cholesky would reject
    // singular but valid correlation matrices)
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()))
        * eig.eigenvectors.transpose();

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let innov_scale = (1.0 - STATE_AR_COEF * STATE_AR_COEF).sqrt();
    let mut state = DMatrix::zeros(p_state, t_len);
    for k in 0..p_state {
        state[(k, 0)] = rng.sample::<f64, _>(StandardNormal);
        for t in 1..t_len {
            state[(k, t)] = STATE_AR_COEF * state[(k, t - 1)]
                + innov_scale * rng.sample::<f64, _>(StandardNormal);
        }
    }
    let mut returns = DMatrix::zeros(n_assets, t_len);
    for t in 0..t_len {
        let shocks = &root * DVector::from_fn(n_assets, |_, _| rng.sample::<f64, _>(StandardNormal));
        let lagged = if t == 0 { 0.0 } else { state[(0, t - 1)] };
        for i in 0..n_assets {
            returns[(i, t)] = RETURN_STATE_LOADING * lagged + shocks[i];
        }
    }
    let asset_names = (0..n_assets).map(|i| format!("asset{i}")).collect();
    let state_names = (0..p_state).map(|k| format!("state{k}")).collect();
    let timestamps = (0..t_len).map(|t| format!("t{t:07}")).collect();
    PanelData::new(asset_names, returns, state_names, state, timestamps)
}
