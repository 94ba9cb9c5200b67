//! C ABI for the tailnet library.
//!
//! Every function returns a status code (`TAILNET_OK` on success); outputs
//! go through out-pointers. Handles are opaque and must be released with
//! their matching `_free` function. On failure, a human-readable message is
//! available from `tailnet_last_error` until the next call on the same
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::path::Path;
use std::ptr;

use tailnet::centrality::{self, CentralityKind};
use tailnet::foce::{FoceConfig, FoceObjective};
use tailnet::pipeline;
use tailnet::portfolio;
use tailnet::precision;
use tailnet::quantile::QuantileLevel;
use tailnet::sim::SimSpec;
use tailnet::tail_risk::{self, PanelData, RiskMatrix};

/// Success.
pub const TAILNET_OK: c_int = 0;
/// Input file could not be parsed.
pub const TAILNET_ERR_PARSE: c_int = 2;
/// Numeric or model failure.
pub const TAILNET_ERR_NUMERIC: c_int = 3;
/// Invalid configuration or argument.
pub const TAILNET_ERR_CONFIG: c_int = 4;
/// Null pointer or invalid handle.
pub const TAILNET_ERR_POINTER: c_int = 5;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = sanitized);
}

fn code_of(err: &tailnet::Error) -> c_int {
    set_error(&err.to_string());
    pipeline::exit_code(err) as c_int
}

fn pointer_error(what: &str) -> c_int {
    set_error(&format!("null or invalid pointer: {what}"));
    TAILNET_ERR_POINTER
}

/// Opaque aligned panel of returns and state variables.
pub struct TailnetPanel {
    inner: PanelData,
}

/// Opaque symmetric VaR–ΔCoVaR risk matrix.
pub struct TailnetRiskMatrix {
    inner: RiskMatrix,
    names: Vec<String>,
}

/// Last error message for the calling thread. Copies up to `cap - 1` bytes
/// into `buf` and NUL-terminates; returns the full message length.
#[no_mangle]
pub extern "C" fn tailnet_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

unsafe fn path_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a Path, c_int> {
    if ptr.is_null() {
        return Err(pointer_error(what));
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_error(&format!("{what} is not valid UTF-8"));
            Err(TAILNET_ERR_CONFIG)
        }
    }
}

/// Load and align returns and state CSV files.
///
/// # Safety
/// `returns_path` and `state_path` must be NUL-terminated strings and
/// `out` a valid pointer; the returned handle must be released with
/// `tailnet_panel_free`.
#[no_mangle]
pub unsafe extern "C" fn tailnet_panel_load(
    returns_path: *const c_char,
    state_path: *const c_char,
    out: *mut *mut TailnetPanel,
) -> c_int {
    if out.is_null() {
        return pointer_error("out");
    }
    let rp = match path_arg(returns_path, "returns_path") {
        Ok(p) => p,
        Err(code) => return code,
    };
    let sp = match path_arg(state_path, "state_path") {
        Ok(p) => p,
        Err(code) => return code,
    };
    match tailnet::io::load_panel(rp, sp) {
        Ok(panel) => {
            *out = Box::into_raw(Box::new(TailnetPanel { inner: panel }));
            TAILNET_OK
        }
        Err(e) => code_of(&e),
    }
}

/// Build a panel from row-major buffers: returns is `n_assets * t`, state
/// is `p_state * t`, both indexed `[series][period]`.
///
/// # Safety
/// Buffers must hold the stated number of f64 values.
#[no_mangle]
pub unsafe extern "C" fn tailnet_panel_from_arrays(
    returns: *const c_double,
    n_assets: usize,
    state: *const c_double,
    p_state: usize,
    t: usize,
    out: *mut *mut TailnetPanel,
) -> c_int {
    if returns.is_null() || state.is_null() || out.is_null() {
        return pointer_error("returns/state/out");
    }
    let r = std::slice::from_raw_parts(returns, n_assets * t);
    let s = std::slice::from_raw_parts(state, p_state * t);
    let returns_m = nalgebra::DMatrix::from_fn(n_assets, t, |i, j| r[i * t + j]);
    let state_m = nalgebra::DMatrix::from_fn(p_state, t, |i, j| s[i * t + j]);
    let panel = PanelData::new(
        (0..n_assets).map(|i| format!("asset{i}")).collect(),
        returns_m,
        (0..p_state).map(|k| format!("state{k}")).collect(),
        state_m,
        (0..t).map(|x| format!("t{x:09}")).collect(),
    );
    match panel {
        Ok(p) => {
            *out = Box::into_raw(Box::new(TailnetPanel { inner: p }));
            TAILNET_OK
        }
        Err(e) => code_of(&e),
    }
}

/// # Safety
/// `panel` must come from a `tailnet_panel_*` constructor; it is invalid
/// after this call.
#[no_mangle]
pub unsafe extern "C" fn tailnet_panel_free(panel: *mut TailnetPanel) {
    if !panel.is_null() {
        drop(Box::from_raw(panel));
    }
}

/// Estimate the risk matrix from a panel at quantile level `tau`.
///
/// # Safety
/// `panel` must be a live handle and `out` a valid pointer; release the
/// result with `tailnet_risk_matrix_free`.
#[no_mangle]
pub unsafe extern "C" fn tailnet_estimate(
    panel: *const TailnetPanel,
    tau: c_double,
    out: *mut *mut TailnetRiskMatrix,
) -> c_int {
    let Some(panel) = panel.as_ref() else {
        return pointer_error("panel");
    };
    if out.is_null() {
        return pointer_error("out");
    }
    let result = QuantileLevel::new(tau)
        .and_then(|level| tail_risk::forecast_all(&panel.inner, level))
        .and_then(|f| tail_risk::build_risk_matrix(&f));
    match result {
        Ok(m) => {
            *out = Box::into_raw(Box::new(TailnetRiskMatrix {
                inner: m,
                names: panel.inner.asset_names.clone(),
            }));
            TAILNET_OK
        }
        Err(e) => code_of(&e),
    }
}

/// Wrap an existing symmetric matrix (row-major, n*n) as a risk matrix.
///
/// # Safety
/// `values` must hold `n * n` f64 values.
#[no_mangle]
pub unsafe extern "C" fn tailnet_risk_matrix_from_array(
    values: *const c_double,
    n: usize,
    tau: c_double,
    out: *mut *mut TailnetRiskMatrix,
) -> c_int {
    if values.is_null() || out.is_null() {
        return pointer_error("values/out");
    }
    let level = match QuantileLevel::new(tau) {
        Ok(l) => l,
        Err(e) => return code_of(&e),
    };
    let v = std::slice::from_raw_parts(values, n * n);
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| v[i * n + j]);
    match RiskMatrix::from_symmetric(m, level) {
        Ok(rm) => {
            *out = Box::into_raw(Box::new(TailnetRiskMatrix {
                inner: rm,
                names: (0..n).map(|i| format!("asset{i}")).collect(),
            }));
            TAILNET_OK
        }
        Err(e) => code_of(&e),
    }
}

/// Number of nodes in the risk matrix, or 0 for a null handle.
///
/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tailnet_risk_matrix_dim(matrix: *const TailnetRiskMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.inner.dim())
}

/// 1 if the matrix is numerically positive definite, else 0.
///
/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tailnet_risk_matrix_is_pd(matrix: *const TailnetRiskMatrix) -> c_int {
    matrix
        .as_ref()
        .map_or(0, |m| m.inner.is_positive_definite as c_int)
}

/// Copy the matrix entries row-major into `buf` (length n*n).
///
/// # Safety
/// `buf` must hold at least `n * n` f64 values.
#[no_mangle]
pub unsafe extern "C" fn tailnet_risk_matrix_values(
    matrix: *const TailnetRiskMatrix,
    buf: *mut c_double,
) -> c_int {
    let Some(m) = matrix.as_ref() else {
        return pointer_error("matrix");
    };
    if buf.is_null() {
        return pointer_error("buf");
    }
    let n = m.inner.dim();
    for i in 0..n {
        for j in 0..n {
            *buf.add(i * n + j) = m.inner.gamma[(i, j)];
        }
    }
    TAILNET_OK
}

/// # Safety
/// `matrix` must come from a constructor; it is invalid after this call.
#[no_mangle]
pub unsafe extern "C" fn tailnet_risk_matrix_free(matrix: *mut TailnetRiskMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

fn kind_of(kind: c_int) -> Result<CentralityKind, c_int> {
    let name = match kind {
        0 => "degree",
        1 => "eigenvector",
        2 => "katz",
        3 => "pagerank",
        4 => "closeness",
        5 => "betweenness",
        6 => "leverage",
        other => {
            set_error(&format!("unknown centrality kind code {other}"));
            return Err(TAILNET_ERR_CONFIG);
        }
    };
    Ok(name.parse().expect("known kind"))
}

/// Centrality scores of the risk graph; `kind`: 0 degree, 1 eigenvector,
/// 2 katz, 3 pagerank, 4 closeness, 5 betweenness, 6 leverage. `buf` must
/// hold n values.
///
/// # Safety
/// `matrix` must be a live handle and `buf` sized to the node count.
#[no_mangle]
pub unsafe extern "C" fn tailnet_centrality(
    matrix: *const TailnetRiskMatrix,
    kind: c_int,
    buf: *mut c_double,
) -> c_int {
    let Some(m) = matrix.as_ref() else {
        return pointer_error("matrix");
    };
    if buf.is_null() {
        return pointer_error("buf");
    }
    let kind = match kind_of(kind) {
        Ok(k) => k,
        Err(code) => return code,
    };
    let result =
        centrality::adjacency_from_risk(&m.inner).and_then(|adj| centrality::compute(&adj, kind));
    match result {
        Ok(scores) => {
            for (i, s) in scores.scores.iter().enumerate() {
                *buf.add(i) = *s;
            }
            TAILNET_OK
        }
        Err(e) => code_of(&e),
    }
}

/// Minimum-variance portfolio weights; `buf` must hold n values.
///
/// # Safety
/// `matrix` must be a live handle and `buf` sized to the node count.
#[no_mangle]
pub unsafe extern "C" fn tailnet_min_variance_weights(
    matrix: *const TailnetRiskMatrix,
    buf: *mut c_double,
) -> c_int {
    let Some(m) = matrix.as_ref() else {
        return pointer_error("matrix");
    };
    if buf.is_null() {
        return pointer_error("buf");
    }
    match portfolio::min_variance_weights(&m.inner) {
        Ok(w) => {
            for (i, v) in w.weights.iter().enumerate() {
                *buf.add(i) = *v;
            }
            TAILNET_OK
        }
        Err(e) => code_of(&e),
    }
}

/// Feature ordering by centrality exclusion. Writes the removal order
/// (node indices) into `order` and the objective trace into `objective`,
/// both of length n-1; `*stop_index` receives the number of removals at
/// which the stopping rule fired.
///
/// # Safety
/// `order` and `objective` must hold n-1 values each.
#[no_mangle]
pub unsafe extern "C" fn tailnet_foce(
    matrix: *const TailnetRiskMatrix,
    kind: c_int,
    epsilon: c_double,
    order: *mut usize,
    objective: *mut c_double,
    stop_index: *mut usize,
) -> c_int {
    let Some(m) = matrix.as_ref() else {
        return pointer_error("matrix");
    };
    if order.is_null() || objective.is_null() || stop_index.is_null() {
        return pointer_error("order/objective/stop_index");
    }
    let kind = match kind_of(kind) {
        Ok(k) => k,
        Err(code) => return code,
    };
    let goal = if m.inner.is_positive_definite {
        FoceObjective::MinVarianceLoss
    } else {
        FoceObjective::SpectralRadius
    };
    let result =
        FoceConfig::new(kind, epsilon, goal).and_then(|cfg| tailnet::foce::foce_order(&m.inner, &cfg));
    match result {
        Ok(ordering) => {
            for (i, &node) in ordering.removed.iter().enumerate() {
                *order.add(i) = node;
                *objective.add(i) = ordering.objective_trace[i];
            }
            *stop_index = ordering.stop_index;
            TAILNET_OK
        }
        Err(e) => code_of(&e),
    }
}

/// Debiased nodewise-Lasso precision estimate. `data` is row-major n*p
/// (observations by variables); `omega` receives p*p row-major entries.
/// `lambda_scale` is the multiplier c in lambda = c*sqrt(log p / n).
///
/// # Safety
/// `data` must hold n*p values, `omega` p*p values.
#[no_mangle]
pub unsafe extern "C" fn tailnet_precision(
    data: *const c_double,
    n: usize,
    p: usize,
    lambda_scale: c_double,
    omega: *mut c_double,
) -> c_int {
    if data.is_null() || omega.is_null() {
        return pointer_error("data/omega");
    }
    let d = std::slice::from_raw_parts(data, n * p);
    let y = nalgebra::DMatrix::from_fn(n, p, |i, j| d[i * p + j]);
    let lambdas = precision::default_lambdas(n, p, lambda_scale);
    match precision::estimate_precision(&y, &lambdas) {
        Ok(est) => {
            for i in 0..p {
                for j in 0..p {
                    *omega.add(i * p + j) = est.omega_hat[(i, j)];
                }
            }
            TAILNET_OK
        }
        Err(e) => code_of(&e),
    }
}

/// Simulate the benchmark regression design. `x` receives n*p and `y`
/// n*m row-major entries; pass null to skip either output.
///
/// # Safety
/// Non-null buffers must be correctly sized.
#[no_mangle]
pub unsafe extern "C" fn tailnet_simulate_dgp(
    n: usize,
    m: usize,
    p: usize,
    rank: usize,
    ar_decay: c_double,
    seed: u64,
    x: *mut c_double,
    y: *mut c_double,
) -> c_int {
    let spec = SimSpec {
        n,
        m,
        p,
        rank,
        ar_decay,
        seed,
    };
    match tailnet::sim::simulate_dgp(&spec) {
        Ok(out) => {
            if !x.is_null() {
                for i in 0..n {
                    for j in 0..p {
                        *x.add(i * p + j) = out.x[(i, j)];
                    }
                }
            }
            if !y.is_null() {
                for i in 0..n {
                    for j in 0..m {
                        *y.add(i * m + j) = out.y[(i, j)];
                    }
                }
            }
            TAILNET_OK
        }
        Err(e) => code_of(&e),
    }
}

/// Node name at `index`, copied NUL-terminated into `buf`; returns the
/// full name length or 0 when out of range.
///
/// # Safety
/// `buf` must hold `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn tailnet_risk_matrix_name(
    matrix: *const TailnetRiskMatrix,
    index: usize,
    buf: *mut c_char,
    cap: usize,
) -> usize {
    let Some(m) = matrix.as_ref() else {
        return 0;
    };
    let Some(name) = m.names.get(index) else {
        return 0;
    };
    let bytes = name.as_bytes();
    if !buf.is_null() && cap > 0 {
        let n = bytes.len().min(cap - 1);
        ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
        *buf.add(n) = 0;
    }
    bytes.len()
}
