//! Graph structure induced by the risk matrix: adjacency extraction,
//! spectral decomposition, centrality measures, ordinal-centrality
//! dominance relations, and the permutation rank statistic.
//!
//! Risk-matrix off-diagonals can be negative, so score-based centralities
//! operate on absolute weights by default; pass `WeightPolicy::Raw` to use
//! raw weights, which errors when positivity assumptions break. Path-based
//! measures use edge length 1/|weight| (stronger dependence = shorter
//! distance); a zero weight means no edge.

use nalgebra::{DMatrix, DVector};

use crate::tail_risk::RiskMatrix;
use crate::{Error, Result};

/// Symmetric weighted adjacency matrix with zero diagonal.
#[derive(Debug, Clone)]
pub struct Adjacency {
    pub weights: DMatrix<f64>,
    pub node_ids: Vec<String>,
}

impl Adjacency {
    pub fn new(weights: DMatrix<f64>, node_ids: Vec<String>) -> Result<Self> {
        let n = weights.nrows();
        if weights.ncols() != n {
            return Err(Error::InvalidArgument("adjacency must be square".into()));
        }
        if node_ids.len() != n {
            return Err(Error::InvalidArgument("node id count mismatch".into()));
        }
        if weights != weights.transpose() {
            return Err(Error::InvalidArgument("adjacency must be symmetric".into()));
        }
        if (0..n).any(|i| weights[(i, i)] != 0.0) {
            return Err(Error::InvalidArgument("adjacency diagonal must be zero".into()));
        }
        if weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("adjacency has non-finite entries".into()));
        }
        Ok(Self { weights, node_ids })
    }

    /// Unweighted graph from an edge list.
    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut w = DMatrix::zeros(n, n);
        for &(a, b) in edges {
            w[(a, b)] = 1.0;
            w[(b, a)] = 1.0;
        }
        Self::new(w, (0..n).map(|i| i.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.weights.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn abs_weights(&self) -> DMatrix<f64> {
        self.weights.map(f64::abs)
    }

    /// Weighted degree d_i = sum_j |w_ij|.
    pub fn degrees(&self) -> DVector<f64> {
        let a = self.abs_weights();
        DVector::from_fn(self.len(), |i, _| a.row(i).sum())
    }

    /// Neighborhood of node i on the support of the weights.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| j != i && self.weights[(i, j)] != 0.0)
            .collect()
    }

    /// Connected on the support of nonzero weights.
    pub fn is_connected(&self) -> bool {
        let n = self.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for j in self.neighbors(v) {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Whether centralities run on |weights| or the raw signed weights.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum WeightPolicy {
    #[default]
    Absolute,
    Raw,
}

/// Which centrality measure a score vector came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CentralityKind {
    Degree,
    Eigenvector,
    Katz,
    Pagerank,
    Closeness,
    Betweenness,
    Leverage,
}

impl std::str::FromStr for CentralityKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "degree" => Ok(Self::Degree),
            "eigenvector" => Ok(Self::Eigenvector),
            "katz" => Ok(Self::Katz),
            "pagerank" => Ok(Self::Pagerank),
            "closeness" => Ok(Self::Closeness),
            "betweenness" => Ok(Self::Betweenness),
            "leverage" => Ok(Self::Leverage),
            other => Err(Error::InvalidArgument(format!("unknown centrality kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for CentralityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Degree => "degree",
            Self::Eigenvector => "eigenvector",
            Self::Katz => "katz",
            Self::Pagerank => "pagerank",
            Self::Closeness => "closeness",
            Self::Betweenness => "betweenness",
            Self::Leverage => "leverage",
        };
        f.write_str(s)
    }
}

/// Per-node scores for one centrality measure on one graph.
#[derive(Debug, Clone)]
pub struct CentralityScores {
    pub kind: CentralityKind,
    pub scores: DVector<f64>,
    /// alpha for Katz/PageRank, beta for PageRank.
    pub params: Vec<(String, f64)>,
    /// Set when a disconnected graph forced per-component computation.
    pub disconnected_warning: bool,
}

/// Adjacency of the graph induced by the risk matrix: Gamma minus its diagonal.
pub fn adjacency_from_risk(gamma: &RiskMatrix) -> Result<Adjacency> {
    let n = gamma.dim();
    let mut w = gamma.gamma.clone();
    for i in 0..n {
        w[(i, i)] = 0.0;
    }
    Adjacency::new(w, (0..n).map(|i| i.to_string()).collect())
}

/// Eigendecomposition with eigenvalues sorted by descending magnitude.
pub fn spectral(adj: &Adjacency) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = adj.len();
    let eig = adj.weights.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .abs()
            .partial_cmp(&eig.eigenvalues[a].abs())
            .unwrap()
    });
    let values = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

fn positive_matrix(adj: &Adjacency, policy: WeightPolicy) -> Result<DMatrix<f64>> {
    match policy {
        WeightPolicy::Absolute => Ok(adj.abs_weights()),
        WeightPolicy::Raw => {
            if adj.weights.iter().any(|&v| v < 0.0) {
                Err(Error::Graph(
                    "raw weight policy requires nonnegative weights".into(),
                ))
            } else {
                Ok(adj.weights.clone())
            }
        }
    }
}

/// Weighted degree centrality on |weights|.
pub fn degree(adj: &Adjacency) -> Result<CentralityScores> {
    Ok(CentralityScores {
        kind: CentralityKind::Degree,
        scores: adj.degrees(),
        params: vec![],
        disconnected_warning: false,
    })
}

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 10_000;

/// Perron eigenvector of the (positive-policy) adjacency, unit Euclidean norm.
pub fn eigenvector_centrality(adj: &Adjacency, policy: WeightPolicy) -> Result<CentralityScores> {
    let n = adj.len();
    let a = positive_matrix(adj, policy)?;
    if !adj.is_connected() {
        return Err(Error::Graph(
            "eigenvector centrality requires a connected graph".into(),
        ));
    }
    // shift by a spectral-radius bound: A + sI has the same eigenvectors but
    // a strictly dominant Perron eigenvalue even on bipartite graphs, where
    // plain power iteration oscillates between the +/- lambda1 eigenspaces
    let shift = (0..n)
        .map(|i| a.row(i).iter().map(|w| w.abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let a_shifted = &a + DMatrix::identity(n, n) * shift;
    let mut v = DVector::from_element(n, (n as f64).sqrt().recip());
    let mut converged = false;
    for _ in 0..POWER_MAX_ITER {
        let w = &a_shifted * &v;
        let norm = w.norm();
        if norm == 0.0 {
            // zero matrix: all eigenvalues zero, keep the uniform vector
            converged = true;
            break;
        }
        let next = w / norm;
        let lambda = next.dot(&(&a * &next));
        let resid = (&a * &next - lambda * &next).norm();
        v = next;
        if resid <= POWER_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Graph("power iteration did not converge".into()));
    }
    // Perron orientation: the leading eigenvector of a nonnegative connected
    // matrix can be taken entrywise nonnegative.
    if v.sum() < 0.0 {
        v = -v;
    }
    if v.iter().any(|&x| x < -1e-8) {
        return Err(Error::Graph(
            "dominant eigenspace is sign-indefinite; Perron assumptions fail".into(),
        ));
    }
    let v = v.map(|x| x.max(0.0));
    Ok(CentralityScores {
        kind: CentralityKind::Eigenvector,
        scores: v,
        params: vec![],
        disconnected_warning: false,
    })
}

/// Largest-magnitude eigenvalue of the positive-policy matrix.
pub fn spectral_radius(adj: &Adjacency, policy: WeightPolicy) -> Result<f64> {
    let a = positive_matrix(adj, policy)?;
    let eig = a.symmetric_eigen();
    Ok(eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v.abs())))
}

/// Katz centrality (I - alpha A')^{-1} 1 by linear solve.
pub fn katz(adj: &Adjacency, alpha: f64, policy: WeightPolicy) -> Result<CentralityScores> {
    let n = adj.len();
    let a = positive_matrix(adj, policy)?;
    let lambda1 = spectral_radius(adj, policy)?;
    let bound = if lambda1 > 0.0 { 1.0 / lambda1 } else { f64::INFINITY };
    if alpha <= 0.0 || alpha >= bound {
        return Err(Error::KatzDiverges { alpha, bound });
    }
    let system = DMatrix::identity(n, n) - alpha * a.transpose();
    let scores = system
        .lu()
        .solve(&DVector::from_element(n, 1.0))
        .ok_or_else(|| Error::KatzDiverges { alpha, bound })?;
    Ok(CentralityScores {
        kind: CentralityKind::Katz,
        scores,
        params: vec![("alpha".into(), alpha)],
        disconnected_warning: false,
    })
}

/// Default Katz damping: half the convergence bound, recomputed per graph.
pub fn katz_default_alpha(adj: &Adjacency, policy: WeightPolicy) -> Result<f64> {
    let lambda1 = spectral_radius(adj, policy)?;
    Ok(if lambda1 > 0.0 { 0.5 / lambda1 } else { 0.5 })
}

/// PageRank-style fixed point v = alpha A' D^{-1} v + beta 1.
pub fn pagerank(
    adj: &Adjacency,
    alpha: f64,
    beta: f64,
    policy: WeightPolicy,
) -> Result<CentralityScores> {
    let n = adj.len();
    if !(0.0..1.0).contains(&alpha) || alpha == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "pagerank alpha must lie in (0,1), got {alpha}"
        )));
    }
    let a = positive_matrix(adj, policy)?;
    let deg = adj.degrees();
    if let Some(i) = (0..n).find(|&i| deg[i] == 0.0) {
        return Err(Error::Graph(format!(
            "node {i} is isolated; no dangling-node policy is defined"
        )));
    }
    // column-normalized transition: (A' D^{-1})_{ij} = a_{ji} / d_j
    let mut v = DVector::from_element(n, 1.0);
    for _ in 0..100_000 {
        let mut next = DVector::from_element(n, beta);
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += a[(j, i)] * v[j] / deg[j];
            }
            next[i] += alpha * acc;
        }
        let diff = (&next - &v).amax();
        v = next;
        if diff <= 1e-12 {
            break;
        }
    }
    Ok(CentralityScores {
        kind: CentralityKind::Pagerank,
        scores: v,
        params: vec![("alpha".into(), alpha), ("beta".into(), beta)],
        disconnected_warning: false,
    })
}

/// Shortest-path lengths from `source` with edge length 1/|weight|.
fn dijkstra(adj: &Adjacency, source: usize) -> Vec<f64> {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[source] = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        let mut best = f64::INFINITY;
        for i in 0..n {
            if !done[i] && dist[i] < best {
                best = dist[i];
                u = i;
            }
        }
        if u == usize::MAX {
            break;
        }
        done[u] = true;
        for v in adj.neighbors(u) {
            let len = 1.0 / adj.weights[(u, v)].abs();
            if dist[u] + len < dist[v] {
                dist[v] = dist[u] + len;
            }
        }
    }
    dist
}

/// Normalized closeness CC_i = (N-1) / sum_j d_ij. Disconnected graphs are
/// handled per component (the sum runs over reachable nodes, scaled by the
/// component size) and flagged with a warning.
pub fn closeness(adj: &Adjacency) -> Result<CentralityScores> {
    let n = adj.len();
    let connected = adj.is_connected();
    let mut scores = DVector::zeros(n);
    for i in 0..n {
        let dist = dijkstra(adj, i);
        let reachable: Vec<f64> = dist
            .iter()
            .enumerate()
            .filter(|&(j, d)| j != i && d.is_finite())
            .map(|(_, &d)| d)
            .collect();
        let total: f64 = reachable.iter().sum();
        scores[i] = if total > 0.0 {
            reachable.len() as f64 / total
        } else {
            0.0
        };
    }
    Ok(CentralityScores {
        kind: CentralityKind::Closeness,
        scores,
        params: vec![],
        disconnected_warning: !connected,
    })
}

/// Betweenness by Brandes' accumulation over shortest-path DAGs, with edge
/// length 1/|weight|.
pub fn betweenness(adj: &Adjacency) -> Result<CentralityScores> {
    let n = adj.len();
    let mut scores = DVector::zeros(n);
    for s in 0..n {
        // Dijkstra with path counting.
        let mut dist = vec![f64::INFINITY; n];
        let mut sigma = vec![0.0f64; n];
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut done = vec![false; n];
        let mut order: Vec<usize> = Vec::new();
        dist[s] = 0.0;
        sigma[s] = 1.0;
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for i in 0..n {
                if !done[i] && dist[i] < best {
                    best = dist[i];
                    u = i;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            order.push(u);
            for v in adj.neighbors(u) {
                let len = 1.0 / adj.weights[(u, v)].abs();
                let nd = dist[u] + len;
                if nd < dist[v] - 1e-12 {
                    dist[v] = nd;
                    sigma[v] = sigma[u];
                    preds[v] = vec![u];
                } else if (nd - dist[v]).abs() <= 1e-12 {
                    sigma[v] += sigma[u];
                    preds[v].push(u);
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                scores[w] += delta[w];
            }
        }
    }
    // Each unordered pair was counted from both endpoints.
    scores /= 2.0;
    Ok(CentralityScores {
        kind: CentralityKind::Betweenness,
        scores,
        params: vec![],
        disconnected_warning: false,
    })
}

/// Leverage centrality LC_i = (1/d_i) sum_{j in N(i)} (d_i - d_j)/(d_i + d_j)
/// with weighted degrees.
pub fn leverage(adj: &Adjacency) -> Result<CentralityScores> {
    let n = adj.len();
    let deg = adj.degrees();
    if let Some(i) = (0..n).find(|&i| deg[i] == 0.0) {
        return Err(Error::Graph(format!("node {i} is isolated")));
    }
    let scores = DVector::from_fn(n, |i, _| {
        let sum: f64 = adj
            .neighbors(i)
            .iter()
            .map(|&j| (deg[i] - deg[j]) / (deg[i] + deg[j]))
            .sum();
        sum / deg[i]
    });
    Ok(CentralityScores {
        kind: CentralityKind::Leverage,
        scores,
        params: vec![],
        disconnected_warning: false,
    })
}

/// Dispatch by kind with default parameters.
pub fn compute(adj: &Adjacency, kind: CentralityKind) -> Result<CentralityScores> {
    let policy = WeightPolicy::Absolute;
    match kind {
        CentralityKind::Degree => degree(adj),
        CentralityKind::Eigenvector => eigenvector_centrality(adj, policy),
        CentralityKind::Katz => {
            let alpha = katz_default_alpha(adj, policy)?;
            katz(adj, alpha, policy)
        }
        CentralityKind::Pagerank => pagerank(adj, 0.85, 0.15, policy),
        CentralityKind::Closeness => closeness(adj),
        CentralityKind::Betweenness => betweenness(adj),
        CentralityKind::Leverage => leverage(adj),
    }
}

/// A reflexive binary relation; relation[(i, j)] means i is at least as
/// central as j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preorder {
    pub relation: Vec<Vec<bool>>,
}

impl Preorder {
    pub fn total(n: usize) -> Self {
        Self {
            relation: vec![vec![true; n]; n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut relation = vec![vec![false; n]; n];
        for (i, row) in relation.iter_mut().enumerate() {
            row[i] = true;
        }
        Self { relation }
    }

    pub fn len(&self) -> usize {
        self.relation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relation.is_empty()
    }

    pub fn holds(&self, i: usize, j: usize) -> bool {
        self.relation[i][j]
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.len()).all(|i| self.relation[i][i])
    }

    pub fn is_transitive(&self) -> bool {
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                if self.relation[i][j] {
                    for k in 0..n {
                        if self.relation[j][k] && !self.relation[i][k] {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Does an injective f: Sp -> S exist with f(i) at least as central as i for
/// every i in Sp? Decided by augmenting-path bipartite matching.
pub fn dominance(pre: &Preorder, s: &[usize], sp: &[usize]) -> bool {
    if sp.len() > s.len() {
        return false;
    }
    // compat[a][b]: s[b] can serve as the image of sp[a]
    let compat: Vec<Vec<bool>> = sp
        .iter()
        .map(|&i| s.iter().map(|&j| pre.holds(j, i)).collect())
        .collect();
    let mut matched_to: Vec<Option<usize>> = vec![None; s.len()];
    fn augment(
        a: usize,
        compat: &[Vec<bool>],
        matched_to: &mut [Option<usize>],
        visited: &mut [bool],
    ) -> bool {
        for b in 0..compat[a].len() {
            if compat[a][b] && !visited[b] {
                visited[b] = true;
                if matched_to[b].is_none()
                    || augment(matched_to[b].unwrap(), compat, matched_to, visited)
                {
                    matched_to[b] = Some(a);
                    return true;
                }
            }
        }
        false
    }
    for a in 0..sp.len() {
        let mut visited = vec![false; s.len()];
        if !augment(a, &compat, &mut matched_to, &mut visited) {
            return false;
        }
    }
    true
}

const STRONG_CENTRALITY_MAX: usize = 12;

/// Strong-centrality preorder: the pairs (i, j) ranked i >= j by every
/// recursively monotone preorder on the graph, computed by iterated
/// dominance from the identity relation. When comparing i against j the
/// nodes themselves are left out of each other's neighborhoods (f maps
/// N(j)\{i} into N(i)\{j}); without that adjustment adjacent pairs could
/// never force each other and even the star's hub would not dominate its
/// leaves.
pub fn strong_centrality(adj: &Adjacency) -> Result<Preorder> {
    let n = adj.len();
    if n > STRONG_CENTRALITY_MAX {
        return Err(Error::UnsupportedSize {
            max: STRONG_CENTRALITY_MAX,
            got: n,
        });
    }
    let neighborhoods: Vec<Vec<usize>> = (0..n).map(|i| adj.neighbors(i)).collect();
    // Least fixed point from the diagonal: add i >= j once the dominance of
    // j's neighborhood by i's is supported by pairs already present. Every
    // pair added this way is forced in every recursively monotone preorder
    // (dominance is monotone in the relation), and the stable result is
    // itself recursively monotone, so it equals the intersection of all
    // ordinal centralities. Starting from the total relation instead would
    // keep mutually self-supporting cycles that no single ordinal centrality
    // forces (e.g. the two interior nodes of a 4-path).
    let mut pre = Preorder::identity(n);
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if i == j || pre.relation[i][j] {
                    continue;
                }
                let s: Vec<usize> = neighborhoods[i].iter().copied().filter(|&k| k != j).collect();
                let sp: Vec<usize> = neighborhoods[j].iter().copied().filter(|&k| k != i).collect();
                if dominance(&pre, &s, &sp) {
                    pre.relation[i][j] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    debug_assert!(pre.is_reflexive());
    debug_assert!(pre.is_transitive());
    Ok(pre)
}

/// Simple linear permutation statistic S = sum_i (c_i - mean c) d(R_i).
/// Raw inputs are normalized internally: c to unit centered sum of squares,
/// d to unit sample variance.
pub fn rank_statistic(c: &[f64], d: &[f64], ranks: &[usize]) -> Result<f64> {
    let k = c.len();
    if d.len() != k || ranks.len() != k {
        return Err(Error::InvalidArgument(
            "coefficients, scores and ranks must have equal length".into(),
        ));
    }
    if k < 2 {
        return Err(Error::InvalidArgument("need at least two observations".into()));
    }
    let mut seen = vec![false; k];
    for &r in ranks {
        if r < 1 || r > k || seen[r - 1] {
            return Err(Error::InvalidArgument(format!(
                "ranks must be a permutation of 1..{k}"
            )));
        }
        seen[r - 1] = true;
    }
    let c_bar = c.iter().sum::<f64>() / k as f64;
    let c_ss: f64 = c.iter().map(|&v| (v - c_bar) * (v - c_bar)).sum();
    if c_ss <= 0.0 {
        return Err(Error::DegenerateScores("constant regression coefficients".into()));
    }
    let d_bar = d.iter().sum::<f64>() / k as f64;
    let d_ss: f64 = d.iter().map(|&v| (v - d_bar) * (v - d_bar)).sum();
    if d_ss <= 0.0 {
        return Err(Error::DegenerateScores("constant scores: A_n fails".into()));
    }
    let c_scale = c_ss.sqrt();
    let d_scale = (d_ss / (k as f64 - 1.0)).sqrt();
    Ok(ranks
        .iter()
        .enumerate()
        .map(|(i, &r)| (c[i] - c_bar) / c_scale * (d[r - 1] / d_scale))
        .sum())
}
