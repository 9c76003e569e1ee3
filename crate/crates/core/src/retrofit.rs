//! Iterative retrofitting of a vector store against a lexicon graph.
//!
//! Starting from Q = Q̂, each sweep replaces node vectors with
//!
//! ```text
//! q_i = (Σ_{j ∈ adj(i)} β_ij q_j + α q̂_i) / (Σ_{j ∈ adj(i)} β_ij + α)
//! ```
//!
//! until the largest per-node displacement in a sweep drops below `epsilon`
//! or `max_sweeps` is reached. Online mode applies updates in place in
//! stored matrix order, so later nodes see earlier nodes' new values within
//! the same sweep; Jacobi mode computes every update from the sweep-start
//! state and commits them together, which makes the per-node updates
//! order-independent. Nodes without neighbors are never touched.
//!
//! [`exact_solve`] solves the stationarity equations directly by dense
//! elimination and exists as an independent cross-check for the iteration.

use thiserror::Error;

use crate::embedding::EmbeddingMatrix;
use crate::lexicon::LexiconGraph;

#[derive(Debug, Error)]
pub enum RetrofitError {
    #[error("alpha must be a positive finite number, got {0}")]
    InvalidAlpha(f64),
    #[error("epsilon must be a positive finite number, got {0}")]
    InvalidEpsilon(f64),
    #[error("max_sweeps must be at least 1")]
    InvalidMaxSweeps,
    #[error("constant beta must be a non-negative finite number, got {0}")]
    InvalidBeta(f64),
    #[error("{j:?} is not a neighbor of {i:?}")]
    NotANeighbor { i: String, j: String },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrices do not share a token set (token {token:?} unmatched)")]
    TokenSetMismatch { token: String },
    #[error("graph token {token:?} is missing from the matrix")]
    MissingGraphToken { token: String },
    #[error("graph has {nodes} nodes, dense solve supports at most {max}")]
    TooLargeForExactSolve { nodes: usize, max: usize },
    #[error("singular stationarity system")]
    SingularSystem,
}

/// How edge weights β_ij are chosen.
///
/// `DegreeInverse` is asymmetric: β_ij = 1/degree(i) differs from β_ji when
/// degrees differ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaPolicy {
    DegreeInverse,
    Constant(f64),
}

impl std::str::FromStr for BetaPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "degree-inverse" {
            return Ok(BetaPolicy::DegreeInverse);
        }
        if let Some(rest) = s.strip_prefix("constant:") {
            let c: f64 = rest
                .parse()
                .map_err(|_| format!("cannot parse beta constant {rest:?}"))?;
            return Ok(BetaPolicy::Constant(c));
        }
        Err(format!(
            "unknown beta policy {s:?} (expected degree-inverse or constant:<c>)"
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateMode {
    Online,
    Jacobi,
}

impl std::str::FromStr for UpdateMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "online" => Ok(UpdateMode::Online),
            "jacobi" => Ok(UpdateMode::Jacobi),
            other => Err(format!("unknown update mode {other:?} (expected online or jacobi)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrofitConfig {
    /// Anchor weight toward the original vector. Must be positive: it keeps
    /// the system strictly diagonally dominant and untouched nodes fixed.
    pub alpha: f64,
    pub beta_policy: BetaPolicy,
    pub max_sweeps: usize,
    /// Convergence threshold on the maximum per-node displacement per sweep.
    pub epsilon: f64,
    pub update_mode: UpdateMode,
}

impl Default for RetrofitConfig {
    fn default() -> Self {
        RetrofitConfig {
            alpha: 1.0,
            beta_policy: BetaPolicy::DegreeInverse,
            max_sweeps: 10,
            epsilon: 0.01,
            update_mode: UpdateMode::Online,
        }
    }
}

impl RetrofitConfig {
    pub fn validate(&self) -> Result<(), RetrofitError> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(RetrofitError::InvalidAlpha(self.alpha));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(RetrofitError::InvalidEpsilon(self.epsilon));
        }
        if self.max_sweeps == 0 {
            return Err(RetrofitError::InvalidMaxSweeps);
        }
        if let BetaPolicy::Constant(c) = self.beta_policy {
            if !(c.is_finite() && c >= 0.0) {
                return Err(RetrofitError::InvalidBeta(c));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RetrofitResult {
    pub vectors: EmbeddingMatrix,
    pub sweeps_run: usize,
    pub converged: bool,
    /// Maximum per-node movement during the last sweep.
    pub final_displacement: f64,
    /// Objective value after each sweep.
    pub objective_trace: Vec<f64>,
}

/// Edge weight β_ij for a directed use of the undirected edge {i, j}.
pub fn beta(
    config: &RetrofitConfig,
    graph: &LexiconGraph,
    i: &str,
    j: &str,
) -> Result<f64, RetrofitError> {
    let neighbors = graph.neighborhood(i);
    if !neighbors.contains(&j) {
        return Err(RetrofitError::NotANeighbor {
            i: i.to_string(),
            j: j.to_string(),
        });
    }
    Ok(match config.beta_policy {
        BetaPolicy::DegreeInverse => 1.0 / neighbors.len() as f64,
        BetaPolicy::Constant(c) => c,
    })
}

/// Precomputed graph-to-matrix row mapping shared by the sweep, objective,
/// and direct-solve paths. `rows` is ascending, so online sweeps visit graph
/// nodes in stored matrix order, and each neighbor list is ascending, which
/// fixes the floating-point summation order.
struct SweepPlan {
    dim: usize,
    /// Matrix rows that are graph nodes, ascending.
    rows: Vec<u32>,
    /// Row in the anchor matrix for each entry of `rows`.
    anchor_rows: Vec<u32>,
    adj_off: Vec<usize>,
    /// Neighbor matrix rows, ascending within each node.
    adj: Vec<u32>,
}

impl SweepPlan {
    fn build(
        matrix: &EmbeddingMatrix,
        anchor: &EmbeddingMatrix,
        graph: &LexiconGraph,
    ) -> Result<SweepPlan, RetrofitError> {
        let n = graph.node_count();
        let mut row_of_node: Vec<u32> = Vec::with_capacity(n);
        for id in 0..n as u32 {
            let token = graph.token_of(id);
            match matrix.token_index(token) {
                Some(row) => row_of_node.push(row as u32),
                None => {
                    return Err(RetrofitError::MissingGraphToken {
                        token: token.to_string(),
                    })
                }
            }
        }
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_unstable_by_key(|&id| row_of_node[id as usize]);

        let mut rows = Vec::with_capacity(n);
        let mut anchor_rows = Vec::with_capacity(n);
        let mut adj_off = Vec::with_capacity(n + 1);
        let mut adj = Vec::new();
        adj_off.push(0);
        for &id in &order {
            let row = row_of_node[id as usize];
            rows.push(row);
            let token = graph.token_of(id);
            match anchor.token_index(token) {
                Some(r) => anchor_rows.push(r as u32),
                None => {
                    return Err(RetrofitError::TokenSetMismatch {
                        token: token.to_string(),
                    })
                }
            }
            let mut nbrs: Vec<u32> = graph
                .neighbor_ids(id)
                .iter()
                .map(|&j| row_of_node[j as usize])
                .collect();
            nbrs.sort_unstable();
            adj.extend_from_slice(&nbrs);
            adj_off.push(adj.len());
        }
        Ok(SweepPlan {
            dim: matrix.dim(),
            rows,
            anchor_rows,
            adj_off,
            adj,
        })
    }

    fn neighbors(&self, k: usize) -> &[u32] {
        &self.adj[self.adj_off[k]..self.adj_off[k + 1]]
    }

    fn beta_terms(&self, policy: BetaPolicy, degree: usize) -> (f64, f64) {
        let deg = degree as f64;
        match policy {
            BetaPolicy::DegreeInverse => {
                let each = 1.0 / deg;
                (each, each * deg)
            }
            BetaPolicy::Constant(c) => (c, c * deg),
        }
    }

    /// One pass over all graph nodes; returns the max per-node displacement.
    fn sweep(
        &self,
        data: &mut [f64],
        anchor: &[f64],
        config: &RetrofitConfig,
        sum_buf: &mut [f64],
        jacobi_buf: &mut Vec<f64>,
    ) -> f64 {
        let dim = self.dim;
        let use_snapshot = matches!(config.update_mode, UpdateMode::Jacobi);
        if use_snapshot {
            jacobi_buf.clear();
            jacobi_buf.extend_from_slice(data);
        }

        let mut max_disp2 = 0.0f64;
        for k in 0..self.rows.len() {
            let nbrs = self.neighbors(k);
            sum_buf.fill(0.0);
            for &j in nbrs {
                let start = j as usize * dim;
                let row = if use_snapshot {
                    &jacobi_buf[start..start + dim]
                } else {
                    &data[start..start + dim]
                };
                for (acc, v) in sum_buf.iter_mut().zip(row) {
                    *acc += v;
                }
            }
            let (beta_each, beta_sum) = self.beta_terms(config.beta_policy, nbrs.len());
            let denom = beta_sum + config.alpha;
            let base = self.rows[k] as usize * dim;
            let anchor_base = self.anchor_rows[k] as usize * dim;
            let mut disp2 = 0.0f64;
            for d in 0..dim {
                let new = (beta_each * sum_buf[d] + config.alpha * anchor[anchor_base + d]) / denom;
                let delta = new - data[base + d];
                disp2 += delta * delta;
                data[base + d] = new;
            }
            if disp2 > max_disp2 {
                max_disp2 = disp2;
            }
        }
        max_disp2.sqrt()
    }

    /// Objective value: Σ_i [ α‖q_i − q̂_i‖² + Σ_{j ∈ adj(i)} β_ij‖q_i − q_j‖² ].
    /// Each undirected edge contributes twice, once from each endpoint's
    /// inner sum.
    fn objective(
        &self,
        data: &[f64],
        anchor: &[f64],
        anchor_row_of: Option<&[u32]>,
        n_rows: usize,
        config: &RetrofitConfig,
    ) -> f64 {
        let dim = self.dim;
        let mut total = 0.0f64;
        let mut next_plan = 0usize;
        for i in 0..n_rows {
            let base = i * dim;
            let anchor_base = match anchor_row_of {
                Some(map) => map[i] as usize * dim,
                None => base,
            };
            let mut fidelity = 0.0f64;
            for d in 0..dim {
                let delta = data[base + d] - anchor[anchor_base + d];
                fidelity += delta * delta;
            }
            let mut bracket = config.alpha * fidelity;
            if next_plan < self.rows.len() && self.rows[next_plan] as usize == i {
                let nbrs = self.neighbors(next_plan);
                let (beta_each, _) = self.beta_terms(config.beta_policy, nbrs.len());
                let mut edge_sum = 0.0f64;
                for &j in nbrs {
                    let jbase = j as usize * dim;
                    let mut dist2 = 0.0f64;
                    for d in 0..dim {
                        let delta = data[base + d] - data[jbase + d];
                        dist2 += delta * delta;
                    }
                    edge_sum += beta_each * dist2;
                }
                bracket += edge_sum;
                next_plan += 1;
            }
            total += bracket;
        }
        total
    }
}

fn check_compatible(
    left: &EmbeddingMatrix,
    right: &EmbeddingMatrix,
) -> Result<(), RetrofitError> {
    if left.dim() != right.dim() {
        return Err(RetrofitError::DimensionMismatch {
            left: left.dim(),
            right: right.dim(),
        });
    }
    if left.len() != right.len() {
        return Err(RetrofitError::TokenSetMismatch {
            token: if left.len() > right.len() {
                left.tokens()
                    .find(|t| !right.contains(t))
                    .unwrap_or_default()
                    .to_string()
            } else {
                right
                    .tokens()
                    .find(|t| !left.contains(t))
                    .unwrap_or_default()
                    .to_string()
            },
        });
    }
    for token in left.tokens() {
        if !right.contains(token) {
            return Err(RetrofitError::TokenSetMismatch {
                token: token.to_string(),
            });
        }
    }
    Ok(())
}

/// Row mapping from `matrix` rows into `anchor` rows, or `None` when the
/// stored orders already coincide.
fn anchor_row_map(
    matrix: &EmbeddingMatrix,
    anchor: &EmbeddingMatrix,
) -> Result<Option<Vec<u32>>, RetrofitError> {
    let identical = matrix
        .tokens()
        .zip(anchor.tokens())
        .all(|(a, b)| a == b);
    if identical {
        return Ok(None);
    }
    let mut map = Vec::with_capacity(matrix.len());
    for token in matrix.tokens() {
        match anchor.token_index(token) {
            Some(r) => map.push(r as u32),
            None => {
                return Err(RetrofitError::TokenSetMismatch {
                    token: token.to_string(),
                })
            }
        }
    }
    Ok(Some(map))
}

/// Objective ψ over the current vectors `retrofitted` against the anchors
/// `original`: Σ_i [ α‖q_i − q̂_i‖² + Σ_{j ∈ adj(i)} β_ij‖q_i − q_j‖² ],
/// with each undirected edge counted once per endpoint.
pub fn objective(
    original: &EmbeddingMatrix,
    retrofitted: &EmbeddingMatrix,
    graph: &LexiconGraph,
    config: &RetrofitConfig,
) -> Result<f64, RetrofitError> {
    config.validate()?;
    check_compatible(retrofitted, original)?;
    let plan = SweepPlan::build(retrofitted, original, graph)?;
    let map = anchor_row_map(retrofitted, original)?;
    Ok(plan.objective(
        retrofitted.data(),
        original.data(),
        map.as_deref(),
        retrofitted.len(),
        config,
    ))
}

/// Runs a single sweep over `vectors` in place and returns the maximum
/// per-node displacement. `original` supplies the anchor vectors q̂.
pub fn retrofit_sweep(
    vectors: &mut EmbeddingMatrix,
    original: &EmbeddingMatrix,
    graph: &LexiconGraph,
    config: &RetrofitConfig,
) -> Result<f64, RetrofitError> {
    config.validate()?;
    check_compatible(vectors, original)?;
    let plan = SweepPlan::build(vectors, original, graph)?;
    let dim = vectors.dim();
    let mut sum_buf = vec![0.0; dim];
    let mut jacobi_buf = Vec::new();
    Ok(plan.sweep(
        vectors.data_mut(),
        original.data(),
        config,
        &mut sum_buf,
        &mut jacobi_buf,
    ))
}

/// Full retrofitting run: initializes Q = Q̂, sweeps until the maximum
/// per-node displacement drops below `config.epsilon` or `config.max_sweeps`
/// is reached, and reports the trace.
pub fn retrofit(
    original: &EmbeddingMatrix,
    graph: &LexiconGraph,
    config: &RetrofitConfig,
) -> Result<RetrofitResult, RetrofitError> {
    config.validate()?;
    let plan = SweepPlan::build(original, original, graph)?;
    let mut vectors = original.clone();
    let n_rows = vectors.len();
    let dim = vectors.dim();
    let mut sum_buf = vec![0.0; dim];
    let mut jacobi_buf = Vec::new();

    let mut objective_trace = Vec::new();
    let mut sweeps_run = 0;
    let mut converged = false;
    let mut final_displacement = 0.0;
    while sweeps_run < config.max_sweeps {
        let disp = plan.sweep(
            vectors.data_mut(),
            original.data(),
            config,
            &mut sum_buf,
            &mut jacobi_buf,
        );
        sweeps_run += 1;
        final_displacement = disp;
        objective_trace.push(plan.objective(
            vectors.data(),
            original.data(),
            None,
            n_rows,
            config,
        ));
        if disp < config.epsilon {
            converged = true;
            break;
        }
    }
    Ok(RetrofitResult {
        vectors,
        sweeps_run,
        converged,
        final_displacement,
        objective_trace,
    })
}

/// Which stationarity system the direct solver targets.
///
/// The per-node update converges to the fixed point of the update rule
/// itself (`UpdateRule`), whose coefficients are β_ij. Differentiating the
/// objective instead yields β_ij + β_ji coefficients (`Objective`); the two
/// systems coincide only when that distinction does not change the solution
/// ratios. Comparisons against the iteration must use `UpdateRule`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationarityMode {
    UpdateRule,
    Objective,
}

impl std::str::FromStr for StationarityMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "update" => Ok(StationarityMode::UpdateRule),
            "objective" => Ok(StationarityMode::Objective),
            other => Err(format!(
                "unknown stationarity mode {other:?} (expected update or objective)"
            )),
        }
    }
}

/// Largest graph the dense solver accepts.
pub const MAX_DENSE_NODES: usize = 512;

/// Solves the linear stationarity system directly, one dense elimination
/// shared across dimensions. Tokens outside the graph keep their original
/// vectors. Intended as a test-scale oracle; graphs above
/// [`MAX_DENSE_NODES`] nodes are rejected.
pub fn exact_solve(
    original: &EmbeddingMatrix,
    graph: &LexiconGraph,
    config: &RetrofitConfig,
    mode: StationarityMode,
) -> Result<EmbeddingMatrix, RetrofitError> {
    config.validate()?;
    let n = graph.node_count();
    if n > MAX_DENSE_NODES {
        return Err(RetrofitError::TooLargeForExactSolve {
            nodes: n,
            max: MAX_DENSE_NODES,
        });
    }
    let mut result = original.clone();
    if n == 0 {
        return Ok(result);
    }

    let mut row_of_node = Vec::with_capacity(n);
    for id in 0..n as u32 {
        let token = graph.token_of(id);
        match original.token_index(token) {
            Some(row) => row_of_node.push(row),
            None => {
                return Err(RetrofitError::MissingGraphToken {
                    token: token.to_string(),
                })
            }
        }
    }

    let beta_of = |id: u32| -> f64 {
        match config.beta_policy {
            BetaPolicy::DegreeInverse => 1.0 / graph.neighbor_ids(id).len() as f64,
            BetaPolicy::Constant(c) => c,
        }
    };

    // A q = b per dimension: (α + Σ_j coeff_ij) q_i − Σ_j coeff_ij q_j = α q̂_i.
    let dim = original.dim();
    let mut a = vec![0.0f64; n * n];
    let mut b = vec![0.0f64; n * dim];
    for i in 0..n as u32 {
        let bi = beta_of(i);
        let mut coeff_sum = 0.0;
        for &j in graph.neighbor_ids(i) {
            let coeff = match mode {
                StationarityMode::UpdateRule => bi,
                StationarityMode::Objective => bi + beta_of(j),
            };
            a[i as usize * n + j as usize] -= coeff;
            coeff_sum += coeff;
        }
        a[i as usize * n + i as usize] = config.alpha + coeff_sum;
        let src = original.row(row_of_node[i as usize]);
        for d in 0..dim {
            b[i as usize * dim + d] = config.alpha * src[d];
        }
    }

    gauss_solve(&mut a, &mut b, n, dim)?;

    let data = result.data_mut();
    for (node, &row) in row_of_node.iter().enumerate() {
        let dst = row * dim;
        data[dst..dst + dim].copy_from_slice(&b[node * dim..(node + 1) * dim]);
    }
    Ok(result)
}

/// In-place Gaussian elimination with partial pivoting; `b` holds `width`
/// right-hand sides per row and receives the solution.
fn gauss_solve(a: &mut [f64], b: &mut [f64], n: usize, width: usize) -> Result<(), RetrofitError> {
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let mag = a[row * n + col].abs();
            if mag > best {
                best = mag;
                pivot = row;
            }
        }
        if best < 1e-300 {
            return Err(RetrofitError::SingularSystem);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            for k in 0..width {
                b.swap(col * width + k, pivot * width + k);
            }
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            a[row * n + col] = 0.0;
            for k in col + 1..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            for k in 0..width {
                b[row * width + k] -= factor * b[col * width + k];
            }
        }
    }
    for col in (0..n).rev() {
        let diag = a[col * n + col];
        for k in 0..width {
            let mut value = b[col * width + k];
            for j in col + 1..n {
                value -= a[col * n + j] * b[j * width + k];
            }
            b[col * width + k] = value / diag;
        }
    }
    Ok(())
}
