//! Size-constrained k-means over rollout embeddings.
//!
//! The assignment step solves "minimize total cosine distance to the
//! assigned centroid, subject to every group holding at least `G_min`
//! rows" exactly as a min-cost flow: each row is a unit source, each group
//! drains through a demand arc of capacity `G_min` (large negative cost, so
//! it is always saturated when feasible) and an overflow arc of capacity
//! `N`. Among optimal assignments the one that is lexicographically
//! smallest in row order wins; [`brute_force_assignment`] enumerates the
//! same objective with the same tie rule.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::config::MupoConfig;
use crate::embedding::{norm, unit_distance, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::model::GroupPartition;

/// Two assignments whose costs differ by at most this are cost-equal.
pub const TIE_TOL: f64 = 1e-9;

/// Iteration cap for [`constrained_kmeans`].
pub const MAX_ITERATIONS: usize = 50;

/// Largest `K^N` that [`brute_force_assignment`] will enumerate.
pub const BRUTE_FORCE_LIMIT: u64 = 1_000_000;

/// Means with a norm below this are treated as the zero vector.
const ZERO_MEAN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    pub centroids: Vec<Vec<f64>>,
    pub iteration: usize,
    pub converged: bool,
}

/// Full record of a [`constrained_kmeans`] run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTrace {
    pub partition: GroupPartition,
    pub state: ClusterState,
    /// Assignment cost after each assignment step.
    pub costs: Vec<f64>,
}

/// Farthest-point initialization.
///
/// Starts from row 0, then repeatedly adds the unchosen row whose minimum
/// cosine distance to the chosen rows is largest (lowest index on ties).
/// The chosen rows become centroids in ascending row order. `_seed` is
/// accepted for stochastic variants and ignored here.
pub fn init_centroids(e: &EmbeddingMatrix, k: usize, _seed: u64) -> Result<ClusterState> {
    let n = e.len();
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    if k > n {
        return Err(Error::TooManyGroups { k, n });
    }
    let mut chosen = vec![0usize];
    let mut taken = vec![false; n];
    taken[0] = true;
    let mut min_dist: Vec<f64> = (0..n).map(|i| e.distance(i, 0)).collect();
    while chosen.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..n).filter(|&i| !taken[i]) {
            if best.is_none_or(|(_, d)| min_dist[i] > d) {
                best = Some((i, min_dist[i]));
            }
        }
        let (next, _) = best.expect("k <= n leaves an unchosen row");
        taken[next] = true;
        chosen.push(next);
        for (i, d) in min_dist.iter_mut().enumerate() {
            *d = d.min(e.distance(i, next));
        }
    }
    chosen.sort_unstable();
    Ok(ClusterState {
        centroids: chosen.iter().map(|&i| e.row(i).to_vec()).collect(),
        iteration: 0,
        converged: false,
    })
}

/// Row-major `N x K` matrix of row-to-centroid distances.
fn cost_matrix(e: &EmbeddingMatrix, centroids: &[Vec<f64>]) -> Result<Vec<f64>> {
    if centroids.is_empty() {
        return Err(Error::InvalidArgument("no centroids".into()));
    }
    if let Some(c) = centroids.iter().find(|c| c.len() != e.dim()) {
        return Err(Error::DimensionMismatch {
            left: e.dim(),
            right: c.len(),
        });
    }
    let mut cost = Vec::with_capacity(e.len() * centroids.len());
    for row in e.rows() {
        cost.extend(centroids.iter().map(|c| unit_distance(row, c)));
    }
    Ok(cost)
}

fn summed_cost(cost: &[f64], k: usize, assignments: &[usize]) -> f64 {
    assignments
        .iter()
        .enumerate()
        .map(|(i, &g)| cost[i * k + g])
        .sum()
}

/// Total distance from every row to its group's centroid, summed in row order.
pub fn assignment_cost(
    e: &EmbeddingMatrix,
    centroids: &[Vec<f64>],
    partition: &GroupPartition,
) -> Result<f64> {
    if partition.n() != e.len() || partition.k() != centroids.len() {
        return Err(Error::LengthMismatch(format!(
            "partition is {}x{}, instance is {}x{}",
            partition.n(),
            partition.k(),
            e.len(),
            centroids.len()
        )));
    }
    let cost = cost_matrix(e, centroids)?;
    Ok(summed_cost(&cost, centroids.len(), partition.assignments()))
}

fn check_feasible(n: usize, k: usize, g_min: usize) -> Result<()> {
    if g_min == 0 {
        // every group must be non-empty
        return Err(Error::InvalidArgument("G_min must be at least 1".into()));
    }
    if k * g_min > n {
        return Err(Error::InfeasibleMinSize { n, k, g_min });
    }
    Ok(())
}

/// Optimal size-constrained assignment to fixed centroids.
pub fn assign_min_size(
    e: &EmbeddingMatrix,
    centroids: &[Vec<f64>],
    g_min: usize,
) -> Result<GroupPartition> {
    let (n, k) = (e.len(), centroids.len());
    check_feasible(n, k, g_min)?;
    let cost = cost_matrix(e, centroids)?;

    let mut current = solve_with_prefix(&cost, n, k, g_min, &[])
        .ok_or(Error::InfeasibleMinSize { n, k, g_min })?;
    let optimum = summed_cost(&cost, k, &current);

    // Walk rows in order, moving each to the smallest group label that
    // still admits an optimal completion.
    let mut prefix = Vec::with_capacity(n);
    for i in 0..n {
        for g in 0..current[i] {
            prefix.push(g);
            let candidate = solve_with_prefix(&cost, n, k, g_min, &prefix);
            prefix.pop();
            if let Some(candidate) = candidate {
                if summed_cost(&cost, k, &candidate) <= optimum + TIE_TOL {
                    current = candidate;
                    break;
                }
            }
        }
        prefix.push(current[i]);
    }
    GroupPartition::from_assignments(current, k)
}

/// Min-cost completion of an assignment whose first rows are fixed.
/// `None` when the size constraint cannot be met.
fn solve_with_prefix(
    cost: &[f64],
    n: usize,
    k: usize,
    g_min: usize,
    prefix: &[usize],
) -> Option<Vec<usize>> {
    let mut counts = vec![0usize; k];
    for &g in prefix {
        counts[g] += 1;
    }
    let demands: Vec<usize> = counts.iter().map(|&c| g_min.saturating_sub(c)).collect();
    let free = n - prefix.len();
    if demands.iter().sum::<usize>() > free {
        return None;
    }
    let mut out = prefix.to_vec();
    if free == 0 {
        return Some(out);
    }

    // Node layout: source, free rows, groups, sink.
    let source = 0;
    let row_node = |j: usize| 1 + j;
    let group_node = |g: usize| 1 + free + g;
    let sink = 1 + free + k;
    let big = 4.0 * n as f64 + 4.0;

    let mut graph = FlowGraph::new(sink + 1);
    let mut row_edges = Vec::with_capacity(free);
    for j in 0..free {
        let row = prefix.len() + j;
        graph.add_edge(source, row_node(j), 1, 0.0);
        let first = graph.add_edge(row_node(j), group_node(0), 1, cost[row * k]);
        for g in 1..k {
            graph.add_edge(row_node(j), group_node(g), 1, cost[row * k + g]);
        }
        row_edges.push(first);
    }
    let mut demand_edges = Vec::with_capacity(k);
    for (g, &d) in demands.iter().enumerate() {
        if d > 0 {
            demand_edges.push(graph.add_edge(group_node(g), sink, d as i64, -big));
        }
        graph.add_edge(group_node(g), sink, free as i64, 0.0);
    }

    if graph.min_cost_flow(source, sink, free as i64) != free as i64 {
        return None;
    }
    if demand_edges.iter().any(|&e| graph.cap[e] != 0) {
        return None;
    }
    for &first in &row_edges {
        // Row edges to groups 0..k were added consecutively, each paired
        // with its reverse edge.
        let g = (0..k).find(|&g| graph.cap[first + 2 * g] == 0)?;
        debug_assert_eq!(graph.to[first + 2 * g], group_node(g));
        out.push(g);
    }
    Some(out)
}

/// Residual graph for successive-shortest-path min-cost flow.
struct FlowGraph {
    to: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<f64>,
    adj: Vec<Vec<usize>>,
}

impl FlowGraph {
    fn new(nodes: usize) -> Self {
        Self {
            to: Vec::new(),
            cap: Vec::new(),
            cost: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    /// Adds `from -> to` and its reverse; returns the forward edge id.
    fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: f64) -> usize {
        let id = self.to.len();
        self.to.push(to);
        self.cap.push(cap);
        self.cost.push(cost);
        self.adj[from].push(id);
        self.to.push(from);
        self.cap.push(0);
        self.cost.push(-cost);
        self.adj[to].push(id + 1);
        id
    }

    /// Pushes up to `limit` units; returns the amount sent.
    fn min_cost_flow(&mut self, source: usize, sink: usize, limit: i64) -> i64 {
        let mut sent = 0;
        while sent < limit {
            let Some(parent) = self.shortest_path(source, sink) else {
                break;
            };
            let mut push = limit - sent;
            let mut v = sink;
            while v != source {
                let e = parent[v];
                push = push.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = sink;
            while v != source {
                let e = parent[v];
                self.cap[e] -= push;
                self.cap[e ^ 1] += push;
                v = self.to[e ^ 1];
            }
            sent += push;
        }
        sent
    }

    /// SPFA shortest path over residual edges; parent edge per node.
    fn shortest_path(&self, source: usize, sink: usize) -> Option<Vec<usize>> {
        const RELAX_EPS: f64 = 1e-12;
        let nodes = self.adj.len();
        let mut dist = vec![f64::INFINITY; nodes];
        let mut parent = vec![usize::MAX; nodes];
        let mut queued = vec![false; nodes];
        let mut relaxations = vec![0usize; nodes];
        let mut queue = VecDeque::new();
        dist[source] = 0.0;
        queue.push_back(source);
        queued[source] = true;
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            for &e in &self.adj[u] {
                if self.cap[e] <= 0 {
                    continue;
                }
                let v = self.to[e];
                let candidate = dist[u] + self.cost[e];
                if candidate < dist[v] - RELAX_EPS {
                    dist[v] = candidate;
                    parent[v] = e;
                    relaxations[v] += 1;
                    // A node relaxed more than |V| times sits on a negative
                    // cycle, which cannot happen in an optimal residual graph.
                    if relaxations[v] > nodes {
                        return None;
                    }
                    if !queued[v] {
                        queued[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        dist[sink].is_finite().then_some(parent)
    }
}

/// Exhaustive oracle for [`assign_min_size`]: enumerates all `K^N`
/// assignments in lexicographic order and returns the first one whose cost
/// is within [`TIE_TOL`] of the minimum.
pub fn brute_force_assignment(
    e: &EmbeddingMatrix,
    centroids: &[Vec<f64>],
    g_min: usize,
) -> Result<GroupPartition> {
    let (n, k) = (e.len(), centroids.len());
    let space = (k as u64)
        .checked_pow(n as u32)
        .filter(|&s| s <= BRUTE_FORCE_LIMIT);
    if space.is_none() {
        return Err(Error::TooLarge(format!("{k}^{n} assignments")));
    }
    check_feasible(n, k, g_min)?;
    let cost = cost_matrix(e, centroids)?;

    let feasible = |a: &[usize]| {
        let mut sizes = vec![0usize; k];
        for &g in a {
            sizes[g] += 1;
        }
        sizes.iter().all(|&s| s >= g_min)
    };
    let for_each = |visit: &mut dyn FnMut(&[usize])| {
        let mut a = vec![0usize; n];
        loop {
            if feasible(&a) {
                visit(&a);
            }
            // Odometer with the last row as the fastest digit.
            let mut pos = n;
            loop {
                if pos == 0 {
                    return;
                }
                pos -= 1;
                a[pos] += 1;
                if a[pos] < k {
                    break;
                }
                a[pos] = 0;
            }
        }
    };

    let mut best = f64::INFINITY;
    for_each(&mut |a| best = best.min(summed_cost(&cost, k, a)));
    let mut winner: Option<Vec<usize>> = None;
    for_each(&mut |a| {
        if winner.is_none() && summed_cost(&cost, k, a) <= best + TIE_TOL {
            winner = Some(a.to_vec());
        }
    });
    let winner = winner.ok_or(Error::InfeasibleMinSize { n, k, g_min })?;
    GroupPartition::from_assignments(winner, k)
}

fn recompute_centroids(e: &EmbeddingMatrix, partition: &GroupPartition) -> Vec<Vec<f64>> {
    (0..partition.k())
        .map(|g| {
            let mut mean = vec![0.0; e.dim()];
            let mut first = None;
            for i in partition.members(g) {
                first.get_or_insert(i);
                for (m, x) in mean.iter_mut().zip(e.row(i)) {
                    *m += x;
                }
            }
            let len = norm(&mean);
            match first {
                Some(i) if len.is_nan() || len <= ZERO_MEAN => e.row(i).to_vec(),
                _ => mean.iter().map(|x| x / len).collect(),
            }
        })
        .collect()
}

/// Alternates [`assign_min_size`] with centroid updates until the
/// assignment stops changing or [`MAX_ITERATIONS`] is reached.
pub fn constrained_kmeans(e: &EmbeddingMatrix, cfg: &MupoConfig) -> Result<GroupPartition> {
    constrained_kmeans_traced(e, cfg).map(|t| t.partition)
}

/// [`constrained_kmeans`] with the final centroids and the cost history.
///
/// `K` and `G_min` come from `cfg`; the batch size is `e.len()`.
pub fn constrained_kmeans_traced(e: &EmbeddingMatrix, cfg: &MupoConfig) -> Result<ClusterTrace> {
    let (n, k, g_min) = (e.len(), cfg.k, cfg.g_min);
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    if k == 1 {
        let partition = GroupPartition::single(n);
        let state = ClusterState {
            centroids: recompute_centroids(e, &partition),
            iteration: 1,
            converged: true,
        };
        let costs = vec![assignment_cost(e, &state.centroids, &partition)?];
        return Ok(ClusterTrace {
            partition,
            state,
            costs,
        });
    }
    check_feasible(n, k, g_min)?;

    let mut state = init_centroids(e, k, cfg.seed)?;
    let mut costs = Vec::new();
    let mut previous: Option<GroupPartition> = None;
    for iteration in 1..=MAX_ITERATIONS {
        let partition = assign_min_size(e, &state.centroids, g_min)?;
        costs.push(assignment_cost(e, &state.centroids, &partition)?);
        state.iteration = iteration;
        if previous.as_ref() == Some(&partition) {
            state.converged = true;
            break;
        }
        state.centroids = recompute_centroids(e, &partition);
        previous = Some(partition);
    }
    let partition = previous.expect("at least one iteration ran");
    if !state.converged {
        // The cap was hit right after a centroid update; report costs for
        // the centroids that produced the returned assignment.
        let c = assignment_cost(e, &state.centroids, &partition)?;
        costs.push(c);
    }
    Ok(ClusterTrace {
        partition,
        state,
        costs,
    })
}
