//! Exact covering-walk solvers.
//!
//! A cheapest walk from `origin` to `destination` through a set of required
//! vertices is a fixed-endpoint TSP path over the metric closure of those
//! vertices, expanded back into original edges. Three engines share that
//! reduction:
//!
//! * subset DP (Held-Karp) for up to [`SolverConfig::dp_max_points`] points,
//! * depth-first branch and bound with a node budget above that,
//! * plain enumeration of visit orders, kept as an independent check.
//!
//! Among equally cheap visit orders the lexicographically smallest sequence of
//! vertex ids wins, whichever engine runs.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::KnowledgeView;
use crate::graph::{closure_unchecked, EstimateGraph, GraphError, MetricClosure, VertexId, Walk};
use crate::rational::{self, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Largest point count (required vertices plus both ends) for subset DP.
    pub dp_max_points: usize,
    /// Largest point count branch and bound will attempt; at most 128.
    pub bnb_max_points: usize,
    /// Search nodes branch and bound may expand before giving up. Zero
    /// disables it, so anything above the DP cap is rejected.
    pub bnb_node_budget: u64,
    pub brute_max_points: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dp_max_points: 20,
            bnb_max_points: 128,
            bnb_node_budget: 20_000_000,
            brute_max_points: 10,
        }
    }
}

impl SolverConfig {
    pub fn dp_only() -> Self {
        Self {
            bnb_node_budget: 0,
            ..Self::default()
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("instance too large for exact oracle: {points} points, limit {limit}")]
    TooLarge { points: usize, limit: usize },
    #[error("instance too large for exact oracle: search over {points} points gave up after {nodes} nodes")]
    BudgetExhausted { points: usize, nodes: u64 },
    #[error("weights too large to scale to machine integers")]
    Overflow,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl SolverError {
    /// True for the errors that mean "too big", as opposed to bad input.
    pub fn is_capacity(&self) -> bool {
        matches!(
            self,
            SolverError::TooLarge { .. } | SolverError::BudgetExhausted { .. } | SolverError::Overflow
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverTask {
    pub weights: Vec<Weight>,
    pub origin: VertexId,
    pub destination: VertexId,
    pub must_visit: Vec<VertexId>,
}

impl CoverTask {
    /// Full TSP-path task: visit every vertex of the graph from s to t.
    pub fn full(graph: &EstimateGraph, weights: Vec<Weight>) -> Self {
        Self {
            weights,
            origin: graph.start(),
            destination: graph.end(),
            must_visit: (0..graph.vertex_count()).collect(),
        }
    }

    /// origin, the remaining required vertices in increasing id, destination.
    fn points(&self) -> Vec<VertexId> {
        let mut inner: Vec<VertexId> = self
            .must_visit
            .iter()
            .copied()
            .filter(|&v| v != self.origin && v != self.destination)
            .collect();
        inner.sort_unstable();
        inner.dedup();
        let mut points = Vec::with_capacity(inner.len() + 2);
        points.push(self.origin);
        points.extend(inner);
        points.push(self.destination);
        points
    }

    fn check(&self, graph: &EstimateGraph) -> Result<(), SolverError> {
        graph.check_weights(&self.weights, false)?;
        let n = graph.vertex_count();
        for &v in self.must_visit.iter().chain([&self.origin, &self.destination]) {
            if v >= n {
                return Err(GraphError::UnknownVertex(v).into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SubsetDp,
    BranchAndBound,
    BruteForce,
    /// Heuristic upper bound, not a proven optimum.
    LocalSearch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverSolution {
    pub walk: Walk,
    pub cost: Weight,
    /// Required vertices in the order the walk first reaches them as closure
    /// points, both ends included.
    pub order: Vec<VertexId>,
    pub method: Method,
}

pub fn optimal_cover_walk(
    graph: &EstimateGraph,
    task: &CoverTask,
    config: &SolverConfig,
) -> Result<CoverSolution, SolverError> {
    optimal_cover_walk_seeded(graph, task, config, None)
}

/// Like [`optimal_cover_walk`]; `upper` is a known achievable cost used only
/// to prune branch and bound. It never changes the answer.
pub fn optimal_cover_walk_seeded(
    graph: &EstimateGraph,
    task: &CoverTask,
    config: &SolverConfig,
    upper: Option<&Weight>,
) -> Result<CoverSolution, SolverError> {
    task.check(graph)?;
    let points = task.points();
    let p = points.len();
    let method = if p <= config.dp_max_points.max(2) {
        Method::SubsetDp
    } else if config.bnb_node_budget > 0 && p <= config.bnb_max_points.min(128) {
        Method::BranchAndBound
    } else {
        let limit = if config.bnb_node_budget > 0 {
            config.bnb_max_points.min(128)
        } else {
            config.dp_max_points
        };
        return Err(SolverError::TooLarge { points: p, limit });
    };

    let scaled = Scaled::new(&task.weights, p)?;
    let closure = closure_unchecked(graph, &scaled.weights, &points);
    let order_idx = match method {
        Method::SubsetDp => held_karp(&closure.dist),
        _ => {
            let seed = upper.map(|u| scaled.ceil(u));
            let walk = WalkBound::new(graph, &scaled.weights, &closure.points);
            branch_and_bound(&closure.dist, Some(walk), seed, config.bnb_node_budget).ok_or(
                SolverError::BudgetExhausted {
                    points: p,
                    nodes: config.bnb_node_budget,
                },
            )?
        }
    };
    finish(graph, task, &closure, &order_idx, method)
}

/// Exhaustive enumeration of visit orders on exact rationals.
pub fn brute_force_cover(
    graph: &EstimateGraph,
    task: &CoverTask,
    config: &SolverConfig,
) -> Result<CoverSolution, SolverError> {
    task.check(graph)?;
    let points = task.points();
    if points.len() > config.brute_max_points.max(2) {
        return Err(SolverError::TooLarge {
            points: points.len(),
            limit: config.brute_max_points,
        });
    }
    let closure = closure_unchecked(graph, &task.weights, &points);
    let m = points.len() - 2;
    let mut best: Option<(Weight, Vec<usize>)> = None;
    let mut current = vec![0usize];
    let mut used = vec![false; m];
    permute(&closure.dist, m, &mut current, &mut used, &Weight::zero(), &mut best);
    let (_, order) = best.expect("at least one visit order exists");
    finish(graph, task, &closure, &order, Method::BruteForce)
}

fn permute(
    dist: &[Vec<Weight>],
    m: usize,
    current: &mut Vec<usize>,
    used: &mut [bool],
    cost: &Weight,
    best: &mut Option<(Weight, Vec<usize>)>,
) {
    let last = *current.last().unwrap();
    if current.len() == m + 1 {
        let total = cost + &dist[last][m + 1];
        if best.as_ref().is_none_or(|(b, _)| &total < b) {
            let mut order = current.clone();
            order.push(m + 1);
            *best = Some((total, order));
        }
        return;
    }
    for j in 0..m {
        if used[j] {
            continue;
        }
        used[j] = true;
        current.push(j + 1);
        permute(dist, m, current, used, &(cost + &dist[last][j + 1]), best);
        current.pop();
        used[j] = false;
    }
}

fn finish<C>(
    graph: &EstimateGraph,
    task: &CoverTask,
    closure: &MetricClosure<C>,
    order_idx: &[usize],
    method: Method,
) -> Result<CoverSolution, SolverError>
where
    C: crate::graph::PathCost,
{
    let vertices = closure.expand_order(order_idx);
    let walk = Walk::evaluate(graph, vertices, &task.weights)?;
    let cost = walk.cost();
    let order = order_idx.iter().map(|&i| closure.points[i]).collect();
    Ok(CoverSolution {
        walk,
        cost,
        order,
        method,
    })
}

/// Weights multiplied by the common denominator so the search runs on u64.
struct Scaled {
    weights: Vec<u64>,
    factor: BigInt,
}

impl Scaled {
    fn new(weights: &[Weight], points: usize) -> Result<Self, SolverError> {
        let factor = rational::common_denominator(weights);
        let scaled = weights
            .iter()
            .map(|w| (w.numer() * (&factor / w.denom())).to_u64())
            .collect::<Option<Vec<u64>>>()
            .ok_or(SolverError::Overflow)?;
        // Any closure entry is at most the sum of all edges, and a visit
        // order adds up at most `points` of them.
        let total: u128 = scaled.iter().map(|&w| w as u128).sum();
        if total.saturating_mul(points as u128 + 1) >= (u64::MAX / 4) as u128 {
            return Err(SolverError::Overflow);
        }
        Ok(Self {
            weights: scaled,
            factor,
        })
    }

    fn ceil(&self, w: &Weight) -> u64 {
        let v = w * Weight::from_integer(self.factor.clone());
        v.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
    }
}

const INF: u64 = u64::MAX / 2;

/// Suffix subset DP: `f[mask][j]` is the cheapest way to go from inner point
/// `j` through every inner point in `mask` and finish at the destination.
/// Returns point indices from origin (0) to destination (p-1).
fn held_karp(dist: &[Vec<u64>]) -> Vec<usize> {
    let p = dist.len();
    let dest = p - 1;
    let m = p - 2;
    if m == 0 {
        return vec![0, dest];
    }
    // inner point j has closure index j + 1
    let d = |a: usize, b: usize| dist[a][b];
    let full = (1usize << m) - 1;
    let mut f = vec![INF; (1usize << m) * m];
    for (j, slot) in f.iter_mut().take(m).enumerate() {
        *slot = d(j + 1, dest);
    }
    for mask in 1..=full {
        let row = mask * m;
        for j in 0..m {
            if mask & (1 << j) != 0 {
                continue;
            }
            let mut best = INF;
            let mut rest = mask;
            while rest != 0 {
                let x = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let c = d(j + 1, x + 1) + f[(mask ^ (1 << x)) * m + x];
                if c < best {
                    best = c;
                }
            }
            f[row + j] = best;
        }
    }
    // forward reconstruction, smallest index first among optimal choices
    let mut order = vec![0];
    let mut cur = 0usize;
    let mut remaining = full;
    let mut target = (0..m)
        .map(|j| d(0, j + 1) + f[(full ^ (1 << j)) * m + j])
        .min()
        .unwrap();
    while remaining != 0 {
        let x = (0..m)
            .filter(|&x| remaining & (1 << x) != 0)
            .find(|&x| d(cur, x + 1) + f[(remaining ^ (1 << x)) * m + x] == target)
            .expect("DP table is consistent");
        target -= d(cur, x + 1);
        remaining ^= 1 << x;
        cur = x + 1;
        order.push(cur);
    }
    order.push(dest);
    order
}

/// Depth-first branch and bound over inner points, children in index order.
/// `seed` is an achievable cost that only tightens pruning. Returns `None`
/// when the node budget runs out before optimality is proven.
/// Lower bound on any walk covering a set of points, read off the graph
/// itself. Every point is entered once; entering from a vertex outside the
/// still-open set costs an extra step first, and a point with at most one
/// open neighbour must be left through an extra step. Extra steps are shared
/// by at most two such charges, so each charge counts half the lightest edge.
struct WalkBound {
    /// Per point: (neighbouring point if any, scaled edge weight).
    adj: Vec<Vec<(Option<usize>, u64)>>,
    lightest: u64,
}

impl WalkBound {
    fn new(graph: &EstimateGraph, weights: &[u64], points: &[VertexId]) -> Self {
        let mut point_of = vec![None; graph.vertex_count()];
        for (i, &v) in points.iter().enumerate() {
            point_of[v] = Some(i);
        }
        let adj = points
            .iter()
            .map(|&v| {
                graph
                    .neighbors(v)
                    .iter()
                    .map(|&(u, e)| (point_of[u], weights[e]))
                    .collect()
            })
            .collect();
        Self {
            adj,
            lightest: weights.iter().copied().min().unwrap_or(0),
        }
    }

    fn bound(&self, cur: usize, dest: usize, remaining: u128) -> u64 {
        let open = |x: Option<usize>| match x {
            Some(x) => x == cur || x == dest || (x < 128 && remaining & (1u128 << x) != 0),
            None => false,
        };
        let charge = |v: usize, leafy: bool| {
            let (mut inside, mut outside, mut degree) = (INF, INF, 0);
            for &(u, w) in &self.adj[v] {
                if open(u) {
                    inside = inside.min(w);
                    degree += 1;
                } else {
                    outside = outside.min(w);
                }
            }
            let leaf = leafy && degree <= 1;
            let a = if inside == INF {
                INF
            } else {
                2 * inside + if leaf { self.lightest } else { 0 }
            };
            let b = if outside == INF {
                INF
            } else {
                2 * outside + self.lightest
            };
            a.min(b)
        };
        let mut twice = charge(dest, false);
        let mut rest = remaining;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            twice = twice.saturating_add(charge(v, true));
        }
        twice.div_ceil(2)
    }
}

fn branch_and_bound(dist: &[Vec<u64>], walk: Option<WalkBound>, seed: Option<u64>, budget: u64) -> Option<Vec<usize>> {
    let p = dist.len();
    let dest = p - 1;
    let m = p - 2;
    if m == 0 {
        return Some(vec![0, dest]);
    }
    // For each point, the other points sorted by distance in each direction,
    // so bound computation usually stops after one or two probes.
    let by_in: Vec<Vec<usize>> = (0..p)
        .map(|v| {
            let mut others: Vec<usize> = (0..p).filter(|&x| x != v && x != dest).collect();
            others.sort_by_key(|&x| (dist[x][v], x));
            others
        })
        .collect();
    let by_out: Vec<Vec<usize>> = (0..p)
        .map(|v| {
            let mut others: Vec<usize> = (1..p).filter(|&x| x != v).collect();
            others.sort_by_key(|&x| (dist[v][x], x));
            others
        })
        .collect();
    let mut search = Bnb {
        dist,
        by_in,
        by_out,
        walk,
        dest,
        best: seed.unwrap_or(INF).min(INF),
        best_is_real: false,
        best_order: Vec::new(),
        path: vec![0],
        nodes: 0,
        budget,
        memo: HashMap::new(),
    };
    let all: u128 = if m == 128 { u128::MAX } else { ((1u128 << m) - 1) << 1 };
    if !search.dfs(0, all, 0) {
        return None;
    }
    if !search.best_is_real {
        // The seed was not achievable after all; search without it.
        search.best = INF;
        search.memo.clear();
        search.nodes = 0;
        if !search.dfs(0, all, 0) {
            return None;
        }
    }
    search.best_order.push(dest);
    Some(search.best_order)
}

struct Bnb<'a> {
    dist: &'a [Vec<u64>],
    by_in: Vec<Vec<usize>>,
    by_out: Vec<Vec<usize>>,
    walk: Option<WalkBound>,
    dest: usize,
    best: u64,
    best_is_real: bool,
    best_order: Vec<usize>,
    path: Vec<usize>,
    nodes: u64,
    budget: u64,
    memo: HashMap<(u128, u8), u64>,
}

const MEMO_LIMIT: usize = 4_000_000;

impl Bnb<'_> {
    /// `remaining` holds inner points still to visit, bit `i` for point `i`.
    fn bound(&self, cur: usize, remaining: u128) -> u64 {
        let live = |x: usize| x == cur || (x < 128 && remaining & (1u128 << x) != 0);
        let sink = |x: usize| x == self.dest || (x < 128 && remaining & (1u128 << x) != 0);
        let cheapest_in = |v: usize| {
            self.by_in[v]
                .iter()
                .find(|&&x| live(x))
                .map(|&x| self.dist[x][v])
                .unwrap_or(0)
        };
        let cheapest_out = |v: usize| {
            self.by_out[v]
                .iter()
                .find(|&&x| x != v && sink(x))
                .map(|&x| self.dist[v][x])
                .unwrap_or(0)
        };
        // Every remaining point and the destination is entered exactly once
        // as a closure point; every remaining point and `cur` is left once.
        let mut enter = cheapest_in(self.dest);
        let mut half = cheapest_in(self.dest) + cheapest_out(cur);
        let mut rest = remaining;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let i = cheapest_in(v);
            enter += i;
            half += i + cheapest_out(v);
        }
        let closure = enter.max(half.div_ceil(2));
        match &self.walk {
            Some(w) => closure.max(w.bound(cur, self.dest, remaining)),
            None => closure,
        }
    }

    /// Returns false when the budget is exhausted.
    fn dfs(&mut self, cur: usize, remaining: u128, cost: u64) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            return false;
        }
        if remaining == 0 {
            let total = cost + self.dist[cur][self.dest];
            if total < self.best || (total == self.best && !self.best_is_real) {
                self.best = total;
                self.best_is_real = true;
                self.best_order = self.path.clone();
            }
            return true;
        }
        let lb = cost + self.bound(cur, remaining);
        if lb > self.best || (lb == self.best && self.best_is_real) {
            return true;
        }
        if cur < 256 {
            let key = (remaining, cur as u8);
            match self.memo.get(&key) {
                // an earlier, lexicographically smaller prefix got here no dearer
                Some(&seen) if seen <= cost => return true,
                _ => {
                    if self.memo.len() < MEMO_LIMIT || self.memo.contains_key(&key) {
                        self.memo.insert(key, cost);
                    }
                }
            }
        }
        let mut rest = remaining;
        while rest != 0 {
            let x = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            self.path.push(x);
            let ok = self.dfs(x, remaining & !(1u128 << x), cost + self.dist[cur][x]);
            self.path.pop();
            if !ok {
                return false;
            }
        }
        true
    }
}

/// A good but unproven covering walk: 2-opt and segment moves over the
/// metric closure, restarted from perturbations of the best order found.
/// Deterministic for a given `seed`. Used to certify upper bounds on
/// instances beyond the exact solvers.
pub fn local_search_cover(
    graph: &EstimateGraph,
    task: &CoverTask,
    rounds: usize,
    seed: u64,
) -> Result<CoverSolution, SolverError> {
    use rand::{Rng, SeedableRng};

    task.check(graph)?;
    let points = task.points();
    let p = points.len();
    let scaled = Scaled::new(&task.weights, p)?;
    let closure = closure_unchecked(graph, &scaled.weights, &points);
    let d = &closure.dist;
    let cost = |o: &[usize]| o.windows(2).map(|w| d[w[0]][w[1]]).sum::<u64>();
    let mut best: Vec<usize> = (0..p).collect();
    improve(d, &mut best);
    let mut best_cost = cost(&best);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let inner = p.saturating_sub(2);
    for _ in 0..rounds {
        if inner < 8 {
            break;
        }
        // double bridge on the inner part
        let mut cuts: Vec<usize> = (0..3).map(|_| rng.gen_range(1..inner)).collect();
        cuts.sort_unstable();
        let (a, b, c) = (cuts[0] + 1, cuts[1] + 1, cuts[2] + 1);
        if a == b || b == c {
            continue;
        }
        let mut cand = best[..a].to_vec();
        cand.extend_from_slice(&best[b..c]);
        cand.extend_from_slice(&best[a..b]);
        cand.extend_from_slice(&best[c..]);
        improve(d, &mut cand);
        let c_cost = cost(&cand);
        if c_cost < best_cost {
            best = cand;
            best_cost = c_cost;
        }
    }
    finish(graph, task, &closure, &best, Method::LocalSearch)
}

/// First-improvement 2-opt and or-opt until no move helps. Position 0 and
/// the last position stay fixed.
fn improve(d: &[Vec<u64>], order: &mut Vec<usize>) {
    let p = order.len();
    if p < 4 {
        return;
    }
    loop {
        let mut changed = false;
        // 2-opt: reverse order[i..=j]
        for i in 1..p - 1 {
            for j in i + 1..p - 1 {
                let (a, b, c, e) = (order[i - 1], order[i], order[j], order[j + 1]);
                if d[a][c] + d[b][e] < d[a][b] + d[c][e] {
                    order[i..=j].reverse();
                    changed = true;
                }
            }
        }
        // or-opt: move a segment of up to three points elsewhere
        for len in 1..=3usize {
            let mut i = 1;
            while i + len < p {
                let (prev, first, last, next) = (order[i - 1], order[i], order[i + len - 1], order[i + len]);
                let removed = (d[prev][first] + d[last][next]) as i64 - d[prev][next] as i64;
                let mut rest: Vec<usize> = order[..i].to_vec();
                rest.extend_from_slice(&order[i + len..]);
                let seg: Vec<usize> = order[i..i + len].to_vec();
                let mut best_gain = 0i64;
                let mut best_at = None;
                for k in 0..rest.len() - 1 {
                    let (u, v) = (rest[k], rest[k + 1]);
                    for (f, l, rev) in [(first, last, false), (last, first, true)] {
                        let added = (d[u][f] + d[l][v]) as i64 - d[u][v] as i64;
                        if removed - added > best_gain {
                            best_gain = removed - added;
                            best_at = Some((k, rev));
                        }
                    }
                }
                if let Some((k, rev)) = best_at {
                    let mut seg = seg;
                    if rev {
                        seg.reverse();
                    }
                    let mut next_order = rest[..=k].to_vec();
                    next_order.extend(seg);
                    next_order.extend_from_slice(&rest[k + 1..]);
                    *order = next_order;
                    changed = true;
                }
                i += 1;
            }
        }
        if !changed {
            break;
        }
    }
}

/// The adaptive planner's subproblem: from the agent's position to
/// `destination` through every unvisited vertex, pricing revealed edges at
/// their actual weight and the rest at their upper bound.
pub fn worst_case_cover_walk(
    view: &KnowledgeView,
    destination: VertexId,
    config: &SolverConfig,
    upper: Option<&Weight>,
) -> Result<CoverSolution, SolverError> {
    let task = CoverTask {
        weights: view.pessimistic_weights(),
        origin: view.position(),
        destination,
        must_visit: view.unvisited().collect(),
    };
    optimal_cover_walk_seeded(view.graph(), &task, config, upper)
}
