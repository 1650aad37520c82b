//! Grid trap: an m x m grid, all edges announced [1, alpha], on which the
//! adaptive explorer walks a Hamiltonian path of alpha-edges while a walk
//! that revisits a few vertices can use weight-1 edges.
//!
//! Vertices are numbered along the intended path H, so whenever several
//! plans price the same the explorer's smallest-id rule picks H's next
//! vertex. H is built from two-column zigzags ("ladders"):
//!
//! * odd m: ladders over column pairs, alternately downwards and upwards,
//!   then the last column on its own;
//! * even m: the bottom row first, then ladders over the remaining m-1 rows
//!   from right to left.
//!
//! An edge off H is made cheap only if stepping along it, at the moment the
//! agent could, leaves no Hamiltonian completion to t. The built instance is
//! then simulated, any cheap edge the explorer still takes is demoted to
//! alpha, and the result is accepted only if the explorer's cost is exactly
//! (m^2 - 1) alpha and a certificate walk beats it.

use std::collections::HashSet;
use std::sync::Arc;

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::BuildError;
use crate::engine::{start_episode, step_cap, EngineError, FixedAssignment};
use crate::explorers::{Adaptive, Explorer};
use crate::graph::{EdgeSpec, EstimateGraph, GraphSpec, VertexId, Walk, WeightAssignment};
use crate::rational::{self, int, Weight};
use crate::solver::{local_search_cover, optimal_cover_walk, CoverTask, SolverConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub m: usize,
    #[serde(with = "rational::serde_pq")]
    pub alpha: Weight,
}

#[derive(Debug, Clone)]
pub struct GridTrap {
    pub graph: Arc<EstimateGraph>,
    pub weights: WeightAssignment,
    /// Grid cell (row, column) of each vertex id.
    pub cells: Vec<(usize, usize)>,
    pub certificate: Walk,
    /// Cost the adaptive explorer paid in the build-time simulation.
    pub adaptive_cost: Weight,
}

impl GridTrap {
    pub fn source(&self) -> FixedAssignment {
        FixedAssignment::with_certificate(self.weights.clone(), self.certificate.vertices.clone())
    }
}

// Row-major cell indices of H, found by randomised backbite search.
const PRESET_4: [u8; 16] = [8, 9, 5, 4, 0, 1, 2, 3, 7, 6, 10, 11, 15, 14, 13, 12];
const PRESET_5: [u8; 25] = [
    22, 21, 20, 15, 16, 11, 10, 5, 0, 1, 6, 7, 2, 3, 8, 13, 12, 17, 18, 23, 24, 19, 14, 9, 4,
];
const PRESET_6: [u8; 36] = [
    8, 9, 3, 4, 5, 11, 10, 16, 17, 23, 29, 35, 34, 28, 22, 21, 15, 14, 20, 26, 27, 33, 32, 31, 30, 24, 25, 19, 18, 12,
    13, 7, 6, 0, 1, 2,
];
const PRESET_7: [u8; 49] = [
    38, 37, 30, 23, 24, 31, 32, 25, 18, 19, 20, 27, 26, 33, 34, 41, 48, 47, 40, 39, 46, 45, 44, 43, 42, 35, 36, 29, 28,
    21, 22, 15, 14, 7, 0, 1, 8, 9, 2, 3, 4, 5, 6, 13, 12, 11, 10, 17, 16,
];
const PRESET_8: [u8; 64] = [
    48, 49, 41, 40, 32, 33, 25, 24, 16, 17, 9, 8, 0, 1, 2, 3, 11, 10, 18, 19, 27, 26, 34, 35, 43, 42, 50, 51, 52, 53,
    45, 44, 36, 37, 29, 28, 20, 21, 13, 12, 4, 5, 6, 7, 15, 14, 22, 23, 31, 30, 38, 39, 47, 46, 54, 55, 63, 62, 61, 60,
    59, 58, 57, 56,
];

/// The path H used by `build_grid_trap`: a searched preset for 4 <= m <= 8,
/// otherwise `ladder_path`.
pub fn trap_path(m: usize) -> Vec<(usize, usize)> {
    let preset: &[u8] = match m {
        4 => &PRESET_4,
        5 => &PRESET_5,
        6 => &PRESET_6,
        7 => &PRESET_7,
        8 => &PRESET_8,
        _ => return ladder_path(m),
    };
    preset.iter().map(|&i| (i as usize / m, i as usize % m)).collect()
}

/// The intended path H as a list of cells.
pub fn ladder_path(m: usize) -> Vec<(usize, usize)> {
    let mut path = Vec::with_capacity(m * m);
    if m % 2 == 1 {
        ladders(&mut path, (0..m).collect(), (0..m - 1).collect());
        let last_down = path.last().is_none_or(|&(r, _)| r == 0);
        let rows: Vec<usize> = if last_down {
            (0..m).collect()
        } else {
            (0..m).rev().collect()
        };
        path.extend(rows.into_iter().map(|r| (r, m - 1)));
    } else {
        path.extend((0..m).map(|c| (m - 1, c)));
        ladders(&mut path, (0..m - 1).rev().collect(), (0..m).rev().collect());
    }
    path
}

/// Zigzags over consecutive column pairs of `cols`, starting along `rows`
/// and alternating direction per pair. Each pair is entered at its first
/// column.
fn ladders(path: &mut Vec<(usize, usize)>, rows: Vec<usize>, cols: Vec<usize>) {
    let mut rows = rows;
    for pair in cols.chunks(2) {
        for (i, &r) in rows.iter().enumerate() {
            if i % 2 == 0 {
                path.extend(pair.iter().map(|&c| (r, c)));
            } else {
                path.extend(pair.iter().rev().map(|&c| (r, c)));
            }
        }
        rows.reverse();
    }
}

/// m x m grid with vertex ids given by `cells`, all edges [1, alpha], s the
/// first cell and t the last.
pub fn grid_graph(cells: &[(usize, usize)], m: usize, alpha: &Weight) -> Result<EstimateGraph, BuildError> {
    let mut id = vec![usize::MAX; m * m];
    for (v, &(r, c)) in cells.iter().enumerate() {
        id[r * m + c] = v;
    }
    let mut edges = Vec::new();
    for r in 0..m {
        for c in 0..m {
            let v = id[r * m + c];
            let mut push = |w: usize| {
                let (a, b) = (v.min(w), v.max(w));
                edges.push(EdgeSpec {
                    a,
                    b,
                    lower: int(1),
                    upper: alpha.clone(),
                })
            };
            if c + 1 < m {
                push(id[r * m + c + 1]);
            }
            if r + 1 < m {
                push(id[(r + 1) * m + c]);
            }
        }
    }
    edges.sort_by_key(|e| (e.a, e.b));
    Ok(EstimateGraph::new(GraphSpec {
        n: m * m,
        start: 0,
        end: m * m - 1,
        edges,
    })?)
}

/// Is there a path from `from` through every vertex not in `visited` that
/// ends at `end`? `from` itself counts as visited.
fn hamiltonian_completion(graph: &EstimateGraph, visited: &[bool], from: VertexId, end: VertexId) -> bool {
    let mut seen = visited.to_vec();
    seen[from] = true;
    let left = seen.iter().filter(|&&x| !x).count();
    if let Some(side) = two_colouring(graph) {
        // a path alternates sides, which fixes how many unvisited vertices
        // lie on each side and which side `end` is on
        let away = (0..seen.len()).filter(|&v| !seen[v] && side[v] != side[from]).count();
        if away != left.div_ceil(2) || (side[end] != side[from]) != (left % 2 == 1) {
            return false;
        }
    }
    let mut search = HamSearch {
        graph,
        end,
        budget: 2_000_000,
        dead: HashSet::new(),
    };
    search.run(&mut seen, from, left)
}

fn two_colouring(graph: &EstimateGraph) -> Option<Vec<bool>> {
    let n = graph.vertex_count();
    let mut side = vec![None; n];
    for root in 0..n {
        if side[root].is_some() {
            continue;
        }
        side[root] = Some(false);
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            let su = side[u]?;
            for &(w, _) in graph.neighbors(u) {
                match side[w] {
                    None => {
                        side[w] = Some(!su);
                        stack.push(w);
                    }
                    Some(sw) if sw == su => return None,
                    _ => {}
                }
            }
        }
    }
    side.into_iter().collect()
}

/// Depth-first search for a Hamiltonian completion. States already shown
/// to be dead ends are remembered when the vertex set fits in a u128.
struct HamSearch<'a> {
    graph: &'a EstimateGraph,
    end: VertexId,
    budget: u64,
    dead: HashSet<(u128, VertexId)>,
}

impl HamSearch<'_> {
    fn key(seen: &[bool], at: VertexId) -> Option<(u128, VertexId)> {
        if seen.len() > 128 {
            return None;
        }
        let mask = seen
            .iter()
            .enumerate()
            .fold(0u128, |m, (v, &x)| if x { m | 1 << v } else { m });
        Some((mask, at))
    }

    fn run(&mut self, seen: &mut [bool], at: VertexId, left: usize) -> bool {
        if left == 0 {
            return at == self.end;
        }
        if self.budget == 0 {
            // treat as not provably blocked, so the edge stays expensive
            return true;
        }
        self.budget -= 1;
        let key = Self::key(seen, at);
        if key.is_some_and(|k| self.dead.contains(&k)) {
            return false;
        }
        if !viable(self.graph, seen, at, self.end, left) {
            return false;
        }
        let next: Vec<VertexId> = self
            .graph
            .neighbors(at)
            .iter()
            .map(|&(v, _)| v)
            .filter(|&v| !seen[v])
            .collect();
        for v in next {
            if v == self.end && left > 1 {
                continue;
            }
            seen[v] = true;
            let ok = self.run(seen, v, left - 1);
            seen[v] = false;
            if ok {
                return true;
            }
        }
        if let Some(k) = key {
            self.dead.insert(k);
        }
        false
    }
}

/// Cheap necessary conditions: the unvisited vertices are connected to the
/// agent and at most one vertex besides `end` is a forced endpoint.
fn viable(graph: &EstimateGraph, seen: &[bool], at: VertexId, end: VertexId, left: usize) -> bool {
    let mut forced = 0;
    for v in 0..seen.len() {
        if seen[v] || v == end {
            continue;
        }
        let degree = graph.neighbors(v).iter().filter(|&&(w, _)| !seen[w] || w == at).count();
        if degree < 2 {
            forced += 1;
            if forced > 1 || degree == 0 {
                return false;
            }
        }
    }
    let mut stack = vec![at];
    let mut reached = vec![false; seen.len()];
    reached[at] = true;
    let mut count = 0;
    while let Some(u) = stack.pop() {
        for &(w, _) in graph.neighbors(u) {
            if !seen[w] && !reached[w] {
                reached[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == left && cuts_allow_path(graph, seen, at, end)
}

/// A path from `at` to `end` through the open vertices passes a cut vertex
/// once, so neither end may be one, and any other cut vertex must separate
/// exactly `at`'s side from `end`'s side.
fn cuts_allow_path(graph: &EstimateGraph, seen: &[bool], at: VertexId, end: VertexId) -> bool {
    struct Dfs<'a> {
        graph: &'a EstimateGraph,
        seen: &'a [bool],
        at: VertexId,
        tin: Vec<usize>,
        tout: Vec<usize>,
        low: Vec<usize>,
        clock: usize,
        // per vertex: children whose subtree hangs on it alone
        cut_children: Vec<Vec<VertexId>>,
    }
    impl Dfs<'_> {
        fn open(&self, v: VertexId) -> bool {
            !self.seen[v] || v == self.at
        }
        fn visit(&mut self, u: VertexId, parent: Option<VertexId>) {
            self.clock += 1;
            self.tin[u] = self.clock;
            self.low[u] = self.clock;
            for &(w, _) in self.graph.neighbors(u) {
                if !self.open(w) || Some(w) == parent {
                    continue;
                }
                if self.tin[w] == 0 {
                    self.visit(w, Some(u));
                    self.low[u] = self.low[u].min(self.low[w]);
                    if self.low[w] >= self.tin[u] {
                        self.cut_children[u].push(w);
                    }
                } else {
                    self.low[u] = self.low[u].min(self.tin[w]);
                }
            }
            self.tout[u] = self.clock;
        }
    }
    let n = seen.len();
    let mut dfs = Dfs {
        graph,
        seen,
        at,
        tin: vec![0; n],
        tout: vec![0; n],
        low: vec![0; n],
        clock: 0,
        cut_children: vec![Vec::new(); n],
    };
    dfs.visit(at, None);
    if dfs.cut_children[at].len() > 1 {
        return false;
    }
    for c in 0..n {
        if c == at || dfs.tin[c] == 0 || dfs.cut_children[c].is_empty() {
            continue;
        }
        if c == end || dfs.cut_children[c].len() > 1 {
            return false;
        }
        let child = dfs.cut_children[c][0];
        if !(dfs.tin[child] <= dfs.tin[end] && dfs.tin[end] <= dfs.tout[child]) {
            return false;
        }
    }
    true
}

/// Edges off H that, taken at the moment their earlier endpoint is the
/// agent's position, leave no Hamiltonian completion.
pub fn blocked_deviations(graph: &EstimateGraph) -> Vec<usize> {
    let n = graph.vertex_count();
    let mut out = Vec::new();
    for (id, e) in graph.edges().iter().enumerate() {
        if e.b == e.a + 1 {
            continue;
        }
        // vertices are numbered along H, so visited = 0..=e.a at that moment
        let visited: Vec<bool> = (0..n).map(|v| v <= e.a).collect();
        if !hamiltonian_completion(graph, &visited, e.b, n - 1) {
            out.push(id);
        }
    }
    out
}

pub fn build_grid_trap(spec: &GridSpec) -> Result<GridTrap, BuildError> {
    build_grid_trap_with(spec, &SolverConfig::default())
}

pub fn build_grid_trap_with(spec: &GridSpec, solver: &SolverConfig) -> Result<GridTrap, BuildError> {
    let m = spec.m;
    if m < 2 {
        return Err(BuildError::InvalidSpec("grid side must be at least 2".into()));
    }
    if spec.alpha < Weight::one() || spec.alpha >= int(2) {
        return Err(BuildError::InvalidSpec(format!(
            "grid trap needs 1 <= alpha < 2, got {}",
            rational::format(&spec.alpha)
        )));
    }
    trap_from_path(trap_path(m), m, &spec.alpha, solver)
}

/// Builds the trap for an arbitrary Hamiltonian path `cells` of the grid.
pub fn trap_from_path(
    cells: Vec<(usize, usize)>,
    m: usize,
    alpha: &Weight,
    solver: &SolverConfig,
) -> Result<GridTrap, BuildError> {
    let graph = Arc::new(grid_graph(&cells, m, alpha)?);
    let mut cheap = vec![false; graph.edge_count()];
    for e in blocked_deviations(&graph) {
        cheap[e] = true;
    }
    let target = alpha * int((m * m - 1) as i64);
    loop {
        let weights: Vec<Weight> = cheap.iter().map(|&c| if c { int(1) } else { alpha.clone() }).collect();
        let weights = WeightAssignment::new(&graph, weights)?;
        let walk = simulate_adaptive(&graph, &weights, solver)?;
        let taken: Vec<usize> = walk
            .windows(2)
            .map(|w| graph.edge_between(w[0], w[1]).unwrap())
            .filter(|&e| cheap[e])
            .collect();
        if !taken.is_empty() {
            for e in taken {
                cheap[e] = false;
            }
            continue;
        }
        let adaptive = Walk::evaluate(&graph, walk, weights.as_slice())?;
        if adaptive.cost() != target {
            return Err(BuildError::TrapNotEffective(format!(
                "adaptive pays {}, expected {}",
                rational::format(&adaptive.cost()),
                rational::format(&target)
            )));
        }
        let certificate = certificate_walk(&graph, &weights, solver)?;
        let bound = alpha * int(6 * m as i64) + int(((m - 2) * m) as i64);
        if certificate.cost() > bound {
            return Err(BuildError::TrapNotEffective(format!(
                "certificate costs {}, above {}",
                rational::format(&certificate.cost()),
                rational::format(&bound)
            )));
        }
        return Ok(GridTrap {
            graph,
            weights,
            cells,
            certificate,
            adaptive_cost: adaptive.cost(),
        });
    }
}

fn simulate_adaptive(
    graph: &Arc<EstimateGraph>,
    weights: &WeightAssignment,
    solver: &SolverConfig,
) -> Result<Vec<VertexId>, BuildError> {
    let fail = |e: EngineError| BuildError::TrapNotEffective(format!("simulation failed: {e}"));
    let mut episode =
        start_episode(Arc::clone(graph), Box::new(FixedAssignment::new(weights.clone()))).map_err(fail)?;
    let mut explorer = Adaptive::new(*solver);
    let cap = step_cap(graph);
    while !episode.view().is_complete() {
        if episode.view().history().len() >= cap {
            return Err(fail(EngineError::StepCap { cap }));
        }
        let next = explorer.decide(episode.view())?;
        episode.move_to(next, None).map_err(fail)?;
    }
    Ok(episode.view().walk())
}

/// Exact optimum when the subset DP reaches, otherwise the best local-search
/// walk.
fn certificate_walk(
    graph: &EstimateGraph,
    weights: &WeightAssignment,
    solver: &SolverConfig,
) -> Result<Walk, BuildError> {
    let task = CoverTask::full(graph, weights.as_slice().to_vec());
    let exact = SolverConfig {
        bnb_node_budget: 2_000_000,
        ..*solver
    };
    let sol = match optimal_cover_walk(graph, &task, &exact) {
        Ok(sol) => sol,
        Err(_) => local_search_cover(graph, &task, 200, 0)
            .map_err(|e| BuildError::TrapNotEffective(format!("certificate search failed: {e}")))?,
    };
    Ok(sol.walk)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_hamiltonian(path: &[(usize, usize)], m: usize) -> bool {
        let mut seen = vec![false; m * m];
        for &(r, c) in path {
            if seen[r * m + c] {
                return false;
            }
            seen[r * m + c] = true;
        }
        seen.iter().all(|&x| x)
            && path
                .windows(2)
                .all(|w| w[0].0.abs_diff(w[1].0) + w[0].1.abs_diff(w[1].1) == 1)
    }

    #[test]
    fn ladder_paths_are_hamiltonian() {
        for m in 2..10 {
            assert!(is_hamiltonian(&ladder_path(m), m), "m = {m}");
            assert!(is_hamiltonian(&trap_path(m), m), "m = {m}");
        }
    }
}
