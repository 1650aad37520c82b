//! Undirected graphs whose edge weights are announced as intervals.
//!
//! An [`EstimateGraph`] can only be obtained from a [`GraphSpec`] that passes
//! [`validate`], so every other module may assume a simple, connected graph
//! with `0 < lower <= upper` on every edge and distinct endpoints `s != t`.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::fmt;
use std::ops::Add;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, Pq, Weight};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub a: VertexId,
    pub b: VertexId,
    #[serde(with = "rational::serde_pq")]
    pub lower: Weight,
    #[serde(with = "rational::serde_pq")]
    pub upper: Weight,
}

/// Unvalidated graph description, as read from a file or produced by a builder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSpec {
    pub n: usize,
    pub start: VertexId,
    pub end: VertexId,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoVertices,
    EndpointOutOfRange { vertex: VertexId },
    SameStartAndEnd,
    VertexOutOfRange { edge: EdgeId },
    SelfLoop { edge: EdgeId },
    DuplicateEdge { edge: EdgeId, first: EdgeId },
    NonPositiveLower { edge: EdgeId },
    IntervalInverted { edge: EdgeId },
    Disconnected { components: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoVertices => write!(f, "graph has no vertices"),
            Violation::EndpointOutOfRange { vertex } => {
                write!(f, "start/end vertex {vertex} out of range")
            }
            Violation::SameStartAndEnd => write!(f, "start and end vertex coincide"),
            Violation::VertexOutOfRange { edge } => {
                write!(f, "edge {edge}: endpoint out of range")
            }
            Violation::SelfLoop { edge } => write!(f, "edge {edge}: self-loop"),
            Violation::DuplicateEdge { edge, first } => {
                write!(f, "edge {edge}: duplicate of edge {first}")
            }
            Violation::NonPositiveLower { edge } => {
                write!(f, "edge {edge}: lower bound not positive")
            }
            Violation::IntervalInverted { edge } => write!(f, "edge {edge}: interval inverted"),
            Violation::Disconnected { components } => {
                write!(f, "disconnected ({components} components)")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid graph: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("weight vector has {got} entries, graph has {expected} edges")]
    WeightCount { expected: usize, got: usize },
    #[error("edge {edge}: weight {weight} not positive")]
    NonPositiveWeight { edge: EdgeId, weight: String },
    #[error("edge {edge}: weight {weight} outside announced interval [{lower}, {upper}]")]
    OutOfInterval {
        edge: EdgeId,
        weight: String,
        lower: String,
        upper: String,
    },
    #[error("walk is empty")]
    EmptyWalk,
    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(VertexId, VertexId),
    #[error("vertex {0} out of range")]
    UnknownVertex(VertexId),
}

/// Returns every violated invariant; an empty list means the instance is valid.
pub fn validate(spec: &GraphSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = spec.n;
    if n == 0 {
        out.push(Violation::NoVertices);
    }
    for v in [spec.start, spec.end] {
        if v >= n {
            out.push(Violation::EndpointOutOfRange { vertex: v });
        }
    }
    if spec.start == spec.end {
        out.push(Violation::SameStartAndEnd);
    }
    let mut seen: HashMap<(VertexId, VertexId), EdgeId> = HashMap::new();
    for (id, e) in spec.edges.iter().enumerate() {
        if e.a >= n || e.b >= n {
            out.push(Violation::VertexOutOfRange { edge: id });
            continue;
        }
        if e.a == e.b {
            out.push(Violation::SelfLoop { edge: id });
        } else if let Some(&first) = seen.get(&key(e.a, e.b)) {
            out.push(Violation::DuplicateEdge { edge: id, first });
        } else {
            seen.insert(key(e.a, e.b), id);
        }
        if !rational::is_positive(&e.lower) {
            out.push(Violation::NonPositiveLower { edge: id });
        }
        if e.lower > e.upper {
            out.push(Violation::IntervalInverted { edge: id });
        }
    }
    if n > 0 {
        let components = count_components(n, spec.edges.iter().filter(|e| e.a < n && e.b < n));
        if components > 1 {
            out.push(Violation::Disconnected { components });
        }
    }
    out
}

fn count_components<'a>(n: usize, edges: impl Iterator<Item = &'a EdgeSpec>) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = n;
    for e in edges {
        let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
        if ra != rb {
            parent[ra] = rb;
            components -= 1;
        }
    }
    components
}

fn key(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub lower: Weight,
    pub upper: Weight,
}

impl Edge {
    pub fn other(&self, v: VertexId) -> VertexId {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }

    pub fn contains(&self, w: &Weight) -> bool {
        &self.lower <= w && w <= &self.upper
    }
}

/// A validated graph with interval announcements. Immutable once built.
#[derive(Debug, Clone)]
pub struct EstimateGraph {
    n: usize,
    start: VertexId,
    end: VertexId,
    edges: Vec<Edge>,
    // (neighbor, edge) pairs sorted by neighbor id
    adjacency: Vec<Vec<(VertexId, EdgeId)>>,
    index: HashMap<(VertexId, VertexId), EdgeId>,
}

impl EstimateGraph {
    pub fn new(spec: GraphSpec) -> Result<Self, GraphError> {
        let violations = validate(&spec);
        if !violations.is_empty() {
            return Err(GraphError::Invalid(violations));
        }
        let mut adjacency = vec![Vec::new(); spec.n];
        let mut index = HashMap::with_capacity(spec.edges.len());
        let edges: Vec<Edge> = spec
            .edges
            .into_iter()
            .enumerate()
            .map(|(id, e)| {
                adjacency[e.a].push((e.b, id));
                adjacency[e.b].push((e.a, id));
                index.insert(key(e.a, e.b), id);
                Edge {
                    a: e.a,
                    b: e.b,
                    lower: e.lower,
                    upper: e.upper,
                }
            })
            .collect();
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            n: spec.n,
            start: spec.start,
            end: spec.end,
            edges,
            adjacency,
            index,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn end(&self) -> VertexId {
        self.end
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    /// Neighbors of `v` with the connecting edge, in increasing neighbor id.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adjacency[v]
    }

    pub fn edge_between(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.index.get(&key(a, b)).copied()
    }

    pub fn lower_bounds(&self) -> Vec<Weight> {
        self.edges.iter().map(|e| e.lower.clone()).collect()
    }

    pub fn upper_bounds(&self) -> Vec<Weight> {
        self.edges.iter().map(|e| e.upper.clone()).collect()
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            n: self.n,
            start: self.start,
            end: self.end,
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    a: e.a,
                    b: e.b,
                    lower: e.lower.clone(),
                    upper: e.upper.clone(),
                })
                .collect(),
        }
    }

    /// Checks that `weights` is total, positive and (optionally) inside the
    /// announced intervals.
    pub fn check_weights(&self, weights: &[Weight], within_intervals: bool) -> Result<(), GraphError> {
        if weights.len() != self.edges.len() {
            return Err(GraphError::WeightCount {
                expected: self.edges.len(),
                got: weights.len(),
            });
        }
        for (id, (w, e)) in weights.iter().zip(&self.edges).enumerate() {
            if !rational::is_positive(w) {
                return Err(GraphError::NonPositiveWeight {
                    edge: id,
                    weight: rational::format(w),
                });
            }
            if within_intervals && !e.contains(w) {
                return Err(GraphError::OutOfInterval {
                    edge: id,
                    weight: rational::format(w),
                    lower: rational::format(&e.lower),
                    upper: rational::format(&e.upper),
                });
            }
        }
        Ok(())
    }
}

/// Actual edge weights, total and inside the announced intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightAssignment {
    weights: Vec<Weight>,
}

impl WeightAssignment {
    pub fn new(graph: &EstimateGraph, weights: Vec<Weight>) -> Result<Self, GraphError> {
        graph.check_weights(&weights, true)?;
        Ok(Self { weights })
    }

    pub fn get(&self, edge: EdgeId) -> &Weight {
        &self.weights[edge]
    }

    pub fn as_slice(&self) -> &[Weight] {
        &self.weights
    }

    pub fn into_vec(self) -> Vec<Weight> {
        self.weights
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaProfile {
    pub alpha: Weight,
    pub uniform: bool,
}

pub fn alpha_of(graph: &EstimateGraph) -> AlphaProfile {
    let alpha = graph
        .edges()
        .iter()
        .map(|e| &e.upper / &e.lower)
        .max()
        .unwrap_or_else(Weight::one);
    let uniform = graph.edges().iter().all(|e| e.lower.is_one() && e.upper == alpha);
    AlphaProfile { alpha, uniform }
}

/// An open walk together with what each step cost under the weights it was
/// evaluated with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub vertices: Vec<VertexId>,
    pub step_costs: Vec<Weight>,
}

impl Walk {
    /// Evaluates a vertex sequence, rejecting non-adjacent consecutive pairs.
    pub fn evaluate(graph: &EstimateGraph, vertices: Vec<VertexId>, weights: &[Weight]) -> Result<Self, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::EmptyWalk);
        }
        if let Some(&v) = vertices.iter().find(|&&v| v >= graph.vertex_count()) {
            return Err(GraphError::UnknownVertex(v));
        }
        let step_costs = vertices
            .windows(2)
            .map(|w| {
                graph
                    .edge_between(w[0], w[1])
                    .map(|e| weights[e].clone())
                    .ok_or(GraphError::NotAdjacent(w[0], w[1]))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { vertices, step_costs })
    }

    pub fn cost(&self) -> Weight {
        self.step_costs.iter().fold(Weight::zero(), |acc, c| acc + c)
    }

    pub fn first(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn last(&self) -> VertexId {
        *self.vertices.last().expect("walk is never empty")
    }

    pub fn covers<'a>(&self, required: impl IntoIterator<Item = &'a VertexId>) -> bool {
        let seen: BTreeSet<VertexId> = self.vertices.iter().copied().collect();
        required.into_iter().all(|v| seen.contains(v))
    }
}

impl fmt::Display for Walk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.vertices.iter().map(|v| v.to_string()).collect();
        write!(f, "{} (cost {})", path.join(" -> "), Pq(&self.cost()))
    }
}

/// Anything Dijkstra can add and compare: exact rationals or scaled integers.
pub trait PathCost: Clone + Ord + Add<Output = Self> + Zero {}
impl<T: Clone + Ord + Add<Output = T> + Zero> PathCost for T {}

#[derive(Debug, Clone)]
pub struct ShortestPaths<C> {
    pub source: VertexId,
    pub dist: Vec<Option<C>>,
    pub pred: Vec<Option<VertexId>>,
    hops: Vec<usize>,
}

impl<C: PathCost> ShortestPaths<C> {
    /// Vertex sequence from the source to `target`, inclusive.
    pub fn path_to(&self, target: VertexId) -> Option<Vec<VertexId>> {
        self.dist[target].as_ref()?;
        let mut path = Vec::with_capacity(self.hops[target] + 1);
        let mut v = target;
        path.push(v);
        while let Some(p) = self.pred[v] {
            path.push(p);
            v = p;
        }
        path.reverse();
        Some(path)
    }
}

/// Exact single-source shortest paths over the given rational weights.
pub fn shortest_paths(
    graph: &EstimateGraph,
    weights: &[Weight],
    from: VertexId,
) -> Result<ShortestPaths<Weight>, GraphError> {
    graph.check_weights(weights, false)?;
    if from >= graph.vertex_count() {
        return Err(GraphError::UnknownVertex(from));
    }
    Ok(dijkstra(graph, weights, from))
}

/// Dijkstra without input checks. Ties between equal-length paths go to the
/// one with fewer edges, then to the smaller predecessor id.
pub fn dijkstra<C: PathCost>(graph: &EstimateGraph, weights: &[C], from: VertexId) -> ShortestPaths<C> {
    let n = graph.vertex_count();
    let mut dist: Vec<Option<C>> = vec![None; n];
    let mut pred = vec![None; n];
    let mut hops = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[from] = Some(C::zero());
    hops[from] = 0;
    heap.push(Reverse((C::zero(), 0usize, from)));
    while let Some(Reverse((d, h, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(v, e) in graph.neighbors(u) {
            if done[v] {
                continue;
            }
            let cand = d.clone() + weights[e].clone();
            let better = match &dist[v] {
                None => true,
                Some(cur) => (&cand, h + 1, u) < (cur, hops[v], pred[v].unwrap_or(usize::MAX)),
            };
            if better {
                dist[v] = Some(cand.clone());
                hops[v] = h + 1;
                pred[v] = Some(u);
                heap.push(Reverse((cand, h + 1, v)));
            }
        }
    }
    ShortestPaths {
        source: from,
        dist,
        pred,
        hops,
    }
}

/// Complete distance matrix over a set of points plus the tables needed to
/// expand any entry back into a walk of the original graph.
#[derive(Debug, Clone)]
pub struct MetricClosure<C> {
    pub points: Vec<VertexId>,
    pub dist: Vec<Vec<C>>,
    trees: Vec<ShortestPaths<C>>,
}

impl<C: PathCost> MetricClosure<C> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.points.iter().position(|&p| p == v)
    }

    /// Original-graph vertex sequence realizing `dist[i][j]`.
    pub fn expand(&self, i: usize, j: usize) -> Vec<VertexId> {
        self.trees[i]
            .path_to(self.points[j])
            .expect("closure points are mutually reachable")
    }

    /// Expands a sequence of point indices into one walk, dropping the
    /// duplicated joint vertices.
    pub fn expand_order(&self, order: &[usize]) -> Vec<VertexId> {
        let mut walk = vec![self.points[order[0]]];
        for pair in order.windows(2) {
            walk.extend(self.expand(pair[0], pair[1]).into_iter().skip(1));
        }
        walk
    }
}

/// Metric closure over `points` (duplicates are kept as given).
pub fn metric_closure(
    graph: &EstimateGraph,
    weights: &[Weight],
    points: &[VertexId],
) -> Result<MetricClosure<Weight>, GraphError> {
    graph.check_weights(weights, false)?;
    if let Some(&v) = points.iter().find(|&&v| v >= graph.vertex_count()) {
        return Err(GraphError::UnknownVertex(v));
    }
    Ok(closure_unchecked(graph, weights, points))
}

pub fn closure_unchecked<C: PathCost>(graph: &EstimateGraph, weights: &[C], points: &[VertexId]) -> MetricClosure<C> {
    let trees: Vec<ShortestPaths<C>> = points.iter().map(|&p| dijkstra(graph, weights, p)).collect();
    let dist = trees
        .iter()
        .map(|t| {
            points
                .iter()
                .map(|&q| t.dist[q].clone().expect("validated graphs are connected"))
                .collect()
        })
        .collect();
    MetricClosure {
        points: points.to_vec(),
        dist,
        trees,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn edge(a: usize, b: usize, lo: Weight, hi: Weight) -> EdgeSpec {
        EdgeSpec {
            a,
            b,
            lower: lo,
            upper: hi,
        }
    }

    fn unit(a: usize, b: usize) -> EdgeSpec {
        edge(a, b, int(1), int(1))
    }

    pub(crate) fn build(n: usize, s: usize, t: usize, edges: Vec<EdgeSpec>) -> EstimateGraph {
        EstimateGraph::new(GraphSpec {
            n,
            start: s,
            end: t,
            edges,
        })
        .unwrap()
    }

    #[test]
    fn minimal_path_is_valid() {
        let spec = GraphSpec {
            n: 2,
            start: 0,
            end: 1,
            edges: vec![unit(0, 1)],
        };
        assert!(validate(&spec).is_empty());
    }

    #[test]
    fn inverted_interval_is_reported() {
        let spec = GraphSpec {
            n: 2,
            start: 0,
            end: 1,
            edges: vec![edge(0, 1, int(2), int(1))],
        };
        let v = validate(&spec);
        assert_eq!(v, vec![Violation::IntervalInverted { edge: 0 }]);
        assert!(v[0].to_string().contains("interval inverted"));
    }

    #[test]
    fn two_components_are_reported() {
        let spec = GraphSpec {
            n: 4,
            start: 0,
            end: 1,
            edges: vec![unit(0, 1), unit(2, 3)],
        };
        let v = validate(&spec);
        assert_eq!(v, vec![Violation::Disconnected { components: 2 }]);
        assert!(v[0].to_string().contains("disconnected"));
    }

    #[test]
    fn structural_violations_all_listed() {
        let spec = GraphSpec {
            n: 3,
            start: 1,
            end: 1,
            edges: vec![
                unit(0, 1),
                unit(1, 0),
                unit(2, 2),
                edge(1, 2, int(0), int(1)),
                unit(0, 7),
            ],
        };
        let v = validate(&spec);
        assert!(v.contains(&Violation::SameStartAndEnd));
        assert!(v.contains(&Violation::DuplicateEdge { edge: 1, first: 0 }));
        assert!(v.contains(&Violation::SelfLoop { edge: 2 }));
        assert!(v.contains(&Violation::NonPositiveLower { edge: 3 }));
        assert!(v.contains(&Violation::VertexOutOfRange { edge: 4 }));
        assert!(EstimateGraph::new(spec).is_err());
    }

    #[test]
    fn alpha_uniform_case() {
        let g = build(3, 0, 2, vec![edge(0, 1, int(1), int(2)), edge(1, 2, int(1), int(2))]);
        assert_eq!(
            alpha_of(&g),
            AlphaProfile {
                alpha: int(2),
                uniform: true
            }
        );
    }

    #[test]
    fn alpha_mixed_case() {
        let g = build(3, 0, 2, vec![edge(0, 1, int(1), int(1)), edge(1, 2, int(2), int(3))]);
        assert_eq!(
            alpha_of(&g),
            AlphaProfile {
                alpha: ratio(3, 2),
                uniform: false
            }
        );
    }

    #[test]
    fn alpha_not_uniform_when_one_interval_differs() {
        let g = build(
            3,
            0,
            2,
            vec![edge(0, 1, int(1), ratio(3, 2)), edge(1, 2, int(1), int(2))],
        );
        assert_eq!(
            alpha_of(&g),
            AlphaProfile {
                alpha: int(2),
                uniform: false
            }
        );
    }

    fn triangle() -> (EstimateGraph, Vec<Weight>) {
        // 0-1 w1, 1-2 w1, 0-2 w3
        let g = build(3, 0, 2, vec![unit(0, 1), unit(1, 2), edge(0, 2, int(1), int(3))]);
        (g, vec![int(1), int(1), int(3)])
    }

    #[test]
    fn triangle_detours_around_heavy_edge() {
        let (g, w) = triangle();
        let sp = shortest_paths(&g, &w, 0).unwrap();
        assert_eq!(sp.dist[2], Some(int(2)));
        assert_eq!(sp.path_to(2).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn path_distances_count_edges() {
        let edges = (0..5).map(|i| unit(i, i + 1)).collect();
        let g = build(6, 0, 5, edges);
        let sp = shortest_paths(&g, &vec![int(1); 5], 0).unwrap();
        for k in 0..6 {
            assert_eq!(sp.dist[k], Some(int(k as i64)));
        }
    }

    #[test]
    fn star_leaves_are_two_apart() {
        let g = build(4, 1, 2, vec![unit(0, 1), unit(0, 2), unit(0, 3)]);
        let sp = shortest_paths(&g, &vec![int(1); 3], 1).unwrap();
        assert_eq!(sp.dist[2], Some(int(2)));
        assert_eq!(sp.dist[3], Some(int(2)));
    }

    #[test]
    fn rejects_nonpositive_weights() {
        let (g, _) = triangle();
        assert!(matches!(
            shortest_paths(&g, &[int(1), int(0), int(1)], 0),
            Err(GraphError::NonPositiveWeight { edge: 1, .. })
        ));
    }

    #[test]
    fn equal_length_paths_prefer_fewer_edges() {
        // 0-2 direct weight 2, 0-1-2 with weights 1+1
        let g = build(3, 0, 2, vec![unit(0, 1), unit(1, 2), edge(0, 2, int(1), int(2))]);
        let sp = shortest_paths(&g, &[int(1), int(1), int(2)], 0).unwrap();
        assert_eq!(sp.path_to(2).unwrap(), vec![0, 2]);
    }

    #[test]
    fn equal_paths_prefer_smaller_predecessor() {
        // square 0-1-3, 0-2-3, all weight 1
        let g = build(4, 0, 3, vec![unit(0, 2), unit(2, 3), unit(0, 1), unit(1, 3)]);
        let sp = shortest_paths(&g, &vec![int(1); 4], 0).unwrap();
        assert_eq!(sp.path_to(3).unwrap(), vec![0, 1, 3]);
    }

    #[test]
    fn closure_of_triangle() {
        let (g, w) = triangle();
        let mc = metric_closure(&g, &w, &[0, 1, 2]).unwrap();
        assert_eq!(mc.dist[0][1], int(1));
        assert_eq!(mc.dist[1][2], int(1));
        assert_eq!(mc.dist[0][2], int(2));
        assert_eq!(mc.expand(0, 2), vec![0, 1, 2]);
    }

    #[test]
    fn closure_of_path_endpoints() {
        let g = build(3, 0, 2, vec![unit(0, 1), unit(1, 2)]);
        let mc = metric_closure(&g, &[int(1), int(1)], &[0, 2]).unwrap();
        assert_eq!(mc.dist[0][1], int(2));
    }

    #[test]
    fn four_cycle_avoids_heavy_edge() {
        // cycle 0-1-2-3-0 with the 3-0 edge at weight 5
        let g = build(
            4,
            0,
            3,
            vec![unit(0, 1), unit(1, 2), unit(2, 3), edge(3, 0, int(1), int(5))],
        );
        let w = [int(1), int(1), int(1), int(5)];
        let mc = metric_closure(&g, &w, &[0, 3]).unwrap();
        // the two simple paths cost 5 and 1+1+1
        assert_eq!(mc.dist[0][1], int(3));
        assert_eq!(mc.expand(0, 1), vec![0, 1, 2, 3]);
    }

    #[test]
    fn walk_rejects_non_adjacent_steps() {
        let (g, w) = triangle();
        assert!(Walk::evaluate(&g, vec![0, 1, 2], &w).is_ok());
        let g2 = build(3, 0, 2, vec![unit(0, 1), unit(1, 2)]);
        assert!(matches!(
            Walk::evaluate(&g2, vec![0, 2], &[int(1), int(1)]),
            Err(GraphError::NotAdjacent(0, 2))
        ));
    }
}
