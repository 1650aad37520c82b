//! Recursive general-graph lower bound.
//!
//! A depth-0 component is a path of k+1 vertices with unit edges. A depth-i
//! component is a row `P, C_1, .., C_k, Q` where P and Q are fresh vertices,
//! each C_j is a depth-(i-1) component, and consecutive row members are
//! joined between their end vertices: P to both ends of C_1, all four end
//! pairs of C_j and C_{j+1}, both ends of C_k to Q. These junction edges are
//! announced `[k^i, alpha k^i]`.
//!
//! Both ends of a component look alike, so the adversary labels lazily: the
//! end through which the agent first enters a unit is that unit's start.
//! A junction edge is cheap exactly when its endpoint in the earlier-touched
//! of its two units is that unit's start.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

use super::{clamp_alpha, BuildError};
use crate::engine::{KnowledgeView, WeightSource};
use crate::graph::{EdgeId, EdgeSpec, EstimateGraph, GraphSpec, VertexId, WeightAssignment};
use crate::rational::{self, int, Weight};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecursiveSpec {
    pub k: usize,
    pub depth: usize,
    #[serde(with = "rational::serde_pq")]
    pub alpha: Weight,
}

pub fn recursive_vertex_count(k: usize, depth: usize) -> usize {
    (0..depth).fold(k + 1, |size, _| 2 + k * size)
}

pub fn recursive_edge_count(k: usize, depth: usize) -> usize {
    (0..depth).fold(k, |edges, _| k * edges + 4 * k)
}

fn pow(k: usize, i: usize) -> Weight {
    Weight::from_integer(Pow::pow(BigInt::from(k), i))
}

/// Lower bound on any explorer's cost: i(alpha k + 1)k^i + k^(i+1).
pub fn recursive_online_bound(k: usize, depth: usize, alpha: &Weight) -> Weight {
    let i = int(depth as i64);
    let kk = int(k as i64);
    i * (alpha * &kk + int(1)) * pow(k, depth) + pow(k, depth + 1)
}

/// Offline cost: i(k + 1)k^i + k^(i+1).
pub fn recursive_offline_cost(k: usize, depth: usize) -> Weight {
    recursive_online_bound(k, depth, &Weight::one())
}

type UnitId = usize;

#[derive(Debug, Clone)]
enum UnitKind {
    Single,
    Path(Vec<VertexId>),
    Component(Vec<UnitId>),
}

#[derive(Debug, Clone)]
struct Unit {
    kind: UnitKind,
    /// Structural first and last vertex.
    ends: (VertexId, VertexId),
    /// Position in the parent's row.
    slot: usize,
}

#[derive(Debug, Clone, Copy)]
struct Junction {
    left: UnitId,
    right: UnitId,
    level: usize,
}

#[derive(Debug, Clone)]
struct Layout {
    units: Vec<Unit>,
    /// Innermost-first chain of units containing each vertex.
    containing: Vec<Vec<UnitId>>,
    junctions: HashMap<EdgeId, Junction>,
    root: UnitId,
}

struct Builder {
    k: usize,
    alpha: Weight,
    next_vertex: usize,
    units: Vec<Unit>,
    edges: Vec<EdgeSpec>,
    junctions: HashMap<EdgeId, Junction>,
}

impl Builder {
    fn vertex(&mut self) -> VertexId {
        self.next_vertex += 1;
        self.next_vertex - 1
    }

    fn unit(&mut self, kind: UnitKind, ends: (VertexId, VertexId)) -> UnitId {
        self.units.push(Unit { kind, ends, slot: 0 });
        self.units.len() - 1
    }

    fn build(&mut self, depth: usize) -> UnitId {
        if depth == 0 {
            let path: Vec<VertexId> = (0..=self.k).map(|_| self.vertex()).collect();
            for w in path.windows(2) {
                self.edges.push(EdgeSpec {
                    a: w[0],
                    b: w[1],
                    lower: int(1),
                    upper: int(1),
                });
            }
            let ends = (path[0], path[self.k]);
            return self.unit(UnitKind::Path(path), ends);
        }
        let p = self.vertex();
        let p_unit = self.unit(UnitKind::Single, (p, p));
        let mut row = vec![p_unit];
        for _ in 0..self.k {
            row.push(self.build(depth - 1));
        }
        let q = self.vertex();
        row.push(self.unit(UnitKind::Single, (q, q)));
        let lower = pow(self.k, depth);
        let upper = &lower * &self.alpha;
        for (slot, pair) in row.windows(2).enumerate() {
            let (l, r) = (pair[0], pair[1]);
            let mut left_ends = vec![self.units[l].ends.0, self.units[l].ends.1];
            let mut right_ends = vec![self.units[r].ends.0, self.units[r].ends.1];
            left_ends.dedup();
            right_ends.dedup();
            for &a in &left_ends {
                for &b in &right_ends {
                    self.junctions.insert(
                        self.edges.len(),
                        Junction {
                            left: l,
                            right: r,
                            level: depth,
                        },
                    );
                    self.edges.push(EdgeSpec {
                        a,
                        b,
                        lower: lower.clone(),
                        upper: upper.clone(),
                    });
                }
            }
            self.units[l].slot = slot;
        }
        self.units[*row.last().unwrap()].slot = row.len() - 1;
        self.unit(UnitKind::Component(row), (p, q))
    }
}

impl Layout {
    fn vertices_of(&self, u: UnitId, out: &mut Vec<VertexId>) {
        match &self.units[u].kind {
            UnitKind::Single => out.push(self.units[u].ends.0),
            UnitKind::Path(p) => out.extend(p),
            UnitKind::Component(row) => row.iter().for_each(|&c| self.vertices_of(c, out)),
        }
    }
}

/// Lazily labelled adversary for the recursive construction.
#[derive(Debug, Clone)]
pub struct RecursiveAdversary {
    k: usize,
    alpha: Weight,
    layout: Arc<Layout>,
}

impl RecursiveAdversary {
    /// Touch index and start vertex of every unit the agent has entered.
    fn touches(&self, view: &KnowledgeView) -> Vec<Option<(usize, VertexId)>> {
        let mut out = vec![None; self.layout.units.len()];
        for (time, &v) in view.visit_order().iter().enumerate() {
            for &u in &self.layout.containing[v] {
                if out[u].is_none() {
                    out[u] = Some((time, v));
                }
            }
        }
        out
    }

    fn price(&self, graph: &EstimateGraph, edge: EdgeId, view: &KnowledgeView) -> Weight {
        let Some(j) = self.layout.junctions.get(&edge) else {
            return graph.edge(edge).lower.clone();
        };
        let touches = self.touches(view);
        // untouched units come after touched ones, in row order; an untouched
        // unit starts at its structural first end
        let key = |u: UnitId| match touches[u] {
            Some((t, _)) => (0, t, 0),
            None => (1, 0, self.layout.units[u].slot),
        };
        let first = if key(j.left) <= key(j.right) { j.left } else { j.right };
        let start = touches[first].map_or(self.layout.units[first].ends.0, |(_, v)| v);
        let e = graph.edge(edge);
        let endpoint = if self.layout.containing[e.a].contains(&first) {
            e.a
        } else {
            e.b
        };
        let base = pow(self.k, j.level);
        if endpoint == start {
            base
        } else {
            base * &self.alpha
        }
    }

    /// Cheapest traversal that passes every unit in one go, choosing each
    /// sub-component's direction by dynamic programming on realized weights.
    pub fn certificate_walk(&self, graph: &EstimateGraph, realized: &WeightAssignment) -> Vec<VertexId> {
        let mut memo = HashMap::new();
        let root = &self.layout.units[self.layout.root];
        self.traverse(self.layout.root, root.ends.0, graph, realized, &mut memo)
            .1
    }

    /// Cost and vertex sequence to cover unit `u` entering at `from` and
    /// leaving at its other end.
    fn traverse(
        &self,
        u: UnitId,
        from: VertexId,
        graph: &EstimateGraph,
        w: &WeightAssignment,
        memo: &mut HashMap<(UnitId, VertexId), (Weight, Vec<VertexId>)>,
    ) -> (Weight, Vec<VertexId>) {
        if let Some(hit) = memo.get(&(u, from)) {
            return hit.clone();
        }
        let unit = &self.layout.units[u];
        let result = match &unit.kind {
            UnitKind::Single => (Weight::default(), vec![from]),
            UnitKind::Path(p) => {
                let mut seq = p.clone();
                if from != p[0] {
                    seq.reverse();
                }
                let cost = seq
                    .windows(2)
                    .map(|x| w.get(graph.edge_between(x[0], x[1]).unwrap()).clone())
                    .sum();
                (cost, seq)
            }
            UnitKind::Component(row) => {
                let mut row = row.clone();
                if from != unit.ends.0 {
                    row.reverse();
                }
                // best[e] = cheapest prefix ending at exit vertex e of the current unit
                let mut best: Vec<(VertexId, Weight, Vec<VertexId>)> = vec![(from, Weight::default(), vec![from])];
                for &child in &row[1..] {
                    let (c0, c1) = self.layout.units[child].ends;
                    let entries: Vec<VertexId> = if c0 == c1 { vec![c0] } else { vec![c0, c1] };
                    let mut next: Vec<(VertexId, Weight, Vec<VertexId>)> = Vec::new();
                    for &entry in &entries {
                        let (inner, seq) = self.traverse(child, entry, graph, w, memo);
                        let exit = *seq.last().unwrap();
                        let candidate = best
                            .iter()
                            .map(|(at, cost, walk)| {
                                let hop = w.get(graph.edge_between(*at, entry).unwrap());
                                (cost + hop + &inner, walk)
                            })
                            .min_by(|a, b| a.0.cmp(&b.0))
                            .unwrap();
                        let mut walk = candidate.1.clone();
                        walk.extend(&seq);
                        next.push((exit, candidate.0, walk));
                    }
                    best = next;
                }
                let (_, cost, walk) = best.into_iter().min_by(|a, b| a.1.cmp(&b.1)).unwrap();
                (cost, walk)
            }
        };
        memo.insert((u, from), result.clone());
        result
    }
}

impl WeightSource for RecursiveAdversary {
    fn name(&self) -> String {
        format!("recursive(k={}, alpha={})", self.k, rational::format(&self.alpha))
    }

    fn reveal(&mut self, graph: &EstimateGraph, edge: EdgeId, _: VertexId, view: &KnowledgeView) -> Weight {
        self.price(graph, edge, view)
    }

    fn complete(&mut self, graph: &EstimateGraph, edge: EdgeId, view: &KnowledgeView) -> Weight {
        self.price(graph, edge, view)
    }

    fn certificate(&self, graph: &EstimateGraph, realized: &WeightAssignment) -> Option<Vec<VertexId>> {
        Some(self.certificate_walk(graph, realized))
    }
}

/// Builds the depth-`depth` construction with s = P and t = Q of the
/// outermost component (the two path ends at depth 0).
pub fn build_recursive(spec: &RecursiveSpec) -> Result<(Arc<EstimateGraph>, RecursiveAdversary), BuildError> {
    if spec.k < 2 {
        return Err(BuildError::InvalidSpec(format!("k = {} must be at least 2", spec.k)));
    }
    let n = recursive_vertex_count(spec.k, spec.depth);
    if n > 100_000 {
        return Err(BuildError::InvalidSpec(format!("{n} vertices is too many")));
    }
    let alpha = clamp_alpha(&spec.alpha)?;
    let mut b = Builder {
        k: spec.k,
        alpha: alpha.clone(),
        next_vertex: 0,
        units: Vec::new(),
        edges: Vec::new(),
        junctions: HashMap::new(),
    };
    let root = b.build(spec.depth);
    let mut layout = Layout {
        units: b.units,
        containing: vec![Vec::new(); n],
        junctions: b.junctions,
        root,
    };
    // units are pushed children first, so this yields innermost-first chains
    for u in 0..layout.units.len() {
        let mut vs = Vec::new();
        layout.vertices_of(u, &mut vs);
        for v in vs {
            layout.containing[v].push(u);
        }
    }
    let (s, t) = layout.units[root].ends;
    let graph = EstimateGraph::new(GraphSpec {
        n,
        start: s,
        end: t,
        edges: b.edges,
    })?;
    let adversary = RecursiveAdversary {
        k: spec.k,
        alpha,
        layout: Arc::new(layout),
    };
    Ok((Arc::new(graph), adversary))
}
