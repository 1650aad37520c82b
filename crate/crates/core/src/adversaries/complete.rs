use std::sync::Arc;

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{clamp_alpha, BuildError};
use crate::engine::{KnowledgeView, WeightSource};
use crate::graph::{EdgeId, EdgeSpec, EstimateGraph, GraphSpec, VertexId};
use crate::rational::{self, Weight};

/// Complete graph on `vertices` vertices with the two-phase adversary; the
/// first `phase_len` visited vertices form the cheap set A.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompleteAdvSpec {
    pub vertices: usize,
    pub phase_len: usize,
    #[serde(with = "rational::serde_pq")]
    pub alpha: Weight,
}

impl CompleteAdvSpec {
    /// K_{2k} with a phase of k rounds.
    pub fn balanced(k: usize, alpha: Weight) -> Self {
        Self {
            vertices: 2 * k,
            phase_len: k,
            alpha,
        }
    }

    /// K_n with A the larger half when n is odd.
    pub fn for_order(n: usize, alpha: Weight) -> Self {
        Self {
            vertices: n,
            phase_len: n.div_ceil(2),
            alpha,
        }
    }
}

/// K_{n,n}: left side 0..n, right side n..2n, s = 0 and t = 2n-1 on
/// different sides. A is the first n visited vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteAdvSpec {
    pub n: usize,
    #[serde(with = "rational::serde_pq")]
    pub alpha: Weight,
}

/// Hands out weight 1 while at most `phase_len` vertices are visited; after
/// that, alpha unless the edge touches A.
#[derive(Debug, Clone)]
pub struct PhaseAdversary {
    alpha: Weight,
    phase_len: usize,
}

impl PhaseAdversary {
    pub fn new(alpha: Weight, phase_len: usize) -> Self {
        Self { alpha, phase_len }
    }

    fn in_a(&self, v: VertexId, view: &KnowledgeView) -> bool {
        view.visit_order().iter().take(self.phase_len).any(|&x| x == v)
    }

    fn price(&self, graph: &EstimateGraph, edge: EdgeId, view: &KnowledgeView) -> Weight {
        let e = graph.edge(edge);
        if view.visit_order().len() <= self.phase_len || self.in_a(e.a, view) || self.in_a(e.b, view) {
            Weight::one()
        } else {
            self.alpha.clone()
        }
    }
}

impl WeightSource for PhaseAdversary {
    fn name(&self) -> String {
        format!("phase(A={}, alpha={})", self.phase_len, rational::format(&self.alpha))
    }

    fn reveal(&mut self, graph: &EstimateGraph, edge: EdgeId, _: VertexId, view: &KnowledgeView) -> Weight {
        self.price(graph, edge, view)
    }

    fn complete(&mut self, graph: &EstimateGraph, edge: EdgeId, view: &KnowledgeView) -> Weight {
        self.price(graph, edge, view)
    }
}

fn uniform_edge(a: VertexId, b: VertexId, alpha: &Weight) -> EdgeSpec {
    EdgeSpec {
        a,
        b,
        lower: Weight::one(),
        upper: alpha.clone(),
    }
}

pub fn complete_graph(n: usize, alpha: &Weight) -> Result<EstimateGraph, BuildError> {
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            edges.push(uniform_edge(a, b, alpha));
        }
    }
    Ok(EstimateGraph::new(GraphSpec {
        n,
        start: 0,
        end: n.saturating_sub(1),
        edges,
    })?)
}

pub fn bipartite_graph(n: usize, alpha: &Weight) -> Result<EstimateGraph, BuildError> {
    let mut edges = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in n..2 * n {
            edges.push(uniform_edge(a, b, alpha));
        }
    }
    Ok(EstimateGraph::new(GraphSpec {
        n: 2 * n,
        start: 0,
        end: 2 * n - 1,
        edges,
    })?)
}

/// Uniform [1, alpha] complete graph with s = 0, t = n-1 and the phase
/// adversary. Alpha above 2 is clamped.
pub fn build_complete_adversary(spec: &CompleteAdvSpec) -> Result<(Arc<EstimateGraph>, PhaseAdversary), BuildError> {
    if spec.vertices < 2 {
        return Err(BuildError::InvalidSpec(
            "complete graph needs at least 2 vertices".into(),
        ));
    }
    if spec.phase_len == 0 || spec.phase_len > spec.vertices {
        return Err(BuildError::InvalidSpec(format!(
            "phase length {} outside 1..={}",
            spec.phase_len, spec.vertices
        )));
    }
    let alpha = clamp_alpha(&spec.alpha)?;
    let graph = complete_graph(spec.vertices, &alpha)?;
    Ok((Arc::new(graph), PhaseAdversary::new(alpha, spec.phase_len)))
}

pub fn build_bipartite_adversary(spec: &BipartiteAdvSpec) -> Result<(Arc<EstimateGraph>, PhaseAdversary), BuildError> {
    if spec.n < 1 {
        return Err(BuildError::InvalidSpec("bipartite side must be at least 1".into()));
    }
    let alpha = clamp_alpha(&spec.alpha)?;
    let graph = bipartite_graph(spec.n, &alpha)?;
    Ok((Arc::new(graph), PhaseAdversary::new(alpha, spec.n)))
}
