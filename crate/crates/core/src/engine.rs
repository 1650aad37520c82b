//! Episode mechanics: the agent walks, edges are revealed when an endpoint is
//! first visited, and explorers only ever see a [`KnowledgeView`].

use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explorers::Explorer;
use crate::graph::{alpha_of, EdgeId, EstimateGraph, GraphError, VertexId, Walk, WeightAssignment};
use crate::rational::{self, Weight};
use crate::solver::{local_search_cover, optimal_cover_walk, CoverTask, SolverConfig, SolverError};

/// Supplies actual weights on demand. Adaptive adversaries see the agent's
/// history through the view; they must answer deterministically.
pub trait WeightSource: Send {
    fn name(&self) -> String;

    /// Weight of `edge`, revealed because `trigger` was just visited. `view`
    /// already has `trigger` marked visited.
    fn reveal(&mut self, graph: &EstimateGraph, edge: EdgeId, trigger: VertexId, view: &KnowledgeView) -> Weight;

    /// Weight for an edge never revealed during the episode, fixed after it
    /// ends so the offline optimum can be computed.
    fn complete(&mut self, graph: &EstimateGraph, edge: EdgeId, view: &KnowledgeView) -> Weight;

    /// A feasible offline walk for the realized weights, if the source knows
    /// one. Used when the exact oracle is out of reach.
    fn certificate(&self, _graph: &EstimateGraph, _realized: &WeightAssignment) -> Option<Vec<VertexId>> {
        None
    }
}

/// A fixed, non-adaptive weight assignment.
#[derive(Debug, Clone)]
pub struct FixedAssignment {
    weights: WeightAssignment,
    certificate: Option<Vec<VertexId>>,
}

impl FixedAssignment {
    pub fn new(weights: WeightAssignment) -> Self {
        Self {
            weights,
            certificate: None,
        }
    }

    pub fn with_certificate(weights: WeightAssignment, certificate: Vec<VertexId>) -> Self {
        Self {
            weights,
            certificate: Some(certificate),
        }
    }

    pub fn weights(&self) -> &WeightAssignment {
        &self.weights
    }
}

impl WeightSource for FixedAssignment {
    fn name(&self) -> String {
        "fixed".into()
    }

    fn reveal(&mut self, _: &EstimateGraph, edge: EdgeId, _: VertexId, _: &KnowledgeView) -> Weight {
        self.weights.get(edge).clone()
    }

    fn complete(&mut self, _: &EstimateGraph, edge: EdgeId, _: &KnowledgeView) -> Weight {
        self.weights.get(edge).clone()
    }

    fn certificate(&self, _: &EstimateGraph, _: &WeightAssignment) -> Option<Vec<VertexId>> {
        self.certificate.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub from: VertexId,
    pub to: VertexId,
    pub edge: EdgeId,
    #[serde(with = "rational::serde_pq")]
    pub weight: Weight,
    /// Pessimistic cost of the explorer's plan when it chose this move.
    #[serde(
        with = "rational::serde_pq::option",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub plan_cost: Option<Weight>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevealRecord {
    pub edge: EdgeId,
    #[serde(with = "rational::serde_pq")]
    pub weight: Weight,
    /// Vertex whose visit revealed the edge; absent for post-hoc completion.
    pub trigger: Option<VertexId>,
    pub post_hoc: bool,
}

/// Everything an explorer may know: structure, intervals, and the weights of
/// edges incident to visited vertices.
#[derive(Debug, Clone)]
pub struct KnowledgeView {
    graph: Arc<EstimateGraph>,
    visited: Vec<bool>,
    visit_order: Vec<VertexId>,
    position: VertexId,
    revealed: Vec<Option<Weight>>,
    paid: Weight,
    history: Vec<MoveRecord>,
}

impl KnowledgeView {
    pub fn graph(&self) -> &EstimateGraph {
        &self.graph
    }

    pub fn position(&self) -> VertexId {
        self.position
    }

    pub fn is_visited(&self, v: VertexId) -> bool {
        self.visited[v]
    }

    /// Distinct vertices in the order they were first reached.
    pub fn visit_order(&self) -> &[VertexId] {
        &self.visit_order
    }

    pub fn unvisited(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.visited.len()).filter(|&v| !self.visited[v])
    }

    pub fn all_visited(&self) -> bool {
        self.visit_order.len() == self.visited.len()
    }

    pub fn revealed(&self, edge: EdgeId) -> Option<&Weight> {
        self.revealed[edge].as_ref()
    }

    pub fn paid(&self) -> &Weight {
        &self.paid
    }

    pub fn history(&self) -> &[MoveRecord] {
        &self.history
    }

    /// Revealed edges at their actual weight, the rest at their upper bound.
    pub fn pessimistic_weights(&self) -> Vec<Weight> {
        self.graph
            .edges()
            .iter()
            .zip(&self.revealed)
            .map(|(e, r)| r.clone().unwrap_or_else(|| e.upper.clone()))
            .collect()
    }

    /// Complete when every vertex is visited and the agent stands on t.
    pub fn is_complete(&self) -> bool {
        self.all_visited() && self.position == self.graph.end()
    }

    /// The walk taken so far.
    pub fn walk(&self) -> Vec<VertexId> {
        let mut walk = vec![self.graph.start()];
        walk.extend(self.history.iter().map(|m| m.to));
        walk
    }

    /// Checks the view's own invariants; returns the first one broken.
    pub fn check_invariants(&self) -> Result<(), String> {
        let g = &self.graph;
        if !self.visited[g.start()] {
            return Err("start vertex not visited".into());
        }
        if !self.visited[self.position] {
            return Err(format!("agent stands on unvisited vertex {}", self.position));
        }
        for (id, e) in g.edges().iter().enumerate() {
            let should = self.visited[e.a] || self.visited[e.b];
            match (&self.revealed[id], should) {
                (Some(w), true) => {
                    if !e.contains(w) {
                        return Err(format!("edge {id}: revealed weight outside its interval"));
                    }
                }
                (None, false) => {}
                (Some(_), false) => return Err(format!("edge {id} revealed without a visited endpoint")),
                (None, true) => return Err(format!("edge {id} has a visited endpoint but is hidden")),
            }
        }
        let sum = self.history.iter().fold(Weight::zero(), |acc, m| acc + &m.weight);
        if sum != self.paid {
            return Err("paid differs from the sum of move weights".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("weight source returned {weight} for edge {edge}, outside [{lower}, {upper}]")]
    AdversaryFault {
        edge: EdgeId,
        weight: String,
        lower: String,
        upper: String,
    },
    #[error("illegal move from {from} to {to}: not adjacent")]
    IllegalMove { from: VertexId, to: VertexId },
    #[error("episode did not finish within {cap} steps")]
    StepCap { cap: usize },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// One running episode. Owns the weight source so explorers cannot reach it.
pub struct Episode {
    view: KnowledgeView,
    source: Box<dyn WeightSource>,
    reveals: Vec<RevealRecord>,
}

/// Places the agent on s and reveals s's incident edges.
pub fn start_episode(graph: Arc<EstimateGraph>, source: Box<dyn WeightSource>) -> Result<Episode, EngineError> {
    let n = graph.vertex_count();
    let m = graph.edge_count();
    let s = graph.start();
    let view = KnowledgeView {
        graph,
        visited: vec![false; n],
        visit_order: Vec::new(),
        position: s,
        revealed: vec![None; m],
        paid: Weight::zero(),
        history: Vec::new(),
    };
    let mut episode = Episode {
        view,
        source,
        reveals: Vec::new(),
    };
    episode.visit(s)?;
    Ok(episode)
}

impl Episode {
    pub fn view(&self) -> &KnowledgeView {
        &self.view
    }

    pub fn reveals(&self) -> &[RevealRecord] {
        &self.reveals
    }

    pub fn source_name(&self) -> String {
        self.source.name()
    }

    fn visit(&mut self, v: VertexId) -> Result<(), EngineError> {
        if self.view.visited[v] {
            return Ok(());
        }
        self.view.visited[v] = true;
        self.view.visit_order.push(v);
        let graph = Arc::clone(&self.view.graph);
        for &(_, e) in graph.neighbors(v) {
            if self.view.revealed[e].is_some() {
                continue;
            }
            let w = self.source.reveal(&graph, e, v, &self.view);
            check_interval(&graph, e, &w)?;
            self.view.revealed[e] = Some(w.clone());
            self.reveals.push(RevealRecord {
                edge: e,
                weight: w,
                trigger: Some(v),
                post_hoc: false,
            });
        }
        Ok(())
    }

    /// Moves the agent along the edge to `to`, paying its revealed weight.
    pub fn move_to(&mut self, to: VertexId, plan_cost: Option<Weight>) -> Result<(), EngineError> {
        let from = self.view.position;
        let edge = (to < self.view.graph.vertex_count())
            .then(|| self.view.graph.edge_between(from, to))
            .flatten()
            .ok_or(EngineError::IllegalMove { from, to })?;
        let weight = self.view.revealed[edge]
            .clone()
            .ok_or_else(|| EngineError::Invariant(format!("edge {edge} at the agent is unrevealed")))?;
        self.view.paid += &weight;
        self.view.position = to;
        self.view.history.push(MoveRecord {
            from,
            to,
            edge,
            weight,
            plan_cost,
        });
        self.visit(to)
    }

    /// Fixes every still-hidden edge via the source's completion rule and
    /// returns the full realized assignment.
    pub fn realize(&mut self) -> Result<WeightAssignment, EngineError> {
        let graph = Arc::clone(&self.view.graph);
        let mut weights = Vec::with_capacity(graph.edge_count());
        for e in 0..graph.edge_count() {
            let w = match &self.view.revealed[e] {
                Some(w) => w.clone(),
                None => {
                    let w = self.source.complete(&graph, e, &self.view);
                    check_interval(&graph, e, &w)?;
                    self.reveals.push(RevealRecord {
                        edge: e,
                        weight: w.clone(),
                        trigger: None,
                        post_hoc: true,
                    });
                    w
                }
            };
            weights.push(w);
        }
        Ok(WeightAssignment::new(&graph, weights)?)
    }

    pub fn certificate(&self, realized: &WeightAssignment) -> Option<Vec<VertexId>> {
        self.source.certificate(&self.view.graph, realized)
    }
}

fn check_interval(graph: &EstimateGraph, edge: EdgeId, w: &Weight) -> Result<(), EngineError> {
    let e = graph.edge(edge);
    if e.contains(w) {
        Ok(())
    } else {
        Err(EngineError::AdversaryFault {
            edge,
            weight: rational::format(w),
            lower: rational::format(&e.lower),
            upper: rational::format(&e.upper),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OfflineKind {
    Exact,
    Certificate,
}

impl OfflineKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OfflineKind::Exact => "exact",
            OfflineKind::Certificate => "certificate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub n: usize,
    pub edges: usize,
    pub s: VertexId,
    pub t: VertexId,
    #[serde(with = "rational::serde_pq")]
    pub alpha: Weight,
    pub uniform: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: InstanceSummary,
    pub source: String,
    pub explorer: String,
    pub moves: Vec<MoveRecord>,
    pub reveals: Vec<RevealRecord>,
    pub walk: Vec<VertexId>,
    #[serde(with = "rational::serde_pq")]
    pub online_cost: Weight,
    #[serde(with = "rational::serde_pq")]
    pub offline_cost: Weight,
    pub offline_kind: OfflineKind,
    pub offline_walk: Vec<VertexId>,
    #[serde(with = "rational::serde_pq::option", default)]
    pub certificate_cost: Option<Weight>,
    /// online / offline. With a certificate offline cost this is only a
    /// lower bound on the true ratio.
    #[serde(with = "rational::serde_pq")]
    pub ratio: Weight,
    pub ratio_is_lower_bound: bool,
    pub ratio_decimal: String,
    pub steps: usize,
    /// Realized weights, in edge order.
    #[serde(with = "rational::serde_pq::vec")]
    pub realized: Vec<Weight>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunConfig {
    pub solver: SolverConfig,
    /// Check the view's invariants after every move.
    pub check_invariants: bool,
}

/// Local-search rounds used to price the offline walk past the exact cap.
const FALLBACK_SEARCH_ROUNDS: usize = 50;

pub fn step_cap(graph: &EstimateGraph) -> usize {
    10 * graph.vertex_count() * graph.vertex_count()
}

/// Drives `explorer` until the walk is complete, then prices the offline
/// optimum on the realized weights.
pub fn run_episode(
    graph: Arc<EstimateGraph>,
    source: Box<dyn WeightSource>,
    explorer: &mut dyn Explorer,
    config: &RunConfig,
) -> Result<RunReport, EngineError> {
    let cap = step_cap(&graph);
    let mut episode = start_episode(Arc::clone(&graph), source)?;
    if config.check_invariants {
        episode.view.check_invariants().map_err(EngineError::Invariant)?;
    }
    while !episode.view.is_complete() {
        if episode.view.history.len() >= cap {
            return Err(EngineError::StepCap { cap });
        }
        let next = explorer.decide(&episode.view)?;
        episode.move_to(next, explorer.plan_cost())?;
        if config.check_invariants {
            episode.view.check_invariants().map_err(EngineError::Invariant)?;
        }
    }
    let realized = episode.realize()?;
    let own_walk = episode.view.walk();
    let online = episode.view.paid.clone();

    let certificate = match episode.certificate(&realized) {
        Some(vertices) => {
            let walk = Walk::evaluate(&graph, vertices, realized.as_slice())?;
            if walk.first() != graph.start()
                || walk.last() != graph.end()
                || !walk.covers(&(0..graph.vertex_count()).collect::<Vec<_>>())
            {
                return Err(EngineError::Invariant("certificate walk does not cover s..t".into()));
            }
            Some(walk)
        }
        None => None,
    };

    let task = CoverTask::full(&graph, realized.as_slice().to_vec());
    let (offline_cost, offline_kind, offline_walk) = match optimal_cover_walk(&graph, &task, &config.solver) {
        Ok(sol) => (sol.cost, OfflineKind::Exact, sol.walk.vertices),
        Err(e) if e.is_capacity() => {
            let mut best = Walk::evaluate(&graph, own_walk.clone(), realized.as_slice())?;
            let searched = local_search_cover(&graph, &task, FALLBACK_SEARCH_ROUNDS, 0)?.walk;
            for walk in certificate.iter().chain(std::iter::once(&searched)) {
                if walk.cost() < best.cost() {
                    best = walk.clone();
                }
            }
            (best.cost(), OfflineKind::Certificate, best.vertices)
        }
        Err(e) => return Err(e.into()),
    };
    if offline_kind == OfflineKind::Exact && online < offline_cost {
        return Err(EngineError::Invariant("online walk beats the exact optimum".into()));
    }
    let ratio = &online / &offline_cost;
    let profile = alpha_of(&graph);
    Ok(RunReport {
        instance: InstanceSummary {
            n: graph.vertex_count(),
            edges: graph.edge_count(),
            s: graph.start(),
            t: graph.end(),
            alpha: profile.alpha,
            uniform: profile.uniform,
        },
        source: episode.source_name(),
        explorer: explorer.name().to_string(),
        steps: episode.view.history.len(),
        moves: episode.view.history.clone(),
        reveals: episode.reveals.clone(),
        walk: own_walk,
        online_cost: online,
        offline_cost,
        offline_kind,
        offline_walk,
        certificate_cost: certificate.map(|c| c.cost()),
        ratio_decimal: rational::decimal6(&ratio),
        ratio,
        ratio_is_lower_bound: offline_kind == OfflineKind::Certificate,
        realized: realized.into_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeSpec, GraphSpec};
    use crate::rational::int;

    fn path(n: usize, lo: i64, hi: i64) -> Arc<EstimateGraph> {
        let edges = (0..n - 1)
            .map(|i| EdgeSpec {
                a: i,
                b: i + 1,
                lower: int(lo),
                upper: int(hi),
            })
            .collect();
        Arc::new(
            EstimateGraph::new(GraphSpec {
                n,
                start: 0,
                end: n - 1,
                edges,
            })
            .unwrap(),
        )
    }

    fn fixed(g: &EstimateGraph, w: Vec<Weight>) -> Box<dyn WeightSource> {
        Box::new(FixedAssignment::new(WeightAssignment::new(g, w).unwrap()))
    }

    #[test]
    fn start_reveals_incident_edges_only() {
        let g = path(2, 1, 1);
        let ep = start_episode(Arc::clone(&g), fixed(&g, vec![int(1)])).unwrap();
        assert_eq!(ep.view().revealed(0), Some(&int(1)));
        assert_eq!(ep.view().visit_order(), &[0]);
        assert!(ep.view().paid().is_zero());
    }

    #[test]
    fn star_center_reveals_everything() {
        let edges = (1..4)
            .map(|b| EdgeSpec {
                a: 0,
                b,
                lower: int(1),
                upper: int(2),
            })
            .collect();
        let g = Arc::new(
            EstimateGraph::new(GraphSpec {
                n: 4,
                start: 0,
                end: 3,
                edges,
            })
            .unwrap(),
        );
        let ep = start_episode(Arc::clone(&g), fixed(&g, vec![int(1), int(2), int(1)])).unwrap();
        assert!((0..3).all(|e| ep.view().revealed(e).is_some()));
    }

    #[test]
    fn moves_pay_and_revisits_repay() {
        let g = path(3, 1, 2);
        let mut ep = start_episode(Arc::clone(&g), fixed(&g, vec![int(2), int(1)])).unwrap();
        assert!(ep.view().revealed(1).is_none());
        ep.move_to(1, None).unwrap();
        assert!(ep.view().revealed(1).is_some());
        ep.move_to(0, None).unwrap();
        ep.move_to(1, None).unwrap();
        assert_eq!(ep.view().paid(), &int(6));
        ep.move_to(2, None).unwrap();
        assert!(ep.view().is_complete());
        ep.view().check_invariants().unwrap();
    }

    #[test]
    fn non_adjacent_move_is_rejected() {
        let g = path(3, 1, 1);
        let mut ep = start_episode(Arc::clone(&g), fixed(&g, vec![int(1), int(1)])).unwrap();
        assert!(matches!(
            ep.move_to(2, None),
            Err(EngineError::IllegalMove { from: 0, to: 2 })
        ));
        assert!(matches!(ep.move_to(9, None), Err(EngineError::IllegalMove { .. })));
    }

    struct Liar;
    impl WeightSource for Liar {
        fn name(&self) -> String {
            "liar".into()
        }
        fn reveal(&mut self, _: &EstimateGraph, _: EdgeId, _: VertexId, _: &KnowledgeView) -> Weight {
            int(100)
        }
        fn complete(&mut self, _: &EstimateGraph, _: EdgeId, _: &KnowledgeView) -> Weight {
            int(100)
        }
    }

    #[test]
    fn out_of_interval_weight_is_an_adversary_fault() {
        let g = path(2, 1, 2);
        assert!(matches!(
            start_episode(g, Box::new(Liar)),
            Err(EngineError::AdversaryFault { edge: 0, .. })
        ));
    }
}
