//! Online policies. Each one sees only the [`KnowledgeView`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::KnowledgeView;
use crate::graph::{dijkstra, VertexId, Walk};
use crate::rational::Weight;
use crate::solver::{optimal_cover_walk, worst_case_cover_walk, CoverTask, SolverConfig, SolverError};

pub trait Explorer {
    fn name(&self) -> &'static str;

    /// Next vertex, adjacent to the agent's position.
    fn decide(&mut self, view: &KnowledgeView) -> Result<VertexId, SolverError>;

    /// Pessimistic cost of the plan behind the last decision, if there is one.
    fn plan_cost(&self) -> Option<Weight> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExplorerKind {
    Precompute,
    Adaptive,
    Nn,
}

impl ExplorerKind {
    pub const ALL: [ExplorerKind; 3] = [ExplorerKind::Precompute, ExplorerKind::Adaptive, ExplorerKind::Nn];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExplorerKind::Precompute => "precompute",
            ExplorerKind::Adaptive => "adaptive",
            ExplorerKind::Nn => "nn",
        }
    }

    pub fn build(&self, solver: SolverConfig) -> Box<dyn Explorer + Send> {
        match self {
            ExplorerKind::Precompute => Box::new(Precompute::new(solver)),
            ExplorerKind::Adaptive => Box::new(Adaptive::new(solver)),
            ExplorerKind::Nn => Box::new(NearestNeighbor),
        }
    }
}

impl fmt::Display for ExplorerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExplorerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "precompute" => Ok(ExplorerKind::Precompute),
            "adaptive" => Ok(ExplorerKind::Adaptive),
            "nn" | "nearest-neighbor" => Ok(ExplorerKind::Nn),
            other => Err(format!(
                "unknown explorer {other:?} (expected precompute, adaptive or nn)"
            )),
        }
    }
}

/// Solves the instance once on lower bounds and walks that plan regardless of
/// what gets revealed.
#[derive(Debug, Clone)]
pub struct Precompute {
    solver: SolverConfig,
    plan: Option<Vec<VertexId>>,
}

impl Precompute {
    pub fn new(solver: SolverConfig) -> Self {
        Self { solver, plan: None }
    }
}

impl Explorer for Precompute {
    fn name(&self) -> &'static str {
        "precompute"
    }

    fn decide(&mut self, view: &KnowledgeView) -> Result<VertexId, SolverError> {
        if self.plan.is_none() {
            let graph = view.graph();
            let task = CoverTask::full(graph, graph.lower_bounds());
            self.plan = Some(optimal_cover_walk(graph, &task, &self.solver)?.walk.vertices);
        }
        let plan = self.plan.as_ref().unwrap();
        // the plan is replayed verbatim, so the step index is the history length
        Ok(plan[view.history().len() + 1])
    }
}

/// Replans a worst-case covering walk to t at every vertex and takes its
/// first step.
#[derive(Debug, Clone)]
pub struct Adaptive {
    solver: SolverConfig,
    plan: Option<Vec<VertexId>>,
    plan_cost: Option<Weight>,
}

impl Adaptive {
    pub fn new(solver: SolverConfig) -> Self {
        Self {
            solver,
            plan: None,
            plan_cost: None,
        }
    }
}

impl Explorer for Adaptive {
    fn name(&self) -> &'static str {
        "adaptive"
    }

    fn decide(&mut self, view: &KnowledgeView) -> Result<VertexId, SolverError> {
        let pessimistic = view.pessimistic_weights();
        // The rest of the previous plan is still feasible and can only have
        // become cheaper; its cost bounds the new search.
        let seed = self
            .plan
            .as_ref()
            .filter(|p| p.len() > 1 && p[1] == view.position())
            .and_then(|p| Walk::evaluate(view.graph(), p[1..].to_vec(), &pessimistic).ok())
            .map(|w| w.cost());
        let sol = worst_case_cover_walk(view, view.graph().end(), &self.solver, seed.as_ref())?;
        let next = sol.walk.vertices[1];
        self.plan = Some(sol.walk.vertices);
        self.plan_cost = Some(sol.cost);
        Ok(next)
    }

    fn plan_cost(&self) -> Option<Weight> {
        self.plan_cost.clone()
    }
}

/// Heads for the closest unvisited vertex other than t, pricing hidden edges
/// at their upper bound; t comes last.
#[derive(Debug, Clone, Copy, Default)]
pub struct NearestNeighbor;

impl Explorer for NearestNeighbor {
    fn name(&self) -> &'static str {
        "nn"
    }

    fn decide(&mut self, view: &KnowledgeView) -> Result<VertexId, SolverError> {
        let graph = view.graph();
        let t = graph.end();
        let sp = dijkstra(graph, &view.pessimistic_weights(), view.position());
        let target = view
            .unvisited()
            .filter(|&v| v != t)
            .min_by(|&a, &b| sp.dist[a].cmp(&sp.dist[b]).then(a.cmp(&b)))
            .unwrap_or(t);
        let path = sp.path_to(target).expect("validated graphs are connected");
        Ok(path[1])
    }
}
