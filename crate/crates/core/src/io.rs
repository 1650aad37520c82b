//! On-disk formats: plain instances (optionally with actual weights) and
//! named adversary configurations.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversaries::{
    build_bipartite_adversary, build_complete_adversary, build_grid_trap, build_recursive, random_instance,
    BipartiteAdvSpec, BuildError, CompleteAdvSpec, GridSpec, IntervalLaw, RandomSpec, RecursiveSpec,
};
use crate::engine::{FixedAssignment, WeightSource};
use crate::graph::{EdgeSpec, EstimateGraph, GraphError, GraphSpec, VertexId, WeightAssignment};
use crate::rational::{self, Weight};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("instance has no actual weights (edges without \"actual\": {missing:?})")]
    MissingActuals { missing: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceEdge {
    pub a: VertexId,
    pub b: VertexId,
    #[serde(with = "rational::serde_pq")]
    pub lower: Weight,
    #[serde(with = "rational::serde_pq")]
    pub upper: Weight,
    #[serde(
        with = "rational::serde_pq::option",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub actual: Option<Weight>,
}

/// `{"n", "s", "t", "edges": [{"a", "b", "lower", "upper", "actual"?}]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub s: VertexId,
    pub t: VertexId,
    pub edges: Vec<InstanceEdge>,
}

impl InstanceFile {
    pub fn new(graph: &EstimateGraph, actual: Option<&WeightAssignment>) -> Self {
        let edges = graph
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| InstanceEdge {
                a: e.a,
                b: e.b,
                lower: e.lower.clone(),
                upper: e.upper.clone(),
                actual: actual.map(|w| w.get(i).clone()),
            })
            .collect();
        Self {
            n: graph.vertex_count(),
            s: graph.start(),
            t: graph.end(),
            edges,
        }
    }

    pub fn spec(&self) -> GraphSpec {
        GraphSpec {
            n: self.n,
            start: self.s,
            end: self.t,
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

    pub fn graph(&self) -> Result<EstimateGraph, IoError> {
        Ok(EstimateGraph::new(self.spec())?)
    }

    pub fn has_actuals(&self) -> bool {
        self.edges.iter().all(|e| e.actual.is_some())
    }

    /// The graph and its actual weights; every edge must carry one.
    pub fn with_actuals(&self) -> Result<(EstimateGraph, WeightAssignment), IoError> {
        let missing: Vec<usize> = (0..self.edges.len())
            .filter(|&i| self.edges[i].actual.is_none())
            .collect();
        if !missing.is_empty() {
            return Err(IoError::MissingActuals { missing });
        }
        let graph = self.graph()?;
        let weights = self.edges.iter().map(|e| e.actual.clone().unwrap()).collect();
        let weights = WeightAssignment::new(&graph, weights)?;
        Ok((graph, weights))
    }
}

/// An adaptive adversary, referenced by family and parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AdversaryConfig {
    Recursive(RecursiveSpec),
    Complete(CompleteAdvSpec),
    Bipartite(BipartiteAdvSpec),
}

impl AdversaryConfig {
    pub fn family(&self) -> &'static str {
        match self {
            Self::Recursive(_) => "recursive",
            Self::Complete(_) => "complete",
            Self::Bipartite(_) => "bipartite",
        }
    }

    pub fn build(&self) -> Result<(Arc<EstimateGraph>, Box<dyn WeightSource>), BuildError> {
        Ok(match self {
            Self::Recursive(spec) => {
                let (g, adv) = build_recursive(spec)?;
                (g, Box::new(adv))
            }
            Self::Complete(spec) => {
                let (g, adv) = build_complete_adversary(spec)?;
                (g, Box::new(adv))
            }
            Self::Bipartite(spec) => {
                let (g, adv) = build_bipartite_adversary(spec)?;
                (g, Box::new(adv))
            }
        })
    }
}

/// Adversary config as written by `generate`: the parameters plus the
/// announced instance for inspection. Only the parameters are read back.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigFile {
    #[serde(flatten)]
    pub adversary: AdversaryConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceFile>,
}

/// Anything `run` accepts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scenario {
    Adversary(ConfigFile),
    Instance(InstanceFile),
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenarios always serialize")
    }

    /// Graph plus weight source ready for an episode. Plain instances need
    /// actual weights.
    pub fn build(&self) -> Result<(Arc<EstimateGraph>, Box<dyn WeightSource>), IoError> {
        match self {
            Self::Adversary(cfg) => Ok(cfg.adversary.build()?),
            Self::Instance(inst) => {
                let (g, w) = inst.with_actuals()?;
                Ok((Arc::new(g), Box::new(FixedAssignment::new(w))))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Recursive,
    Complete,
    Bipartite,
    Grid,
    Random,
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "recursive" => Ok(Family::Recursive),
            "complete" => Ok(Family::Complete),
            "bipartite" => Ok(Family::Bipartite),
            "grid" => Ok(Family::Grid),
            "random" => Ok(Family::Random),
            other => Err(format!(
                "unknown family {other:?} (expected recursive, complete, bipartite, grid or random)"
            )),
        }
    }
}

/// Parameters for [`generate`]; each family reads the ones it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerateRequest {
    pub family: Family,
    /// Defaults to 2 except for the grid, which needs it explicitly.
    pub alpha: Option<Weight>,
    pub k: Option<usize>,
    pub depth: Option<usize>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub seed: u64,
    pub density: f64,
    pub mixed: bool,
}

impl GenerateRequest {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            alpha: None,
            k: None,
            depth: None,
            m: None,
            n: None,
            seed: 0,
            density: 0.5,
            mixed: false,
        }
    }
}

fn need<T>(value: Option<T>, flag: &str, family: &str) -> Result<T, IoError> {
    value.ok_or_else(|| BuildError::InvalidSpec(format!("{family} needs {flag}")).into())
}

/// Builds what `generate` writes: an instance with actual weights for the
/// grid and random families, an adversary config for the others.
pub fn generate(req: &GenerateRequest) -> Result<Scenario, IoError> {
    let alpha = req.alpha.clone().unwrap_or_else(|| rational::int(2));
    let adversary = match req.family {
        Family::Grid => {
            let spec = GridSpec {
                m: need(req.m, "m", "grid")?,
                alpha: need(req.alpha.clone(), "alpha", "grid")?,
            };
            let trap = build_grid_trap(&spec)?;
            return Ok(Scenario::Instance(InstanceFile::new(&trap.graph, Some(&trap.weights))));
        }
        Family::Random => {
            let law = if req.mixed {
                IntervalLaw::Mixed { max_alpha: alpha }
            } else {
                IntervalLaw::Uniform { alpha }
            };
            let spec = RandomSpec {
                n: need(req.n, "n", "random")?,
                density: req.density,
                law,
                seed: req.seed,
            };
            let (g, w) = random_instance(&spec)?;
            return Ok(Scenario::Instance(InstanceFile::new(&g, Some(&w))));
        }
        Family::Recursive => AdversaryConfig::Recursive(RecursiveSpec {
            k: need(req.k, "k", "recursive")?,
            depth: need(req.depth, "depth", "recursive")?,
            alpha,
        }),
        Family::Complete => match (req.k, req.n) {
            (Some(k), None) => AdversaryConfig::Complete(CompleteAdvSpec::balanced(k, alpha)),
            (None, Some(n)) => AdversaryConfig::Complete(CompleteAdvSpec::for_order(n, alpha)),
            _ => {
                return Err(BuildError::InvalidSpec("complete needs exactly one of k (K_2k) or n (K_n)".into()).into())
            }
        },
        Family::Bipartite => AdversaryConfig::Bipartite(BipartiteAdvSpec {
            n: need(req.n, "n", "bipartite")?,
            alpha,
        }),
    };
    let (graph, _) = adversary.build()?;
    Ok(Scenario::Adversary(ConfigFile {
        adversary,
        instance: Some(InstanceFile::new(&graph, None)),
    }))
}
