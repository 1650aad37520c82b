//! Simulator for graph exploration with interval edge-weight estimates.
//!
//! Edge weights are announced as intervals `[lower, upper]` and revealed when
//! the agent first visits an endpoint. The crate runs online explorers
//! against fixed weights or adaptive adversaries, computes exact offline
//! optima, and reports competitive ratios with exact rational arithmetic.

pub mod adversaries;
pub mod engine;
pub mod explorers;
pub mod graph;
pub mod io;
pub mod rational;
pub mod report;
pub mod solver;

pub use engine::{
    run_episode, start_episode, Episode, FixedAssignment, KnowledgeView, RunConfig, RunReport, WeightSource,
};
pub use explorers::{Adaptive, Explorer, ExplorerKind, NearestNeighbor, Precompute};
pub use graph::{alpha_of, validate, AlphaProfile, EstimateGraph, GraphSpec, Walk, WeightAssignment};
pub use rational::Weight;
pub use solver::{
    brute_force_cover, local_search_cover, optimal_cover_walk, worst_case_cover_walk, CoverTask, SolverConfig,
    SolverError,
};
