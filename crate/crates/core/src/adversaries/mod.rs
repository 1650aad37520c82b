//! Instance builders: the adaptive lower-bound constructions, the grid trap,
//! and seeded random instances.

mod complete;
mod grid;
mod random;
mod recursive;

pub use complete::{
    bipartite_graph, build_bipartite_adversary, build_complete_adversary, complete_graph, BipartiteAdvSpec,
    CompleteAdvSpec, PhaseAdversary,
};
pub use grid::{
    blocked_deviations, build_grid_trap, build_grid_trap_with, grid_graph, ladder_path, trap_from_path, GridSpec,
    GridTrap,
};
pub use random::{random_instance, uniform_assignment, IntervalLaw, RandomSpec};
pub use recursive::{
    build_recursive, recursive_edge_count, recursive_offline_cost, recursive_online_bound, recursive_vertex_count,
    RecursiveAdversary, RecursiveSpec,
};

use num_traits::One;
use thiserror::Error;

use crate::graph::GraphError;
use crate::rational::{self, int, Weight};
use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("invalid parameters: {0}")]
    InvalidSpec(String),
    #[error("trap not effective for these parameters: {0}")]
    TrapNotEffective(String),
    #[error("no connected sample after {attempts} attempts; raise the density")]
    NotConnected { attempts: usize },
    #[error("trap simulation: {0}")]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// The lower-bound constructions stop improving past alpha = 2, so larger
/// values are clamped; below 1 is meaningless.
pub fn clamp_alpha(alpha: &Weight) -> Result<Weight, BuildError> {
    if alpha < &Weight::one() {
        return Err(BuildError::InvalidSpec(format!(
            "alpha {} below 1",
            rational::format(alpha)
        )));
    }
    Ok(alpha.clone().min(int(2)))
}
