use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BuildError;
use crate::graph::{EdgeSpec, EstimateGraph, GraphSpec, WeightAssignment};
use crate::rational::{self, int, ratio, Weight};

const ATTEMPTS: usize = 100;

/// How intervals and actual weights are drawn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum IntervalLaw {
    /// Every interval is [1, alpha].
    Uniform {
        #[serde(with = "rational::serde_pq")]
        alpha: Weight,
    },
    /// Lower bounds in {1/2, 1, .., 4}, ratios up to `max_alpha`.
    Mixed {
        #[serde(with = "rational::serde_pq")]
        max_alpha: Weight,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub n: usize,
    /// Edge probability of the G(n, p) sample.
    pub density: f64,
    pub law: IntervalLaw,
    pub seed: u64,
}

/// A point of the grid lower + (upper - lower) * j/8, j in 0..=8.
fn pick_between(rng: &mut ChaCha8Rng, lower: &Weight, upper: &Weight) -> Weight {
    let j = rng.gen_range(0..=8);
    lower + (upper - lower) * ratio(j, 8)
}

fn draw_interval(rng: &mut ChaCha8Rng, law: &IntervalLaw) -> (Weight, Weight) {
    match law {
        IntervalLaw::Uniform { alpha } => (int(1), alpha.clone()),
        IntervalLaw::Mixed { max_alpha } => {
            let lower = ratio(rng.gen_range(1..=8), 2);
            let factor = int(1) + (max_alpha - int(1)) * ratio(rng.gen_range(0..=4), 4);
            let upper = &lower * factor;
            (lower, upper)
        }
    }
}

/// Seeded G(n, p) sample (retried until connected), s = 0, t = n-1.
pub fn random_instance(spec: &RandomSpec) -> Result<(EstimateGraph, WeightAssignment), BuildError> {
    if spec.n < 2 {
        return Err(BuildError::InvalidSpec("random instance needs n >= 2".into()));
    }
    if !(spec.density > 0.0 && spec.density <= 1.0) {
        return Err(BuildError::InvalidSpec(format!(
            "density {} outside (0, 1]",
            spec.density
        )));
    }
    let (IntervalLaw::Uniform { alpha: a } | IntervalLaw::Mixed { max_alpha: a }) = &spec.law;
    if a < &int(1) {
        return Err(BuildError::InvalidSpec("alpha below 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..ATTEMPTS {
        let mut edges = Vec::new();
        let mut actual = Vec::new();
        for a in 0..spec.n {
            for b in a + 1..spec.n {
                if rng.gen_bool(spec.density) {
                    let (lower, upper) = draw_interval(&mut rng, &spec.law);
                    actual.push(pick_between(&mut rng, &lower, &upper));
                    edges.push(EdgeSpec { a, b, lower, upper });
                }
            }
        }
        let graph = GraphSpec {
            n: spec.n,
            start: 0,
            end: spec.n - 1,
            edges,
        };
        if let Ok(graph) = EstimateGraph::new(graph) {
            let weights = WeightAssignment::new(&graph, actual)?;
            return Ok((graph, weights));
        }
    }
    Err(BuildError::NotConnected { attempts: ATTEMPTS })
}

/// Random actual weights inside each announced interval.
pub fn uniform_assignment(graph: &EstimateGraph, seed: u64) -> WeightAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = graph
        .edges()
        .iter()
        .map(|e| pick_between(&mut rng, &e.lower, &e.upper))
        .collect();
    WeightAssignment::new(graph, weights).expect("grid points lie inside the interval")
}
