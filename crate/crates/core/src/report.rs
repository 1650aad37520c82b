//! Parameter sweeps and their tabular reports.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversaries::{
    bipartite_graph, build_grid_trap_with, complete_graph, random_instance, recursive_online_bound, uniform_assignment,
    BipartiteAdvSpec, BuildError, CompleteAdvSpec, GridSpec, IntervalLaw, RandomSpec, RecursiveSpec,
};
use crate::engine::{run_episode, EngineError, FixedAssignment, OfflineKind, RunConfig, RunReport, WeightSource};
use crate::explorers::ExplorerKind;
use crate::graph::EstimateGraph;
use crate::io::AdversaryConfig;
use crate::rational::{self, int, Weight};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid sweep: {0}")]
    Invalid(String),
}

/// Parameter grid of one family. Every list is swept as a cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyGrid {
    /// Recursive lower-bound construction.
    Recursive {
        k: Vec<usize>,
        depth: Vec<usize>,
        #[serde(with = "rational::serde_pq::vec")]
        alpha: Vec<Weight>,
    },
    /// K_{2k} against the phase adversary.
    Complete {
        k: Vec<usize>,
        #[serde(with = "rational::serde_pq::vec")]
        alpha: Vec<Weight>,
    },
    /// K_{n,n} against the phase adversary.
    Bipartite {
        n: Vec<usize>,
        #[serde(with = "rational::serde_pq::vec")]
        alpha: Vec<Weight>,
    },
    /// K_n with seeded actual weights inside [1, alpha].
    CompleteUniform {
        n: Vec<usize>,
        #[serde(with = "rational::serde_pq::vec")]
        alpha: Vec<Weight>,
    },
    /// K_{n,n} with seeded actual weights inside [1, alpha].
    BipartiteUniform {
        n: Vec<usize>,
        #[serde(with = "rational::serde_pq::vec")]
        alpha: Vec<Weight>,
    },
    Grid {
        m: Vec<usize>,
        #[serde(with = "rational::serde_pq::vec")]
        alpha: Vec<Weight>,
    },
    /// Seeded G(n, p); `mixed` draws varied intervals with ratio up to alpha.
    Random {
        n: Vec<usize>,
        #[serde(with = "rational::serde_pq::vec")]
        alpha: Vec<Weight>,
        #[serde(default = "default_density")]
        density: f64,
        #[serde(default)]
        mixed: bool,
    },
}

fn default_density() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(flatten)]
    pub family: FamilyGrid,
    pub explorers: Vec<ExplorerKind>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

/// One parameter combination of a sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPoint {
    pub family: &'static str,
    pub k: Option<usize>,
    pub depth: Option<usize>,
    pub alpha: Weight,
    pub m: Option<usize>,
    pub n: Option<usize>,
}

impl GridPoint {
    fn new(family: &'static str, alpha: &Weight) -> Self {
        Self {
            family,
            k: None,
            depth: None,
            alpha: alpha.clone(),
            m: None,
            n: None,
        }
    }
}

impl FamilyGrid {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Recursive { .. } => "recursive",
            Self::Complete { .. } => "complete",
            Self::Bipartite { .. } => "bipartite",
            Self::CompleteUniform { .. } => "complete_uniform",
            Self::BipartiteUniform { .. } => "bipartite_uniform",
            Self::Grid { .. } => "grid",
            Self::Random { .. } => "random",
        }
    }

    /// Whether actual weights depend on the seed.
    pub fn seeded(&self) -> bool {
        matches!(
            self,
            Self::CompleteUniform { .. } | Self::BipartiteUniform { .. } | Self::Random { .. }
        )
    }

    pub fn points(&self) -> Vec<GridPoint> {
        let family = self.name();
        let mut out = Vec::new();
        match self {
            Self::Recursive { k, depth, alpha } => {
                for a in alpha {
                    for &k in k {
                        for &d in depth {
                            out.push(GridPoint {
                                k: Some(k),
                                depth: Some(d),
                                ..GridPoint::new(family, a)
                            });
                        }
                    }
                }
            }
            Self::Complete { k, alpha } => {
                for a in alpha {
                    for &k in k {
                        out.push(GridPoint {
                            k: Some(k),
                            n: Some(2 * k),
                            ..GridPoint::new(family, a)
                        });
                    }
                }
            }
            Self::Grid { m, alpha } => {
                for a in alpha {
                    for &m in m {
                        out.push(GridPoint {
                            m: Some(m),
                            n: Some(m * m),
                            ..GridPoint::new(family, a)
                        });
                    }
                }
            }
            Self::Bipartite { n, alpha }
            | Self::CompleteUniform { n, alpha }
            | Self::BipartiteUniform { n, alpha }
            | Self::Random { n, alpha, .. } => {
                for a in alpha {
                    for &n in n {
                        out.push(GridPoint {
                            n: Some(n),
                            ..GridPoint::new(family, a)
                        });
                    }
                }
            }
        }
        out
    }

    fn check(&self) -> Result<(), ReportError> {
        let alphas = match self {
            Self::Recursive { alpha, .. }
            | Self::Complete { alpha, .. }
            | Self::Bipartite { alpha, .. }
            | Self::CompleteUniform { alpha, .. }
            | Self::BipartiteUniform { alpha, .. }
            | Self::Grid { alpha, .. }
            | Self::Random { alpha, .. } => alpha,
        };
        if let Some(a) = alphas.iter().find(|a| **a < int(1)) {
            return Err(ReportError::Invalid(format!("alpha {} below 1", rational::format(a))));
        }
        if let Self::Random { density, .. } = self {
            if !(*density > 0.0 && *density <= 1.0) {
                return Err(ReportError::Invalid(format!("density {density} outside (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Which claim a row is checked against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bound {
    RatioAtMost(Weight),
    OnlineAtLeast(Weight),
    None,
}

impl Bound {
    pub fn value(&self) -> Option<&Weight> {
        match self {
            Bound::RatioAtMost(b) | Bound::OnlineAtLeast(b) => Some(b),
            Bound::None => None,
        }
    }

    pub fn holds(&self, online: &Weight, ratio: &Weight) -> bool {
        match self {
            Bound::RatioAtMost(b) => ratio <= b,
            Bound::OnlineAtLeast(b) => online >= b,
            Bound::None => true,
        }
    }
}

/// The bound that applies to `explorer` on `point`:
/// - recursive family: online cost at least the closed form, any explorer;
/// - precompute: ratio at most alpha everywhere;
/// - complete and bipartite families: ratio at most (alpha+1)/2 for the
///   adaptive explorer and for nearest neighbour, which coincides with it
///   there; random weights need alpha < 2 for this;
/// - adaptive elsewhere: ratio at most alpha;
/// - nearest neighbour elsewhere: no claim.
pub fn theoretical_bound(point: &GridPoint, explorer: ExplorerKind) -> Bound {
    let alpha = &point.alpha;
    let half = (alpha + int(1)) / int(2);
    match (point.family, explorer) {
        ("recursive", _) => Bound::OnlineAtLeast(recursive_online_bound(
            point.k.unwrap_or(0),
            point.depth.unwrap_or(0),
            alpha,
        )),
        (_, ExplorerKind::Precompute) => Bound::RatioAtMost(alpha.clone()),
        ("complete" | "bipartite", _) => Bound::RatioAtMost(half),
        ("complete_uniform" | "bipartite_uniform", _) if alpha < &int(2) => Bound::RatioAtMost(half),
        (_, ExplorerKind::Adaptive) => Bound::RatioAtMost(alpha.clone()),
        _ => Bound::None,
    }
}

/// One line of a sweep report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub family: String,
    pub k: Option<usize>,
    pub depth: Option<usize>,
    #[serde(with = "rational::serde_pq")]
    pub alpha: Weight,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub seed: u64,
    pub explorer: ExplorerKind,
    #[serde(with = "rational::serde_pq")]
    pub online_cost: Weight,
    #[serde(with = "rational::serde_pq")]
    pub offline_cost: Weight,
    pub offline_kind: OfflineKind,
    /// Exact value followed by a six-decimal rendering, e.g. `7/5 (1.400000)`.
    #[serde(with = "ratio_cell")]
    pub ratio: Weight,
    #[serde(with = "rational::serde_pq::option")]
    pub theoretical_bound: Option<Weight>,
    pub bound_satisfied: bool,
}

mod ratio_cell {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(w: &Weight, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{} ({})", rational::format(w), rational::decimal6(w)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Weight, D::Error> {
        let text = String::deserialize(d)?;
        let exact = text.split_whitespace().next().unwrap_or("");
        rational::parse(exact).map_err(serde::de::Error::custom)
    }
}

type RowKey<'a> = (
    &'a str,
    Option<usize>,
    Option<usize>,
    &'a Weight,
    Option<usize>,
    Option<usize>,
    u64,
    ExplorerKind,
);

impl ReportRow {
    pub fn from_report(point: &GridPoint, seed: u64, explorer: ExplorerKind, report: &RunReport) -> Self {
        let bound = theoretical_bound(point, explorer);
        Self {
            family: point.family.to_string(),
            k: point.k,
            depth: point.depth,
            alpha: point.alpha.clone(),
            m: point.m,
            n: point.n,
            seed,
            explorer,
            online_cost: report.online_cost.clone(),
            offline_cost: report.offline_cost.clone(),
            offline_kind: report.offline_kind,
            ratio: report.ratio.clone(),
            theoretical_bound: bound.value().cloned(),
            bound_satisfied: bound.holds(&report.online_cost, &report.ratio),
        }
    }

    fn sort_key(&self) -> RowKey<'_> {
        (
            &self.family,
            self.k,
            self.depth,
            &self.alpha,
            self.m,
            self.n,
            self.seed,
            self.explorer,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    InvalidInput,
    SolverCap,
    Invariant,
}

/// A grid point or episode that produced no row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub family: String,
    pub point: String,
    pub seed: u64,
    pub explorer: Option<ExplorerKind>,
    pub kind: FailureKind,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SweepReport {
    pub rows: Vec<ReportRow>,
    pub failures: Vec<SweepFailure>,
}

fn build_failure(e: &BuildError) -> FailureKind {
    match e {
        BuildError::Solver(s) if s.is_capacity() => FailureKind::SolverCap,
        BuildError::Solver(_) | BuildError::TrapNotEffective(_) => FailureKind::Invariant,
        _ => FailureKind::InvalidInput,
    }
}

fn engine_failure(e: &EngineError) -> FailureKind {
    match e {
        EngineError::Solver(s) if s.is_capacity() => FailureKind::SolverCap,
        EngineError::Graph(_) => FailureKind::InvalidInput,
        _ => FailureKind::Invariant,
    }
}

/// A ready-to-run instance; adversaries are rebuilt for every episode since
/// they keep state.
enum Prepared {
    Adversary(AdversaryConfig),
    Fixed(Arc<EstimateGraph>, FixedAssignment),
}

impl Prepared {
    fn episode(&self) -> Result<(Arc<EstimateGraph>, Box<dyn WeightSource>), BuildError> {
        match self {
            Prepared::Adversary(cfg) => cfg.build(),
            Prepared::Fixed(g, w) => Ok((Arc::clone(g), Box::new(w.clone()))),
        }
    }
}

fn prepare(family: &FamilyGrid, point: &GridPoint, seed: u64, run: &RunConfig) -> Result<Prepared, BuildError> {
    let alpha = point.alpha.clone();
    let n = point.n.unwrap_or(0);
    Ok(match family {
        FamilyGrid::Recursive { .. } => Prepared::Adversary(AdversaryConfig::Recursive(RecursiveSpec {
            k: point.k.unwrap_or(0),
            depth: point.depth.unwrap_or(0),
            alpha,
        })),
        FamilyGrid::Complete { .. } => Prepared::Adversary(AdversaryConfig::Complete(CompleteAdvSpec::balanced(
            point.k.unwrap_or(0),
            alpha,
        ))),
        FamilyGrid::Bipartite { .. } => Prepared::Adversary(AdversaryConfig::Bipartite(BipartiteAdvSpec { n, alpha })),
        FamilyGrid::CompleteUniform { .. } | FamilyGrid::BipartiteUniform { .. } => {
            let graph = if point.family == "complete_uniform" {
                complete_graph(n, &alpha)?
            } else {
                if n == 0 {
                    return Err(BuildError::InvalidSpec("bipartite side must be at least 1".into()));
                }
                bipartite_graph(n, &alpha)?
            };
            let weights = uniform_assignment(&graph, seed);
            Prepared::Fixed(Arc::new(graph), FixedAssignment::new(weights))
        }
        FamilyGrid::Grid { .. } => {
            let trap = build_grid_trap_with(
                &GridSpec {
                    m: point.m.unwrap_or(0),
                    alpha,
                },
                &run.solver,
            )?;
            Prepared::Fixed(Arc::clone(&trap.graph), trap.source())
        }
        FamilyGrid::Random { density, mixed, .. } => {
            let law = if *mixed {
                IntervalLaw::Mixed { max_alpha: alpha }
            } else {
                IntervalLaw::Uniform { alpha }
            };
            let (graph, weights) = random_instance(&RandomSpec {
                n,
                density: *density,
                law,
                seed,
            })?;
            Prepared::Fixed(Arc::new(graph), FixedAssignment::new(weights))
        }
    })
}

fn describe(point: &GridPoint) -> String {
    let mut parts = vec![format!("alpha={}", rational::format(&point.alpha))];
    for (name, v) in [("k", point.k), ("depth", point.depth), ("m", point.m), ("n", point.n)] {
        if let Some(v) = v {
            parts.push(format!("{name}={v}"));
        }
    }
    parts.join(" ")
}

fn run_point(
    config: &SweepConfig,
    point: &GridPoint,
    seed: u64,
    run: &RunConfig,
) -> (Vec<ReportRow>, Vec<SweepFailure>) {
    let fail = |explorer, kind, error: String| SweepFailure {
        family: point.family.to_string(),
        point: describe(point),
        seed,
        explorer,
        kind,
        error,
    };
    let prepared = match prepare(&config.family, point, seed, run) {
        Ok(p) => p,
        Err(e) => return (Vec::new(), vec![fail(None, build_failure(&e), e.to_string())]),
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &kind in &config.explorers {
        let outcome = prepared
            .episode()
            .map_err(|e| (build_failure(&e), e.to_string()))
            .and_then(|(g, source)| {
                let mut explorer = kind.build(run.solver);
                run_episode(g, source, explorer.as_mut(), run).map_err(|e| (engine_failure(&e), e.to_string()))
            });
        match outcome {
            Ok(report) => rows.push(ReportRow::from_report(point, seed, kind, &report)),
            Err((k, e)) => failures.push(fail(Some(kind), k, e)),
        }
    }
    (rows, failures)
}

/// Runs every (grid point, seed) concurrently; each explorer gets a fresh
/// episode. Rows come back sorted, so the output does not depend on
/// scheduling. Failures are collected and the sweep carries on.
pub fn sweep(config: &SweepConfig, run: &RunConfig) -> Result<SweepReport, ReportError> {
    config.family.check()?;
    if config.explorers.is_empty() {
        return Err(ReportError::Invalid("no explorers given".into()));
    }
    let seeds: Vec<u64> = if config.family.seeded() {
        config.seeds.clone()
    } else {
        config.seeds.iter().take(1).copied().collect()
    };
    if seeds.is_empty() {
        return Err(ReportError::Invalid("no seeds given".into()));
    }
    let jobs: Vec<(GridPoint, u64)> = config
        .family
        .points()
        .into_iter()
        .flat_map(|p| seeds.iter().map(move |&s| (p.clone(), s)))
        .collect();
    let results: Vec<_> = jobs.par_iter().map(|(p, s)| run_point(config, p, *s, run)).collect();
    let mut report = SweepReport::default();
    for (rows, failures) in results {
        report.rows.extend(rows);
        report.failures.extend(failures);
    }
    report.rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    report
        .failures
        .sort_by(|a, b| (&a.family, &a.point, a.seed, a.explorer).cmp(&(&b.family, &b.point, b.seed, b.explorer)));
    Ok(report)
}

pub fn rows_to_csv(rows: &[ReportRow]) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn rows_from_csv(text: &str) -> Result<Vec<ReportRow>, ReportError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let rows = r.deserialize().collect::<Result<Vec<ReportRow>, _>>()?;
    Ok(rows)
}

pub fn rows_to_json(rows: &[ReportRow]) -> String {
    serde_json::to_string_pretty(rows).expect("rows always serialize")
}

pub fn rows_from_json(text: &str) -> Result<Vec<ReportRow>, ReportError> {
    Ok(serde_json::from_str(text)?)
}

pub const CSV_COLUMNS: [&str; 14] = [
    "family",
    "k",
    "depth",
    "alpha",
    "m",
    "n",
    "seed",
    "explorer",
    "online_cost",
    "offline_cost",
    "offline_kind",
    "ratio",
    "theoretical_bound",
    "bound_satisfied",
];
