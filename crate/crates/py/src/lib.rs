//! Python module `geewe_py`. Documents cross the boundary as JSON text and
//! rationals as "p/q" strings, the same formats the CLI reads and writes.

use geewe::io::{generate as build_scenario, Family, GenerateRequest, InstanceFile, IoError, Scenario};
use geewe::rational::{self, Weight};
use geewe::report::{rows_to_csv, rows_to_json, sweep as run_sweep, SweepConfig};
use geewe::{optimal_cover_walk, run_episode, validate as check_spec, CoverTask, ExplorerKind, RunConfig};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

/// Failure of a binding call, split the way the CLI splits exit codes.
#[derive(Debug)]
pub enum CallError {
    Invalid(String),
    Failed(String),
}

impl From<CallError> for PyErr {
    fn from(e: CallError) -> PyErr {
        match e {
            CallError::Invalid(m) => PyValueError::new_err(m),
            CallError::Failed(m) => PyRuntimeError::new_err(m),
        }
    }
}

fn invalid(e: impl ToString) -> CallError {
    CallError::Invalid(e.to_string())
}

fn io_error(e: IoError) -> CallError {
    match e {
        IoError::Build(geewe::adversaries::BuildError::Solver(_))
        | IoError::Build(geewe::adversaries::BuildError::TrapNotEffective(_)) => CallError::Failed(e.to_string()),
        _ => invalid(e),
    }
}

pub fn generate_json(
    family: &str,
    alpha: Option<&str>,
    params: [Option<usize>; 4],
    seed: u64,
    density: f64,
    mixed: bool,
) -> Result<String, CallError> {
    let [k, depth, m, n] = params;
    let family: Family = family.parse().map_err(invalid)?;
    let alpha: Option<Weight> = alpha.map(rational::parse).transpose().map_err(invalid)?;
    let req = GenerateRequest {
        family,
        alpha,
        k,
        depth,
        m,
        n,
        seed,
        density,
        mixed,
    };
    Ok(build_scenario(&req).map_err(io_error)?.to_json())
}

pub fn run_json(scenario: &str, explorer: &str) -> Result<String, CallError> {
    let kind: ExplorerKind = explorer.parse().map_err(invalid)?;
    let (graph, source) = Scenario::from_json(scenario)
        .and_then(|s| s.build())
        .map_err(io_error)?;
    let config = RunConfig {
        check_invariants: true,
        ..RunConfig::default()
    };
    let mut explorer = kind.build(config.solver);
    let report =
        run_episode(graph, source, explorer.as_mut(), &config).map_err(|e| CallError::Failed(e.to_string()))?;
    serde_json::to_string(&report).map_err(|e| CallError::Failed(e.to_string()))
}

pub fn oracle_walk(instance: &str) -> Result<(String, Vec<usize>), CallError> {
    let inst: InstanceFile = serde_json::from_str(instance).map_err(invalid)?;
    let (graph, weights) = inst.with_actuals().map_err(io_error)?;
    let task = CoverTask::full(&graph, weights.into_vec());
    let sol = optimal_cover_walk(&graph, &task, &Default::default()).map_err(|e| CallError::Failed(e.to_string()))?;
    Ok((rational::format(&sol.cost), sol.walk.vertices))
}

pub fn sweep_table(config: &str, format: &str) -> Result<String, CallError> {
    let config: SweepConfig = serde_json::from_str(config).map_err(invalid)?;
    let report = run_sweep(&config, &RunConfig::default()).map_err(invalid)?;
    if let Some(f) = report.failures.first() {
        return Err(CallError::Failed(format!(
            "{} failed point(s), first: {} ({})",
            report.failures.len(),
            f.point,
            f.error
        )));
    }
    match format {
        "csv" => rows_to_csv(&report.rows).map_err(|e| CallError::Failed(e.to_string())),
        "json" => Ok(rows_to_json(&report.rows)),
        other => Err(invalid(format!("unknown format {other:?} (expected csv or json)"))),
    }
}

pub fn violations(instance: &str) -> Result<Vec<String>, CallError> {
    let inst: InstanceFile = serde_json::from_str(instance).map_err(invalid)?;
    Ok(check_spec(&inst.spec()).iter().map(|v| v.to_string()).collect())
}

/// Instance file (grid, random) or adversary config as JSON.
#[pyfunction]
#[pyo3(signature = (family, alpha=None, k=None, depth=None, m=None, n=None, seed=0, density=0.5, mixed=false))]
#[allow(clippy::too_many_arguments)]
fn generate(
    family: &str,
    alpha: Option<&str>,
    k: Option<usize>,
    depth: Option<usize>,
    m: Option<usize>,
    n: Option<usize>,
    seed: u64,
    density: f64,
    mixed: bool,
) -> PyResult<String> {
    Ok(generate_json(family, alpha, [k, depth, m, n], seed, density, mixed)?)
}

/// Runs one episode; returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (scenario, explorer="adaptive"))]
fn run(py: Python<'_>, scenario: &str, explorer: &str) -> PyResult<String> {
    Ok(py.detach(|| run_json(scenario, explorer))?)
}

/// Optimal covering walk: ("p/q" cost, vertex list).
#[pyfunction]
fn oracle(py: Python<'_>, instance: &str) -> PyResult<(String, Vec<usize>)> {
    Ok(py.detach(|| oracle_walk(instance))?)
}

/// Runs a sweep config; returns the table as CSV or JSON.
#[pyfunction]
#[pyo3(signature = (config, format="csv"))]
fn sweep(py: Python<'_>, config: &str, format: &str) -> PyResult<String> {
    Ok(py.detach(|| sweep_table(config, format))?)
}

/// Structural problems of an instance; empty when it is valid.
#[pyfunction]
fn validate(instance: &str) -> PyResult<Vec<String>> {
    Ok(violations(instance)?)
}

#[pymodule]
fn geewe_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
