use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use geewe::adversaries::BuildError;
use geewe::engine::EngineError;
use geewe::graph::GraphError;
use geewe::io::{generate, Family, GenerateRequest, IoError, Scenario};
use geewe::rational::{self, Weight};
use geewe::report::{rows_to_csv, rows_to_json, sweep, FailureKind, SweepConfig};
use geewe::{optimal_cover_walk, run_episode, validate, CoverTask, ExplorerKind, RunConfig, SolverConfig, SolverError};

#[derive(Parser)]
#[command(name = "geewe", version, about = "Graph exploration with interval weight estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance file (grid, random) or an adversary config.
    Generate(GenerateArgs),
    /// Run one episode and print its report as JSON.
    Run(RunArgs),
    /// Run a parameter sweep described by a JSON config.
    Sweep(SweepArgs),
    /// Print an optimal covering walk of an instance with actual weights.
    Oracle(OracleArgs),
    /// Check an instance or adversary config.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleFormat {
    Text,
    Json,
}

#[derive(Args)]
struct Params {
    /// Uncertainty ratio, as p/q or a decimal.
    #[arg(long, value_parser = parse_weight)]
    alpha: Option<Weight>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge probability for random instances.
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// Random instances: varied intervals with ratio up to alpha.
    #[arg(long)]
    mixed: bool,
}

#[derive(Args)]
struct GenerateArgs {
    /// recursive, complete, bipartite, grid or random
    family: Family,
    #[command(flatten)]
    params: Params,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Instance or adversary config; omit to build from --family.
    input: Option<PathBuf>,
    #[arg(long, conflicts_with = "input")]
    family: Option<Family>,
    #[command(flatten)]
    params: Params,
    #[arg(long, default_value = "adaptive")]
    explorer: ExplorerKind,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    config: PathBuf,
    /// Overrides the config's output path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct OracleArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = OracleFormat::Text)]
    format: OracleFormat,
}

#[derive(Args)]
struct ValidateArgs {
    input: PathBuf,
}

fn parse_weight(s: &str) -> Result<Weight, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

/// Error carrying an explicit exit code.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn solver_code(e: &SolverError) -> u8 {
    if e.is_capacity() {
        2
    } else {
        3
    }
}

fn build_code(e: &BuildError) -> u8 {
    match e {
        BuildError::Solver(s) => solver_code(s),
        BuildError::TrapNotEffective(_) => 3,
        _ => 1,
    }
}

/// 1 invalid input, 2 solver cap, 3 internal invariant violation.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(Exit(code, _)) = cause.downcast_ref() {
            return *code;
        }
        if let Some(e) = cause.downcast_ref::<SolverError>() {
            return solver_code(e);
        }
        if let Some(e) = cause.downcast_ref::<EngineError>() {
            return match e {
                EngineError::Solver(s) => solver_code(s),
                EngineError::Graph(_) => 1,
                _ => 3,
            };
        }
        if let Some(e) = cause.downcast_ref::<BuildError>() {
            return build_code(e);
        }
        if let Some(e) = cause.downcast_ref::<IoError>() {
            return match e {
                IoError::Build(b) => build_code(b),
                _ => 1,
            };
        }
        if cause.downcast_ref::<GraphError>().is_some() {
            return 1;
        }
    }
    1
}

fn request(family: Family, p: &Params) -> GenerateRequest {
    GenerateRequest {
        family,
        alpha: p.alpha.clone(),
        k: p.k,
        depth: p.depth,
        m: p.m,
        n: p.n,
        seed: p.seed,
        density: p.density,
        mixed: p.mixed,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_scenario(path: &Path) -> Result<Scenario> {
    let text = read(path)?;
    Scenario::from_json(&text)
        .with_context(|| format!("{} is neither an instance nor an adversary config", path.display()))
}

// A closed pipe (e.g. `| head`) ends output quietly.
fn say(text: &str) -> Result<()> {
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => say(text.trim_end()),
    }
}

fn run_config() -> RunConfig {
    RunConfig {
        solver: SolverConfig::default(),
        check_invariants: true,
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let sc = generate(&request(args.family, &args.params))?;
    emit(args.out.as_deref(), &sc.to_json())
}

fn cmd_run(args: RunArgs) -> Result<()> {
    if args.format == Format::Csv {
        bail!(Exit(1, "run reports are JSON; use sweep for tables".into()));
    }
    let sc = match (&args.input, args.family) {
        (Some(path), _) => read_scenario(path)?,
        (None, Some(family)) => generate(&request(family, &args.params))?,
        (None, None) => bail!(Exit(1, "give an input file or --family".into())),
    };
    let (graph, source) = sc.build()?;
    let config = run_config();
    let mut explorer = args.explorer.build(config.solver);
    let report = run_episode(graph, source, explorer.as_mut(), &config)?;
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&report)?)
}

fn cmd_sweep(args: SweepArgs) -> Result<u8> {
    let text = read(&args.config)?;
    let config: SweepConfig =
        serde_json::from_str(&text).map_err(|e| Exit(1, format!("{}: {e}", args.config.display())))?;
    let report = sweep(&config, &run_config()).map_err(|e| Exit(1, e.to_string()))?;
    let body = match args.format {
        Format::Csv => rows_to_csv(&report.rows)?,
        Format::Json => rows_to_json(&report.rows),
    };
    let out = args.out.or_else(|| config.output.as_ref().map(PathBuf::from));
    emit(out.as_deref(), &body)?;
    let mut code = 0;
    for f in &report.failures {
        eprintln!("{}", serde_json::to_string(f)?);
        code = code.max(match f.kind {
            FailureKind::InvalidInput => 1,
            FailureKind::SolverCap => 2,
            FailureKind::Invariant => 3,
        });
    }
    Ok(code)
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let Scenario::Instance(inst) = read_scenario(&args.input)? else {
        bail!(Exit(
            1,
            "oracle needs an instance with actual weights, not an adversary config".into()
        ));
    };
    let (graph, weights) = inst.with_actuals()?;
    let task = CoverTask::full(&graph, weights.into_vec());
    let sol = optimal_cover_walk(&graph, &task, &SolverConfig::default())?;
    let walk: Vec<String> = sol.walk.vertices.iter().map(|v| v.to_string()).collect();
    match args.format {
        OracleFormat::Text => {
            say(&format!("cost {}", rational::format(&sol.cost)))?;
            say(&format!("walk {}", walk.join(" ")))?;
        }
        OracleFormat::Json => {
            let doc = serde_json::json!({
                "cost": rational::format(&sol.cost),
                "walk": sol.walk.vertices,
                "method": sol.method,
            });
            say(&serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<()> {
    match read_scenario(&args.input)? {
        Scenario::Instance(inst) => {
            let problems = validate(&inst.spec());
            if !problems.is_empty() {
                let list: Vec<String> = problems.iter().map(|v| v.to_string()).collect();
                bail!(Exit(1, format!("invalid instance:\n  {}", list.join("\n  "))));
            }
            if inst.edges.iter().any(|e| e.actual.is_some()) {
                inst.with_actuals()?;
            }
            say(&format!(
                "ok: instance with {} vertices, {} edges{}",
                inst.n,
                inst.edges.len(),
                if inst.has_actuals() {
                    ", actual weights present"
                } else {
                    ""
                }
            ))?;
        }
        Scenario::Adversary(cfg) => {
            let (g, _) = cfg.adversary.build()?;
            say(&format!(
                "ok: {} adversary on {} vertices, {} edges",
                cfg.adversary.family(),
                g.vertex_count(),
                g.edge_count()
            ))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a).map(|_| 0),
        Command::Run(a) => cmd_run(a).map(|_| 0),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Oracle(a) => cmd_oracle(a).map(|_| 0),
        Command::Validate(a) => cmd_validate(a).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
