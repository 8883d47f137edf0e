use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use mmdlab::cache::DiskCache;
use mmdlab::config::{split_op, Operation, CHECKS, ESTIMATES};
use mmdlab::error::{from_json, LabError, LabResult};
use mmdlab::exec::Parallel;
use mmdlab::export::{export, SeriesKind};
use mmdlab::ops::{load_space, run_operation, Context};
use mmdlab::report::{emit, to_json_text, Envelope, SpaceSummary, SCHEMA_VERSION, TOOL_VERSION};
use mmdlab::scenario::run_scenario;
use mmdlab::mmg;
use mmdlab_core::generators::{GeneratorSpec, Shape, WeightForm, WeightSpec};
use mmdlab_core::MetricMode;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "mmdlab", version, about = "Verification lab for discrete metric measure Dirichlet spaces")]
struct Cli {
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for every sampled center or pair.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, short, global = true)]
    verbose: bool,
    /// Adds wall-clock times to reports, which makes them non-reproducible.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Writes a generated space as .mmg.
    Generate(GenerateArgs),
    /// Estimates the constant of a hypothesis: vd, pi, cap, fvg, rvd, chaining.
    Estimate(OpArgs),
    /// Checks a connectivity statement: chain, ball, annulus, annulus-path,
    /// minimal-c0, chain-bound, rca, pou, two-point, refine.
    Check(CheckArgs),
    /// Exact elliptic Harnack constants, remote sweeps and stability runs.
    Harnack(SpaceArgs),
    /// Runs a scenario file.
    Run {
        scenario: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Extracts a plot series from a report as CSV.
    Export {
        #[arg(long)]
        report: PathBuf,
        #[arg(long, value_parser = ["constant-vs-scale", "ratio-vs-epsilon", "harnack-vs-radius"])]
        kind: String,
        /// Operation name inside a run report.
        #[arg(long)]
        operation: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeName {
    Path,
    Cycle,
    Lattice,
    SierpinskiGasket,
    SierpinskiCarpet,
    VicsekTree,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Graph,
    Euclid,
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Power,
    Bracket,
}

#[derive(clap::Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    shape: ShapeName,
    /// Recursion level of the fractal shapes.
    #[arg(long, default_value_t = 0)]
    level: u32,
    /// Lattice side, or the number of edges of a path or cycle.
    #[arg(long)]
    side: Option<usize>,
    /// Lattice dimension.
    #[arg(long, default_value_t = 2)]
    dim: u32,
    #[arg(long, value_enum)]
    metric: Option<Metric>,
    #[arg(long, default_value_t = 1.0)]
    measure: f64,
    #[arg(long, default_value_t = 1.0)]
    conductance: f64,
    /// Glues two copies, identifying this vertex of each.
    #[arg(long)]
    glue: Option<usize>,
    #[arg(long, requires = "weight_origin")]
    weight_alpha: Option<f64>,
    #[arg(long, requires = "weight_alpha")]
    weight_origin: Option<usize>,
    #[arg(long, value_enum, default_value = "power")]
    weight_form: Form,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SpaceArgs {
    #[arg(long)]
    space: PathBuf,
    /// JSON config; `{}` when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct OpArgs {
    kind: String,
    #[command(flatten)]
    space: SpaceArgs,
}

#[derive(clap::Args)]
struct CheckArgs {
    kind: String,
    /// Required unless `--levels` is given.
    #[arg(long)]
    space: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Refinement levels, coarse to fine.
    #[arg(long, value_delimiter = ',')]
    levels: Vec<PathBuf>,
    /// Refinement map file.
    #[arg(long)]
    maps: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .parse_default_env()
        .init();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> LabResult<i32> {
    let exec = Parallel::new(cli.threads).map_err(|e| LabError::Internal(e.to_string()))?;
    let cache = DiskCache::from_env(&exec);
    let mut ctx = Context::new(&exec);
    ctx.cache = cache.as_ref();
    ctx.seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Estimate(args) => {
            if !ESTIMATES.contains(&args.kind.as_str()) {
                return Err(LabError::config("/op", format!("unknown estimate {:?}; expected one of {ESTIMATES:?}", args.kind)));
            }
            single("estimate", &args.kind, Some(&args.space.space), args.space.config.as_deref(), None, args.space.output.as_deref(), cli.timings, &ctx)
        }
        Command::Check(args) => {
            if !CHECKS.contains(&args.kind.as_str()) {
                return Err(LabError::config("/op", format!("unknown check {:?}; expected one of {CHECKS:?}", args.kind)));
            }
            let mut extra = serde_json::Map::new();
            if !args.levels.is_empty() {
                extra.insert("levels".into(), json!(args.levels.iter().map(|p| json!({ "file": p })).collect::<Vec<_>>()));
            }
            if let Some(m) = &args.maps {
                extra.insert("maps".into(), json!(m));
            }
            let space = match (&args.space, args.levels.first()) {
                (Some(s), _) => Some(s.as_path()),
                (None, Some(first)) => Some(first.as_path()),
                (None, None) => return Err(LabError::config("/", "--space is required")),
            };
            single("check", &args.kind, space, args.config.as_deref(), Some(extra), args.output.as_deref(), cli.timings, &ctx)
        }
        Command::Harnack(args) => single("harnack", "harnack", Some(&args.space), args.config.as_deref(), None, args.output.as_deref(), cli.timings, &ctx),
        Command::Run { scenario, output } => {
            let text = std::fs::read_to_string(&scenario).map_err(|e| LabError::io(&scenario, e))?;
            let base = scenario.parent().map(Path::to_path_buf).unwrap_or_default();
            let report = run_scenario(&text, &base, cli.seed, cli.timings, ctx)?;
            emit(&to_json_text(&report)?, output.as_deref())?;
            if let Some(c) = &cache {
                log::info!("harmonic measure cache: {} hits, {} misses", c.hits(), c.misses());
            }
            Ok(report.exit_code())
        }
        Command::Export { report, kind, operation, output } => {
            let text = std::fs::read_to_string(&report).map_err(|e| LabError::io(&report, e))?;
            let value: Value = from_json(&text)?;
            let kind = SeriesKind::parse(&kind).expect("clap restricts the kind");
            emit(&export(&value, kind, operation.as_deref())?, output.as_deref())?;
            Ok(0)
        }
    }
}

fn generate(a: GenerateArgs) -> LabResult<i32> {
    let side = |what: &str| a.side.ok_or_else(|| LabError::config("/side", format!("--side is required for {what}")));
    let shape = match a.shape {
        ShapeName::Path => Shape::Path { n: side("path")? },
        ShapeName::Cycle => Shape::Cycle { n: side("cycle")? },
        ShapeName::Lattice => Shape::Lattice { d: a.dim, side: side("lattice")? },
        ShapeName::SierpinskiGasket => Shape::SierpinskiGasket { level: a.level },
        ShapeName::SierpinskiCarpet => Shape::SierpinskiCarpet { level: a.level },
        ShapeName::VicsekTree => Shape::VicsekTree { level: a.level },
    };
    let mut spec = GeneratorSpec::new(shape);
    spec.measure = a.measure;
    spec.conductance = a.conductance;
    spec.metric = a.metric.map(|m| match m {
        Metric::Graph => MetricMode::Graph,
        Metric::Euclid => MetricMode::Euclid,
    });
    let source = mmdlab::config::SpaceSource {
        generate: Some(spec),
        file: None,
        glue: a.glue.map(|v| mmdlab::config::Glue { a: v, b: v }),
        weight: a.weight_alpha.zip(a.weight_origin).map(|(alpha, origin)| WeightSpec {
            origin,
            alpha,
            form: match a.weight_form {
                Form::Power => WeightForm::Power,
                Form::Bracket => WeightForm::Bracket,
            },
        }),
    };
    let space = load_space(&source, Path::new("."))?;
    emit(&mmg::to_string(&space)?, a.output.as_deref())?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn single(
    kind: &'static str,
    op: &str,
    space_path: Option<&Path>,
    config: Option<&Path>,
    extra: Option<serde_json::Map<String, Value>>,
    output: Option<&Path>,
    timings: bool,
    ctx: &Context<'_, Parallel>,
) -> LabResult<i32> {
    let mut value = match config {
        Some(p) => from_json(&std::fs::read_to_string(p).map_err(|e| LabError::io(p, e))?)?,
        None => json!({}),
    };
    let obj = value.as_object_mut().ok_or_else(|| LabError::config("/", "expected an object"))?;
    if let Some(declared) = obj.get("op").and_then(Value::as_str) {
        if declared != op {
            return Err(LabError::config("/op", format!("config is for {declared:?}, not {op:?}")));
        }
    }
    obj.insert("op".into(), json!(op));
    for (k, v) in extra.into_iter().flatten() {
        obj.insert(k, v);
    }
    let echo = value.clone();
    let (name, rest) = split_op(value, "")?;
    let operation = Operation::parse(&name, rest, "")?;
    let space_path = space_path.expect("callers supply a space");
    let space = mmg::read(space_path)?;
    let start = Instant::now();
    let out = run_operation(&space, &operation, ctx)?;
    let envelope = Envelope {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION,
        kind,
        operation: name,
        seed: ctx.seed,
        space: SpaceSummary::of(&space),
        config: echo,
        pass: out.pass,
        report: out.report,
        wall_time_s: timings.then(|| start.elapsed().as_secs_f64()),
    };
    emit(&to_json_text(&envelope)?, output)?;
    Ok(if out.pass == Some(false) { 1 } else { 0 })
}
