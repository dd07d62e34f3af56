//! Command-line front end. `run` parses arguments, executes one command and
//! returns the process exit code.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::curves::{approximate, compact, eval_curve, log_grid, validate_pwl_error, Flavor, PwlCurve};
use crate::domain::{CurveSpec, Instance, Itinerary, Mode, Problem};
use crate::error::{Error, Result};
use crate::instances::{
    gen_grid, gen_random, ingest_poi_table, read_distance_matrix, read_instance_file, read_poi_table,
    write_instance_file, CurveKind, GridSpec, RandomSpec,
};
use crate::model::Tours;
use crate::oracle::oracle_solve;
use crate::pipeline::{prepare, solve_prepared, solve_prepared_with, Plan, PlanOptions};
use crate::solver::{export_model, EventKind, ExportFormat, MipStatus, NoAids, SolveConfig, SolveEvent, DEFAULT_THRESHOLDS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_TIME_LIMIT: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "tourplan", version, about = "Plan reward-optimal tours with time-dependent rewards")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build and solve the model for an instance.
    Solve(SolveArgs),
    /// Time-to-gap table over generated grids.
    Bench(BenchArgs),
    /// Exhaustive reference solution for small instances.
    Oracle(OracleArgs),
    /// Piecewise-linear approximation of one curve.
    Approx(ApproxArgs),
    /// Generate or ingest an instance.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Args, Debug, Clone)]
struct ProblemArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Overrides the instance's problem.
    #[arg(long)]
    mode: Option<ModeArg>,
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    requirement: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Rmt,
    Bmt,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Rmt => Mode::Rmt,
            ModeArg::Bmt => Mode::Bmt,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FlavorArg {
    Band,
    Upper,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Mps,
    Lp,
}

impl From<FormatArg> for ExportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Mps => ExportFormat::MpsFree,
            FormatArg::Lp => ExportFormat::LpText,
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Approximation flavor; band for RMT and upper for BMT by default.
    #[arg(long)]
    flavor: Option<FlavorArg>,
    /// Stop once the gap is at or below this fraction.
    #[arg(long, default_value_t = 0.0)]
    gap: f64,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    deterministic: bool,
    /// Also write the model file in this format.
    #[arg(long)]
    export: Option<FormatArg>,
    /// Write the model to this file and stop. The format follows `--export`
    /// or the file extension.
    #[arg(long)]
    export_only: Option<PathBuf>,
    /// Number of tours.
    #[arg(long)]
    tours: Option<usize>,
    /// All tours start at one common base (the default for several tours).
    #[arg(long, conflicts_with = "disjoint")]
    shared: bool,
    /// Tours start at pairwise distinct bases.
    #[arg(long)]
    disjoint: bool,
    /// Time limit for each tour.
    #[arg(long)]
    tour_limit: Option<f64>,
    /// Trips may end at a different base.
    #[arg(long)]
    non_cyclic: bool,
    /// Solve without connectivity cuts and starting routes.
    #[arg(long)]
    no_aids: bool,
    /// Output directory for itinerary.json, events.jsonl and model files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Grid sizes as RxC, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2x3")]
    sizes: Vec<String>,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "rmt,bmt")]
    modes: Vec<ModeArg>,
    #[arg(long, value_delimiter = ',', default_value = "linear,exponential")]
    curves: Vec<String>,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Table file (comma separated). Printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory receiving every generated instance document.
    #[arg(long)]
    instances_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Writes the oracle itinerary document here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ApproxArgs {
    /// `lin:RATE`, `exp:RATE` or `pwl:T0,V0;T1,V1;...`.
    #[arg(long)]
    curve: String,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = FlavorArg::Band)]
    flavor: FlavorArg,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Sample file with columns t, f, approx.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// POIs on a lattice with unit edges.
    Grid(GridArgs),
    /// Random geometric instance.
    Random(RandomArgs),
    /// Instance from a POI table and a travel-time matrix.
    Ingest(IngestArgs),
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "linear")]
    curve: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Rmt)]
    mode: ModeArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RandomArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "linear")]
    curve: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Rmt)]
    mode: ModeArg,
    #[arg(long)]
    width: Option<f64>,
    #[arg(long)]
    height: Option<f64>,
    /// Largest Euclidean distance that still gets an edge.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    bases: Option<Vec<usize>>,
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    requirement: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// CSV with columns name, rank, n_review.
    #[arg(long)]
    pois: PathBuf,
    /// CSV travel-time matrix in rank order; empty cells mean no edge.
    #[arg(long)]
    distances: PathBuf,
    /// Ranks of the base POIs.
    #[arg(long, value_delimiter = ',', required = true)]
    bases: Vec<u32>,
    #[arg(long, value_enum, default_value_t = ModeArg::Rmt)]
    mode: ModeArg,
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    requirement: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

/// Maps an error to its exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Infeasible | Error::RequirementUnreachable { .. } | Error::InfeasibleStructure(_) => EXIT_INFEASIBLE,
        Error::TimeLimitNoIncumbent => EXIT_TIME_LIMIT,
        Error::Numerical(_) => EXIT_INTERNAL,
        _ => EXIT_INVALID,
    }
}

/// Runs the command line `args` (program name first). Normal output goes to
/// `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
        Command::Oracle(a) => cmd_oracle(&a, out),
        Command::Approx(a) => cmd_approx(&a, out),
        Command::Gen(g) => cmd_gen(&g, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn load_problem(p: &ProblemArgs) -> Result<Instance> {
    let inst = read_instance_file(&p.instance)?;
    let mode = p.mode.map(Mode::from).unwrap_or_else(|| {
        if p.requirement.is_some() && p.budget.is_none() {
            Mode::Bmt
        } else if p.budget.is_some() && p.requirement.is_none() {
            Mode::Rmt
        } else {
            inst.problem.mode()
        }
    });
    let problem = match mode {
        Mode::Rmt => Problem::Rmt {
            budget: match (p.budget, inst.problem) {
                (Some(b), _) => b,
                (None, Problem::Rmt { budget }) => budget,
                (None, _) => return Err(Error::OptionConflict("--mode rmt needs --budget".into())),
            },
        },
        Mode::Bmt => Problem::Bmt {
            requirement: match (p.requirement, inst.problem) {
                (Some(r), _) => r,
                (None, Problem::Bmt { requirement }) => requirement,
                (None, _) => return Err(Error::OptionConflict("--mode bmt needs --requirement".into())),
            },
        },
    };
    if !(problem.value().is_finite() && problem.value() >= 0.0) {
        return Err(Error::OptionConflict(format!("{} must be finite and non-negative", problem.value())));
    }
    Ok(inst.with_problem(problem))
}

fn plan_options(a: &SolveArgs) -> Result<PlanOptions> {
    let tours = match (a.tours, a.disjoint) {
        (None | Some(1), false) if a.tour_limit.is_none() => Tours::Single,
        (None, true) => return Err(Error::OptionConflict("--disjoint needs --tours".into())),
        (None, false) => return Err(Error::OptionConflict("--tour-limit needs --tours".into())),
        (Some(m), true) => Tours::Disjoint { m, per_tour_limit: a.tour_limit },
        (Some(m), false) => Tours::Shared { m, per_tour_limit: a.tour_limit },
    };
    let mut opts = PlanOptions {
        epsilon: a.epsilon,
        flavor: a.flavor.map(|f| match f {
            FlavorArg::Band => Flavor::Band,
            FlavorArg::Upper => Flavor::Upper,
        }),
        search_aids: !a.no_aids,
        ..PlanOptions::default()
    };
    opts.build.epsilon = a.epsilon;
    opts.build.tours = tours;
    opts.build.cyclic = !a.non_cyclic;
    opts.solve = SolveConfig {
        time_limit: a.time_limit,
        target_gap: a.gap,
        threads: a.threads,
        deterministic: a.deterministic || a.threads == 1,
        ..SolveConfig::default()
    };
    if a.deterministic && a.threads > 1 {
        return Err(Error::OptionConflict("--deterministic runs a single worker; drop --threads".into()));
    }
    if !(a.gap >= 0.0) {
        return Err(Error::OptionConflict(format!("--gap {} must be non-negative", a.gap)));
    }
    Ok(opts)
}

fn format_for(path: &Path, explicit: Option<FormatArg>) -> Result<ExportFormat> {
    if let Some(f) = explicit {
        return Ok(f.into());
    }
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("mps") => Ok(ExportFormat::MpsFree),
        Some("lp") => Ok(ExportFormat::LpText),
        _ => Err(Error::OptionConflict(format!("cannot tell the model format of {}; pass --export", path.display()))),
    }
}

fn event_json(e: &SolveEvent) -> Value {
    json!({
        "elapsed": e.elapsed,
        "incumbent": e.incumbent,
        "bound": e.bound,
        "gap": e.gap,
        "kind": e.kind.label(),
    })
}

fn itinerary_json(it: &Itinerary) -> Value {
    json!({
        "start_base": it.start_base,
        "walk": it.walk,
        "stays": it.stays.iter().map(|s| json!({"poi": s.poi, "duration": s.duration})).collect::<Vec<_>>(),
        "total_time": it.total_time,
        "model_reward": it.model_reward,
        "true_reward": it.true_reward,
    })
}

fn status_label(s: MipStatus) -> &'static str {
    match s {
        MipStatus::Optimal => "optimal",
        MipStatus::GapReached => "gap_reached",
        MipStatus::TimeLimit => "time_limit",
        MipStatus::NodeLimit => "node_limit",
        MipStatus::Infeasible => "infeasible",
        MipStatus::Unbounded => "unbounded",
    }
}

/// The itinerary document written by `solve`.
pub fn plan_document(instance: &Instance, plan: &Plan) -> Value {
    let objective = match instance.problem {
        Problem::Rmt { .. } => plan.true_reward(),
        Problem::Bmt { .. } => plan.total_time(),
    };
    json!({
        "mode": instance.problem.mode().as_str(),
        "limit": instance.problem.value(),
        "objective": objective,
        "model_objective": plan.result.objective,
        "true_reward": plan.true_reward(),
        "total_time": plan.total_time(),
        "status": status_label(plan.result.status),
        "gap": plan.result.gap,
        "bound": plan.result.bound,
        "nodes": plan.result.nodes,
        "tours": plan.itineraries.iter().map(itinerary_json).collect::<Vec<_>>(),
    })
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let inst = load_problem(&a.problem)?;
    let opts = plan_options(a)?;
    opts.solve.validate()?;
    let prepared = prepare(&inst, &opts)?;
    if let Some(path) = &a.export_only {
        let text = export_model(&prepared.model, format_for(path, a.export)?)?;
        fs::write(path, text)?;
        writeln!(out, "wrote {} ({} columns, {} rows)", path.display(), prepared.model.num_vars(), prepared.model.num_rows())?;
        return Ok(EXIT_OK);
    }
    fs::create_dir_all(&a.out)?;
    if let Some(f) = a.export {
        let ext = match f {
            FormatArg::Mps => "mps",
            FormatArg::Lp => "lp",
        };
        fs::write(a.out.join(format!("model.{ext}")), export_model(&prepared.model, f.into())?)?;
    }
    let mut log = BufWriter::new(File::create(a.out.join("events.jsonl"))?);
    let mut log_err: Option<std::io::Error> = None;
    let mut sink = |e: &SolveEvent| {
        let line = event_json(e).to_string();
        if let Err(err) = writeln!(log, "{line}").and_then(|_| log.flush()) {
            log_err.get_or_insert(err);
        }
    };
    let solved = if opts.search_aids {
        solve_prepared(&inst, &prepared, &opts.solve, &mut sink)
    } else {
        solve_prepared_with(&inst, &prepared, &opts.solve, &mut NoAids, &mut sink)
    };
    drop(sink);
    if let Some(e) = log_err {
        return Err(e.into());
    }
    let plan = solved?;
    let doc = plan_document(&inst, &plan);
    write_json(&a.out.join("itinerary.json"), &doc)?;
    writeln!(
        out,
        "{} {} = {:.6} ({}, gap {:.4}, {} nodes)",
        inst.problem.mode().as_str(),
        match inst.problem {
            Problem::Rmt { .. } => "reward",
            Problem::Bmt { .. } => "time",
        },
        doc["objective"].as_f64().unwrap_or(f64::NAN),
        status_label(plan.result.status),
        plan.result.gap,
        plan.result.nodes
    )?;
    for it in &plan.itineraries {
        let stops: Vec<String> = it.stays.iter().map(|s| format!("{}:{:.4}", s.poi, s.duration)).collect();
        writeln!(out, "  base {} walk {:?} stays [{}]", it.start_base, it.walk, stops.join(", "))?;
    }
    Ok(EXIT_OK)
}

fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> Result<i32> {
    let inst = load_problem(&a.problem)?;
    let r = oracle_solve(&inst)?;
    writeln!(out, "{}", r.value)?;
    if let Some(path) = &a.out {
        let doc = json!({
            "mode": inst.problem.mode().as_str(),
            "limit": inst.problem.value(),
            "objective": r.value,
            "sequences": r.sequences,
            "tours": [itinerary_json(&r.itinerary)],
        });
        write_json(path, &doc)?;
    }
    Ok(EXIT_OK)
}

/// Parses `lin:RATE`, `exp:RATE` or `pwl:T,V;T,V;...`.
pub fn parse_curve(text: &str) -> Result<CurveSpec> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| Error::InvalidCurve(format!("expected KIND:PARAMS, got `{text}`")))?;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::InvalidCurve(format!("bad number `{s}`")));
    let spec = match kind.to_ascii_lowercase().as_str() {
        "lin" | "linear" => CurveSpec::Linear { rate: num(rest)? },
        "exp" | "exponential" => CurveSpec::Exponential { rate: num(rest)? },
        "pwl" => {
            let pts = rest
                .split(';')
                .map(|p| {
                    let (t, v) = p.split_once(',').ok_or_else(|| Error::InvalidCurve(format!("bad breakpoint `{p}`")))?;
                    Ok((num(t)?, num(v)?))
                })
                .collect::<Result<Vec<_>>>()?;
            CurveSpec::Pwl(PwlCurve::new(pts)?)
        }
        other => return Err(Error::InvalidCurve(format!("unknown curve kind `{other}`"))),
    };
    spec.validate()?;
    Ok(spec)
}

fn cmd_approx(a: &ApproxArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = parse_curve(&a.curve)?;
    let flavor = match a.flavor {
        FlavorArg::Band => Flavor::Band,
        FlavorArg::Upper => Flavor::Upper,
    };
    let full = approximate(&spec, a.epsilon, flavor)?;
    let pwl = compact(&spec, &full, a.epsilon, flavor)?;
    let err = validate_pwl_error(&spec, &pwl, 10_000)?;
    writeln!(out, "segments {}", pwl.segment_count())?;
    for w in pwl.breakpoints().windows(2) {
        writeln!(out, "  [{:.6}, {:.6}] -> [{:.6}, {:.6}]", w[0].0, w[1].0, w[0].1, w[1].1)?;
    }
    writeln!(out, "max relative error {err:.6} (target {})", a.epsilon)?;
    if let Some(path) = &a.out {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
        w.write_record(["t", "f", "approx"]).map_err(|e| Error::Io(e.to_string()))?;
        for t in std::iter::once(0.0).chain(log_grid(&spec, a.samples.max(2))) {
            let f = eval_curve(&spec, t)?;
            w.write_record([t.to_string(), f.to_string(), pwl.eval(t).to_string()]).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
    }
    Ok(EXIT_OK)
}

fn cmd_gen(g: &GenCommand, out: &mut dyn Write) -> Result<i32> {
    let (inst, path) = match g {
        GenCommand::Grid(a) => {
            let spec = GridSpec { curve: a.curve.parse()?, mode: a.mode.into(), ..GridSpec::new(a.rows, a.cols, a.seed) };
            (gen_grid(&spec)?, &a.out)
        }
        GenCommand::Random(a) => {
            let spec = RandomSpec {
                curve: a.curve.parse()?,
                mode: a.mode.into(),
                width: a.width,
                height: a.height,
                threshold: a.threshold,
                bases: a.bases.clone(),
                budget: a.budget,
                requirement: a.requirement,
                ..RandomSpec::new(a.n, a.seed)
            };
            (gen_random(&spec)?, &a.out)
        }
        GenCommand::Ingest(a) => {
            let records = read_poi_table(&fs::read_to_string(&a.pois)?)?;
            let dist = read_distance_matrix(&fs::read_to_string(&a.distances)?)?;
            let problem = match (Mode::from(a.mode), a.budget, a.requirement) {
                (Mode::Rmt, Some(budget), _) => Problem::Rmt { budget },
                (Mode::Bmt, _, Some(requirement)) => Problem::Bmt { requirement },
                (Mode::Rmt, None, _) => return Err(Error::OptionConflict("--mode rmt needs --budget".into())),
                (Mode::Bmt, _, None) => return Err(Error::OptionConflict("--mode bmt needs --requirement".into())),
            };
            (ingest_poi_table(&records, &dist, &a.bases, problem)?, &a.out)
        }
    };
    write_instance_file(&inst, path)?;
    writeln!(out, "wrote {} ({} POIs, {} edges)", path.display(), inst.n(), inst.edges().len())?;
    Ok(EXIT_OK)
}

/// One bench row: mean seconds to each threshold over the runs that reached
/// it, and how many runs did.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub size: String,
    pub mode: Mode,
    pub curve: CurveKind,
    pub reps: usize,
    pub mean_time: Vec<Option<f64>>,
    pub reached: Vec<usize>,
    /// Final objective of every repetition, in seed order.
    pub objectives: Vec<Option<f64>>,
}

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::OptionConflict(format!("grid size `{s}` is not RxC")))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|_| Error::OptionConflict(format!("grid size `{s}` is not RxC")));
    Ok((p(r)?, p(c)?))
}

fn bench_rows(a: &BenchArgs) -> Result<Vec<BenchRow>> {
    let thresholds = DEFAULT_THRESHOLDS.to_vec();
    let curves: Vec<CurveKind> = a.curves.iter().map(|c| c.parse()).collect::<Result<_>>()?;
    if let Some(dir) = &a.instances_dir {
        fs::create_dir_all(dir)?;
    }
    let mut rows = Vec::new();
    for size in &a.sizes {
        let (r, c) = parse_size(size)?;
        for &mode in &a.modes {
            for &curve in &curves {
                let mut sums = vec![0.0; thresholds.len()];
                let mut reached = vec![0usize; thresholds.len()];
                let mut objectives = Vec::new();
                for rep in 0..a.reps {
                    let seed = a.seed + rep as u64;
                    let spec = GridSpec { curve, mode: mode.into(), ..GridSpec::new(r, c, seed) };
                    let inst = gen_grid(&spec)?;
                    if let Some(dir) = &a.instances_dir {
                        let name = format!("grid_{r}x{c}_{}_{:?}_{seed}.json", Mode::from(mode).as_str(), curve).to_lowercase();
                        write_instance_file(&inst, &dir.join(name))?;
                    }
                    let mut opts = PlanOptions { epsilon: a.epsilon, ..PlanOptions::default() };
                    opts.build.epsilon = a.epsilon;
                    opts.solve.time_limit = Some(a.time_limit);
                    opts.solve.gap_thresholds = thresholds.clone();
                    let mut crossed: Vec<Option<f64>> = vec![None; thresholds.len()];
                    let mut sink = |e: &SolveEvent| {
                        if let EventKind::ThresholdCrossed(p) = e.kind {
                            if let Some(k) = thresholds.iter().position(|&t| t == p) {
                                crossed[k].get_or_insert(e.elapsed);
                            }
                        }
                    };
                    let objective = match prepare(&inst, &opts).and_then(|p| solve_prepared(&inst, &p, &opts.solve, &mut sink)) {
                        Ok(plan) => plan.result.objective,
                        Err(Error::TimeLimitNoIncumbent | Error::Infeasible | Error::RequirementUnreachable { .. }) => None,
                        Err(e) => return Err(e),
                    };
                    for (k, c) in crossed.iter().enumerate() {
                        if let Some(t) = c {
                            sums[k] += t;
                            reached[k] += 1;
                        }
                    }
                    objectives.push(objective);
                }
                rows.push(BenchRow {
                    size: format!("{r}x{c}"),
                    mode: mode.into(),
                    curve,
                    reps: a.reps,
                    mean_time: sums.iter().zip(&reached).map(|(s, &k)| (k > 0).then(|| s / k as f64)).collect(),
                    reached,
                    objectives,
                });
            }
        }
    }
    Ok(rows)
}

/// Comma-separated table: one row per configuration, one time column and
/// one count column per threshold, thresholds descending.
pub fn bench_table(rows: &[BenchRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["size".to_string(), "problem".into(), "curve".into(), "reps".into()];
    for t in DEFAULT_THRESHOLDS {
        header.push(format!("time_{}", t * 100.0));
    }
    for t in DEFAULT_THRESHOLDS {
        header.push(format!("reached_{}", t * 100.0));
    }
    header.push("objectives".into());
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        let mut rec = vec![
            r.size.clone(),
            r.mode.as_str().to_uppercase(),
            format!("{:?}", r.curve).to_lowercase(),
            r.reps.to_string(),
        ];
        rec.extend(r.mean_time.iter().map(|t| t.map_or(String::new(), |t| format!("{t:.3}"))));
        rec.extend(r.reached.iter().map(|k| k.to_string()));
        rec.push(r.objectives.iter().map(|o| o.map_or("-".into(), |v| format!("{v:.9}"))).collect::<Vec<_>>().join(" "));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    let rows = bench_rows(a)?;
    let table = bench_table(&rows);
    match &a.out {
        Some(p) => {
            fs::write(p, &table)?;
            writeln!(out, "wrote {} ({} rows)", p.display(), rows.len())?;
        }
        None => out.write_all(table.as_bytes())?,
    }
    Ok(EXIT_OK)
}
