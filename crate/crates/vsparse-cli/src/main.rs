use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use vsparse::harness::{run_trace, scaling_sweep, sweep_csv, HarnessError, PluginKind, RunConfig, RunMode};
use vsparse::trace::{gen_trace, parse, write, GenConfig, GraphKind, WeightMode};

/// Replay an update/query trace against a dynamic sparsifier structure.
#[derive(Parser, Debug)]
#[command(name = "vsparse", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic trace.
    Gen(GenArgs),
    /// Time a mode over growing sizes and print CSV.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// incremental, offline, mincut-oblivious, mincut-adaptive, apsp or er.
    #[arg(long)]
    mode: Option<RunMode>,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[arg(long, default_value_t = 2)]
    r: usize,
    #[arg(long)]
    j: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, default_value_t = 1)]
    depth: usize,
    #[arg(long)]
    beta: Option<f64>,
    /// Static sparsifier for offline mode: identity, distance or flow.
    #[arg(long, default_value = "identity")]
    plugin: PluginKind,
    /// Compare every answer with an exact oracle and stop on a violation.
    #[arg(long)]
    oracle_check: bool,
    /// Print the source side of each reported cut.
    #[arg(long)]
    emit_cut: bool,
    /// Directory for report.csv and summary.txt.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// random-gnm, path, grid or cycle-chords.
    #[arg(long)]
    kind: GraphKind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    ops: usize,
    #[arg(long, default_value_t = 0.1)]
    query_rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    insert_only: bool,
    /// length, capacity or conductance.
    #[arg(long, default_value = "length")]
    weights: WeightMode,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    mode: RunMode,
    /// Comma separated edge counts, ascending.
    #[arg(long, value_delimiter = ',', default_value = "2000,8000,32000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Config(anyhow::Error),
    Harness(HarnessError),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Config(e)
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Harness(e)
    }
}

fn run(a: RunArgs) -> Result<(), Failure> {
    let mode = a.mode.context("--mode is required")?;
    let path = a.trace.context("--trace is required")?;
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let trace = parse(&text).map_err(HarnessError::from)?;
    let cfg = RunConfig {
        mode,
        seed: a.seed,
        levels: a.levels,
        r: a.r,
        j: a.j,
        k: a.k,
        epsilon: a.epsilon,
        depth: a.depth,
        beta: a.beta,
        plugin: a.plugin,
        oracle_check: a.oracle_check,
        emit_cut: a.emit_cut,
    };
    let report = run_trace(&cfg, &trace)?;
    print!("{}", report.answer_lines());
    if let Some(dir) = a.out {
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        std::fs::write(dir.join("report.csv"), report.to_csv()).context("writing report.csv")?;
        std::fs::write(dir.join("summary.txt"), report.summary()).context("writing summary.txt")?;
    }
    Ok(())
}

fn generate(a: GenArgs) -> Result<(), Failure> {
    let mut cfg = GenConfig::new(a.kind, a.n, a.m, a.ops, a.seed);
    cfg.query_rate = a.query_rate;
    cfg.insert_only = a.insert_only;
    cfg.mode = a.weights;
    let text = write(&gen_trace(&cfg).map_err(HarnessError::from)?);
    match a.out {
        Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<(), Failure> {
    let rows = scaling_sweep(a.mode, &a.sizes, a.reps, a.seed)?;
    print!("{}", sweep_csv(&rows));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Some(Command::Gen(a)) => generate(a),
        Some(Command::Sweep(a)) => sweep(a),
        None => run(cli.run),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Harness(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
