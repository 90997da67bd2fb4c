use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use flowerflat::cli::{self, CmdResult, Failure, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "flowerflat", version, about = "Lipschitz flattening on flowers of expanding circle maps")]
struct Args {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// Truncation depth N (default: smallest N with error below 1e-10).
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for scans and rank tests.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Check the map, function and flower of a config.
    Validate,
    /// CSV of Phi(gamma) over the 1-flower family.
    Scan,
    /// Functionals, coboundary and flatness on a flower.
    Flatten,
    /// Zeros of Phi with Sturmian estimates and the orbit oracle.
    Solve,
    /// Rank of the escape functions plus constants.
    Rank,
    /// Reproduce the semicircle example that flattens but does not maximize.
    PaperNotmax,
    /// Enumerate periodic orbits of an integer map.
    Orbits,
}

fn load(args: &Args) -> anyhow::Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    cfg.gamma = args.gamma.or(cfg.gamma);
    cfg.depth = args.depth.or(cfg.depth);
    cfg.grid = args.grid.or(cfg.grid);
    cfg.tol = args.tol.or(cfg.tol);
    cfg.seed = args.seed.or(cfg.seed);
    let text = serde_json::to_string(&cfg)?;
    Ok(RunConfig::from_json(&text)?)
}

fn dispatch(command: Command, cfg: &RunConfig) -> CmdResult {
    match command {
        Command::Validate => cli::cmd_validate(cfg),
        Command::Scan => cli::cmd_scan(cfg),
        Command::Flatten => cli::cmd_flatten(cfg),
        Command::Solve => cli::cmd_solve(cfg),
        Command::Rank => cli::cmd_rank(cfg),
        Command::PaperNotmax => cli::cmd_paper_notmax(cfg),
        Command::Orbits => cli::cmd_orbits(cfg),
    }
}

fn emit(args: &Args, text: &str) -> anyhow::Result<()> {
    match &args.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run(args: &Args) -> anyhow::Result<u8> {
    let cfg = match load(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Ok(2);
        }
    };
    let result = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(|| dispatch(args.command, &cfg)),
        None => dispatch(args.command, &cfg),
    };
    match result {
        Ok(text) => {
            emit(args, &text)?;
            Ok(0)
        }
        Err(Failure::NotFlattenable(report)) => {
            emit(args, &report)?;
            eprintln!("not flattenable");
            Ok(3)
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            Ok(f.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
