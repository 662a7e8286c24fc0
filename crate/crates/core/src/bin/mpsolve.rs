use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mpsolve::harness::{self, RunConfig};
use mpsolve::perf::Decomposition;
use mpsolve::Error;

#[derive(Parser)]
#[command(name = "mpsolve", version, about = "Precision studies for a tri-SOR preconditioned BiCGstab solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve every (seed, policy) pair at one tolerance.
    Solve(RunArgs),
    /// Solve the full (seed, policy, tolerance) cross product and tabulate iteration counts.
    Sweep(RunArgs),
    /// Render history CSV files as one SVG.
    Plot {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(short, long, default_value = "residual.svg")]
        out: PathBuf,
    },
    /// Working-set size of one rank/thread and whether it fits in cache.
    Perf(PerfArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `run.output_dir`.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set solver.tol=1e-6`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    policies: Option<String>,
}

#[derive(Args)]
struct PerfArgs {
    #[arg(long, default_value_t = 2560)]
    nx: u64,
    #[arg(long, default_value_t = 1920)]
    ny: u64,
    #[arg(long, default_value_t = 72)]
    ranks_x: u64,
    #[arg(long, default_value_t = 16)]
    ranks_y: u64,
    /// Halo width in both directions.
    #[arg(long, default_value_t = 1)]
    halo: u64,
    #[arg(long)]
    halo_x: Option<u64>,
    #[arg(long)]
    halo_y: Option<u64>,
    #[arg(long, default_value_t = 70)]
    levels: u64,
    #[arg(long, default_value_t = 3)]
    threads: u64,
    #[arg(long, default_value_t = 10)]
    arrays: u64,
    /// Cache capacity in bytes.
    #[arg(long, default_value_t = 4_718_592)]
    cache: u64,
}

fn load(args: &RunArgs) -> Result<RunConfig, Error> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let flags = [
        ("solver.tol", &args.tol),
        ("solver.max_iter", &args.max_iter),
        ("run.seeds", &args.seeds),
        ("run.policies", &args.policies),
    ];
    for (key, v) in flags {
        if let Some(v) = v {
            cfg.set(key, v)?;
        }
    }
    for s in &args.sets {
        cfg.apply_override(s)?;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(records: &[harness::RunRecord]) {
    for r in records {
        let rep = &r.report;
        let status = match rep.failure {
            Some(f) => format!("failed ({f})"),
            None if rep.converged => "converged".to_string(),
            None => "not converged".to_string(),
        };
        eprintln!(
            "seed {} {} tol {:e}: {status} after {} iterations, {} restarts, true R {:.3e}",
            r.seed,
            r.policy,
            r.tol,
            rep.iterations,
            rep.restarts.len(),
            rep.final_true_r
        );
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Solve(args) => report(&harness::cmd_solve(&load(&args)?)?),
        Cmd::Sweep(args) => {
            let (records, stats) = harness::cmd_sweep(&load(&args)?)?;
            report(&records);
            for s in stats {
                eprintln!("tol {:e} {}: {:.2} ({:.2}) iterations", s.tol, s.policy, s.mean_iterations, s.stderr_iterations);
            }
        }
        Cmd::Plot { files, out } => harness::cmd_plot(&files, &out)?,
        Cmd::Perf(p) => {
            let d = Decomposition {
                global_nx: p.nx,
                global_ny: p.ny,
                ranks_x: p.ranks_x,
                ranks_y: p.ranks_y,
                halo_x: p.halo_x.unwrap_or(p.halo),
                halo_y: p.halo_y.unwrap_or(p.halo),
                n_levels: p.levels,
                n_threads: p.threads,
                arrays_per_point: p.arrays,
                cache_bytes: p.cache,
            };
            print!("{}", harness::cmd_perf(&d)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mpsolve: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
