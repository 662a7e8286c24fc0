//! Mean iteration counts over several problems, per tolerance and policy.
//!
//!     cargo run --release --example sweep -- [out_dir]

use mpsolve::harness::{self, RunConfig};

const CONFIG: &str = "
problem.nx = 48
problem.ny = 36
problem.nz = 20
solver.tol = 1e-3, 1e-4, 1e-5
run.seeds = 1..12
run.policies = full64, mixed, full32
";

fn main() -> mpsolve::Result<()> {
    let mut cfg = RunConfig::parse(CONFIG)?;
    cfg.output_dir = std::env::args().nth(1).unwrap_or_else(|| "sweep".into()).into();
    let (records, stats) = harness::cmd_sweep(&cfg)?;
    println!("{} runs", records.len());
    println!("{:>8} {:>10} {:>6} {:>10}", "tol", "policy", "conv", "mean (se)");
    for s in stats {
        println!(
            "{:>8.0e} {:>10} {:>3}/{:<2} {:>5.2} ({:.2})",
            s.tol, s.policy, s.converged, s.runs, s.mean_iterations, s.stderr_iterations
        );
    }
    Ok(())
}
