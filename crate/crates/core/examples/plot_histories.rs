//! Render residual histories to SVG.
//!
//!     cargo run --example plot_histories -- out.svg a.csv b.csv ...
//!
//! Without arguments, solves a small problem first and plots its histories.

use std::path::PathBuf;

use mpsolve::harness::{self, RunConfig};

fn main() -> mpsolve::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() >= 2 {
        let files: Vec<PathBuf> = args[1..].iter().map(PathBuf::from).collect();
        harness::cmd_plot(&files, args[0].as_ref())?;
        println!("wrote {}", args[0]);
        return Ok(());
    }
    let mut cfg = RunConfig::parse("problem.nx = 24\nproblem.ny = 18\nproblem.nz = 10\nsolver.tol = 1e-10\nrun.policies = full64, mixed, full32\n")?;
    cfg.output_dir = "plot_demo".into();
    let records = harness::cmd_solve(&cfg)?;
    let files: Vec<PathBuf> =
        records.iter().map(|r| cfg.output_dir.join(format!("history_{}_{}.csv", r.seed, r.policy))).collect();
    let svg = cfg.output_dir.join("residual.svg");
    harness::cmd_plot(&files, &svg)?;
    println!("wrote {}", svg.display());
    Ok(())
}
