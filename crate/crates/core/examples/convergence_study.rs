//! Run with no halting criterion and compare how far each precision gets.
//!
//! The history records `||b - A x_i|| / ||b||` against the 64-bit problem, so
//! the floor each precision hits is visible.
//!
//!     cargo run --release --example convergence_study -- [seed] [out_dir]

use std::path::PathBuf;

use mpsolve::harness::{self, RunConfig};
use mpsolve::krylov::ResidualMonitor;

fn main() -> mpsolve::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().unwrap_or_else(|| "1".into());
    let out = PathBuf::from(args.next().unwrap_or_else(|| "study".into()));

    let mut cfg = RunConfig::default();
    cfg.set("run.seeds", &seed)?;
    cfg.set("run.policies", "full64, full32, full32-r64, mixed")?;
    cfg.set("solver.tol", "0")?;
    cfg.set("solver.max_iter", "60")?;
    cfg.set("solver.restart_threshold", "0")?;
    cfg.solver.monitor = ResidualMonitor::True;
    cfg.output_dir = out.clone();

    let records = harness::cmd_solve(&cfg)?;
    for r in &records {
        let h = &r.report;
        let floor = h.history.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let reach = |l: f64| h.iterations_to(l).map_or("never".to_string(), |i| i.to_string());
        println!(
            "{:>10}: 1e-3 at {:>5}, 1e-7 at {:>5}, 1e-9 at {:>5}, floor {floor:.3e}",
            r.policy.to_string(),
            reach(1e-3),
            reach(1e-7),
            reach(1e-9)
        );
    }
    let files: Vec<PathBuf> = records.iter().map(|r| out.join(format!("history_{}_{}.csv", r.seed, r.policy))).collect();
    harness::cmd_plot(&files, &out.join("study.svg"))?;
    println!("wrote {} histories and study.svg to {}", files.len(), out.display());
    Ok(())
}
