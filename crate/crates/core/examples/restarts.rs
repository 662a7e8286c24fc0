//! Watch restarts and breakdowns through a solve observer.

use mpsolve::krylov::{bicgstab_solve_observed, Iterate, RestartEvent, SolveObserver};
use mpsolve::{generate, PrecisionPolicy, ProblemSpec, SolveConfig};

struct Log;

impl SolveObserver for Log {
    fn on_iteration(&mut self, it: usize, r: f64, _x: Iterate<'_>) {
        if it.is_multiple_of(10) {
            println!("  iteration {it:3}: R = {r:.3e}");
        }
    }

    fn on_restart(&mut self, e: &RestartEvent, x: Iterate<'_>) {
        println!("  restart after {} iterations ({:?}), recomputed R = {:.3e}, |x| = {}", e.iteration, e.cause, e.residual, x.len());
    }
}

fn main() -> mpsolve::Result<()> {
    let p = generate(&ProblemSpec::with_grid(24, 18, 10))?;
    for (name, threshold) in [("every 4", Some(4)), ("disabled", None)] {
        println!("restart threshold {name}:");
        let config = SolveConfig { tol: 1e-9, max_iter: 40, restart_threshold: threshold, ..SolveConfig::default() };
        match bicgstab_solve_observed(&p, &config, &PrecisionPolicy::MIXED, &mut Log) {
            Ok(s) => println!("  converged={} in {} iterations, {} breakdowns", s.report.converged, s.report.iterations, s.report.breakdowns.len()),
            Err(e) => println!("  {e}"),
        }
    }
    Ok(())
}
