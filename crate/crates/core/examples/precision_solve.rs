//! Solve one problem under each precision policy and compare.
//!
//!     cargo run --release --example precision_solve -- [tol]

use mpsolve::{bicgstab_solve, generate, PrecisionPolicy, ProblemSpec, SolveConfig};

fn main() -> mpsolve::Result<()> {
    let tol = std::env::args().nth(1).map_or(1e-4, |s| s.parse().expect("tol"));
    let p = generate(&ProblemSpec::default())?;
    let config = SolveConfig { tol, ..SolveConfig::default() };
    let policies = ["full64", "mixed", "mixed-r32", "full32", "full32-r64"];
    for name in policies {
        let policy: PrecisionPolicy = name.parse()?;
        match bicgstab_solve(&p, &config, &policy) {
            Ok(s) => {
                let r = &s.report;
                println!(
                    "{name:>10}: converged={} its={} restarts={} R={:.6e} true R={:.6e} error={:.3e}",
                    r.converged,
                    r.iterations,
                    r.restarts.len(),
                    r.final_residual(),
                    r.final_true_r,
                    r.final_true_error.unwrap_or(f64::NAN)
                );
            }
            Err(e) => println!("{name:>10}: {e}"),
        }
    }
    Ok(())
}
