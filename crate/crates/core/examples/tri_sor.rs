//! Tri-SOR preconditioner: per-column Thomas factors and the sweep.

use mpsolve::krylov::true_relative_residual;
use mpsolve::{factor_t, generate, tri_solve, tri_sor_apply, ProblemSpec, SorParams};

fn main() -> mpsolve::Result<()> {
    let p = generate(&ProblemSpec::with_grid(16, 12, 10))?;
    let f = factor_t(&p.matrix)?;

    let y = tri_solve(&f, &p.rhs)?;
    println!("T^-1 b alone: R = {:.3e}", true_relative_residual(&p, y.as_slice()));

    for n_iters in [1, 2, 3, 5, 10, 20] {
        let z = tri_sor_apply(&p.matrix, &f, &p.rhs, &SorParams { omega: 1.5, n_iters })?;
        println!("{n_iters:2} sweeps: R = {:.3e}", true_relative_residual(&p, z.as_slice()));
    }
    for omega in [0.8, 1.0, 1.2, 1.5, 1.8] {
        let z = tri_sor_apply(&p.matrix, &f, &p.rhs, &SorParams { omega, n_iters: 3 })?;
        println!("omega {omega}: R = {:.3e}", true_relative_residual(&p, z.as_slice()));
    }
    Ok(())
}
