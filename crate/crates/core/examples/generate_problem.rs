//! Generate a test problem, inspect it and save it as a container.
//!
//!     cargo run --example generate_problem -- [seed] [out.bin]

use mpsolve::harness::container;
use mpsolve::{generate, Band, ProblemSpec};

fn main() -> mpsolve::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().map_or(1, |s| s.parse().expect("seed"));
    let spec = ProblemSpec::default().with_seed(seed);
    let p = generate(&spec)?;
    let g = p.grid();
    println!("grid {}x{}x{} ({} unknowns), seed {seed}", g.nx(), g.ny(), g.nz(), g.len());

    for b in Band::ALL {
        let v = p.matrix.band(b);
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(*x), h.max(*x)));
        println!("band {}: [{lo:+.4}, {hi:+.4}]", b.name());
    }
    let dom = (0..g.len()).map(|q| p.matrix.row_dominance(q)).fold(f64::INFINITY, f64::min);
    println!("smallest row dominance {dom:.4}");
    println!("max |b| {:.4}", p.rhs.max_abs());

    if let Some(path) = args.next() {
        container::write_problem(&p, path.as_ref())?;
        let back = container::read_problem(path.as_ref())?;
        println!("wrote {path}; reads back identical: {}", back == p);
    }
    Ok(())
}
