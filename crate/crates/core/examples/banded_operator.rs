//! Build a small operator by hand, scale it, apply it and split it.

use mpsolve::{diag_scale, residual, Band, BandedMatrix, Field, Grid3D, PrecisionPolicy};

fn main() -> mpsolve::Result<()> {
    let g = Grid3D::new(4, 3, 2, true)?;
    // 7-point Laplacian-like stencil: -8 in the centre, 1 to every present neighbour
    let a = BandedMatrix::from_fn(g, |_, b| if b == Band::C { -8.0 } else { 1.0 });
    let b = Field::from_fn(g, |i, j, k| (i + 2 * j + 3 * k) as f64);
    let (a, b) = diag_scale(&a, &b)?;
    println!("scaled centre at origin: {}", a.get(0, Band::C));
    println!("scaled east coupling at origin: {}", a.get(0, Band::E));

    let x = Field::from_fn(g, |i, _, _| i as f64);
    let ax = a.matvec(&x)?;
    println!("A x at (1,1,0) = {:.6}", ax.get(1, 1, 0));

    let (l, t, u) = a.split_ltu();
    let seam = g.index(3, 0, 0);
    println!("seam E entry: L {} U {}", l.get(seam, Band::E), u.get(seam, Band::E));
    println!("T keeps only C, U, D: T(E) = {}", t.get(0, Band::E));

    let (_, r) = residual(&a, &x, &b, &PrecisionPolicy::FULL64)?;
    println!("relative residual of x: {r:.6e}");
    Ok(())
}
