//! Fixed-shape pairwise reduction against naive sequential sums.

use mpsolve::generate::noise;
use mpsolve::reduce::{deterministic_reduce, dot};
use mpsolve::Width;

fn main() {
    let n = 1_000_000u64;
    let v: Vec<f32> = (0..n).map(|i| (noise(42, 0, i) + 1.0) as f32).collect();
    let exact: f64 = v.iter().map(|x| *x as f64).sum();
    let seq: f32 = v.iter().sum();
    let pair32 = deterministic_reduce(&v, Width::Bits32);
    let pair64 = deterministic_reduce(&v, Width::Bits64);
    println!("reference        {exact:.6}");
    println!("sequential f32   {seq:.6}  rel err {:.2e}", ((seq as f64 - exact) / exact).abs());
    println!("pairwise f32     {pair32:.6}  rel err {:.2e}", ((pair32 - exact) / exact).abs());
    println!("pairwise f64     {pair64:.6}  rel err {:.2e}", ((pair64 - exact) / exact).abs());

    // a dot product with heavy cancellation
    let a: Vec<f32> = (0..n).map(|i| noise(1, 0, i) as f32).collect();
    let b: Vec<f32> = (0..n).map(|i| noise(2, 0, i) as f32).collect();
    println!("dot at 32-bit    {:.9e}", dot(&a, &b, Width::Bits32));
    println!("dot at 64-bit    {:.9e}", dot(&a, &b, Width::Bits64));
    println!("same bits twice: {}", deterministic_reduce(&v, Width::Bits32).to_bits() == pair32.to_bits());
}
