//! Working-set arithmetic for a few decompositions.

use mpsolve::harness::cmd_perf;
use mpsolve::perf::{working_set, Decomposition};

fn main() -> mpsolve::Result<()> {
    let base = Decomposition::default();
    print!("{}", cmd_perf(&base)?);

    println!("\nthreads  LV        bytes32    bytes64    fits32 fits64");
    for threads in [1, 2, 3, 4, 6] {
        let ws = working_set(&Decomposition { n_threads: threads, ..base })?;
        println!(
            "{threads:>7}  {:<9} {:<10} {:<10} {:<6} {}",
            ws.local_volume.points, ws.bytes32, ws.bytes64, ws.fits32, ws.fits64
        );
    }

    println!("\nranks_x for which 64-bit fits with 3 threads:");
    let fits: Vec<u64> = (16..=256).filter(|&rx| working_set(&Decomposition { ranks_x: rx, ..base }).is_ok_and(|w| w.fits64)).collect();
    println!("{:?}..", fits.first());
    Ok(())
}
