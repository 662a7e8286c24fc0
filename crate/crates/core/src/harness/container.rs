//! Flat binary container for 64-bit problems.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic   8 bytes  "MPSPROB1"
//! nx ny nz         u64 x 3
//! periodic_x       u8
//! has_x_ref        u8
//! bands            7 x n f64, in the order C E W N S U D
//! rhs              n f64
//! x0               n f64
//! x_ref            n f64, only if has_x_ref
//! ```

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::generate::Problem;
use crate::grid::{Field, Grid3D};
use crate::operator::{Band, BandedMatrix};

const MAGIC: &[u8; 8] = b"MPSPROB1";

pub fn encode(problem: &Problem<f64>) -> Vec<u8> {
    let g = problem.grid();
    let n = g.len();
    let mut out = Vec::with_capacity(8 + 26 + 8 * n * 10);
    out.extend_from_slice(MAGIC);
    for d in [g.nx(), g.ny(), g.nz()] {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    out.push(g.periodic_x() as u8);
    out.push(problem.x_ref.is_some() as u8);
    let mut put = |v: &[f64]| v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
    for b in Band::ALL {
        put(problem.matrix.band(b));
    }
    put(problem.rhs.as_slice());
    put(problem.x0.as_slice());
    if let Some(x) = &problem.x_ref {
        put(x.as_slice());
    }
    out
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<Problem<f64>> {
    let bad = |msg: &str| Error::Data { path: path.to_path_buf(), line: 0, msg: msg.to_string() };
    let mut rd = bytes;
    let mut magic = [0u8; 8];
    rd.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
    if &magic != MAGIC {
        return Err(bad("not a problem container"));
    }
    let mut u64s = [0usize; 3];
    for d in &mut u64s {
        let mut b = [0u8; 8];
        rd.read_exact(&mut b).map_err(|_| bad("truncated header"))?;
        *d = usize::try_from(u64::from_le_bytes(b)).map_err(|_| bad("dimension too large"))?;
    }
    let mut flags = [0u8; 2];
    rd.read_exact(&mut flags).map_err(|_| bad("truncated header"))?;
    if flags.iter().any(|&f| f > 1) {
        return Err(bad("flag byte is not 0 or 1"));
    }
    let grid = Grid3D::new(u64s[0], u64s[1], u64s[2], flags[0] == 1)?;
    let n = grid.len();
    let vectors = 7 + 2 + flags[1] as usize;
    if rd.len() != vectors * n * 8 {
        return Err(bad(&format!("expected {} payload bytes, found {}", vectors * n * 8, rd.len())));
    }
    let mut take = || -> Vec<f64> {
        let (head, tail) = rd.split_at(n * 8);
        rd = tail;
        head.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect()
    };
    let bands: Vec<Vec<f64>> = (0..7).map(|_| take()).collect();
    for (bi, band) in Band::ALL.iter().enumerate() {
        if let Some(dir) = band.direction() {
            for (p, v) in bands[bi].iter().enumerate() {
                if *v != 0.0 && grid.neighbor_index(p, dir).is_none() {
                    return Err(bad(&format!("band {} has an entry at {p} with no neighbour", band.name())));
                }
            }
        }
    }
    let matrix = BandedMatrix::from_fn(grid, |p, b| bands[b as usize][p]);
    let rhs = Field::from_vec(grid, take())?;
    let x0 = Field::from_vec(grid, take())?;
    let x_ref = if flags[1] == 1 { Some(Field::from_vec(grid, take())?) } else { None };
    Ok(Problem { matrix, rhs, x_ref, x0 })
}

pub fn write_problem(problem: &Problem<f64>, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode(problem)).map_err(|e| Error::io(path, e))
}

pub fn read_problem(path: &Path) -> Result<Problem<f64>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, ProblemSpec, RhsMode};

    #[test]
    fn round_trip_is_exact() {
        for rhs_mode in [RhsMode::Manufactured, RhsMode::Random] {
            let spec = ProblemSpec { rhs_mode, ..ProblemSpec::with_grid(5, 4, 3) };
            let p = generate(&spec).unwrap();
            let q = decode(&encode(&p), Path::new("mem")).unwrap();
            assert_eq!(p, q);
        }
    }

    #[test]
    fn corrupt_inputs_rejected() {
        let p = generate(&ProblemSpec::with_grid(3, 3, 2)).unwrap();
        let bytes = encode(&p);
        assert!(decode(&bytes[..bytes.len() - 1], Path::new("m")).is_err());
        assert!(decode(&bytes[..10], Path::new("m")).is_err());
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(decode(&wrong, Path::new("m")).is_err());
        let mut flag = bytes.clone();
        flag[32] = 7;
        assert!(decode(&flag, Path::new("m")).is_err());
    }

    #[test]
    fn boundary_entries_must_be_zero() {
        let p = generate(&ProblemSpec { periodic_x: false, ..ProblemSpec::with_grid(3, 3, 2) }).unwrap();
        let mut bytes = encode(&p);
        // first entry of the W band: point (0,0,0) has no western neighbour
        let off = 8 + 26 + 2 * p.grid().len() * 8;
        bytes[off..off + 8].copy_from_slice(&1.0f64.to_le_bytes());
        let err = decode(&bytes, Path::new("m")).unwrap_err().to_string();
        assert!(err.contains("band W"), "{err}");
    }
}
