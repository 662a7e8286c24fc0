//! Deterministic generator of Helmholtz-shaped 7-band test problems.
//!
//! All pseudo-random values come from [`noise`], a counter-based hash of
//! `(seed, stream, flat index)` built on the SplitMix64 finaliser, so a
//! problem is a pure function of its [`ProblemSpec`] on every platform.
//!
//! Construction, for each coupling between a point `p` and its forward
//! neighbour `q` (East, North or Up):
//!
//! * face magnitude `c = base * m`, with `base = 1` horizontally and
//!   `vertical_strength` vertically, and `m` a smooth modulation
//!   `1 + 0.4 sin(...) cos(...) + 0.2 noise` that stays in `[0.4, 1.6]`;
//! * forward entry `c (1 + asymmetry * eta)` at `p`, backward entry
//!   `c (1 - asymmetry * eta)` at `q`, with `eta` a per-face noise value, so
//!   the unscaled operator is symmetric exactly when `asymmetry == 0`;
//! * centre `-diag_dominance * (sum of off-diagonals in the row)`, giving
//!   a negative centre and positive off-diagonals.
//!
//! The operator is then divided by its diagonal. The manufactured reference
//! solution is a smooth O(1) field and the right-hand side is the scaled
//! operator applied to it in 64-bit.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Direction, Field, Grid3D};
use crate::operator::{diag_scale, Band, BandedMatrix};
use crate::precision::Real;

/// How the right-hand side is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RhsMode {
    /// `b = A x_ref` for a known smooth `x_ref`.
    Manufactured,
    /// Uniform noise in `[-1, 1)`; no reference solution.
    Random,
}

impl fmt::Display for RhsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RhsMode::Manufactured => "manufactured",
            RhsMode::Random => "random",
        })
    }
}

impl FromStr for RhsMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "manufactured" => Ok(RhsMode::Manufactured),
            "random" => Ok(RhsMode::Random),
            other => Err(Error::Config(format!("unknown rhs mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub periodic_x: bool,
    pub seed: u64,
    /// `|centre| / sum |off-diagonals|` in every row; at least 1.
    pub diag_dominance: f64,
    /// Relative size of the antisymmetric perturbation, in `[0, 1)`.
    pub asymmetry: f64,
    /// Ratio of vertical to horizontal coupling magnitudes.
    pub vertical_strength: f64,
    pub rhs_mode: RhsMode,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            nx: 48,
            ny: 36,
            nz: 20,
            periodic_x: true,
            seed: 1,
            diag_dominance: 1.2,
            asymmetry: 0.1,
            vertical_strength: 5.0,
            rhs_mode: RhsMode::Manufactured,
        }
    }
}

impl ProblemSpec {
    pub fn with_grid(nx: usize, ny: usize, nz: usize) -> Self {
        Self { nx, ny, nz, ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn grid(&self) -> Result<Grid3D> {
        Grid3D::new(self.nx, self.ny, self.nz, self.periodic_x)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if !(self.diag_dominance >= 1.0 && self.diag_dominance.is_finite()) {
            return Err(Error::Config(format!(
                "diag_dominance must be >= 1, got {}",
                self.diag_dominance
            )));
        }
        if !(0.0..1.0).contains(&self.asymmetry) {
            return Err(Error::Config(format!("asymmetry must be in [0, 1), got {}", self.asymmetry)));
        }
        if !(self.vertical_strength > 0.0 && self.vertical_strength.is_finite()) {
            return Err(Error::Config(format!(
                "vertical_strength must be positive, got {}",
                self.vertical_strength
            )));
        }
        Ok(())
    }
}

/// A diagonally scaled linear system plus its reference data.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem<S> {
    /// Scaled operator; centre band is identically one.
    pub matrix: BandedMatrix<S>,
    pub rhs: Field<S>,
    /// Manufactured solution, present iff the rhs mode is manufactured.
    pub x_ref: Option<Field<f64>>,
    pub x0: Field<f64>,
}

impl<S: Real> Problem<S> {
    pub fn grid(&self) -> &Grid3D {
        self.matrix.grid()
    }

    /// Round operator and right-hand side to width `T`. Reference solution and
    /// initial guess stay in 64-bit.
    pub fn cast<T: Real>(&self) -> Problem<T> {
        Problem {
            matrix: self.matrix.cast(),
            rhs: self.rhs.cast(),
            x_ref: self.x_ref.clone(),
            x0: self.x0.clone(),
        }
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform value in `[-1, 1)` determined by `(seed, stream, index)`.
///
/// `mix64(mix64(seed + GOLDEN * (stream + 1)) ^ (index * GOLDEN))`, top 53
/// bits mapped to `[0, 1)` and then affinely to `[-1, 1)`.
pub fn noise(seed: u64, stream: u64, index: u64) -> f64 {
    let key = mix64(seed.wrapping_add(GOLDEN.wrapping_mul(stream.wrapping_add(1))));
    let h = mix64(key ^ index.wrapping_mul(GOLDEN));
    let unit = (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    2.0 * unit - 1.0
}

/// Phase in `[0, 2 pi)` for stream `stream`.
fn phase(seed: u64, stream: u64) -> f64 {
    PI * (noise(seed, stream, u64::MAX) + 1.0)
}

// Noise stream ids.
const STREAM_FACE: u64 = 0; // +0,+1,+2 for E,N,U faces
const STREAM_ASYM: u64 = 3; // +0,+1,+2
const STREAM_PHASE: u64 = 6; // phases
const STREAM_RHS: u64 = 20;

const MOD_AMPLITUDE: f64 = 0.4;
const NOISE_AMPLITUDE: f64 = 0.2;

/// Unscaled operator and (for manufactured problems) the reference solution.
pub fn generate_unscaled(spec: &ProblemSpec) -> Result<(BandedMatrix<f64>, Option<Field<f64>>)> {
    spec.validate()?;
    let grid = spec.grid()?;
    let (nx, ny, nz) = (grid.nx() as f64, grid.ny() as f64, grid.nz() as f64);
    let seed = spec.seed;
    let mut a = BandedMatrix::<f64>::zeros(grid);

    let forward = [(Direction::E, 1.0), (Direction::N, 1.0), (Direction::U, spec.vertical_strength)];
    for (f, (dir, base)) in forward.iter().enumerate() {
        let f = f as u64;
        let (ph1, ph2, ph3) = (
            phase(seed, STREAM_PHASE + 3 * f),
            phase(seed, STREAM_PHASE + 3 * f + 1),
            phase(seed, STREAM_PHASE + 3 * f + 2),
        );
        for p in 0..grid.len() {
            let Some(q) = grid.neighbor_index(p, *dir) else { continue };
            let (i, j, k) = grid.coords(p);
            // face-centred coordinates
            let (xi, yj, zk) = match dir {
                Direction::E => (i as f64 + 0.5, j as f64, k as f64),
                Direction::N => (i as f64, j as f64 + 0.5, k as f64),
                _ => (i as f64, j as f64, k as f64 + 0.5),
            };
            let smooth = (2.0 * PI * xi / nx + ph1).sin() * (PI * yj / ny + ph2).cos()
                * (0.5 + 0.5 * (PI * zk / nz + ph3).cos());
            let m = 1.0 + MOD_AMPLITUDE * smooth + NOISE_AMPLITUDE * noise(seed, STREAM_FACE + f, p as u64);
            let c = base * m;
            let eta = noise(seed, STREAM_ASYM + f, p as u64);
            let fwd = Band::from_direction(*dir);
            let bwd = Band::from_direction(dir.opposite());
            // += because a two-column periodic ring reaches the same neighbour both ways
            a.band_mut(fwd)[p] += c * (1.0 + spec.asymmetry * eta);
            a.band_mut(bwd)[q] += c * (1.0 - spec.asymmetry * eta);
        }
    }
    for p in 0..grid.len() {
        let off: f64 = Band::ALL[1..].iter().map(|b| a.get(p, *b).abs()).sum();
        // an isolated point (1x1x1 grid) has no couplings; give it a unit diagonal
        let center = if off > 0.0 { -spec.diag_dominance * off } else { -1.0 };
        a.band_mut(Band::C)[p] = center;
    }

    let x_ref = match spec.rhs_mode {
        RhsMode::Manufactured => Some(reference_solution(grid, seed)),
        RhsMode::Random => None,
    };
    Ok((a, x_ref))
}

fn reference_solution(grid: Grid3D, seed: u64) -> Field<f64> {
    let (nx, ny, nz) = (grid.nx() as f64, grid.ny() as f64, grid.nz() as f64);
    let (p1, p2, p3) = (phase(seed, 16), phase(seed, 17), phase(seed, 18));
    Field::from_fn(grid, |i, j, k| {
        let (x, y, z) = (i as f64 / nx, (j as f64 + 0.5) / ny, (k as f64 + 0.5) / nz);
        1.0 + 0.5 * (2.0 * PI * x + p1).sin() * (PI * y + p2).cos() + 0.3 * (PI * z + p3).cos()
            + 0.2 * (4.0 * PI * x + p2).cos() * (2.0 * PI * y + p3).sin() * (2.0 * PI * z + p1).sin()
    })
}

/// Generate a scaled problem in 64-bit.
pub fn generate(spec: &ProblemSpec) -> Result<Problem<f64>> {
    let (a, x_ref) = generate_unscaled(spec)?;
    let grid = *a.grid();
    let unscaled_rhs = match &x_ref {
        Some(x) => a.matvec(x)?,
        None => Field::from_fn(grid, |i, j, k| noise(spec.seed, STREAM_RHS, grid.index(i, j, k) as u64)),
    };
    let (matrix, scaled_rhs) = diag_scale(&a, &unscaled_rhs)?;
    // manufactured rhs is the scaled operator applied to x_ref, exactly as a solver would evaluate it
    let rhs = match &x_ref {
        Some(x) => matrix.matvec(x)?,
        None => scaled_rhs,
    };
    Ok(Problem { matrix, rhs, x_ref, x0: Field::zeros(grid) })
}
