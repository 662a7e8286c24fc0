//! Mixed-precision BiCGstab for 7-band Helmholtz-type pressure-correction
//! operators, preconditioned by tridiagonal SOR, with tooling to study how
//! 32-bit, 64-bit and mixed arithmetic change convergence.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: structured grid, index mapping and fields;
//! * [`operator`]: the banded operator, diagonal scaling, application and
//!   the `L + T + U` split;
//! * [`generate`]: deterministic generator of test problems;
//! * [`precond`]: per-column Thomas factors and the tri-SOR sweep;
//! * [`krylov`]: the BiCGstab engine, precision policies, breakdown and
//!   restart handling;
//! * [`reduce`]: fixed-shape pairwise reductions;
//! * [`perf`]: working-set and cache-fit arithmetic;
//! * [`harness`]: configuration files, runs, sweeps, CSV and SVG output.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod error;
pub mod generate;
pub mod grid;
pub mod harness;
pub mod krylov;
pub mod operator;
pub mod perf;
pub mod precision;
pub mod precond;
pub mod reduce;

pub use error::{Error, Result, SolveFailure};
pub use generate::{generate, Problem, ProblemSpec, RhsMode};
pub use grid::{Direction, Field, Grid3D};
pub use krylov::{bicgstab_solve, SolveConfig, SolveReport, Solution};
pub use operator::{diag_scale, residual, Band, BandedMatrix};
pub use precision::{Mode, PrecisionPolicy, Real, Width};
pub use precond::{factor_t, tri_solve, tri_sor_apply, SorParams, TriFactor};
