//! Tridiagonal SOR preconditioner.
//!
//! The scaled operator is split as `A = L + T + U`, where `T` holds the
//! vertical tridiagonal of every column. One sweep of the stationary
//! iteration solves
//!
//! ```text
//! (T + w L) x_n = (1 - w) T x_{n-1} + w (r - U x_{n-1})
//! ```
//!
//! column by column in flat-index order. Because `L` only couples a column to
//! columns earlier in that order, the sweep is a forward substitution over
//! columns, each step being one vertical tridiagonal solve with a factorisation
//! computed once up front.

use crate::error::{Error, Result};
use crate::grid::{Direction, Field, Grid3D};
use crate::operator::{Band, BandedMatrix};
use crate::precision::Real;

/// Over-relaxation factor and number of sweeps per application.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SorParams {
    pub omega: f64,
    pub n_iters: usize,
}

impl Default for SorParams {
    fn default() -> Self {
        Self { omega: 1.5, n_iters: 3 }
    }
}

impl SorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(Error::Config(format!("omega must be in (0, 2), got {}", self.omega)));
        }
        if self.n_iters == 0 {
            return Err(Error::Config("sor n_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// No-pivot LU factors of every column's vertical tridiagonal.
///
/// For a column with sub-diagonal `D`, diagonal `C` and super-diagonal `U`:
/// `d[0] = C[0]`, `m[k] = D[k] / d[k-1]`, `d[k] = C[k] - m[k] U[k-1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriFactor<S> {
    grid: Grid3D,
    /// Modified diagonal, `nz` per column.
    diag: Vec<S>,
    /// Lower multipliers, `nz - 1` per column.
    mult: Vec<S>,
    /// Super-diagonal copied from the operator, `nz` per column (top entry zero).
    upper: Vec<S>,
}

impl<S: Real> TriFactor<S> {
    pub fn grid(&self) -> &Grid3D {
        &self.grid
    }

    /// Modified diagonal of column `(i, j)`.
    pub fn diag(&self, i: usize, j: usize) -> &[S] {
        let nz = self.grid.nz();
        let c = self.grid.column(i, j);
        &self.diag[c * nz..(c + 1) * nz]
    }

    /// Lower multipliers of column `(i, j)`.
    pub fn multipliers(&self, i: usize, j: usize) -> &[S] {
        let m = self.grid.nz() - 1;
        let c = self.grid.column(i, j);
        &self.mult[c * m..(c + 1) * m]
    }

    /// Solve the tridiagonal system of column `col` in place.
    #[inline]
    fn solve_column(&self, col: usize, x: &mut [S]) {
        let nz = self.grid.nz();
        let d = &self.diag[col * nz..(col + 1) * nz];
        let m = &self.mult[col * (nz - 1)..(col + 1) * (nz - 1)];
        let u = &self.upper[col * nz..(col + 1) * nz];
        for k in 1..nz {
            x[k] = x[k] - m[k - 1] * x[k - 1];
        }
        x[nz - 1] = x[nz - 1] / d[nz - 1];
        for k in (0..nz - 1).rev() {
            x[k] = (x[k] - u[k] * x[k + 1]) / d[k];
        }
    }
}

/// Factorise the vertical tridiagonal of every column, arithmetic in `S`.
pub fn factor_t<S: Real>(a: &BandedMatrix<S>) -> Result<TriFactor<S>> {
    let grid = *a.grid();
    let nz = grid.nz();
    let n = grid.len();
    let (c, u, dn) = (a.band(Band::C), a.band(Band::U), a.band(Band::D));
    let mut diag = vec![S::zero(); n];
    let mut mult = vec![S::zero(); grid.columns() * (nz - 1)];
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let col = grid.column(i, j);
            let base = col * nz;
            let mbase = col * (nz - 1);
            for k in 0..nz {
                let p = base + k;
                let dk = if k == 0 {
                    c[p]
                } else {
                    let m = dn[p] / diag[p - 1];
                    mult[mbase + k - 1] = m;
                    c[p] - m * u[p - 1]
                };
                if dk == S::zero() || !dk.is_finite() {
                    return Err(Error::FactorBreakdown { i, j, k });
                }
                diag[p] = dk;
            }
        }
    }
    Ok(TriFactor { grid, diag, mult, upper: u.to_vec() })
}

/// Solve `T x = rhs` for every column.
pub fn tri_solve<S: Real>(f: &TriFactor<S>, rhs: &Field<S>) -> Result<Field<S>> {
    f.grid.check_same(rhs.grid())?;
    let mut x = rhs.clone();
    let nz = f.grid.nz();
    for (col, chunk) in x.as_mut_slice().chunks_exact_mut(nz).enumerate() {
        f.solve_column(col, chunk);
    }
    Ok(x)
}

/// Apply the preconditioner: `n_iters` tri-SOR sweeps on `A z = r` from `z = 0`.
pub fn tri_sor_apply<S: Real>(
    a: &BandedMatrix<S>,
    f: &TriFactor<S>,
    r: &Field<S>,
    params: &SorParams,
) -> Result<Field<S>> {
    a.grid().check_same(f.grid())?;
    a.grid().check_same(r.grid())?;
    let mut z = Field::zeros(*a.grid());
    let mut scratch = vec![S::zero(); a.grid().nz()];
    tri_sor_into(a, f, r.as_slice(), params, z.as_mut_slice(), &mut scratch)?;
    Ok(z)
}

/// Sweep kernel shared with the solver. `z` is overwritten.
pub(crate) fn tri_sor_into<S: Real>(
    a: &BandedMatrix<S>,
    f: &TriFactor<S>,
    r: &[S],
    params: &SorParams,
    z: &mut [S],
    scratch: &mut [S],
) -> Result<()> {
    z.fill(S::zero());
    sweep_from(a, f, r, params, z, scratch, true)
}

/// Run `params.n_iters` sweeps on `A x = r` starting from the current `x`.
pub fn tri_sor_sweep<S: Real>(
    a: &BandedMatrix<S>,
    f: &TriFactor<S>,
    r: &Field<S>,
    params: &SorParams,
    x: &mut Field<S>,
) -> Result<()> {
    a.grid().check_same(f.grid())?;
    a.grid().check_same(r.grid())?;
    a.grid().check_same(x.grid())?;
    let mut scratch = vec![S::zero(); a.grid().nz()];
    sweep_from(a, f, r.as_slice(), params, x.as_mut_slice(), &mut scratch, false)
}

fn sweep_from<S: Real>(
    a: &BandedMatrix<S>,
    f: &TriFactor<S>,
    r: &[S],
    params: &SorParams,
    x: &mut [S],
    scratch: &mut [S],
    x_is_zero: bool,
) -> Result<()> {
    let g = *a.grid();
    let nz = g.nz();
    let omega = S::from_f64(params.omega);
    let keep = S::one() - omega;
    let (c, up, dn) = (a.band(Band::C), a.band(Band::U), a.band(Band::D));
    let horiz = [
        (a.band(Band::W), Direction::W),
        (a.band(Band::E), Direction::E),
        (a.band(Band::S), Direction::S),
        (a.band(Band::N), Direction::N),
    ];
    let acc = &mut scratch[..nz];
    for sweep in 0..params.n_iters {
        // x is updated in place: neighbours in L (earlier columns) already hold
        // the new sweep's values, neighbours in U and the column itself still
        // hold the previous sweep's.
        // (1 - w) T x_{n-1} vanishes on the first sweep from zero
        let start_zero = x_is_zero && sweep == 0;
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                let col = g.column(i, j);
                let base = col * nz;
                acc.fill(S::zero());
                for (band, dir) in &horiz {
                    if let Some(q) = g.neighbor_column(i, j, *dir) {
                        let coef = &band[base..base + nz];
                        let xq = &x[q * nz..(q + 1) * nz];
                        for ((s, b), v) in acc.iter_mut().zip(coef).zip(xq) {
                            *s = *s + *b * *v;
                        }
                    }
                }
                let rc = &r[base..base + nz];
                for (s, rv) in acc.iter_mut().zip(rc) {
                    *s = omega * (*rv - *s);
                }
                if !start_zero {
                    let xc = &x[base..base + nz];
                    let (cc, uc, dc) = (&c[base..base + nz], &up[base..base + nz], &dn[base..base + nz]);
                    for k in 0..nz {
                        let mut tx = cc[k] * xc[k];
                        if k > 0 {
                            tx = tx + dc[k] * xc[k - 1];
                        }
                        if k + 1 < nz {
                            tx = tx + uc[k] * xc[k + 1];
                        }
                        acc[k] = keep * tx + acc[k];
                    }
                }
                f.solve_column(col, acc);
                if !acc.iter().all(|v| v.is_finite()) {
                    return Err(Error::PreconditionerOverflow);
                }
                x[base..base + nz].copy_from_slice(acc);
            }
        }
    }
    Ok(())
}
