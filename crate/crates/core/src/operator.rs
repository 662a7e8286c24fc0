//! The 7-band operator: storage, diagonal scaling, application, the
//! lower/tridiagonal/upper split used by the preconditioner, and residuals.

use crate::error::{Error, Result};
use crate::grid::{Direction, Field, Grid3D};
use crate::precision::{Mode, PrecisionPolicy, Real};
use crate::reduce;

/// One of the seven stencil bands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Band {
    C,
    E,
    W,
    N,
    S,
    U,
    D,
}

impl Band {
    pub const ALL: [Band; 7] = [Band::C, Band::E, Band::W, Band::N, Band::S, Band::U, Band::D];
    pub const HORIZONTAL: [Band; 4] = [Band::E, Band::W, Band::N, Band::S];

    #[inline]
    fn slot(self) -> usize {
        self as usize
    }

    pub fn direction(self) -> Option<Direction> {
        match self {
            Band::C => None,
            Band::E => Some(Direction::E),
            Band::W => Some(Direction::W),
            Band::N => Some(Direction::N),
            Band::S => Some(Direction::S),
            Band::U => Some(Direction::U),
            Band::D => Some(Direction::D),
        }
    }

    pub fn from_direction(dir: Direction) -> Band {
        match dir {
            Direction::E => Band::E,
            Direction::W => Band::W,
            Direction::N => Band::N,
            Direction::S => Band::S,
            Direction::U => Band::U,
            Direction::D => Band::D,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Band::C => "C",
            Band::E => "E",
            Band::W => "W",
            Band::N => "N",
            Band::S => "S",
            Band::U => "U",
            Band::D => "D",
        }
    }
}

/// Seven coefficient fields; the entry of band `b` at point `p` multiplies the
/// value at `neighbor(p, b)`. Entries whose neighbour is absent are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedMatrix<S> {
    grid: Grid3D,
    bands: [Vec<S>; 7],
}

impl<S: Real> BandedMatrix<S> {
    pub fn zeros(grid: Grid3D) -> Self {
        let n = grid.len();
        Self { grid, bands: std::array::from_fn(|_| vec![S::zero(); n]) }
    }

    /// The identity operator.
    pub fn identity(grid: Grid3D) -> Self {
        let mut m = Self::zeros(grid);
        m.bands[Band::C.slot()].fill(S::one());
        m
    }

    /// Build from a per-point, per-band function. Values requested for absent
    /// neighbours are ignored and stored as zero.
    pub fn from_fn(grid: Grid3D, mut f: impl FnMut(usize, Band) -> S) -> Self {
        let mut m = Self::zeros(grid);
        for p in 0..grid.len() {
            for band in Band::ALL {
                let present = match band.direction() {
                    None => true,
                    Some(dir) => grid.neighbor_index(p, dir).is_some(),
                };
                if present {
                    m.bands[band.slot()][p] = f(p, band);
                }
            }
        }
        m
    }

    #[inline]
    pub fn grid(&self) -> &Grid3D {
        &self.grid
    }

    #[inline]
    pub fn band(&self, band: Band) -> &[S] {
        &self.bands[band.slot()]
    }

    #[inline]
    pub(crate) fn band_mut(&mut self, band: Band) -> &mut [S] {
        &mut self.bands[band.slot()]
    }

    #[inline]
    pub fn get(&self, p: usize, band: Band) -> S {
        self.bands[band.slot()][p]
    }

    /// Set an entry. Panics if `band` points at an absent neighbour and `v != 0`.
    pub fn set(&mut self, p: usize, band: Band, v: S) {
        if let Some(dir) = band.direction() {
            assert!(
                v == S::zero() || self.grid.neighbor_index(p, dir).is_some(),
                "band {} at point {p} has no neighbour",
                band.name()
            );
        }
        self.bands[band.slot()][p] = v;
    }

    pub fn cast<T: Real>(&self) -> BandedMatrix<T> {
        BandedMatrix {
            grid: self.grid,
            bands: std::array::from_fn(|b| {
                self.bands[b].iter().map(|v| T::from_f64(v.as_f64())).collect()
            }),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.bands.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    /// `|C(p)| / sum of |off-diagonals(p)|`, or infinity for a row with no couplings.
    pub fn row_dominance(&self, p: usize) -> f64 {
        let off: f64 = Band::ALL[1..].iter().map(|b| self.get(p, *b).as_f64().abs()).sum();
        if off == 0.0 {
            f64::INFINITY
        } else {
            self.get(p, Band::C).as_f64().abs() / off
        }
    }

    /// `y = A x` with all arithmetic in `S`.
    pub fn matvec(&self, x: &Field<S>) -> Result<Field<S>> {
        self.grid.check_same(x.grid())?;
        let mut y = Field::zeros(self.grid);
        self.apply_into(x.as_slice(), y.as_mut_slice());
        Ok(y)
    }

    /// `y = A x` on raw slices of grid length.
    ///
    /// Per point the terms are added in the fixed order C, D, U, W, E, S, N.
    pub fn apply_into(&self, x: &[S], y: &mut [S]) {
        let g = &self.grid;
        let nz = g.nz();
        debug_assert_eq!(x.len(), g.len());
        debug_assert_eq!(y.len(), g.len());
        let [c, e, w, n, s, u, d] = &self.bands;
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                let col = g.column(i, j);
                let base = col * nz;
                let hw = g.neighbor_column(i, j, Direction::W).map(|q| q * nz);
                let he = g.neighbor_column(i, j, Direction::E).map(|q| q * nz);
                let hs = g.neighbor_column(i, j, Direction::S).map(|q| q * nz);
                let hn = g.neighbor_column(i, j, Direction::N).map(|q| q * nz);
                for k in 0..nz {
                    let p = base + k;
                    let mut acc = c[p] * x[p];
                    if k > 0 {
                        acc = acc + d[p] * x[p - 1];
                    }
                    if k + 1 < nz {
                        acc = acc + u[p] * x[p + 1];
                    }
                    if let Some(q) = hw {
                        acc = acc + w[p] * x[q + k];
                    }
                    if let Some(q) = he {
                        acc = acc + e[p] * x[q + k];
                    }
                    if let Some(q) = hs {
                        acc = acc + s[p] * x[q + k];
                    }
                    if let Some(q) = hn {
                        acc = acc + n[p] * x[q + k];
                    }
                    y[p] = acc;
                }
            }
        }
    }

    /// Split into `(L, T, U)` with `L + T + U = A` entry for entry.
    ///
    /// `T` holds the centre and vertical bands. A horizontal entry goes to `L`
    /// when its neighbour has a lower flat index than the row point and to `U`
    /// otherwise, so the periodic-seam East entry at `i = nx - 1` lands in `L`
    /// and the seam West entry at `i = 0` lands in `U`.
    pub fn split_ltu(&self) -> (BandedMatrix<S>, BandedMatrix<S>, BandedMatrix<S>) {
        let g = self.grid;
        let mut lower = Self::zeros(g);
        let mut tri = Self::zeros(g);
        let mut upper = Self::zeros(g);
        for band in [Band::C, Band::U, Band::D] {
            tri.band_mut(band).copy_from_slice(self.band(band));
        }
        for p in 0..g.len() {
            for band in Band::HORIZONTAL {
                let dir = band.direction().unwrap();
                if let Some(q) = g.neighbor_index(p, dir) {
                    let v = self.get(p, band);
                    if q < p {
                        lower.band_mut(band)[p] = v;
                    } else {
                        upper.band_mut(band)[p] = v;
                    }
                }
            }
        }
        (lower, tri, upper)
    }
}

/// Divide every row by its centre coefficient: returns `(D^-1 A, D^-1 b)`.
/// Afterwards the centre band is exactly one.
pub fn diag_scale<S: Real>(a: &BandedMatrix<S>, b: &Field<S>) -> Result<(BandedMatrix<S>, Field<S>)> {
    a.grid.check_same(b.grid())?;
    let center = a.band(Band::C);
    if let Some(index) = center.iter().position(|c| *c == S::zero()) {
        return Err(Error::SingularDiagonal { index });
    }
    let mut scaled = a.clone();
    for band in Band::ALL {
        if band == Band::C {
            continue;
        }
        for (v, c) in scaled.band_mut(band).iter_mut().zip(center) {
            *v = *v / *c;
        }
    }
    scaled.band_mut(Band::C).fill(S::one());
    let mut rhs = b.clone();
    for (v, c) in rhs.as_mut_slice().iter_mut().zip(center) {
        *v = *v / *c;
    }
    Ok((scaled, rhs))
}

/// Residual `r = b - A x` and its relative norm `||r|| / ||b||`.
///
/// Arithmetic happens at the policy's working width, with `x` rounded on the
/// fly when it is stored wider. Under [`Mode::Mixed`] the solution is held in
/// 64-bit, so the residual is formed in 64-bit from the exactly promoted
/// 32-bit operator before being rounded to the work vector. Norms are
/// accumulated at the policy's reduction width.
pub fn residual<S: Real, X: Real>(
    a: &BandedMatrix<S>,
    x: &Field<X>,
    b: &Field<S>,
    policy: &PrecisionPolicy,
) -> Result<(Field<S>, f64)> {
    a.grid.check_same(x.grid())?;
    a.grid.check_same(b.grid())?;
    let width = policy.reduction();
    let b_norm = reduce::norm2(b.as_slice(), width);
    if b_norm == 0.0 {
        return Err(Error::DegenerateRhs);
    }
    let mut r = Field::zeros(a.grid);
    let r_norm = residual_into(a, x.as_slice(), b.as_slice(), policy, r.as_mut_slice());
    Ok((r, r_norm / b_norm))
}

/// Writes `b - A x` into `r` and returns `||b - A x||` at the reduction width.
pub(crate) fn residual_into<S: Real, X: Real>(
    a: &BandedMatrix<S>,
    x: &[X],
    b: &[S],
    policy: &PrecisionPolicy,
    r: &mut [S],
) -> f64 {
    let width = policy.reduction();
    if policy.mode == Mode::Mixed {
        let a64 = a.cast::<f64>();
        let x64: Vec<f64> = x.iter().map(|v| v.as_f64()).collect();
        let mut ax = vec![0.0f64; x.len()];
        a64.apply_into(&x64, &mut ax);
        let r64: Vec<f64> = b.iter().zip(&ax).map(|(bi, yi)| bi.as_f64() - yi).collect();
        for (dst, v) in r.iter_mut().zip(&r64) {
            *dst = S::from_f64(*v);
        }
        reduce::norm2(&r64, width)
    } else {
        let xs: Vec<S> = x.iter().map(|v| S::from_f64(v.as_f64())).collect();
        a.apply_into(&xs, r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = *bi - *ri;
        }
        reduce::norm2(r, width)
    }
}
