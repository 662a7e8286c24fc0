//! Structured lon-lat-like grid and the fields that live on it.
//!
//! Storage is vertical-fastest: the flat index of `(i, j, k)` is
//! `k + nz * (i + nx * j)`, so every horizontal column is one contiguous run
//! of `nz` values and the per-column tridiagonal solves are stride-1.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::precision::Real;

/// Stencil directions. East-West is `i`, North-South is `j`, Up-Down is `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    E,
    W,
    N,
    S,
    U,
    D,
}

impl Direction {
    pub const ALL: [Direction; 6] = [
        Direction::E,
        Direction::W,
        Direction::N,
        Direction::S,
        Direction::U,
        Direction::D,
    ];

    pub fn opposite(self) -> Direction {
        match self {
            Direction::E => Direction::W,
            Direction::W => Direction::E,
            Direction::N => Direction::S,
            Direction::S => Direction::N,
            Direction::U => Direction::D,
            Direction::D => Direction::U,
        }
    }

    pub fn is_vertical(self) -> bool {
        matches!(self, Direction::U | Direction::D)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Grid3D {
    nx: usize,
    ny: usize,
    nz: usize,
    periodic_x: bool,
}

impl Grid3D {
    pub fn new(nx: usize, ny: usize, nz: usize, periodic_x: bool) -> Result<Self> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::Config(format!(
                "grid dimensions must be positive, got {nx}x{ny}x{nz}"
            )));
        }
        nx.checked_mul(ny)
            .and_then(|v| v.checked_mul(nz))
            .ok_or_else(|| Error::Config(format!("grid {nx}x{ny}x{nz} is too large")))?;
        Ok(Self { nx, ny, nz, periodic_x })
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }
    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }
    #[inline]
    pub fn nz(&self) -> usize {
        self.nz
    }
    #[inline]
    pub fn periodic_x(&self) -> bool {
        self.periodic_x
    }

    /// Number of grid points.
    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of horizontal columns.
    #[inline]
    pub fn columns(&self) -> usize {
        self.nx * self.ny
    }

    /// Flat index of `(i, j, k)`.
    ///
    /// Panics on out-of-range coordinates.
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        assert!(
            i < self.nx && j < self.ny && k < self.nz,
            "({i},{j},{k}) outside {}x{}x{} grid",
            self.nx,
            self.ny,
            self.nz
        );
        k + self.nz * (i + self.nx * j)
    }

    /// Inverse of [`Grid3D::index`].
    #[inline]
    pub fn coords(&self, p: usize) -> (usize, usize, usize) {
        debug_assert!(p < self.len());
        let k = p % self.nz;
        let col = p / self.nz;
        (col % self.nx, col / self.nx, k)
    }

    /// Column index `i + nx * j`; column `c` occupies flat indices `c*nz .. (c+1)*nz`.
    #[inline]
    pub fn column(&self, i: usize, j: usize) -> usize {
        i + self.nx * j
    }

    /// Neighbouring point in `dir`, or `None` at a non-periodic boundary.
    ///
    /// East-West wraps when `periodic_x` holds and `nx > 1`; a single-column
    /// periodic ring would couple a point to itself, so it has no E/W neighbours.
    pub fn neighbor(&self, i: usize, j: usize, k: usize, dir: Direction) -> Option<(usize, usize, usize)> {
        debug_assert!(i < self.nx && j < self.ny && k < self.nz);
        match dir {
            Direction::E => {
                if i + 1 < self.nx {
                    Some((i + 1, j, k))
                } else if self.periodic_x && self.nx > 1 {
                    Some((0, j, k))
                } else {
                    None
                }
            }
            Direction::W => {
                if i > 0 {
                    Some((i - 1, j, k))
                } else if self.periodic_x && self.nx > 1 {
                    Some((self.nx - 1, j, k))
                } else {
                    None
                }
            }
            Direction::N => (j + 1 < self.ny).then(|| (i, j + 1, k)),
            Direction::S => (j > 0).then(|| (i, j - 1, k)),
            Direction::U => (k + 1 < self.nz).then(|| (i, j, k + 1)),
            Direction::D => (k > 0).then(|| (i, j, k - 1)),
        }
    }

    /// Flat index of the neighbour of flat point `p`.
    #[inline]
    pub fn neighbor_index(&self, p: usize, dir: Direction) -> Option<usize> {
        let (i, j, k) = self.coords(p);
        self.neighbor(i, j, k, dir).map(|(a, b, c)| self.index(a, b, c))
    }

    /// Column index of the horizontal neighbour of column `(i, j)`.
    #[inline]
    pub(crate) fn neighbor_column(&self, i: usize, j: usize, dir: Direction) -> Option<usize> {
        debug_assert!(!dir.is_vertical());
        self.neighbor(i, j, 0, dir).map(|(a, b, _)| self.column(a, b))
    }

    pub(crate) fn check_same(&self, other: &Grid3D) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{}x{}x{} vs {}x{}x{}",
                self.nx, self.ny, self.nz, other.nx, other.ny, other.nz
            )))
        }
    }
}

/// One scalar per grid point, stored vertical-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<S> {
    grid: Grid3D,
    data: Vec<S>,
}

impl<S: Real> Field<S> {
    pub fn zeros(grid: Grid3D) -> Self {
        Self { grid, data: vec![S::zero(); grid.len()] }
    }

    pub fn from_vec(grid: Grid3D, data: Vec<S>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::Shape(format!(
                "field has {} values, grid needs {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, data })
    }

    /// Fill from a function of `(i, j, k)`.
    pub fn from_fn(grid: Grid3D, mut f: impl FnMut(usize, usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                for k in 0..grid.nz() {
                    data.push(f(i, j, k));
                }
            }
        }
        Self { grid, data }
    }

    #[inline]
    pub fn grid(&self) -> &Grid3D {
        &self.grid
    }

    #[inline]
    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<S> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> S {
        self.data[self.grid.index(i, j, k)]
    }

    /// Values of column `(i, j)` bottom to top.
    #[inline]
    pub fn column(&self, i: usize, j: usize) -> &[S] {
        let nz = self.grid.nz();
        let c = self.grid.column(i, j);
        &self.data[c * nz..(c + 1) * nz]
    }

    /// Convert to another width, rounding to nearest.
    pub fn cast<T: Real>(&self) -> Field<T> {
        Field {
            grid: self.grid,
            data: self.data.iter().map(|v| T::from_f64(v.as_f64())).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> S {
        self.data.iter().fold(S::zero(), |m, v| m.max(v.abs()))
    }
}

impl<S> Index<usize> for Field<S> {
    type Output = S;
    #[inline]
    fn index(&self, p: usize) -> &S {
        &self.data[p]
    }
}

impl<S> IndexMut<usize> for Field<S> {
    #[inline]
    fn index_mut(&mut self, p: usize) -> &mut S {
        &mut self.data[p]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(nx: usize, ny: usize, nz: usize, periodic: bool) -> Grid3D {
        Grid3D::new(nx, ny, nz, periodic).unwrap()
    }

    #[test]
    fn index_examples() {
        let grid = g(4, 3, 2, false);
        assert_eq!(grid.index(0, 0, 0), 0);
        assert_eq!(grid.index(1, 0, 1), 3);
        assert_eq!(grid.index(3, 2, 1), 23);
        assert_eq!(grid.len(), 24);
    }

    #[test]
    #[should_panic]
    fn index_out_of_range_panics() {
        g(4, 3, 2, false).index(4, 0, 0);
    }

    #[test]
    fn zero_size_rejected() {
        assert!(Grid3D::new(0, 3, 2, false).is_err());
        assert!(Grid3D::new(4, 3, 0, true).is_err());
    }

    #[test]
    fn neighbor_examples() {
        let periodic = g(4, 3, 2, true);
        assert_eq!(periodic.neighbor(3, 1, 0, Direction::E), Some((0, 1, 0)));
        assert_eq!(periodic.neighbor(0, 1, 0, Direction::W), Some((3, 1, 0)));
        let open = g(4, 3, 2, false);
        assert_eq!(open.neighbor(3, 1, 0, Direction::E), None);
        for grid in [periodic, open] {
            for i in 0..4 {
                for j in 0..3 {
                    assert_eq!(grid.neighbor(i, j, 0, Direction::D), None);
                    assert_eq!(grid.neighbor(i, j, 1, Direction::U), None);
                }
            }
            assert_eq!(grid.neighbor(1, 2, 0, Direction::N), None);
            assert_eq!(grid.neighbor(1, 0, 0, Direction::S), None);
        }
    }

    #[test]
    fn single_column_ring_has_no_horizontal_neighbors() {
        let grid = g(1, 1, 3, true);
        assert_eq!(grid.neighbor(0, 0, 1, Direction::E), None);
        assert_eq!(grid.neighbor(0, 0, 1, Direction::W), None);
    }

    #[test]
    fn field_column_is_contiguous() {
        let grid = g(3, 2, 4, false);
        let f = Field::<f64>::from_fn(grid, |i, j, k| (100 * j + 10 * i + k) as f64);
        assert_eq!(f.column(2, 1), &[120.0, 121.0, 122.0, 123.0]);
        assert_eq!(f.get(1, 1, 2), 112.0);
    }

    proptest! {
        #[test]
        fn index_is_bijective(nx in 1usize..7, ny in 1usize..7, nz in 1usize..7, periodic: bool) {
            let grid = g(nx, ny, nz, periodic);
            let mut seen = vec![false; grid.len()];
            for j in 0..ny {
                for i in 0..nx {
                    for k in 0..nz {
                        let p = grid.index(i, j, k);
                        prop_assert!(!seen[p]);
                        seen[p] = true;
                        prop_assert_eq!(grid.coords(p), (i, j, k));
                    }
                }
            }
            prop_assert!(seen.iter().all(|s| *s));
        }

        #[test]
        fn neighbor_is_symmetric(nx in 1usize..7, ny in 1usize..7, nz in 1usize..5, periodic: bool) {
            let grid = g(nx, ny, nz, periodic);
            for p in 0..grid.len() {
                let (i, j, k) = grid.coords(p);
                for dir in Direction::ALL {
                    if let Some((a, b, c)) = grid.neighbor(i, j, k, dir) {
                        prop_assert_eq!(grid.neighbor(a, b, c, dir.opposite()), Some((i, j, k)));
                    }
                }
            }
        }
    }
}
