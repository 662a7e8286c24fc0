//! Working-set arithmetic for a horizontally decomposed run.
//!
//! The local volume per rank and thread is
//! `(ceil(nx / ranks_x) + 2 h_x) * (ceil(ny / ranks_y) + 2 h_y) * levels / threads`,
//! and the working set is that volume times the number of domain-sized arrays
//! a kernel touches. A working set "fits" a cache level when its byte count is
//! at most the cache capacity.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub global_nx: u64,
    pub global_ny: u64,
    pub ranks_x: u64,
    pub ranks_y: u64,
    pub halo_x: u64,
    pub halo_y: u64,
    pub n_levels: u64,
    pub n_threads: u64,
    pub arrays_per_point: u64,
    pub cache_bytes: u64,
}

impl Default for Decomposition {
    /// N1280 grid (2560 x 1920, 70 levels) on 96 nodes: 72 x 16 ranks with
    /// 3 threads each, unit halos, ten arrays and a 4.5 MiB L2 cache.
    fn default() -> Self {
        Self {
            global_nx: 2560,
            global_ny: 1920,
            ranks_x: 72,
            ranks_y: 16,
            halo_x: 1,
            halo_y: 1,
            n_levels: 70,
            n_threads: 3,
            arrays_per_point: 10,
            cache_bytes: 4_718_592,
        }
    }
}

impl Decomposition {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("global_nx", self.global_nx),
            ("global_ny", self.global_ny),
            ("ranks_x", self.ranks_x),
            ("ranks_y", self.ranks_y),
            ("n_levels", self.n_levels),
            ("n_threads", self.n_threads),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if self.ranks_x > self.global_nx || self.ranks_y > self.global_ny {
            return Err(Error::Config("more ranks than grid points in a direction".into()));
        }
        Ok(())
    }

    /// Local extent per rank including halos, before the thread split.
    pub fn local_points(&self) -> u64 {
        let lx = self.global_nx.div_ceil(self.ranks_x) + 2 * self.halo_x;
        let ly = self.global_ny.div_ceil(self.ranks_y) + 2 * self.halo_y;
        lx * ly * self.n_levels
    }
}

/// Points per rank and thread.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalVolume {
    /// Integer quotient.
    pub points: u64,
    /// Numerator and denominator of the exact value.
    pub numerator: u64,
    pub denominator: u64,
}

impl LocalVolume {
    /// Thread count divides the local points exactly.
    pub fn is_exact(&self) -> bool {
        self.numerator.is_multiple_of(self.denominator)
    }

    pub fn exact_value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

pub fn local_volume(d: &Decomposition) -> Result<LocalVolume> {
    d.validate()?;
    let numerator = d.local_points();
    Ok(LocalVolume { points: numerator / d.n_threads, numerator, denominator: d.n_threads })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WorkingSet {
    pub local_volume: LocalVolume,
    /// Domain-valued entries in the working set.
    pub entries: u64,
    pub bytes32: u64,
    pub bytes64: u64,
    pub fits32: bool,
    pub fits64: bool,
}

pub fn working_set(d: &Decomposition) -> Result<WorkingSet> {
    let lv = local_volume(d)?;
    let entries = lv.points * d.arrays_per_point;
    let bytes32 = 4 * entries;
    let bytes64 = 8 * entries;
    Ok(WorkingSet {
        local_volume: lv,
        entries,
        bytes32,
        bytes64,
        fits32: bytes32 <= d.cache_bytes,
        fits64: bytes64 <= d.cache_bytes,
    })
}
