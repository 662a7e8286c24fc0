//! Scalar widths and the precision policies a solve can run under.
//!
//! Reducing the working width only pays off while the halting threshold stays
//! well above the unit of least precision of that width. Near 1.0 the spacing
//! between adjacent `f32` values is about `1.2e-7` and between adjacent `f64`
//! values about `2.2e-16`, so a relative residual threshold of `1e-3` or
//! `1e-4` is comfortably reachable in 32-bit while `1e-9` is not.

use std::fmt;
use std::str::FromStr;

use num_traits::Float;

use crate::error::Error;

/// Floating-point type usable as a storage or working width.
pub trait Real:
    Float + Default + Send + Sync + fmt::Debug + fmt::Display + fmt::LowerExp + 'static
{
    /// Distance from 1.0 to the next representable value.
    const EPSILON: Self;
    /// Storage size in bytes.
    const BYTES: usize;
    /// Width tag.
    const WIDTH: Width;

    fn from_f64(v: f64) -> Self;
    fn as_f64(self) -> f64;
    fn view(values: &[Self]) -> SliceRef<'_>;
}

/// A slice of either width.
#[derive(Clone, Copy, Debug)]
pub enum SliceRef<'a> {
    F32(&'a [f32]),
    F64(&'a [f64]),
}

impl SliceRef<'_> {
    pub fn len(&self) -> usize {
        match self {
            SliceRef::F32(v) => v.len(),
            SliceRef::F64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            SliceRef::F32(v) => v.iter().map(|x| *x as f64).collect(),
            SliceRef::F64(v) => v.to_vec(),
        }
    }
}

impl Real for f32 {
    const EPSILON: Self = f32::EPSILON;
    const BYTES: usize = 4;
    const WIDTH: Width = Width::Bits32;

    #[inline(always)]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    #[inline(always)]
    fn as_f64(self) -> f64 {
        self as f64
    }
    fn view(values: &[Self]) -> SliceRef<'_> {
        SliceRef::F32(values)
    }
}

impl Real for f64 {
    const EPSILON: Self = f64::EPSILON;
    const BYTES: usize = 8;
    const WIDTH: Width = Width::Bits64;

    #[inline(always)]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline(always)]
    fn as_f64(self) -> f64 {
        self
    }
    fn view(values: &[Self]) -> SliceRef<'_> {
        SliceRef::F64(values)
    }
}

/// Arithmetic width, used for reductions and reporting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Width {
    Bits32,
    Bits64,
}

impl Width {
    /// Machine epsilon of this width, as an `f64`.
    pub fn epsilon(self) -> f64 {
        match self {
            Width::Bits32 => f32::EPSILON as f64,
            Width::Bits64 => f64::EPSILON,
        }
    }

    /// Smallest positive normal value of this width.
    pub fn min_positive(self) -> f64 {
        match self {
            Width::Bits32 => f32::MIN_POSITIVE as f64,
            Width::Bits64 => f64::MIN_POSITIVE,
        }
    }

    /// Round an `f64` to this width (identity for 64-bit).
    #[inline]
    pub fn round(self, v: f64) -> f64 {
        match self {
            Width::Bits32 => v as f32 as f64,
            Width::Bits64 => v,
        }
    }
}

/// Unit in the last place of `x` at width `S`: the spacing of representable
/// values in the binade containing `x`.
pub fn ulp<S: Real>(x: S) -> S {
    if !x.is_finite() {
        return S::nan();
    }
    // x = m * 2^exp with m an integer of full mantissa width, so the spacing is 2^exp.
    let (_, exp, _) = x.integer_decode();
    S::from_f64((exp as f64).exp2())
}

/// Storage/arithmetic mode of a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Everything in 64-bit.
    Full64,
    /// Everything in 32-bit.
    Full32,
    /// 64-bit solution field, 32-bit operator, preconditioner and Krylov vectors.
    Mixed,
}

/// Which widths a solve uses for storage, arithmetic and global reductions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrecisionPolicy {
    pub mode: Mode,
    /// Accumulate dot products and norms in 64-bit. Always true for `Full64`.
    pub reduce64: bool,
}

impl PrecisionPolicy {
    pub const FULL64: Self = Self { mode: Mode::Full64, reduce64: true };
    pub const FULL32: Self = Self { mode: Mode::Full32, reduce64: false };
    pub const MIXED: Self = Self { mode: Mode::Mixed, reduce64: true };

    pub fn new(mode: Mode, reduce64: bool) -> Self {
        let reduce64 = reduce64 || mode == Mode::Full64;
        Self { mode, reduce64 }
    }

    /// Width of the operator, preconditioner and Krylov work vectors.
    pub fn working(&self) -> Width {
        match self.mode {
            Mode::Full64 => Width::Bits64,
            Mode::Full32 | Mode::Mixed => Width::Bits32,
        }
    }

    /// Width of the stored solution field.
    pub fn solution(&self) -> Width {
        match self.mode {
            Mode::Full64 | Mode::Mixed => Width::Bits64,
            Mode::Full32 => Width::Bits32,
        }
    }

    /// Width of global dot products and norms.
    pub fn reduction(&self) -> Width {
        if self.reduce64 {
            Width::Bits64
        } else {
            Width::Bits32
        }
    }

    /// Short label used in file names and CSV rows.
    pub fn label(&self) -> &'static str {
        match (self.mode, self.reduce64) {
            (Mode::Full64, _) => "full64",
            (Mode::Full32, false) => "full32",
            (Mode::Full32, true) => "full32-r64",
            (Mode::Mixed, true) => "mixed",
            (Mode::Mixed, false) => "mixed-r32",
        }
    }
}

impl fmt::Display for PrecisionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PrecisionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full64" | "dp" | "double" => Ok(Self::FULL64),
            "full32" | "sp" | "single" => Ok(Self::FULL32),
            "full32-r64" => Ok(Self::new(Mode::Full32, true)),
            "mixed" | "mp" => Ok(Self::MIXED),
            "mixed-r32" => Ok(Self::new(Mode::Mixed, false)),
            other => Err(Error::Config(format!("unknown precision policy `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ulp_near_one() {
        assert_eq!(ulp(1.0f32), f32::EPSILON);
        assert_eq!(ulp(1.0f64), f64::EPSILON);
        assert_eq!(ulp(1.5f32), f32::EPSILON);
        assert_eq!(ulp(2.0f64), 2.0 * f64::EPSILON);
        assert_eq!(ulp(-0.75f64), f64::EPSILON / 2.0);
    }

    #[test]
    fn ulp_magnitudes() {
        // O(1e-7) for 32-bit, O(1e-16) for 64-bit
        assert!(ulp(1.0f32) > 1e-7 && ulp(1.0f32) < 2e-7);
        assert!(ulp(1.0f64) > 1e-16 && ulp(1.0f64) < 3e-16);
    }

    #[test]
    fn full64_forces_wide_reductions() {
        let p = PrecisionPolicy::new(Mode::Full64, false);
        assert!(p.reduce64);
        assert_eq!(p.reduction(), Width::Bits64);
    }

    #[test]
    fn mixed_widths() {
        let p = PrecisionPolicy::MIXED;
        assert_eq!(p.working(), Width::Bits32);
        assert_eq!(p.solution(), Width::Bits64);
        assert_eq!(p.reduction(), Width::Bits64);
    }

    #[test]
    fn labels_round_trip() {
        for p in [
            PrecisionPolicy::FULL64,
            PrecisionPolicy::FULL32,
            PrecisionPolicy::MIXED,
            PrecisionPolicy::new(Mode::Full32, true),
            PrecisionPolicy::new(Mode::Mixed, false),
        ] {
            assert_eq!(p.label().parse::<PrecisionPolicy>().unwrap(), p);
        }
        assert!("quad".parse::<PrecisionPolicy>().is_err());
    }

    #[test]
    fn width_round() {
        assert_eq!(Width::Bits64.round(0.1), 0.1);
        assert_eq!(Width::Bits32.round(0.1), 0.1f32 as f64);
    }
}
