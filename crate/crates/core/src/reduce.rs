//! Fixed-shape pairwise summation.
//!
//! Every global dot product and norm in a solve goes through [`pairwise_sum`].
//! The summation tree depends only on the number of terms: ranges of at most
//! [`LEAF`] terms are added left to right, longer ranges are split at
//! `len / 2` and the two halves are summed recursively and then added. The
//! result is therefore identical from run to run and across platforms with
//! IEEE arithmetic, no matter how the terms were produced.

use crate::precision::{Real, Width};

/// Largest range summed sequentially.
pub const LEAF: usize = 8;

/// Sum `term(0) .. term(n-1)` in accumulator type `A` over the fixed tree.
#[inline]
pub fn pairwise_sum<A: Real>(n: usize, term: &impl Fn(usize) -> A) -> A {
    pairwise_range(0, n, term)
}

fn pairwise_range<A: Real>(lo: usize, hi: usize, term: &impl Fn(usize) -> A) -> A {
    let len = hi - lo;
    if len <= LEAF {
        let mut acc = A::zero();
        for i in lo..hi {
            acc = acc + term(i);
        }
        acc
    } else {
        let mid = lo + len / 2;
        pairwise_range(lo, mid, term) + pairwise_range(mid, hi, term)
    }
}

/// Sum `values` at the given width. Inputs wider than `width` are rounded to
/// it before summation.
pub fn deterministic_reduce<S: Real>(values: &[S], width: Width) -> f64 {
    match width {
        Width::Bits64 => pairwise_sum::<f64>(values.len(), &|i| values[i].as_f64()),
        Width::Bits32 => pairwise_sum::<f32>(values.len(), &|i| values[i].as_f64() as f32) as f64,
    }
}

/// Dot product with products formed and summed at `width`.
///
/// With 64-bit width and 32-bit inputs every product is exact.
pub fn dot<S: Real>(a: &[S], b: &[S], width: Width) -> f64 {
    assert_eq!(a.len(), b.len());
    match width {
        Width::Bits64 => pairwise_sum::<f64>(a.len(), &|i| a[i].as_f64() * b[i].as_f64()),
        Width::Bits32 => {
            pairwise_sum::<f32>(a.len(), &|i| a[i].as_f64() as f32 * b[i].as_f64() as f32) as f64
        }
    }
}

/// Euclidean norm; the square root is taken at `width` too.
pub fn norm2<S: Real>(a: &[S], width: Width) -> f64 {
    width.round(dot(a, a, width).sqrt())
}
