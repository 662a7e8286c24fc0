//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use mpsolve::{Band, BandedMatrix, Grid3D};

/// Row-major dense copy of a banded operator.
pub fn dense(a: &BandedMatrix<f64>) -> Vec<Vec<f64>> {
    let g = a.grid();
    let n = g.len();
    let mut m = vec![vec![0.0; n]; n];
    for p in 0..n {
        m[p][p] += a.get(p, Band::C);
        for b in &Band::ALL[1..] {
            if let Some(q) = g.neighbor_index(p, b.direction().unwrap()) {
                m[p][q] += a.get(p, *b);
            }
        }
    }
    m
}

pub fn dense_matvec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

/// Gaussian elimination with partial pivoting.
pub fn lu_solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, piv);
        b.swap(c, piv);
        let d = m[c][c];
        assert!(d != 0.0, "singular matrix");
        for r in c + 1..n {
            let f = m[r][c] / d;
            if f != 0.0 {
                for k in c..n {
                    m[r][k] -= f * m[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    x
}

/// LU without pivoting in band storage, for diagonally dominant operators too
/// large for dense storage. Half bandwidth is `nx * nz`.
pub fn band_solve(a: &BandedMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let g: &Grid3D = a.grid();
    let n = g.len();
    let w = g.nx() * g.nz();
    let width = 2 * w + 1;
    // row p holds columns p - w ..= p + w at offsets 0 ..= 2w
    let mut m = vec![0.0f64; n * width];
    let at = |p: usize, q: usize| p * width + (q + w - p);
    for p in 0..n {
        m[at(p, p)] += a.get(p, Band::C);
        for band in &Band::ALL[1..] {
            if let Some(q) = g.neighbor_index(p, band.direction().unwrap()) {
                m[at(p, q)] += a.get(p, *band);
            }
        }
    }
    let mut y = b.to_vec();
    for c in 0..n {
        let d = m[at(c, c)];
        for r in c + 1..(c + w + 1).min(n) {
            let f = m[at(r, c)] / d;
            if f == 0.0 {
                continue;
            }
            for k in c..(c + w + 1).min(n) {
                m[at(r, k)] -= f * m[at(c, k)];
            }
            y[r] -= f * y[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = y[r];
        for k in r + 1..(r + w + 1).min(n) {
            s -= m[at(r, k)] * x[k];
        }
        x[r] = s / m[at(r, r)];
    }
    x
}

/// Pairwise sum with an explicit stack: ranges of at most eight terms are
/// summed left to right, longer ranges split at half their length.
pub fn pairwise_oracle_f32(v: &[f32]) -> f32 {
    if v.is_empty() {
        return 0.0;
    }
    enum Task {
        Visit(usize, usize),
        Combine,
    }
    let mut tasks = vec![Task::Visit(0, v.len())];
    let mut values: Vec<f32> = Vec::new();
    while let Some(t) = tasks.pop() {
        match t {
            Task::Visit(lo, hi) if hi - lo <= 8 => {
                let mut s = 0.0f32;
                for x in &v[lo..hi] {
                    s += *x;
                }
                values.push(s);
            }
            Task::Visit(lo, hi) => {
                let mid = lo + (hi - lo) / 2;
                tasks.push(Task::Combine);
                tasks.push(Task::Visit(mid, hi));
                tasks.push(Task::Visit(lo, mid));
            }
            Task::Combine => {
                let right = values.pop().unwrap();
                let left = values.pop().unwrap();
                values.push(left + right);
            }
        }
    }
    values.pop().unwrap()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn rel_inf(x: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    max_abs(&d) / max_abs(y)
}

/// SplitMix64 stream for test data, independent of the generator's hashing.
pub struct Rng(pub u64);

impl Rng {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[-1, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}
