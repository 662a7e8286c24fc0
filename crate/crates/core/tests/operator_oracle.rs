mod common;

use common::{dense, dense_matvec, lu_solve, max_abs, rel_inf, Rng};
use mpsolve::generate::generate_unscaled;
use mpsolve::precision::ulp;
use mpsolve::{
    diag_scale, factor_t, generate, residual, tri_solve, tri_sor_apply, Band, BandedMatrix, Field, Grid3D,
    PrecisionPolicy, ProblemSpec, Real, RhsMode, SorParams,
};
use mpsolve::precond::tri_sor_sweep;
use proptest::prelude::*;

fn spec(nx: usize, ny: usize, nz: usize, seed: u64) -> ProblemSpec {
    ProblemSpec::with_grid(nx, ny, nz).with_seed(seed)
}

fn random_field(g: Grid3D, rng: &mut Rng) -> Field<f64> {
    Field::from_vec(g, (0..g.len()).map(|_| rng.unit()).collect()).unwrap()
}

#[test]
fn matvec_matches_dense_product() {
    let mut rng = Rng(11);
    for (seed, periodic) in [(1, true), (2, false), (3, true)] {
        let s = ProblemSpec { periodic_x: periodic, ..spec(4, 4, 3, seed) };
        let p = generate(&s).unwrap();
        let x = random_field(*p.grid(), &mut rng);
        let y = p.matrix.matvec(&x).unwrap();
        let want = dense_matvec(&dense(&p.matrix), x.as_slice());
        assert!(rel_inf(y.as_slice(), &want) < 1e-15);
    }
}

#[test]
fn scaling_matches_dense_row_division() {
    let (a, _) = generate_unscaled(&spec(4, 4, 3, 5)).unwrap();
    let b = Field::from_fn(*a.grid(), |i, j, k| 1.0 + (i * 3 + j * 5 + k) as f64);
    let (ah, bh) = diag_scale(&a, &b).unwrap();
    let da = dense(&a);
    let dh = dense(&ah);
    for p in 0..da.len() {
        let d = da[p][p];
        for q in 0..da.len() {
            assert!((dh[p][q] - da[p][q] / d).abs() <= 1e-15 * (da[p][q] / d).abs().max(1e-300));
        }
        assert!((bh.as_slice()[p] - b.as_slice()[p] / d).abs() <= 1e-15 * bh.as_slice()[p].abs());
    }
    // the scaled system has the same solution
    let x1 = lu_solve(da, b.as_slice().to_vec());
    let x2 = lu_solve(dh, bh.as_slice().to_vec());
    assert!(rel_inf(&x1, &x2) < 1e-12);
}

#[test]
fn symmetric_without_asymmetry_and_not_with_it() {
    let (a, _) = generate_unscaled(&ProblemSpec { asymmetry: 0.0, ..spec(4, 4, 3, 2) }).unwrap();
    let m = dense(&a);
    for p in 0..m.len() {
        for q in 0..m.len() {
            assert_eq!(m[p][q], m[q][p]);
        }
    }
    let p = generate(&ProblemSpec { asymmetry: 0.1, ..spec(4, 4, 3, 2) }).unwrap();
    let m = dense(&p.matrix);
    let diff = (0..m.len()).flat_map(|p| (0..m.len()).map(move |q| (p, q))).map(|(p, q)| (m[p][q] - m[q][p]).abs());
    assert!(diff.fold(0.0, f64::max) > 0.0);
}

#[test]
fn split_parts_sum_to_operator() {
    let mut rng = Rng(3);
    for periodic in [true, false] {
        let p = generate(&ProblemSpec { periodic_x: periodic, ..spec(4, 4, 3, 9) }).unwrap();
        let (l, t, u) = p.matrix.split_ltu();
        let (dl, dt, du) = (dense(&l), dense(&t), dense(&u));
        let da = dense(&p.matrix);
        for r in 0..da.len() {
            for c in 0..da.len() {
                assert_eq!(dl[r][c] + dt[r][c] + du[r][c], da[r][c]);
                if dl[r][c] != 0.0 {
                    assert!(c < r);
                }
                if du[r][c] != 0.0 {
                    assert!(c > r);
                }
                if dt[r][c] != 0.0 {
                    assert_eq!(r / 3, c / 3, "T stays within a column");
                }
            }
        }
        let x = random_field(*p.grid(), &mut rng);
        let sum: Vec<f64> = [&l, &t, &u]
            .iter()
            .map(|m| m.matvec(&x).unwrap().into_vec())
            .reduce(|a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect())
            .unwrap();
        let ax = p.matrix.matvec(&x).unwrap();
        // rows cancel heavily, so compare against the size of the terms
        let da = dense(&p.matrix);
        for (q, (s, a)) in sum.iter().zip(ax.as_slice()).enumerate() {
            let mag: f64 = da[q].iter().zip(x.as_slice()).map(|(m, v)| (m * v).abs()).sum();
            assert!((s - a).abs() <= 8.0 * ulp(mag), "{s} vs {a}");
        }
    }
}

#[test]
fn residual_matches_dense_computation() {
    let mut rng = Rng(8);
    let p = generate(&ProblemSpec { rhs_mode: RhsMode::Random, ..spec(5, 4, 3, 4) }).unwrap();
    let x = random_field(*p.grid(), &mut rng);
    let (_, r) = residual(&p.matrix, &x, &p.rhs, &PrecisionPolicy::FULL64).unwrap();
    let ax = dense_matvec(&dense(&p.matrix), x.as_slice());
    let num: f64 = p.rhs.as_slice().iter().zip(&ax).map(|(b, y)| (b - y) * (b - y)).sum::<f64>().sqrt();
    let den: f64 = p.rhs.as_slice().iter().map(|b| b * b).sum::<f64>().sqrt();
    assert!((r - num / den).abs() <= 1e-14 * (num / den));
}

#[test]
fn residual_of_reference_solution_is_roundoff() {
    let p = generate(&spec(8, 6, 5, 3)).unwrap();
    let (_, r) = residual(&p.matrix, p.x_ref.as_ref().unwrap(), &p.rhs, &PrecisionPolicy::FULL64).unwrap();
    assert!(r <= 1e-12, "{r}");
}

fn random_column<S: Real>(nz: usize, rng: &mut Rng) -> (BandedMatrix<S>, Field<S>) {
    let g = Grid3D::new(1, 1, nz, false).unwrap();
    let mut a = BandedMatrix::<S>::zeros(g);
    for k in 0..nz {
        let up = if k + 1 < nz { rng.unit() } else { 0.0 };
        let dn = if k > 0 { rng.unit() } else { 0.0 };
        let c = (up.abs() + dn.abs()) * (1.1 + rng.unit().abs()) + 0.1;
        a.set(k, Band::C, S::from_f64(if rng.unit() < 0.0 { -c } else { c }));
        if k + 1 < nz {
            a.set(k, Band::U, S::from_f64(up));
        }
        if k > 0 {
            a.set(k, Band::D, S::from_f64(dn));
        }
    }
    let rhs = Field::from_vec(g, (0..nz).map(|_| S::from_f64(rng.unit())).collect()).unwrap();
    (a, rhs)
}

fn column_residual<S: Real>(a: &BandedMatrix<S>, x: &Field<S>, rhs: &Field<S>) -> f64 {
    let a64 = a.cast::<f64>();
    let tx = a64.matvec(&x.cast::<f64>()).unwrap();
    let r: Vec<f64> = tx.as_slice().iter().zip(rhs.as_slice()).map(|(t, b)| t - b.as_f64()).collect();
    max_abs(&r) / max_abs(&rhs.cast::<f64>().into_vec())
}

fn tri_solve_bound<S: Real>(seed: u64) {
    let mut rng = Rng(seed);
    for _ in 0..100 {
        let nz = 1 + (rng.next_u64() % 40) as usize;
        let (a, rhs) = random_column::<S>(nz, &mut rng);
        let f = factor_t(&a).unwrap();
        let x = tri_solve(&f, &rhs).unwrap();
        let res = column_residual(&a, &x, &rhs);
        assert!(res <= 10.0 * nz as f64 * S::EPSILON.as_f64(), "nz={nz} residual {res:e}");
    }
}

#[test]
fn tri_solve_residual_bound_f64() {
    tri_solve_bound::<f64>(21);
}

#[test]
fn tri_solve_residual_bound_f32() {
    tri_solve_bound::<f32>(22);
}

#[test]
fn tri_solve_matches_dense_five_by_five() {
    let mut rng = Rng(5);
    let (a, rhs) = random_column::<f64>(5, &mut rng);
    let want = lu_solve(dense(&a), rhs.as_slice().to_vec());
    let got = tri_solve(&factor_t(&a).unwrap(), &rhs).unwrap();
    assert!(rel_inf(got.as_slice(), &want) < 1e-12);

    let a32 = a.cast::<f32>();
    let got32 = tri_solve(&factor_t(&a32).unwrap(), &rhs.cast::<f32>()).unwrap();
    let want32 = lu_solve(dense(&a32.cast::<f64>()), rhs.cast::<f32>().cast::<f64>().into_vec());
    assert!(rel_inf(&got32.cast::<f64>().into_vec(), &want32) < 1e-6);
}

#[test]
fn one_sweep_solves_the_relaxed_lower_system() {
    // from zero, one sweep solves (T + omega L) z = omega r
    let mut rng = Rng(6);
    let p = generate(&spec(4, 3, 3, 7)).unwrap();
    let r = random_field(*p.grid(), &mut rng);
    let omega = 1.5;
    let z = tri_sor_apply(&p.matrix, &factor_t(&p.matrix).unwrap(), &r, &SorParams { omega, n_iters: 1 }).unwrap();
    let (l, t, _) = p.matrix.split_ltu();
    let m: Vec<Vec<f64>> = dense(&t)
        .iter()
        .zip(dense(&l))
        .map(|(tr, lr)| tr.iter().zip(&lr).map(|(a, b)| a + omega * b).collect())
        .collect();
    let want = lu_solve(m, r.as_slice().iter().map(|v| omega * v).collect());
    assert!(rel_inf(z.as_slice(), &want) < 1e-13);
}

fn fixed_point<S: Real>(seed: u64) {
    let p = generate(&spec(6, 5, 7, seed)).unwrap();
    let a = p.matrix.cast::<S>();
    let r = p.rhs.cast::<S>();
    let xstar = lu_solve(dense(&a.cast::<f64>()), r.cast::<f64>().into_vec());
    let x0 = Field::from_vec(*p.grid(), xstar.iter().map(|v| S::from_f64(*v)).collect()).unwrap();
    let mut x = x0.clone();
    tri_sor_sweep(&a, &factor_t(&a).unwrap(), &r, &SorParams { omega: 1.5, n_iters: 1 }, &mut x).unwrap();
    let bound = 8.0 * p.grid().nz() as f64 * S::EPSILON.as_f64() * max_abs(&xstar);
    for (a, b) in x.as_slice().iter().zip(x0.as_slice()) {
        assert!((a.as_f64() - b.as_f64()).abs() <= bound, "moved {:e} > {bound:e}", (a.as_f64() - b.as_f64()).abs());
    }
}

#[test]
fn exact_solution_is_a_fixed_point() {
    for seed in 1..=10 {
        fixed_point::<f64>(seed);
        fixed_point::<f32>(seed);
    }
}

#[test]
fn stationary_iteration_converges() {
    let p = generate(&spec(4, 4, 3, 12)).unwrap();
    let f = factor_t(&p.matrix).unwrap();
    let z = tri_sor_apply(&p.matrix, &f, &p.rhs, &SorParams { omega: 1.5, n_iters: 50 }).unwrap();
    let (_, r) = residual(&p.matrix, &z, &p.rhs, &PrecisionPolicy::FULL64).unwrap();
    assert!(r < 1e-5, "{r}");
    let want = lu_solve(dense(&p.matrix), p.rhs.as_slice().to_vec());
    assert!(rel_inf(z.as_slice(), &want) < 1e-4);
}

#[test]
fn preconditioner_is_linear() {
    let mut rng = Rng(14);
    for seed in 1..=4 {
        let p = generate(&spec(5, 4, 4, seed)).unwrap();
        let f = factor_t(&p.matrix).unwrap();
        let params = SorParams::default();
        let r1 = random_field(*p.grid(), &mut rng);
        let r2 = random_field(*p.grid(), &mut rng);
        let sum = Field::from_vec(*p.grid(), r1.as_slice().iter().zip(r2.as_slice()).map(|(a, b)| a + b).collect()).unwrap();
        let z1 = tri_sor_apply(&p.matrix, &f, &r1, &params).unwrap();
        let z2 = tri_sor_apply(&p.matrix, &f, &r2, &params).unwrap();
        let z = tri_sor_apply(&p.matrix, &f, &sum, &params).unwrap();
        let scale = max_abs(z.as_slice());
        for ((a, b), c) in z1.as_slice().iter().zip(z2.as_slice()).zip(z.as_slice()) {
            assert!((a + b - c).abs() <= 32.0 * ulp(scale), "{} vs {c}", a + b);
        }
    }
}

#[test]
fn refactoring_and_sweeps_are_bit_identical() {
    let p = generate(&spec(6, 5, 4, 2)).unwrap().cast::<f32>();
    let f1 = factor_t(&p.matrix).unwrap();
    let f2 = factor_t(&p.matrix).unwrap();
    assert_eq!(f1, f2);
    let z1 = tri_sor_apply(&p.matrix, &f1, &p.rhs, &SorParams::default()).unwrap();
    let z2 = tri_sor_apply(&p.matrix, &f2, &p.rhs, &SorParams::default()).unwrap();
    assert!(z1.as_slice().iter().zip(z2.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn matvec_agrees_with_dense_on_small_grids(nx in 1usize..5, ny in 1usize..4, nz in 1usize..4, seed in 0u64..1000, periodic: bool) {
        let p = generate(&ProblemSpec { periodic_x: periodic, ..spec(nx, ny, nz, seed) }).unwrap();
        let mut rng = Rng(seed);
        let x = random_field(*p.grid(), &mut rng);
        let y = p.matrix.matvec(&x).unwrap();
        let want = dense_matvec(&dense(&p.matrix), x.as_slice());
        for (a, b) in y.as_slice().iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn generated_rows_are_dominant(nx in 1usize..6, ny in 1usize..5, nz in 1usize..5, seed: u64, dd in 1.0f64..3.0) {
        let p = generate(&ProblemSpec { diag_dominance: dd, ..spec(nx, ny, nz, seed) }).unwrap();
        for q in 0..p.grid().len() {
            prop_assert!(p.matrix.row_dominance(q) >= dd * (1.0 - 1e-12));
            prop_assert_eq!(p.matrix.get(q, Band::C), 1.0);
        }
    }
}
