use argprin_core::linalg::{complex_rank, determinant, svd, ColMatrix};
use argprin_core::C64;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_columns(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<C64>> {
    (0..cols).map(|_| (0..rows).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).collect()
}

fn oracle(cols: &[Vec<C64>], rows: usize) -> Vec<f64> {
    let m = DMatrix::from_fn(rows, cols.len(), |i, j| nalgebra::Complex::new(cols[j][i].re, cols[j][i].im));
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

#[test]
fn singular_values_match_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let rows = rng.gen_range(1..6);
        let ncols = rng.gen_range(1..6);
        let cols = random_columns(&mut rng, rows, ncols);
        let ours = svd(&ColMatrix::from_columns(rows, cols.clone())).sigma;
        let theirs = oracle(&cols, rows);
        for (k, t) in theirs.iter().enumerate() {
            assert!((ours[k] - t).abs() < 1e-12 * theirs[0].max(1.0), "{ours:?} vs {theirs:?}");
        }
        assert!(ours[theirs.len()..].iter().all(|&s| s < 1e-12 * theirs[0].max(1.0)));
    }
}

#[test]
fn determinant_matches_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..5 {
        let cols = random_columns(&mut rng, n, n);
        let m = DMatrix::from_fn(n, n, |i, j| nalgebra::Complex::new(cols[j][i].re, cols[j][i].im));
        let d = m.determinant();
        let ours = determinant(&cols);
        assert!((ours - C64::new(d.re, d.im)).norm() < 1e-12);
    }
}

proptest! {
    #[test]
    fn rank_of_low_rank_products(seed in 0u64..10_000, r in 1usize..4) {
        // A = B·C with B: 5×r and C: r×4 has rank r.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_columns(&mut rng, 5, r);
        let c = random_columns(&mut rng, r, 4);
        let cols: Vec<Vec<C64>> = c
            .iter()
            .map(|cj| (0..5).map(|i| (0..r).fold(C64::new(0.0, 0.0), |acc, k| acc + b[k][i] * cj[k])).collect())
            .collect();
        prop_assert_eq!(complex_rank(&cols, 1e-7, 1e-12), r);
    }
}
