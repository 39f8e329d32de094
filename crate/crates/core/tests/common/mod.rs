#![allow(dead_code)]

use chaintrunc::{RateMatrix, StochasticMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Irreducible chain: a cycle `x -> x+1` plus `extra` random targets per row.
pub fn random_irreducible(rng: &mut impl Rng, n: usize, extra: usize) -> StochasticMatrix {
    let rows = (0..n)
        .map(|x| {
            let mut row = vec![((x + 1) % n, rng.random_range(0.05..1.0))];
            for _ in 0..extra {
                row.push((rng.random_range(0..n), rng.random_range(0.0..1.0)));
            }
            let s: f64 = row.iter().map(|e| e.1).sum();
            row.into_iter().map(|(y, p)| (y, p / s)).collect()
        })
        .collect();
    StochasticMatrix::from_rows(n, rows).unwrap()
}

/// Dense chain with all entries positive.
pub fn random_dense(rng: &mut impl Rng, n: usize) -> StochasticMatrix {
    let dense: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let r: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
            let s: f64 = r.iter().sum();
            r.into_iter().map(|v| v / s).collect()
        })
        .collect();
    StochasticMatrix::from_rows(n, dense.into_iter().map(|r| r.into_iter().enumerate().collect()).collect()).unwrap()
}

/// Irreducible generator with rates in `(0.1, 2)`.
pub fn random_generator(rng: &mut impl Rng, n: usize) -> RateMatrix {
    let rows = (0..n)
        .map(|x| {
            let mut row: Vec<(usize, f64)> = vec![((x + 1) % n, rng.random_range(0.1..2.0))];
            let y = rng.random_range(0..n);
            if y != x {
                row.push((y, rng.random_range(0.1..2.0)));
            }
            let out: f64 = row.iter().map(|e| e.1).sum();
            row.push((x, -out));
            row
        })
        .collect();
    RateMatrix::from_rows(n, rows).unwrap()
}
