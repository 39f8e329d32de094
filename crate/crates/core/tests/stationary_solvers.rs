use chaintrunc::{gth, power_iteration, stationarity_residual, tv_distance, ProbDist, StochasticMatrix};
use proptest::prelude::*;

mod common;

#[test]
fn gth_residual_on_random_chains() {
    let mut rng = common::rng(42);
    for n in [2usize, 5, 17, 50, 120, 200] {
        for _ in 0..3 {
            let m = common::random_irreducible(&mut rng, n, 3);
            let pi = gth(&m).unwrap();
            let r = stationarity_residual(&m, &pi).unwrap();
            assert!(r < 1e-10, "n={n}: residual {r:e}");
        }
    }
}

fn permute(m: &StochasticMatrix, perm: &[usize]) -> StochasticMatrix {
    let mut rows = vec![Vec::new(); m.dim()];
    for (x, row) in m.rows().iter().enumerate() {
        rows[perm[x]] = row.iter().map(|&(y, p)| (perm[y], p)).collect();
    }
    StochasticMatrix::from_rows(m.dim(), rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gth_commutes_with_relabelling(seed in 0u64..10_000, n in 2usize..12) {
        let mut rng = common::rng(seed);
        let m = common::random_irreducible(&mut rng, n, 2);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left(seed as usize % n);
        perm.swap(0, n - 1);
        let pi = gth(&m).unwrap();
        let pj = gth(&permute(&m, &perm)).unwrap();
        let relabelled = ProbDist::new(pi.iter().map(|(x, p)| (perm[x], p)).collect()).unwrap();
        prop_assert!(tv_distance(&relabelled, &pj) < 1e-12);
    }

    #[test]
    fn cesaro_power_iteration_agrees_with_gth(seed in 0u64..10_000, n in 2usize..10) {
        let mut rng = common::rng(seed);
        let m = common::random_dense(&mut rng, n);
        let tol = 1e-6;
        let p = power_iteration(&m, 0, tol, 1 << 26, true).unwrap();
        let g = gth(&m).unwrap();
        prop_assert!(tv_distance(&p.dist, &g) <= 10.0 * tol, "{} vs {}", tv_distance(&p.dist, &g), tol);
    }
}

#[test]
fn cesaro_handles_periodic_cycle() {
    let n = 6;
    let rows = (0..n).map(|x| vec![((x + 1) % n, 1.0)]).collect();
    let m = StochasticMatrix::from_rows(n, rows).unwrap();
    let tol = 1e-6;
    assert!(power_iteration(&m, 0, tol, 10_000, false).is_err());
    let p = power_iteration(&m, 0, tol, 1 << 26, true).unwrap();
    let g = gth(&m).unwrap();
    assert!(tv_distance(&p.dist, &g) <= 10.0 * tol);
}
