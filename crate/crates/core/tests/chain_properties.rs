use chaintrunc::{marginal, marginal_path, propagate, tv_distance, weighted_tv_distance, ProbDist, WeightFunction};
use proptest::prelude::*;

mod common;

fn dist(n: usize) -> impl Strategy<Value = ProbDist> {
    prop::collection::vec(0.0f64..1.0, n).prop_filter_map("all zero", |v| {
        let s: f64 = v.iter().sum();
        (s > 1e-3).then(|| ProbDist::from_dense(&v.iter().map(|x| x / s).collect::<Vec<_>>()).ok()).flatten()
    })
}

proptest! {
    #[test]
    fn tv_is_a_metric(a in dist(6), b in dist(6), c in dist(6)) {
        let ab = tv_distance(&a, &b);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&ab));
        prop_assert_eq!(ab, tv_distance(&b, &a));
        prop_assert_eq!(tv_distance(&a, &a), 0.0);
        prop_assert!(tv_distance(&a, &c) <= ab + tv_distance(&b, &c) + 1e-12);
    }

    #[test]
    fn weighted_dominates_plain(a in dist(8), b in dist(8)) {
        let w = weighted_tv_distance(&a, &b, &WeightFunction::linear()).unwrap();
        prop_assert!(w >= tv_distance(&a, &b) - 1e-15);
        let ones = weighted_tv_distance(&a, &b, &WeightFunction::ones()).unwrap();
        prop_assert!((ones - tv_distance(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn marginals_follow_the_recursion(seed in 0u64..1000, k in 0usize..20) {
        let mut rng = common::rng(seed);
        let m = common::random_irreducible(&mut rng, 7, 2);
        let next = marginal(&m, 3, k + 1).unwrap();
        let via = propagate(&marginal(&m, 3, k).unwrap(), &m).unwrap();
        prop_assert!(tv_distance(&next, &via) < 1e-14);
        let path = marginal_path(&m, 3, k + 1).unwrap();
        prop_assert_eq!(path.len(), k + 2);
        prop_assert!(tv_distance(&path[k + 1], &next) < 1e-14);
    }

    #[test]
    fn propagation_contracts_tv(seed in 0u64..1000, a in dist(5), b in dist(5)) {
        let mut rng = common::rng(seed);
        let m = common::random_dense(&mut rng, 5);
        let pa = propagate(&a, &m).unwrap();
        let pb = propagate(&b, &m).unwrap();
        prop_assert!(tv_distance(&pa, &pb) <= tv_distance(&a, &b) + 1e-12);
    }
}
