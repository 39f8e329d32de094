use chaintrunc::{certified_uniform_bound, gth, monotone_tv_profile, sup_tv_horizon, StochasticMatrix};
use proptest::prelude::*;

mod common;

#[test]
fn bound_dominates_long_horizon_sup() {
    let mut rng = common::rng(7);
    for _ in 0..40 {
        let a = common::random_irreducible(&mut rng, 5, 2);
        let b = common::random_irreducible(&mut rng, 5, 2);
        let (pa, pb) = (gth(&a).unwrap(), gth(&b).unwrap());
        let sup = sup_tv_horizon(&a, &b, 0, 2000).unwrap().max;
        for t in [1usize, 10, 50] {
            let r = certified_uniform_bound(&a, &b, &pa, &pb, 0, t).unwrap();
            assert!(r.total >= sup, "t={t}: {} < {sup}", r.total);
        }
    }
}

#[test]
fn periodic_chain_profile_is_monotone() {
    let swap = StochasticMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let p = monotone_tv_profile(&swap, &gth(&swap).unwrap(), 0, 50).unwrap();
    assert!(p.iter().all(|&v| (v - 1.0).abs() < 1e-15));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sup_tv_triangle(seed in 0u64..10_000) {
        let mut rng = common::rng(seed);
        let a = common::random_irreducible(&mut rng, 4, 2);
        let b = common::random_irreducible(&mut rng, 4, 2);
        let c = common::random_irreducible(&mut rng, 4, 2);
        let ab = sup_tv_horizon(&a, &b, 1, 60).unwrap().max;
        let bc = sup_tv_horizon(&b, &c, 1, 60).unwrap().max;
        let ac = sup_tv_horizon(&a, &c, 1, 60).unwrap().max;
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn profiles_never_rise(seed in 0u64..10_000, n in 2usize..9) {
        let mut rng = common::rng(seed);
        let m = common::random_irreducible(&mut rng, n, 1);
        let pi = gth(&m).unwrap();
        let p = monotone_tv_profile(&m, &pi, 0, 200).unwrap();
        prop_assert!(p.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }
}
