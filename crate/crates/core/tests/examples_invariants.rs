use chaintrunc::examples::{counterexample_marginal, counterexample_report, Level};
use proptest::prelude::*;
use rand::Rng;

mod common;

proptest! {
    #[test]
    fn atomic_support_stays_small(n in 1u32..14, m in 0usize..60, x in 0.0f64..=1.0) {
        let d = counterexample_marginal(Level::Finite(n), x, m).unwrap();
        prop_assert!(d.len() <= n as usize + 2);
        for &(l, _) in d.atoms() {
            let orbit = (0..=n).any(|j| l == 0.5f64.powi(j as i32));
            let halved = (0..=m).any(|k| l == x * 0.5f64.powi(k as i32));
            prop_assert!(orbit || halved, "location {l}");
        }
    }

    #[test]
    fn strong_interchange_fails_everywhere(n in 1u32..20, x in 0.0f64..=1.0) {
        prop_assume!(x > 0.5f64.powi(n as i32 + 1));
        prop_assert_eq!(counterexample_report(n, x).unwrap().probe_mass_at_1, 1.0);
    }
}

#[test]
fn lindley_step_is_a_contraction() {
    let mut rng = common::rng(1);
    for _ in 0..100_000 {
        let (x, y): (f64, f64) = (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
        let z = rng.random::<f64>() - 0.75;
        let (fx, fy): (f64, f64) = ((x + z).max(0.0), (y + z).max(0.0));
        assert!((fx - fy).abs() <= (x - y).abs() + 1e-13);
    }
}
