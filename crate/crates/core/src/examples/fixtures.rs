use crate::chain::{CountableKernel, ProbDist, StateIndex};
use crate::error::{Error, Result};
use crate::jump::RateMatrix;

/// Reflected random walk on `{0, 1, ...}`: up with probability `p`, down
/// (or stay, at 0) with `1 - p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BirthDeath {
    pub p: f64,
}

impl BirthDeath {
    /// `p / (1 - p)`.
    pub fn ratio(&self) -> f64 {
        self.p / (1.0 - self.p)
    }

    /// Geometric stationary law `(1 - rho) rho^x`, cut where the remaining
    /// tail drops below `tail` and renormalized.
    pub fn stationary(&self, tail: f64) -> ProbDist {
        let rho = self.ratio();
        let mut pairs = Vec::new();
        let mut x = 0;
        while rho.powi(x as i32) >= tail {
            pairs.push((x, (1.0 - rho) * rho.powi(x as i32)));
            x += 1;
        }
        let total: f64 = pairs.iter().map(|e| e.1).sum();
        ProbDist::new(pairs.into_iter().map(|(x, m)| (x, m / total)).collect()).expect("geometric law")
    }
}

impl CountableKernel for BirthDeath {
    fn row(&self, x: StateIndex) -> Vec<(StateIndex, f64)> {
        if x == 0 {
            vec![(0, 1.0 - self.p), (1, self.p)]
        } else {
            vec![(x - 1, 1.0 - self.p), (x + 1, self.p)]
        }
    }

    fn support_bound(&self, x: StateIndex) -> Option<StateIndex> {
        Some(x + 1)
    }
}

/// Positive-recurrent birth-death kernel; requires `0 < p < 1/2`.
pub fn birth_death_kernel(p: f64) -> Result<BirthDeath> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::Precondition(format!("birth-death up-probability {p} must lie in (0, 1/2)")));
    }
    Ok(BirthDeath { p })
}

/// M/M/1 queue-length generator on `{0, ..., n-1}`; arrivals are blocked
/// in the last state.
pub fn mm1_generator(arrival: f64, service: f64, n: usize) -> Result<RateMatrix> {
    if !(arrival > 0.0 && service > 0.0) || n < 2 {
        return Err(Error::Precondition("need positive rates and at least two states".into()));
    }
    let rows = (0..n)
        .map(|x| {
            let mut row = Vec::with_capacity(3);
            let up = if x + 1 < n { arrival } else { 0.0 };
            let down = if x > 0 { service } else { 0.0 };
            if down > 0.0 {
                row.push((x - 1, down));
            }
            row.push((x, -(up + down)));
            if up > 0.0 {
                row.push((x + 1, up));
            }
            row
        })
        .collect();
    RateMatrix::from_rows(n, rows)
}

/// Symmetric two-state generator with switching rate `rate`.
pub fn two_state_generator(rate: f64) -> Result<RateMatrix> {
    RateMatrix::from_dense(&[vec![-rate, rate], vec![rate, -rate]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::WeightFunction;
    use crate::fte::stationary_weighted_mean;

    #[test]
    fn geometric_law() {
        let k = birth_death_kernel(1.0 / 3.0).unwrap();
        assert!((k.ratio() - 0.5).abs() < 1e-15);
        let pi = k.stationary(1e-18);
        assert!((pi.mass(0) - 0.5).abs() < 1e-15);
        assert!((pi.mass(1) - 0.25).abs() < 1e-15);
        let k = birth_death_kernel(0.25).unwrap();
        let m = stationary_weighted_mean(&k.stationary(1e-18), &WeightFunction::linear()).unwrap();
        assert!((m - 1.5).abs() < 1e-12);
    }

    #[test]
    fn rows_are_stochastic() {
        let k = birth_death_kernel(0.3).unwrap();
        for x in 0..=10 {
            let s: f64 = k.row(x).iter().map(|e| e.1).sum();
            assert!((s - 1.0).abs() < 1e-15);
        }
        assert!(birth_death_kernel(0.5).is_err());
    }

    #[test]
    fn mm1_rows() {
        let q = mm1_generator(1.0, 2.0, 3).unwrap();
        assert_eq!(q.entry(0, 0), -1.0);
        assert_eq!(q.entry(1, 1), -3.0);
        assert_eq!(q.entry(2, 2), -2.0);
    }
}
