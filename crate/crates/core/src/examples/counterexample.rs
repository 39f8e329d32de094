//! Chains on `[0, 1]` where marginals converge weakly but not uniformly in time.
//!
//! For finite `n` the kernel halves `x` above `2^-n`, jumps to 1 from
//! `(2^-(n+1), 2^-n]`, and from `[0, 2^-(n+1)]` picks one of
//! `1, 1/2, ..., 2^-n` uniformly. The limit kernel halves everywhere.
//! All locations are dyadic multiples of the start point, so halving and
//! interval tests are exact in binary floating point.

use super::atomic::AtomicMeasure;
use crate::error::{Error, Result};

/// Member of the family: `Finite(n)` or the limit kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Finite(u32),
    Infinite,
}

fn dyadic(j: u32) -> f64 {
    0.5f64.powi(j as i32)
}

/// Uniform law on `{2^-j : 0 <= j <= n}`, the stationary law of level `n`.
fn orbit_uniform(n: u32) -> AtomicMeasure {
    let w = 1.0 / f64::from(n + 1);
    AtomicMeasure::new((0..=n).map(|j| (dyadic(j), w)).collect()).expect("uniform orbit law")
}

/// One-step law `P_n(x, .)`.
pub fn counterexample_step(level: Level, x: f64) -> Result<AtomicMeasure> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Precondition(format!("state {x} outside [0, 1]")));
    }
    Ok(match level {
        Level::Infinite => AtomicMeasure::point(x / 2.0),
        Level::Finite(n) => {
            let hi = dyadic(n);
            let lo = dyadic(n + 1);
            if x > hi {
                AtomicMeasure::point(x / 2.0)
            } else if x > lo {
                AtomicMeasure::point(1.0)
            } else {
                orbit_uniform(n)
            }
        }
    })
}

/// Exact law of `X_m` from `x`.
pub fn counterexample_marginal(level: Level, x: f64, m: usize) -> Result<AtomicMeasure> {
    counterexample_step(level, x)?;
    let mut d = AtomicMeasure::point(x);
    for _ in 0..m {
        d = d.push_forward(|l| counterexample_step(level, l).expect("locations stay in [0, 1]"));
    }
    Ok(d)
}

/// Steps of halving from `x` until the chain lies in `(2^-(n+1), 2^-n]`.
/// Defined for `x > 2^-(n+1)`; zero when `x` already lies in the interval.
pub fn hitting_step_count(n: u32, x: f64) -> Result<usize> {
    let (hi, lo) = (dyadic(n), dyadic(n + 1));
    if !(x > lo) || x > 1.0 {
        return Err(Error::Precondition(format!("need 2^-{} < x <= 1, got {x}", n + 1)));
    }
    let mut y = x;
    let mut k = 0;
    while y > hi {
        y /= 2.0;
        k += 1;
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterexampleReport {
    pub n: u32,
    pub hit_steps: usize,
    /// Wasserstein-1 distance from the level-`n` stationary law to `delta_0`.
    pub w1_pi_to_delta0: f64,
    /// Mass at 1 of the law one step after entering the jump interval.
    pub probe_mass_at_1: f64,
}

pub fn counterexample_report(n: u32, x: f64) -> Result<CounterexampleReport> {
    let hit_steps = hitting_step_count(n, x)?;
    let w1_pi_to_delta0 = orbit_uniform(n).wasserstein1(&AtomicMeasure::point(0.0));
    let probe = counterexample_marginal(Level::Finite(n), x, hit_steps + 1)?;
    Ok(CounterexampleReport { n, hit_steps, w1_pi_to_delta0, probe_mass_at_1: probe.mass_at(1.0) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalRow {
    pub n: u32,
    pub steps: usize,
    pub tv_to_limit: f64,
    pub w1_to_limit: f64,
}

/// Distance from `P_n^{m_n}(x, .)` to the limit law `delta_0` along the
/// schedule `m_n = hit_steps(n, x) + 1`.
pub fn counterexample_diagonal(levels: &[u32], x: f64) -> Result<Vec<DiagonalRow>> {
    let limit = AtomicMeasure::point(0.0);
    levels
        .iter()
        .map(|&n| {
            let steps = hitting_step_count(n, x)? + 1;
            let d = counterexample_marginal(Level::Finite(n), x, steps)?;
            Ok(DiagonalRow { n, steps, tv_to_limit: d.tv(&limit), w1_to_limit: d.wasserstein1(&limit) })
        })
        .collect()
}
