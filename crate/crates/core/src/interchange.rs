//! Closeness of two chains' marginals over all time scales.
//!
//! For a chain `A` and a reference `B` with stationary laws `pi_A`, `pi_B`,
//! the TV distance `||A^m(x,.) - pi_A||` is non-increasing in `m`. Splitting
//! at a horizon `t` then gives, for every `m >= 0`,
//!
//! ```text
//! ||A^m(x,.) - B^m(x,.)|| <= 2 max_{j<=t} ||A^j(x,.) - B^j(x,.)||
//!                          + 2 ||pi_A - pi_B|| + 2 ||B^t(x,.) - pi_B||
//! ```
//!
//! which [`certified_uniform_bound`] evaluates. Everything here works with
//! the L1 convention for TV.

use crate::chain::{marginal_path, propagate, tv_distance, ProbDist, StateIndex, StochasticMatrix, WeightFunction};
use crate::error::{Error, Result};
use crate::stationary::stationarity_residual;

/// Residual `||pi M - pi||_e` above which a supplied law is not accepted
/// as stationary.
pub const STATIONARITY_TOL: f64 = 1e-8;

/// Slack for the monotone-profile assertion.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// Finite-horizon sup of TV between two chains' marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct SupTv {
    pub max: f64,
    pub argmax: usize,
    pub profile: Vec<f64>,
}

/// `max_{0<=m<=horizon} TV(A^m(x,.), B^m(x,.))`, its first maximizer and the
/// whole profile.
pub fn sup_tv_horizon(a: &StochasticMatrix, b: &StochasticMatrix, x: StateIndex, horizon: usize) -> Result<SupTv> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    if x >= a.dim() {
        return Err(Error::Dimension { index: x, dim: a.dim() });
    }
    let mut da = ProbDist::point(x);
    let mut db = ProbDist::point(x);
    let mut profile = Vec::with_capacity(horizon + 1);
    profile.push(0.0);
    for _ in 0..horizon {
        da = propagate(&da, a)?;
        db = propagate(&db, b)?;
        profile.push(tv_distance(&da, &db));
    }
    let (argmax, max) =
        profile.iter().copied().enumerate().fold((0, 0.0), |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) });
    Ok(SupTv { max, argmax, profile })
}

/// Terms of the all-time bound; `total` is their exact sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformBoundReport {
    pub horizon: usize,
    /// `2 max_{0<=j<=t} TV(A^j(x,.), B^j(x,.))`.
    pub term_transient: f64,
    /// `2 TV(pi_A, pi_B)`.
    pub term_stationary: f64,
    /// `2 TV(B^t(x,.), pi_B)`.
    pub term_mixing: f64,
    pub total: f64,
}

fn check_stationary(m: &StochasticMatrix, pi: &ProbDist, which: &str) -> Result<()> {
    let r = stationarity_residual(m, pi)?;
    if !(r < STATIONARITY_TOL) {
        return Err(Error::Precondition(format!("{which} stationarity residual {r:e} exceeds {STATIONARITY_TOL:e}")));
    }
    Ok(())
}

/// Upper bound on `sup_{m>=0} TV(A^m(x,.), B^m(x,.))` from a horizon-`t`
/// computation. Needs only stationarity of the supplied laws; periodic
/// chains are admissible.
pub fn certified_uniform_bound(
    a: &StochasticMatrix,
    b_ref: &StochasticMatrix,
    pi_a: &ProbDist,
    pi_b: &ProbDist,
    x: StateIndex,
    t: usize,
) -> Result<UniformBoundReport> {
    check_stationary(a, pi_a, "first chain")?;
    check_stationary(b_ref, pi_b, "reference chain")?;
    let pa = marginal_path(a, x, t)?;
    let pb = marginal_path(b_ref, x, t)?;
    let max_transient = pa.iter().zip(&pb).map(|(p, q)| tv_distance(p, q)).fold(0.0, f64::max);
    let term_transient = 2.0 * max_transient;
    let term_stationary = 2.0 * tv_distance(pi_a, pi_b);
    let term_mixing = 2.0 * tv_distance(&pb[t], pi_b);
    Ok(UniformBoundReport {
        horizon: t,
        term_transient,
        term_stationary,
        term_mixing,
        total: term_transient + term_stationary + term_mixing,
    })
}

/// `(TV(M^m(x,.), pi))_{m=0..=horizon}`, asserted non-increasing.
pub fn monotone_tv_profile(m: &StochasticMatrix, pi: &ProbDist, x: StateIndex, horizon: usize) -> Result<Vec<f64>> {
    check_stationary(m, pi, "chain")?;
    let mut d = ProbDist::point(x);
    if x >= m.dim() {
        return Err(Error::Dimension { index: x, dim: m.dim() });
    }
    let mut out = Vec::with_capacity(horizon + 1);
    out.push(tv_distance(&d, pi));
    for step in 1..=horizon {
        d = propagate(&d, m)?;
        let v = tv_distance(&d, pi);
        let prev = out[step - 1];
        if v > prev + MONOTONE_SLACK {
            return Err(Error::Internal(format!("TV to stationarity rose from {prev:e} to {v:e} at step {step}")));
        }
        out.push(v);
    }
    Ok(out)
}

/// First `m <= max_steps` with `TV(M^m(x,.), pi) < eps`.
pub fn mixing_horizon(m: &StochasticMatrix, pi: &ProbDist, x: StateIndex, eps: f64, max_steps: usize) -> Result<usize> {
    if x >= m.dim() {
        return Err(Error::Dimension { index: x, dim: m.dim() });
    }
    let mut d = ProbDist::point(x);
    let mut gap = tv_distance(&d, pi);
    for step in 0..=max_steps {
        if gap < eps {
            return Ok(step);
        }
        d = propagate(&d, m)?;
        gap = tv_distance(&d, pi);
    }
    Err(Error::NonConvergence { op: "mixing_horizon", steps: max_steps, gap, last: Vec::new() })
}

/// `sum_y w(y) pi(y) 1{w(y) > b}`.
pub fn weight_tail(pi: &ProbDist, w: &WeightFunction, b: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (y, p) in pi.iter() {
        let wy = w.eval(y)?;
        if wy > b {
            acc += wy * p;
        }
    }
    Ok(acc)
}

/// Weighted-TV bound and its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedBound {
    pub bound: f64,
    pub threshold: f64,
    pub base: UniformBoundReport,
    /// `max(tail(pi_A), tail(pi_B))`.
    pub tail: f64,
    /// `min(pi_A(x), pi_B(x))`.
    pub anchor_mass: f64,
}

/// Bound on `sup_m sum_y w(y) |A^m(x,y) - B^m(x,y)|`:
/// `b * total + 2 max(tail_A, tail_B) / min(pi_A(x), pi_B(x))`, using
/// `A^m(x,y) <= pi_A(y) / pi_A(x)` on the states where `w > b`.
#[allow(clippy::too_many_arguments)]
pub fn weighted_uniform_bound(
    a: &StochasticMatrix,
    b_ref: &StochasticMatrix,
    pi_a: &ProbDist,
    pi_b: &ProbDist,
    x: StateIndex,
    t: usize,
    w: &WeightFunction,
    b: f64,
) -> Result<WeightedBound> {
    if !(b >= 1.0) {
        return Err(Error::Precondition(format!("threshold b = {b} must be at least 1")));
    }
    let anchor_mass = pi_a.mass(x).min(pi_b.mass(x));
    if !(anchor_mass > 0.0) {
        return Err(Error::Precondition(format!("stationary mass at anchor state {x} is zero")));
    }
    let base = certified_uniform_bound(a, b_ref, pi_a, pi_b, x, t)?;
    let tail = weight_tail(pi_a, w, b)?.max(weight_tail(pi_b, w, b)?);
    Ok(WeightedBound { bound: b * base.total + 2.0 * tail / anchor_mass, threshold: b, base, tail, anchor_mass })
}

/// `max(64, smallest power of two whose tail term is below total / 10)`,
/// capped at `2^60`.
pub fn default_threshold(
    pi_a: &ProbDist,
    pi_b: &ProbDist,
    x: StateIndex,
    total: f64,
    w: &WeightFunction,
) -> Result<f64> {
    let anchor = pi_a.mass(x).min(pi_b.mass(x));
    let mut b = 1.0f64;
    while b < 2f64.powi(60) {
        let tail = weight_tail(pi_a, w, b)?.max(weight_tail(pi_b, w, b)?);
        if anchor > 0.0 && 2.0 * tail / anchor < total / 10.0 {
            break;
        }
        b *= 2.0;
    }
    Ok(b.max(64.0))
}

/// One row of a diagonal probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalPoint {
    pub n: usize,
    pub steps: usize,
    pub tv: f64,
}

/// `TV(P_n^{m_n}(x,.), target)` along a family indexed by `n`.
pub fn diagonal_probe(
    family: &[(usize, StochasticMatrix)],
    schedule: impl Fn(usize) -> usize,
    x: StateIndex,
    target: &ProbDist,
) -> Result<Vec<DiagonalPoint>> {
    let steps: Vec<usize> = family.iter().map(|(n, _)| schedule(*n)).collect();
    if steps.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("schedule must be non-decreasing".into()));
    }
    if steps.len() > 1 && steps.first() == steps.last() {
        return Err(Error::Precondition("schedule must grow over the supplied family".into()));
    }
    family
        .iter()
        .zip(steps)
        .map(|((n, m), k)| {
            let d = crate::chain::marginal(m, x, k)?;
            Ok(DiagonalPoint { n: *n, steps: k, tv: tv_distance(&d, target) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::gth;

    fn m(d: &[&[f64]]) -> StochasticMatrix {
        StochasticMatrix::from_dense(&d.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn sup_tv_examples() {
        let a = m(&[&[0.5, 0.5], &[0.25, 0.75]]);
        let r = sup_tv_horizon(&a, &a, 0, 4).unwrap();
        assert_eq!((r.max, r.argmax), (0.0, 0));
        assert!(r.profile.iter().all(|&v| v == 0.0));

        let swap = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let r = sup_tv_horizon(&swap, &StochasticMatrix::identity(2), 0, 1).unwrap();
        assert_eq!((r.max, r.argmax), (2.0, 1));

        let half = m(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let r = sup_tv_horizon(&a, &half, 0, 2).unwrap();
        assert_eq!(r.profile.len(), 3);
        assert!(r.profile[0] == 0.0 && r.profile[1].abs() < 1e-15);
        assert!((r.profile[2] - 0.25).abs() < 1e-15);
        assert_eq!(r.argmax, 2);
    }

    #[test]
    fn sup_tv_rejects_mismatch() {
        let r = sup_tv_horizon(&StochasticMatrix::identity(2), &StochasticMatrix::identity(3), 0, 1);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn bound_for_identical_chains_is_mixing_term() {
        let a = m(&[&[0.5, 0.5], &[0.25, 0.75]]);
        let pi = gth(&a).unwrap();
        let r = certified_uniform_bound(&a, &a, &pi, &pi, 0, 3).unwrap();
        assert_eq!(r.term_transient, 0.0);
        assert_eq!(r.term_stationary, 0.0);
        let p3 = crate::chain::marginal(&a, 0, 3).unwrap();
        assert!((r.total - 2.0 * tv_distance(&p3, &pi)).abs() < 1e-15);

        let half = m(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let pi = gth(&half).unwrap();
        assert_eq!(certified_uniform_bound(&half, &half, &pi, &pi, 0, 1).unwrap().total, 0.0);
    }

    #[test]
    fn bound_rejects_non_stationary_input() {
        let a = m(&[&[0.5, 0.5], &[0.25, 0.75]]);
        let wrong = ProbDist::uniform(&[0, 1]).unwrap();
        let pi = gth(&a).unwrap();
        assert!(matches!(certified_uniform_bound(&a, &a, &wrong, &pi, 0, 3), Err(Error::Precondition(_))));
    }

    #[test]
    fn monotone_profile_examples() {
        let one = StochasticMatrix::identity(1);
        assert_eq!(monotone_tv_profile(&one, &ProbDist::point(0), 0, 5).unwrap(), vec![0.0; 6]);

        let a = m(&[&[0.5, 0.5], &[0.25, 0.75]]);
        let pi = ProbDist::new(vec![(0, 1.0 / 3.0), (1, 2.0 / 3.0)]).unwrap();
        let prof = monotone_tv_profile(&a, &pi, 0, 3).unwrap();
        for (got, want) in prof.iter().zip([4.0 / 3.0, 1.0 / 3.0, 1.0 / 12.0, 1.0 / 48.0]) {
            assert!((got - want).abs() < 1e-15, "{prof:?}");
        }

        let swap = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let pi = ProbDist::uniform(&[0, 1]).unwrap();
        assert_eq!(monotone_tv_profile(&swap, &pi, 0, 6).unwrap(), vec![1.0; 7]);
    }

    #[test]
    fn weighted_bound_reduces_with_unit_weight() {
        let a = m(&[&[0.5, 0.5], &[0.25, 0.75]]);
        let b = m(&[&[0.4, 0.6], &[0.3, 0.7]]);
        let (pa, pb) = (gth(&a).unwrap(), gth(&b).unwrap());
        let base = certified_uniform_bound(&a, &b, &pa, &pb, 0, 10).unwrap();
        let wb = weighted_uniform_bound(&a, &b, &pa, &pb, 0, 10, &WeightFunction::ones(), 1.0).unwrap();
        assert_eq!(wb.tail, 0.0);
        assert_eq!(wb.bound, base.total);
    }

    #[test]
    fn weighted_bound_needs_positive_anchor() {
        let a = m(&[&[0.0, 1.0], &[0.0, 1.0]]);
        let pi = gth(&a).unwrap();
        let r = weighted_uniform_bound(&a, &a, &pi, &pi, 0, 2, &WeightFunction::linear(), 4.0);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn diagonal_probe_examples() {
        let a = m(&[&[0.5, 0.5], &[0.25, 0.75]]);
        let pi = gth(&a).unwrap();
        let family: Vec<_> = (1..=6).map(|n| (n, a.clone())).collect();
        let pts = diagonal_probe(&family, |n| n, 0, &pi).unwrap();
        assert!(pts.windows(2).all(|w| w[1].tv < w[0].tv));
        assert!(pts.last().unwrap().tv < 1e-3);
        assert!(matches!(diagonal_probe(&family, |_| 3, 0, &pi), Err(Error::Precondition(_))));
    }
}
