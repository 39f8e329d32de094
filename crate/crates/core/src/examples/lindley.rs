//! Waiting-time chain `X_{m+1} = max(X_m + Z, 0)` of a single-server queue.
//!
//! Increments are generated from a uniform variate through the inverse
//! distribution function, so two chains driven by the same uniforms are
//! coupled with common random numbers.

use rand::Rng;

use super::atomic::AtomicMeasure;
use super::{stream_rng, stream_sizes};
use crate::error::{Error, Result};

/// Law of the increment `Z`, sampled by inversion from `U ~ U[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IncrementLaw {
    Constant(f64),
    /// Uniform on `[lo, hi)`.
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// `up` with probability `p_up`, else `down`.
    TwoPoint {
        up: f64,
        p_up: f64,
        down: f64,
    },
}

impl IncrementLaw {
    pub fn from_uniform(&self, u: f64) -> f64 {
        match *self {
            Self::Constant(c) => c,
            Self::Uniform { lo, hi } => lo + (hi - lo) * u,
            Self::TwoPoint { up, p_up, down } => {
                if u < p_up {
                    up
                } else {
                    down
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Constant(c) => c,
            Self::Uniform { lo, hi } => 0.5 * (lo + hi),
            Self::TwoPoint { up, p_up, down } => p_up * up + (1.0 - p_up) * down,
        }
    }

    /// Largest value the increment can take.
    pub fn sup(&self) -> f64 {
        match *self {
            Self::Constant(c) => c,
            Self::Uniform { hi, .. } => hi,
            Self::TwoPoint { up, down, .. } => up.max(down),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindleySpec {
    pub law: IncrementLaw,
    /// Require a negative sample-mean drift (with three standard errors of
    /// margin) before stationary sampling.
    pub drift_check: bool,
}

impl LindleySpec {
    pub fn new(law: IncrementLaw) -> Self {
        Self { law, drift_check: true }
    }

    /// Sample mean and standard error of `samples` increments.
    pub fn sample_drift(&self, samples: usize, seed: u64) -> (f64, f64) {
        let mut rng = stream_rng(seed, u64::MAX);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..samples {
            let z = self.law.from_uniform(rng.random());
            s += z;
            s2 += z * z;
        }
        let n = samples as f64;
        let mean = s / n;
        let var = (s2 / n - mean * mean).max(0.0);
        (mean, (var / n).sqrt())
    }
}

fn lindley_step(x: f64, z: f64) -> f64 {
    (x + z).max(0.0)
}

/// Coupled-path estimate of the bounded-Lipschitz distance between two
/// Lindley chains started at the same point.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingEstimate {
    /// `max_m` of the sample mean of `min(|X_m^a - X_m^b|, 2)`.
    pub sup: f64,
    pub argmax: usize,
    pub stderr: f64,
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
}

/// Runs both chains from `x` on common uniforms and reports, for each
/// `m <= horizon`, the mean of `min(|X_m^a - X_m^b|, 2)`: an upper bound on
/// the distance over bounded 1-Lipschitz test functions at time `m`.
pub fn lindley_coupled_sup_distance(
    a: &LindleySpec,
    b: &LindleySpec,
    x: f64,
    horizon: usize,
    samples: usize,
    seed: u64,
) -> Result<CouplingEstimate> {
    if samples < 100 {
        return Err(Error::Precondition(format!("need at least 100 coupled paths, got {samples}")));
    }
    if !(x >= 0.0) {
        return Err(Error::Precondition(format!("start {x} must be non-negative")));
    }
    let mut sum = vec![0.0f64; horizon + 1];
    let mut sum2 = vec![0.0f64; horizon + 1];
    for (stream, count) in stream_sizes(samples) {
        let mut rng = stream_rng(seed, stream);
        let mut ss = vec![0.0f64; horizon + 1];
        let mut ss2 = vec![0.0f64; horizon + 1];
        for _ in 0..count {
            let (mut xa, mut xb) = (x, x);
            for m in 1..=horizon {
                let u: f64 = rng.random();
                xa = lindley_step(xa, a.law.from_uniform(u));
                xb = lindley_step(xb, b.law.from_uniform(u));
                let d = (xa - xb).abs().min(2.0);
                ss[m] += d;
                ss2[m] += d * d;
            }
        }
        sum.iter_mut().zip(&ss).for_each(|(s, v)| *s += v);
        sum2.iter_mut().zip(&ss2).for_each(|(s, v)| *s += v);
    }
    let n = samples as f64;
    let means: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let stderrs: Vec<f64> =
        means.iter().zip(&sum2).map(|(mu, s2)| ((s2 / n - mu * mu).max(0.0) / (n - 1.0)).sqrt()).collect();
    let (argmax, sup) =
        means.iter().copied().enumerate().fold((0, 0.0), |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) });
    Ok(CouplingEstimate { sup, argmax, stderr: stderrs[argmax], means, stderrs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindleyStationary {
    pub measure: AtomicMeasure,
    /// Each walk stops once it falls below `-barrier`.
    pub barrier: f64,
    /// Estimated probability that a stopped walk would still exceed its
    /// running maximum, `exp(-theta * barrier)`.
    pub tail_bound: f64,
    /// Estimated adjustment coefficient `theta > 0` with `E exp(theta Z) = 1`.
    pub theta: f64,
}

/// Root `theta > 0` of the empirical moment generating function
/// `mean(exp(theta z)) = 1`; `+inf` when no sampled increment is positive.
fn cramer_root(zs: &[f64]) -> f64 {
    if zs.iter().all(|&z| z <= 0.0) {
        return f64::INFINITY;
    }
    let f = |t: f64| zs.iter().map(|&z| (t * z).exp()).sum::<f64>() / zs.len() as f64 - 1.0;
    let mut hi = 1e-3;
    while f(hi) <= 0.0 {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    // f is convex with f(0) = 0 and f'(0) < 0; bracket away from the zero root.
    while f(lo) > 0.0 && lo > 1e-12 {
        lo /= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Draws `max_k S(k)` for the random walk `S` with increments `Z`, the
/// stationary waiting time. Each walk runs until it falls below `-barrier`;
/// the default barrier keeps the estimated residual probability below 1e-6.
pub fn lindley_stationary_sample(
    spec: &LindleySpec,
    samples: usize,
    seed: u64,
    barrier: Option<f64>,
) -> Result<LindleyStationary> {
    if samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    if spec.drift_check {
        let (mean, se) = spec.sample_drift(10_000, seed);
        if !(mean + 3.0 * se < 0.0) {
            return Err(Error::Precondition(format!("increment drift {mean} (se {se}) is not negative")));
        }
    }
    let zs: Vec<f64> = {
        let mut rng = stream_rng(seed, u64::MAX - 1);
        (0..10_000).map(|_| spec.law.from_uniform(rng.random())).collect()
    };
    let theta = cramer_root(&zs);
    let barrier = barrier.unwrap_or(if theta.is_finite() { (1e6f64).ln() / theta } else { 0.0 });
    let tail_bound = if theta.is_finite() { (-theta * barrier).exp() } else { 0.0 };
    let mut values = Vec::with_capacity(samples);
    for (stream, count) in stream_sizes(samples) {
        let mut rng = stream_rng(seed, stream);
        for _ in 0..count {
            let (mut s, mut max) = (0.0f64, 0.0f64);
            for _ in 0..100_000_000u64 {
                s += spec.law.from_uniform(rng.random());
                max = max.max(s);
                if s < -barrier {
                    break;
                }
            }
            values.push(max);
        }
    }
    Ok(LindleyStationary { measure: AtomicMeasure::empirical(&values)?, barrier, tail_bound, theta })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shifted(shift: f64) -> LindleySpec {
        LindleySpec::new(IncrementLaw::Uniform { lo: -0.75 - shift, hi: 0.25 - shift })
    }

    #[test]
    fn identical_specs_give_zero() {
        let e = lindley_coupled_sup_distance(&shifted(0.0), &shifted(0.0), 1.0, 50, 200, 7).unwrap();
        assert_eq!(e.sup, 0.0);
        let c = LindleySpec::new(IncrementLaw::Constant(-1.0));
        let e = lindley_coupled_sup_distance(&c, &c, 5.0, 20, 100, 1).unwrap();
        assert_eq!(e.sup, 0.0);
    }

    #[test]
    fn shifted_chains_stay_within_drift_budget() {
        let n = 10.0;
        let e = lindley_coupled_sup_distance(&shifted(0.0), &shifted(1.0 / n), 0.0, 100, 2000, 3).unwrap();
        assert!(e.sup > 0.0);
        assert!(e.sup <= 100.0 / n + 3.0 * e.stderr);
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(lindley_coupled_sup_distance(&shifted(0.0), &shifted(0.0), 0.0, 5, 99, 0).is_err());
    }

    #[test]
    fn deterministic_negative_walk_never_waits() {
        let s = lindley_stationary_sample(&LindleySpec::new(IncrementLaw::Constant(-1.0)), 50, 1, None).unwrap();
        assert_eq!(s.measure, AtomicMeasure::point(0.0));
    }

    #[test]
    fn positive_drift_rejected() {
        let up = LindleySpec::new(IncrementLaw::Constant(0.5));
        assert!(matches!(lindley_stationary_sample(&up, 10, 1, None), Err(Error::Precondition(_))));
    }

    #[test]
    fn cramer_root_for_two_point_walk() {
        let spec = LindleySpec::new(IncrementLaw::TwoPoint { up: 1.0, p_up: 0.25, down: -1.0 });
        let s = lindley_stationary_sample(&spec, 10, 2, None).unwrap();
        assert!((s.theta - 3f64.ln()).abs() < 0.05, "{}", s.theta);
        assert!((s.tail_bound - 1e-6).abs() < 1e-9);
    }
}
