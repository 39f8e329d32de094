//! Contractive random affine maps `phi(x) = A x + B` on the real line and
//! their backward compositions `beta(k, x) = (phi_1 o ... o phi_k)(x)`.

use rand::Rng;

use super::{stream_rng, stream_sizes};
use crate::error::{Error, Result};

/// Law of a scalar coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarLaw {
    Constant(f64),
    /// Uniform on `[lo, hi)`.
    Uniform {
        lo: f64,
        hi: f64,
    },
}

impl ScalarLaw {
    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            Self::Constant(c) => c,
            Self::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }

    /// `E|X|`.
    pub fn mean_abs(&self) -> f64 {
        match *self {
            Self::Constant(c) => c.abs(),
            Self::Uniform { lo, hi } if lo >= 0.0 => 0.5 * (lo + hi),
            Self::Uniform { lo, hi } if hi <= 0.0 => -0.5 * (lo + hi),
            Self::Uniform { lo, hi } => (lo * lo + hi * hi) / (2.0 * (hi - lo)),
        }
    }
}

/// Law of the random map `x -> A x + B`, with `A` and `B` independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineLaw {
    pub a: ScalarLaw,
    pub b: ScalarLaw,
}

impl AffineLaw {
    pub fn deterministic(a: f64, b: f64) -> Self {
        Self { a: ScalarLaw::Constant(a), b: ScalarLaw::Constant(b) }
    }

    fn sample(&self, rng: &mut impl Rng) -> (f64, f64) {
        (self.a.sample(rng), self.b.sample(rng))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IfsSpec {
    pub law: AffineLaw,
    /// `r` with `E|phi(x) - phi(y)| <= r |x - y|`; for affine maps `r = E|A|`.
    pub contraction: f64,
}

impl IfsSpec {
    pub fn new(law: AffineLaw) -> Result<Self> {
        let contraction = law.a.mean_abs();
        if !(contraction < 1.0) {
            return Err(Error::Precondition(format!("contraction ratio {contraction} is not below 1")));
        }
        Ok(Self { law, contraction })
    }

    /// Checks `mean |phi(x) - phi(y)| <= r |x - y| + 3 stderr` on `pairs`
    /// sampled maps applied to the given pair.
    pub fn check_contraction(&self, x: f64, y: f64, pairs: usize, seed: u64) -> bool {
        let mut rng = stream_rng(seed, u64::MAX);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..pairs {
            let (a, b) = self.law.sample(&mut rng);
            let d = ((a * x + b) - (a * y + b)).abs();
            s += d;
            s2 += d * d;
        }
        let n = pairs as f64;
        let mean = s / n;
        let se = ((s2 / n - mean * mean).max(0.0) / n).sqrt();
        mean <= self.contraction * (x - y).abs() + 3.0 * se + 1e-12
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IfsSample {
    pub values: Vec<f64>,
    /// `r^k / (1 - r)` times the sample mean of `|phi(x) - x|`.
    pub tail_bound: f64,
}

/// Draws `maps` independent maps and composes them backward from `x`,
/// returning `beta(k, x)` for each requested depth (all `k <= maps`).
fn compose(maps: &[(f64, f64)], k: usize, x: f64) -> f64 {
    maps[..k].iter().rev().fold(x, |y, &(a, b)| a * y + b)
}

/// Independent samples of `beta(k, x)` with the bound on
/// `E|beta(inf) - beta(k, x)|`.
pub fn ifs_backward(spec: &IfsSpec, k: usize, x: f64, samples: usize, seed: u64) -> Result<IfsSample> {
    if samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    let mut values = Vec::with_capacity(samples);
    let mut first_step = 0.0;
    let mut maps = Vec::with_capacity(k.max(1));
    for (stream, count) in stream_sizes(samples) {
        let mut rng = stream_rng(seed, stream);
        for _ in 0..count {
            maps.clear();
            maps.extend((0..k.max(1)).map(|_| spec.law.sample(&mut rng)));
            let (a, b) = maps[0];
            first_step += (a * x + b - x).abs();
            values.push(compose(&maps, k, x));
        }
    }
    let r = spec.contraction;
    let tail_bound = r.powi(k as i32) / (1.0 - r) * (first_step / samples as f64);
    Ok(IfsSample { values, tail_bound })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IfsGap {
    /// Sample mean of `|beta(k_ref, x) - beta(k, x)|` over shared maps.
    pub mean: f64,
    pub stderr: f64,
    pub tail_bound: f64,
}

/// Uses `beta(k_ref, x)` as a proxy for `beta(inf)`: both compositions share
/// their outermost `k` maps.
pub fn ifs_coupled_gap(spec: &IfsSpec, k: usize, k_ref: usize, x: f64, samples: usize, seed: u64) -> Result<IfsGap> {
    if k_ref < k || samples < 2 {
        return Err(Error::Precondition(format!("need k_ref >= k and two samples, got k={k}, k_ref={k_ref}")));
    }
    let (mut s, mut s2, mut first_step) = (0.0, 0.0, 0.0);
    let mut maps = Vec::with_capacity(k_ref.max(1));
    for (stream, count) in stream_sizes(samples) {
        let mut rng = stream_rng(seed, stream);
        for _ in 0..count {
            maps.clear();
            maps.extend((0..k_ref.max(1)).map(|_| spec.law.sample(&mut rng)));
            let (a, b) = maps[0];
            first_step += (a * x + b - x).abs();
            let d = (compose(&maps, k_ref, x) - compose(&maps, k, x)).abs();
            s += d;
            s2 += d * d;
        }
    }
    let n = samples as f64;
    let mean = s / n;
    let stderr = ((s2 / n - mean * mean).max(0.0) / (n - 1.0)).sqrt();
    let r = spec.contraction;
    Ok(IfsGap { mean, stderr, tail_bound: r.powi(k as i32) / (1.0 - r) * (first_step / n) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::AtomicMeasure;

    #[test]
    fn deterministic_map_meets_bound() {
        let spec = IfsSpec::new(AffineLaw::deterministic(0.5, 1.0)).unwrap();
        for k in [1usize, 5, 10] {
            let s = ifs_backward(&spec, k, 0.0, 4, 1).unwrap();
            let beta = 2.0 * (1.0 - 0.5f64.powi(k as i32));
            assert!(s.values.iter().all(|&v| v == beta));
            assert!((s.tail_bound - 2.0 * 0.5f64.powi(k as i32)).abs() < 1e-15);
            assert!(((2.0 - beta) - s.tail_bound).abs() < 1e-12);
        }
    }

    #[test]
    fn depth_zero_returns_start() {
        let spec = IfsSpec::new(AffineLaw::deterministic(0.5, 1.0)).unwrap();
        let s = ifs_backward(&spec, 0, 3.0, 5, 1).unwrap();
        assert!(s.values.iter().all(|&v| v == 3.0));
        assert!((s.tail_bound - 0.5 / 0.5).abs() < 1e-15);
    }

    #[test]
    fn random_affine_converges() {
        let law = AffineLaw { a: ScalarLaw::Uniform { lo: 0.0, hi: 1.0 }, b: ScalarLaw::Uniform { lo: -1.0, hi: 1.0 } };
        let spec = IfsSpec::new(law).unwrap();
        assert_eq!(spec.contraction, 0.5);
        assert!(spec.check_contraction(0.0, 3.0, 10_000, 5));
        let n = 4000;
        let a = ifs_backward(&spec, 20, 0.0, n, 11).unwrap();
        let b = ifs_backward(&spec, 40, 0.0, n, 12).unwrap();
        let ks = AtomicMeasure::empirical(&a.values).unwrap().kolmogorov(&AtomicMeasure::empirical(&b.values).unwrap());
        // Two-sample DKW tolerance at level 1e-3.
        let eps = (2.0 / n as f64 * (2.0f64 / 1e-3).ln() / 2.0).sqrt() * 2.0;
        assert!(ks < eps, "{ks} vs {eps}");
        let g = ifs_coupled_gap(&spec, 5, 60, 0.0, 4000, 3).unwrap();
        assert!(g.mean <= g.tail_bound + 3.0 * g.stderr);
    }

    #[test]
    fn expanding_law_rejected() {
        assert!(IfsSpec::new(AffineLaw::deterministic(1.5, 0.0)).is_err());
    }
}
