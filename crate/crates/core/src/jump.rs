//! Continuous-time chains on finite state spaces: generator validation, the
//! embedded jump chain, transient laws by uniformization, the all-time
//! bound through unit-time skeletons, and integral rewards.

use crate::chain::{ProbDist, StateIndex, StochasticMatrix};
use crate::error::{Error, Result};
use crate::fte::{minimal_solution, FteOptions, RewardSpec};
use crate::interchange::{certified_uniform_bound, UniformBoundReport, STATIONARITY_TOL};
use crate::stationary::ctmc_residual;

/// Tolerance on generator row sums.
pub const RATE_TOL: f64 = 1e-12;

/// Conservative generator with sparse rows (diagonal included).
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    dim: usize,
    rows: Vec<Vec<(StateIndex, f64)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RateViolation {
    NegativeRate { row: StateIndex, col: StateIndex, rate: f64 },
    RowSum { row: StateIndex, sum: f64 },
    NonFinite { row: StateIndex },
}

impl RateMatrix {
    /// Builds and validates at [`RATE_TOL`].
    pub fn from_rows(dim: usize, rows: Vec<Vec<(StateIndex, f64)>>) -> Result<Self> {
        let q = Self::from_rows_unchecked(dim, rows)?;
        if let Some(v) = validate_rate_matrix(&q, RATE_TOL).first() {
            return Err(Error::InvalidMatrix(format!("{v:?}")));
        }
        Ok(q)
    }

    /// Sorts rows and merges duplicate columns; checks indices only.
    pub fn from_rows_unchecked(dim: usize, mut rows: Vec<Vec<(StateIndex, f64)>>) -> Result<Self> {
        if dim == 0 || rows.len() != dim {
            return Err(Error::InvalidMatrix(format!("{} rows for dimension {dim}", rows.len())));
        }
        for row in rows.iter_mut() {
            row.sort_by_key(|&(c, _)| c);
            let mut merged: Vec<(StateIndex, f64)> = Vec::with_capacity(row.len());
            for &(c, r) in row.iter() {
                if c >= dim {
                    return Err(Error::Dimension { index: c, dim });
                }
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += r,
                    _ => merged.push((c, r)),
                }
            }
            merged.retain(|&(_, r)| r != 0.0);
            *row = merged;
        }
        Ok(Self { dim, rows })
    }

    pub fn from_dense(dense: &[Vec<f64>]) -> Result<Self> {
        let rows = dense.iter().map(|r| r.iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect()).collect();
        Self::from_rows(dense.len(), rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Vec<(StateIndex, f64)>] {
        &self.rows
    }

    pub fn entry(&self, x: StateIndex, y: StateIndex) -> f64 {
        match self.rows[x].binary_search_by_key(&y, |&(c, _)| c) {
            Ok(i) => self.rows[x][i].1,
            Err(_) => 0.0,
        }
    }

    /// Total jump rate out of `x`, `sum_{y != x} Q(x, y)`.
    pub fn exit_rate(&self, x: StateIndex) -> f64 {
        self.rows[x].iter().filter(|&&(y, _)| y != x).map(|&(_, r)| r).sum()
    }

    /// `max_x lambda(x)`.
    pub fn max_rate(&self) -> f64 {
        (0..self.dim).map(|x| self.exit_rate(x)).fold(0.0, f64::max)
    }

    /// `I + Q / lambda`, with diagonals set so rows sum to one exactly.
    pub fn uniformized(&self, lambda: f64) -> Result<StochasticMatrix> {
        if !(lambda >= self.max_rate()) || lambda <= 0.0 {
            return Err(Error::Precondition(format!(
                "uniformization rate {lambda} below max exit rate {}",
                self.max_rate()
            )));
        }
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(x, row)| {
                let mut out: Vec<(StateIndex, f64)> =
                    row.iter().filter(|&&(y, _)| y != x).map(|&(y, r)| (y, r / lambda)).collect();
                let off: f64 = out.iter().map(|&(_, p)| p).sum();
                out.push((x, (1.0 - off).max(0.0)));
                out
            })
            .collect();
        StochasticMatrix::from_rows(self.dim, rows)
    }
}

/// Checks off-diagonal non-negativity, zero row sums and finiteness.
pub fn validate_rate_matrix(q: &RateMatrix, tol: f64) -> Vec<RateViolation> {
    assert!(tol > 0.0, "tolerance must be positive");
    let mut out = Vec::new();
    for (x, row) in q.rows.iter().enumerate() {
        if row.iter().any(|&(_, r)| !r.is_finite()) {
            out.push(RateViolation::NonFinite { row: x });
            continue;
        }
        for &(y, r) in row {
            if y != x && r < -tol {
                out.push(RateViolation::NegativeRate { row: x, col: y, rate: r });
            }
        }
        let sum: f64 = row.iter().map(|&(_, r)| r).sum();
        if !(sum.abs() <= tol) {
            out.push(RateViolation::RowSum { row: x, sum });
        }
    }
    out
}

/// Holding rates and jump matrix of a generator.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpChain {
    pub holding_rates: Vec<f64>,
    /// Zero diagonal except on absorbing states, which jump to themselves.
    pub jump: StochasticMatrix,
}

impl JumpChain {
    /// `Q(x, y) = lambda(x) R(x, y)` off the diagonal, `Q(x, x) = -lambda(x)`.
    pub fn to_rate_matrix(&self) -> Result<RateMatrix> {
        let rows = self
            .jump
            .rows()
            .iter()
            .enumerate()
            .map(|(x, row)| {
                let lam = self.holding_rates[x];
                let mut out: Vec<(StateIndex, f64)> =
                    row.iter().filter(|&&(y, _)| y != x).map(|&(y, p)| (y, lam * p)).collect();
                out.push((x, -lam));
                out
            })
            .collect();
        RateMatrix::from_rows_unchecked(self.jump.dim(), rows)
    }
}

pub fn embedded_chain(q: &RateMatrix) -> Result<JumpChain> {
    let mut holding_rates = Vec::with_capacity(q.dim);
    let mut rows = Vec::with_capacity(q.dim);
    for (x, row) in q.rows.iter().enumerate() {
        let lam = -q.entry(x, x);
        let off: Vec<(StateIndex, f64)> = row.iter().filter(|&&(y, _)| y != x).copied().collect();
        let total: f64 = off.iter().map(|&(_, r)| r).sum();
        if total > 0.0 {
            // Normalize by the off-diagonal total so the row is exactly stochastic.
            rows.push(off.iter().map(|&(y, r)| (y, r / total)).collect());
        } else {
            rows.push(vec![(x, 1.0)]);
        }
        holding_rates.push(lam.max(0.0));
    }
    Ok(JumpChain { holding_rates, jump: StochasticMatrix::from_rows(q.dim, rows)? })
}

/// Poisson truncation point: smallest `K` with `K + 2 > a` and
/// `w_{K+1} / (1 - a / (K + 2)) < eps`, where `w_k = e^{-a} a^k / k!`.
/// Returns `(K, log weights 0..=K)`.
fn poisson_terms(a: f64, eps: f64) -> (usize, Vec<f64>) {
    let mut logw = vec![-a];
    let ln_a = a.ln();
    let mut k = 0usize;
    loop {
        let next = logw[k] + ln_a - ((k + 1) as f64).ln();
        let kk = (k + 2) as f64;
        if kk > a {
            let tail = next.exp() / (1.0 - a / kk);
            if tail < eps {
                return (k, logw);
            }
        }
        logw.push(next);
        k += 1;
    }
}

/// Law at time `t` from an initial distribution, by uniformization.
pub fn transient_from(q: &RateMatrix, init: &ProbDist, t: f64, eps: f64) -> Result<ProbDist> {
    if !(t >= 0.0) || !(eps > 0.0) {
        return Err(Error::Precondition("need t >= 0 and eps > 0".into()));
    }
    let lambda = q.max_rate();
    if t == 0.0 || lambda == 0.0 {
        init.to_dense(q.dim)?;
        return Ok(init.clone());
    }
    let p = q.uniformized(lambda)?;
    let (_, logw) = poisson_terms(lambda * t, eps);
    let mut v = init.to_dense(q.dim)?;
    let mut next = vec![0.0; q.dim];
    let mut acc = vec![0.0; q.dim];
    for (k, lw) in logw.iter().enumerate() {
        let w = lw.exp();
        acc.iter_mut().zip(&v).for_each(|(a, vi)| *a += w * vi);
        if k + 1 < logw.len() {
            p.step_dense(&v, &mut next);
            std::mem::swap(&mut v, &mut next);
        }
    }
    let total: f64 = acc.iter().sum();
    if !(total > 1.0 - eps - 1e-12) {
        return Err(Error::Internal(format!("uniformization kept mass {total} with eps {eps}")));
    }
    acc.iter_mut().for_each(|a| *a /= total);
    ProbDist::from_dense(&acc)
}

/// `P(X(t) = . | X(0) = x)`.
pub fn transient(q: &RateMatrix, x: StateIndex, t: f64, eps: f64) -> Result<ProbDist> {
    if x >= q.dim {
        return Err(Error::Dimension { index: x, dim: q.dim });
    }
    transient_from(q, &ProbDist::point(x), t, eps)
}

/// Transition matrix of `X(step)`, built row by row.
pub fn skeleton(q: &RateMatrix, step: f64, eps: f64) -> Result<StochasticMatrix> {
    let rows =
        (0..q.dim).map(|x| transient(q, x, step, eps).map(|d| d.support().to_vec())).collect::<Result<Vec<_>>>()?;
    StochasticMatrix::from_rows(q.dim, rows)
}

/// Skeleton-chain bound plus the slack from truncating the Poisson series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtmcBoundReport {
    pub skeleton: UniformBoundReport,
    pub step: f64,
    /// `4 eps N` with `N` the larger dimension.
    pub truncation_slack: f64,
}

impl CtmcBoundReport {
    pub fn total_with_slack(&self) -> f64 {
        self.skeleton.total + self.truncation_slack
    }
}

/// All-time bound on TV between two transient laws through their
/// `step`-skeletons. `t` is the skeleton horizon in steps.
#[allow(clippy::too_many_arguments)]
pub fn ctmc_certified_uniform_bound(
    q_a: &RateMatrix,
    q_ref: &RateMatrix,
    pi_a: &ProbDist,
    pi_ref: &ProbDist,
    x: StateIndex,
    t: usize,
    eps: f64,
    step: f64,
) -> Result<CtmcBoundReport> {
    for (q, pi, which) in [(q_a, pi_a, "first"), (q_ref, pi_ref, "reference")] {
        if !validate_rate_matrix(q, RATE_TOL).is_empty() {
            return Err(Error::Precondition(format!("{which} generator invalid")));
        }
        let r = ctmc_residual(q, pi)?;
        if !(r < STATIONARITY_TOL) {
            return Err(Error::Precondition(format!("{which} stationarity residual {r:e}")));
        }
    }
    let sa = skeleton(q_a, step, eps)?;
    let sr = skeleton(q_ref, step, eps)?;
    let report = certified_uniform_bound(&sa, &sr, pi_a, pi_ref, x, t)?;
    Ok(CtmcBoundReport { skeleton: report, step, truncation_slack: 4.0 * eps * q_a.dim.max(q_ref.dim) as f64 })
}

/// `E_x int_0^T exp(-int_0^s alpha(X(u)) du) r(X(s)) ds`, `T` the exit time
/// from `C`, through the embedded chain: each visit to `y` in `C` earns
/// `r(y) / (lambda(y) + alpha(y))` and survives discounting with
/// probability `lambda(y) / (lambda(y) + alpha(y))`.
pub fn ctmc_fte(q: &RateMatrix, spec: &RewardSpec, x: StateIndex, opts: FteOptions) -> Result<f64> {
    let n = q.dim;
    if spec.dim() != n {
        return Err(Error::DimensionMismatch { left: n, right: spec.dim() });
    }
    if x >= n {
        return Err(Error::Dimension { index: x, dim: n });
    }
    if !spec.in_region(x) {
        return Err(Error::Precondition(format!("state {x} must lie in the continuation region")));
    }
    let jc = embedded_chain(q)?;
    let mut reward = vec![0.0; n];
    let mut rate = vec![0.0; n];
    for y in (0..n).filter(|&y| spec.in_region(y)) {
        let lam = jc.holding_rates[y];
        let out = lam + spec.discount_rate(y);
        let r = spec.reward(y);
        if out == 0.0 {
            reward[y] = if r > 0.0 { f64::INFINITY } else { 0.0 };
            rate[y] = f64::INFINITY;
        } else {
            reward[y] = r / out;
            rate[y] = if lam == 0.0 { f64::INFINITY } else { (out / lam).ln() };
        }
    }
    let region = (0..n).map(|y| spec.in_region(y)).collect();
    let transformed = RewardSpec::new(region, reward, rate)?;
    Ok(minimal_solution(&jc.jump, &transformed, opts)?.u[x])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(d: &[&[f64]]) -> RateMatrix {
        RateMatrix::from_dense(&d.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn validation_examples() {
        assert!(validate_rate_matrix(&q(&[&[-1.0, 1.0], &[1.0, -1.0]]), 1e-12).is_empty());
        let bad =
            RateMatrix::from_rows_unchecked(2, vec![vec![(0, -1.0), (1, 1.1)], vec![(0, 1.0), (1, -1.0)]]).unwrap();
        let v = validate_rate_matrix(&bad, 1e-12);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], RateViolation::RowSum { row: 0, .. }));
        let neg =
            RateMatrix::from_rows_unchecked(2, vec![vec![(0, 0.5), (1, -0.5)], vec![(0, 1.0), (1, -1.0)]]).unwrap();
        let v = validate_rate_matrix(&neg, 1e-12);
        assert_eq!(v, vec![RateViolation::NegativeRate { row: 0, col: 1, rate: -0.5 }]);
    }

    #[test]
    fn embedded_chain_examples() {
        let jc = embedded_chain(&q(&[&[-2.0, 2.0], &[1.0, -1.0]])).unwrap();
        assert_eq!(jc.holding_rates, vec![2.0, 1.0]);
        assert_eq!(jc.jump.to_dense(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);

        let jc = embedded_chain(&q(&[&[0.0, 0.0], &[0.0, 0.0]])).unwrap();
        assert_eq!(jc.holding_rates, vec![0.0, 0.0]);
        assert_eq!(jc.jump, StochasticMatrix::identity(2));

        let jc = embedded_chain(&q(&[&[-1.0, 0.5, 0.5], &[0.0, 0.0, 0.0], &[1.0, 0.0, -1.0]])).unwrap();
        assert_eq!(jc.holding_rates, vec![1.0, 0.0, 1.0]);
        assert_eq!(jc.jump.to_dense(), vec![vec![0.0, 0.5, 0.5], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]]);
    }

    #[test]
    fn transient_examples() {
        let sym = q(&[&[-1.0, 1.0], &[1.0, -1.0]]);
        assert_eq!(transient(&sym, 0, 0.0, 1e-12).unwrap(), ProbDist::point(0));
        let d = transient(&sym, 0, 1.0, 1e-12).unwrap();
        let want = 0.5 * (1.0 + (-2.0f64).exp());
        assert!((d.mass(0) - want).abs() < 1e-11);
        assert!((d.mass(0) - 0.56767).abs() < 1e-5);
        let frozen = q(&[&[0.0, 0.0], &[0.0, 0.0]]);
        assert_eq!(transient(&frozen, 1, 7.0, 1e-12).unwrap(), ProbDist::point(1));
    }

    #[test]
    fn poisson_cutoff_meets_tail_bound() {
        for a in [0.1, 1.0, 10.0, 200.0, 1000.0] {
            let (k, logw) = poisson_terms(a, 1e-12);
            assert_eq!(logw.len(), k + 1);
            let kept: f64 = logw.iter().map(|l| l.exp()).sum();
            assert!(1.0 - kept < 1e-11, "a = {a}: kept {kept}");
        }
    }

    #[test]
    fn ctmc_fte_examples() {
        let o = FteOptions::default();
        let absorb = q(&[&[-1.0, 1.0], &[0.0, 0.0]]);
        let spec = RewardSpec::new(vec![true, false], vec![1.0, 1.0], vec![0.0; 2]).unwrap();
        assert!((ctmc_fte(&absorb, &spec, 0, o).unwrap() - 1.0).abs() < 1e-12);

        let two = q(&[&[-2.0, 2.0], &[1.0, -1.0]]);
        let spec = RewardSpec::new(vec![true, false], vec![1.0, 0.0], vec![0.0; 2]).unwrap();
        assert!((ctmc_fte(&two, &spec, 0, o).unwrap() - 0.5).abs() < 1e-12);

        let spec = RewardSpec::new(vec![true; 2], vec![1.0; 2], vec![0.25; 2]).unwrap();
        for x in 0..2 {
            assert!((ctmc_fte(&two, &spec, x, o).unwrap() - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn ctmc_fte_frozen_state_with_reward_diverges() {
        let frozen = q(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let spec = RewardSpec::new(vec![true, false], vec![1.0, 0.0], vec![0.0; 2]).unwrap();
        assert_eq!(ctmc_fte(&frozen, &spec, 0, FteOptions::default()).unwrap(), f64::INFINITY);
    }
}
