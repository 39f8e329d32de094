//! First-transition expectations
//!
//! ```text
//! u(x) = E_x [ sum_{j=0}^{T} exp(-sum_{k<j} alpha(X_k)) r(X_j) ],   T = first entry to C^c
//! ```
//!
//! computed three ways: value iteration from zero (which converges upward to
//! the minimal non-negative solution of the first-step equations), a direct
//! linear solve on the continuation block, and the regenerative ratio over
//! excursions from a fixed state.

use nalgebra::{DMatrix, DVector};

use crate::chain::{ProbDist, StateIndex, StochasticMatrix, WeightFunction};
use crate::error::{Error, Result};

/// Region, reward and discount rate, one entry per state of the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardSpec {
    continue_region: Vec<bool>,
    reward: Vec<f64>,
    discount_rate: Vec<f64>,
}

impl RewardSpec {
    /// Rewards and rates may be `+inf`; neither may be negative or NaN.
    pub fn new(continue_region: Vec<bool>, reward: Vec<f64>, discount_rate: Vec<f64>) -> Result<Self> {
        let n = continue_region.len();
        if reward.len() != n || discount_rate.len() != n {
            return Err(Error::DimensionMismatch { left: n, right: reward.len().max(discount_rate.len()) });
        }
        if let Some(x) = reward.iter().position(|r| !(*r >= 0.0)) {
            return Err(Error::Precondition(format!("reward {} at state {x} must be non-negative", reward[x])));
        }
        if let Some(x) = discount_rate.iter().position(|a| !(*a >= 0.0)) {
            return Err(Error::Precondition(format!(
                "discount rate {} at state {x} must be non-negative",
                discount_rate[x]
            )));
        }
        Ok(Self { continue_region, reward, discount_rate })
    }

    pub fn from_fns(
        dim: usize,
        in_region: impl Fn(StateIndex) -> bool,
        reward: impl Fn(StateIndex) -> f64,
        discount_rate: impl Fn(StateIndex) -> f64,
    ) -> Result<Self> {
        Self::new(
            (0..dim).map(in_region).collect(),
            (0..dim).map(reward).collect(),
            (0..dim).map(discount_rate).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.reward.len()
    }

    pub fn in_region(&self, x: StateIndex) -> bool {
        self.continue_region[x]
    }

    pub fn reward(&self, x: StateIndex) -> f64 {
        self.reward[x]
    }

    pub fn discount_rate(&self, x: StateIndex) -> f64 {
        self.discount_rate[x]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FteMethod {
    ValueIteration,
    LinearSolve,
    Regenerative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FteSolution {
    /// `+inf` marks divergence.
    pub u: Vec<f64>,
    pub method: FteMethod,
    pub iterations: usize,
    /// Max over finite `x` in `C` of the first-step equation residual.
    pub residual: f64,
}

impl FteSolution {
    pub fn value(&self, x: StateIndex) -> f64 {
        self.u[x]
    }
}

/// Controls for value iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FteOptions {
    pub tol: f64,
    /// Coordinates exceeding this are reported as `+inf`.
    pub cap: f64,
    pub max_iters: usize,
    /// Iterations between geometric-progress checks.
    pub check_every: usize,
}

impl Default for FteOptions {
    fn default() -> Self {
        Self { tol: 1e-12, cap: 1e12, max_iters: 10_000_000, check_every: 10_000 }
    }
}

/// Per-state constant term and continuation row of the first-step equations.
struct FirstStep {
    base: Vec<f64>,
    cont: Vec<Vec<(StateIndex, f64)>>,
}

fn first_step(m: &StochasticMatrix, spec: &RewardSpec) -> Result<FirstStep> {
    let n = m.dim();
    if spec.dim() != n {
        return Err(Error::DimensionMismatch { left: n, right: spec.dim() });
    }
    let mut base = vec![0.0; n];
    let mut cont = vec![Vec::new(); n];
    for x in 0..n {
        if !spec.in_region(x) {
            base[x] = spec.reward(x);
            continue;
        }
        let disc = (-spec.discount_rate(x)).exp();
        let mut b = spec.reward(x);
        for &(y, p) in m.row(x) {
            let g = disc * p;
            if g == 0.0 {
                continue;
            }
            if spec.in_region(y) {
                cont[x].push((y, g));
            } else {
                b += g * spec.reward(y);
            }
        }
        base[x] = b;
    }
    Ok(FirstStep { base, cont })
}

fn apply(fs: &FirstStep, x: StateIndex, u: &[f64]) -> f64 {
    fs.cont[x].iter().fold(fs.base[x], |acc, &(y, g)| acc + g * u[y])
}

fn residual(fs: &FirstStep, spec: &RewardSpec, u: &[f64]) -> f64 {
    (0..u.len())
        .filter(|&x| spec.in_region(x) && u[x].is_finite())
        .map(|x| (apply(fs, x, u) - u[x]).abs())
        .fold(0.0, f64::max)
}

/// Minimal non-negative solution by value iteration from zero.
///
/// Iterates are asserted coordinatewise non-decreasing. A coordinate is
/// declared `+inf` when it exceeds `cap`, or when its per-iteration
/// increment has not shrunk by at least 0.1% across a progress block.
///
/// Stops once the largest increment `d_k` and the remaining-error estimate
/// `d_k r / (1 - r)`, with `r = sqrt(d_k / d_{k-2})`, are both below `tol`.
pub fn minimal_solution(m: &StochasticMatrix, spec: &RewardSpec, opts: FteOptions) -> Result<FteSolution> {
    if !(opts.tol > 0.0) || !(opts.cap > 0.0) {
        return Err(Error::Precondition("tol and cap must be positive".into()));
    }
    let fs = first_step(m, spec)?;
    let n = m.dim();
    let mut u: Vec<f64> = (0..n).map(|x| if spec.in_region(x) { 0.0 } else { spec.reward(x) }).collect();
    let mut next = u.clone();
    let mut prev_incr = vec![0.0f64; n];
    let check_every = opts.check_every.max(1);
    let mut iterations = 0;
    let mut delta = f64::INFINITY;
    let mut recent = [f64::INFINITY; 2];
    while iterations < opts.max_iters {
        iterations += 1;
        delta = 0.0;
        for x in (0..n).filter(|&x| spec.in_region(x)) {
            let v = apply(&fs, x, &u);
            if v < u[x] {
                return Err(Error::Internal(format!("value iterate decreased at state {x}: {} -> {v}", u[x])));
            }
            next[x] = if v > opts.cap { f64::INFINITY } else { v };
            if next[x].is_finite() {
                delta = f64::max(delta, next[x] - u[x]);
            }
        }
        if iterations % check_every == 0 {
            for x in 0..n {
                if !spec.in_region(x) || !next[x].is_finite() {
                    continue;
                }
                let incr = next[x] - u[x];
                if prev_incr[x] > 0.0 && incr > opts.tol && incr >= 0.999 * prev_incr[x] {
                    next[x] = f64::INFINITY;
                }
                prev_incr[x] = incr;
            }
            delta = (0..n)
                .filter(|&x| spec.in_region(x) && next[x].is_finite())
                .map(|x| next[x] - u[x])
                .fold(0.0, f64::max);
        }
        std::mem::swap(&mut u, &mut next);
        let r = (delta / recent[0]).sqrt();
        recent = [recent[1], delta];
        let remaining = if delta == 0.0 {
            0.0
        } else if r < 1.0 {
            delta * r / (1.0 - r)
        } else {
            f64::INFINITY
        };
        if delta < opts.tol && remaining < opts.tol {
            let residual = residual(&fs, spec, &u);
            return Ok(FteSolution { u, method: FteMethod::ValueIteration, iterations, residual });
        }
    }
    Err(Error::NonConvergence { op: "minimal_solution", steps: iterations, gap: delta, last: u })
}

/// Upper estimate `||G_CC^k||_inf^{1/k}` of the continuation block's
/// spectral radius, stopping as soon as it certifies `rho < 1 - 1e-8`.
pub fn continuation_radius(m: &StochasticMatrix, spec: &RewardSpec, max_power: usize) -> Result<f64> {
    let fs = first_step(m, spec)?;
    let n = m.dim();
    let mut v: Vec<f64> = (0..n).map(|x| if spec.in_region(x) { 1.0 } else { 0.0 }).collect();
    let mut next = vec![0.0; n];
    let mut log_norm = 0.0;
    let mut rho = 0.0;
    for k in 1..=max_power.max(1) {
        for x in 0..n {
            next[x] = fs.cont[x].iter().map(|&(y, g)| g * v[y]).sum();
        }
        let norm = next.iter().copied().fold(0.0, f64::max);
        if norm == 0.0 {
            return Ok(0.0);
        }
        log_norm += norm.ln();
        next.iter_mut().for_each(|e| *e /= norm);
        std::mem::swap(&mut v, &mut next);
        rho = (log_norm / k as f64).exp();
        if rho < 1.0 - 1e-8 {
            break;
        }
    }
    Ok(rho)
}

/// Direct solve of `(I - G_CC) u_C = r_C + G_{C,C^c} r_{C^c}`.
pub fn linear_solve_fte(m: &StochasticMatrix, spec: &RewardSpec) -> Result<FteSolution> {
    let rho = continuation_radius(m, spec, 100_000)?;
    if rho >= 1.0 - 1e-8 {
        return Err(Error::IllPosed { rho });
    }
    let fs = first_step(m, spec)?;
    let n = m.dim();
    let region: Vec<StateIndex> = (0..n).filter(|&x| spec.in_region(x)).collect();
    if let Some(&x) = region.iter().find(|&&x| !fs.base[x].is_finite()) {
        return Err(Error::Precondition(format!("infinite reward at state {x}; use value iteration")));
    }
    let mut local = vec![usize::MAX; n];
    for (i, &x) in region.iter().enumerate() {
        local[x] = i;
    }
    let k = region.len();
    let mut a = DMatrix::<f64>::identity(k, k);
    let mut rhs = DVector::<f64>::zeros(k);
    for (i, &x) in region.iter().enumerate() {
        rhs[i] = fs.base[x];
        for &(y, g) in &fs.cont[x] {
            a[(i, local[y])] -= g;
        }
    }
    let sol = a.lu().solve(&rhs).ok_or_else(|| Error::IllPosed { rho })?;
    let mut u: Vec<f64> = (0..n).map(|x| if spec.in_region(x) { 0.0 } else { spec.reward(x) }).collect();
    for (i, &x) in region.iter().enumerate() {
        u[x] = sol[i].max(0.0);
    }
    let residual = residual(&fs, spec, &u);
    Ok(FteSolution { u, method: FteMethod::LinearSolve, iterations: 0, residual })
}

fn solve_any(m: &StochasticMatrix, spec: &RewardSpec, opts: FteOptions) -> Result<Vec<f64>> {
    match linear_solve_fte(m, spec) {
        Ok(s) => Ok(s.u),
        Err(Error::IllPosed { .. }) | Err(Error::Precondition(_)) => Ok(minimal_solution(m, spec, opts)?.u),
        Err(e) => Err(e),
    }
}

/// Denominators at or below this are treated as zero.
pub const RATIO_ZERO: f64 = 1e-12;

/// Excursion decomposition of `u(x)`: the cycle reward collected before
/// exit or return to `x`, divided by one minus the discounted probability
/// of returning before exit.
///
/// Returns to `x` are made absorbing by splitting `x` into itself (start)
/// and an extra entry copy; both pieces are first-transition expectations
/// on the split chain.
pub fn regenerative_ratio(m: &StochasticMatrix, spec: &RewardSpec, x: StateIndex, opts: FteOptions) -> Result<f64> {
    let n = m.dim();
    if x >= n {
        return Err(Error::Dimension { index: x, dim: n });
    }
    if !spec.in_region(x) {
        return Err(Error::Precondition(format!("state {x} must lie in the continuation region")));
    }
    let entry = n;
    let mut rows: Vec<Vec<(StateIndex, f64)>> =
        m.rows().iter().map(|row| row.iter().map(|&(y, p)| (if y == x { entry } else { y }, p)).collect()).collect();
    rows.push(vec![(entry, 1.0)]);
    let split = StochasticMatrix::from_rows(n + 1, rows)?;

    let mut region: Vec<bool> = (0..n).map(|y| spec.in_region(y)).collect();
    region.push(false);
    let mut rates: Vec<f64> = (0..n).map(|y| spec.discount_rate(y)).collect();
    rates.push(0.0);
    let mut cycle_reward: Vec<f64> = (0..n).map(|y| spec.reward(y)).collect();
    cycle_reward.push(0.0);
    let mut return_indicator = vec![0.0; n + 1];
    return_indicator[entry] = 1.0;

    let numer_spec = RewardSpec::new(region.clone(), cycle_reward, rates.clone())?;
    let denom_spec = RewardSpec::new(region, return_indicator, rates)?;
    let numerator = solve_any(&split, &numer_spec, opts)?[x];
    let returned = solve_any(&split, &denom_spec, opts)?[x];
    let denominator = (1.0 - returned).max(0.0);
    if !numerator.is_finite() {
        return Ok(f64::INFINITY);
    }
    if denominator <= RATIO_ZERO {
        if numerator > 0.0 {
            return Ok(f64::INFINITY);
        }
        return Err(Error::Indeterminate { state: x });
    }
    Ok(numerator / denominator)
}

/// Expected number of steps to enter `target` from `x`.
///
/// Uses reward `1` on the continuation region only, so the value is `E[T]`;
/// rewarding every visited state including the hit state would give `E[T] + 1`.
pub fn mean_hitting_time(m: &StochasticMatrix, target: &[StateIndex], x: StateIndex, opts: FteOptions) -> Result<f64> {
    let n = m.dim();
    if x >= n {
        return Err(Error::Dimension { index: x, dim: n });
    }
    let mut in_target = vec![false; n];
    for &t in target {
        if t >= n {
            return Err(Error::Dimension { index: t, dim: n });
        }
        in_target[t] = true;
    }
    let spec = RewardSpec::from_fns(n, |y| !in_target[y], |y| if in_target[y] { 0.0 } else { 1.0 }, |_| 0.0)?;
    Ok(minimal_solution(m, &spec, opts)?.u[x])
}

/// Infinite-horizon reward discounted at constant rate `alpha`.
pub fn discounted_reward(
    m: &StochasticMatrix,
    alpha: f64,
    reward: &[f64],
    x: StateIndex,
    opts: FteOptions,
) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Precondition("discount rate must be positive".into()));
    }
    let n = m.dim();
    if x >= n {
        return Err(Error::Dimension { index: x, dim: n });
    }
    let spec = RewardSpec::new(vec![true; n], reward.to_vec(), vec![alpha; n])?;
    Ok(minimal_solution(m, &spec, opts)?.u[x])
}

/// `sum_x pi(x) w(x)`.
pub fn stationary_weighted_mean(pi: &ProbDist, w: &WeightFunction) -> Result<f64> {
    pi.iter().try_fold(0.0, |acc, (x, p)| Ok(acc + p * w.eval(x)?))
}
