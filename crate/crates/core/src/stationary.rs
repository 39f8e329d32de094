//! Stationary distributions of finite chains.
//!
//! [`gth`] is the authoritative solver: Grassmann–Taksar–Heyman state
//! elimination, which never subtracts and so stays accurate for nearly
//! decoupled truncations. [`power_iteration`] is a cross-check.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::chain::{ProbDist, StateIndex, StochasticMatrix};
use crate::error::{Error, Result};
use crate::jump::RateMatrix;

/// States of the unique closed communicating class, in increasing order.
fn closed_class(m: &StochasticMatrix) -> Result<Vec<StateIndex>> {
    let n = m.dim();
    let mut g = DiGraph::<(), ()>::with_capacity(n, m.nnz());
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for (x, row) in m.rows().iter().enumerate() {
        for &(y, p) in row {
            if p > 0.0 && x != y {
                g.add_edge(nodes[x], nodes[y], ());
            }
        }
    }
    let mut comp = vec![0usize; n];
    let sccs = tarjan_scc(&g);
    for (c, scc) in sccs.iter().enumerate() {
        for v in scc {
            comp[v.index()] = c;
        }
    }
    let mut closed: Vec<Vec<StateIndex>> = Vec::new();
    for (c, scc) in sccs.iter().enumerate() {
        let leaks = scc.iter().any(|v| m.row(v.index()).iter().any(|&(y, p)| p > 0.0 && comp[y] != c));
        if !leaks {
            let mut states: Vec<StateIndex> = scc.iter().map(|v| v.index()).collect();
            states.sort_unstable();
            closed.push(states);
        }
    }
    match closed.len() {
        1 => Ok(closed.pop().unwrap()),
        k => Err(Error::Structure(format!("{k} closed communicating classes; need exactly one"))),
    }
}

/// Stationary distribution by GTH elimination. Transient states get mass 0.
pub fn gth(m: &StochasticMatrix) -> Result<ProbDist> {
    let class = closed_class(m)?;
    let k = class.len();
    let mut local = vec![usize::MAX; m.dim()];
    for (i, &s) in class.iter().enumerate() {
        local[s] = i;
    }
    // Dense working copy of the class block, row-major.
    let mut a = vec![0.0f64; k * k];
    for (i, &s) in class.iter().enumerate() {
        for &(y, p) in m.row(s) {
            a[i * k + local[y]] = p;
        }
    }
    let mut lower = Vec::with_capacity(k);
    let mut upper = Vec::with_capacity(k);
    for n in (1..k).rev() {
        lower.clear();
        upper.clear();
        let mut s = 0.0;
        for j in 0..n {
            let v = a[n * k + j];
            if v != 0.0 {
                s += v;
                lower.push(j);
            }
        }
        if !(s > 0.0) {
            return Err(Error::Structure(format!("non-positive elimination pivot {s} at state {}", class[n])));
        }
        for i in 0..n {
            let v = a[i * k + n];
            if v != 0.0 {
                a[i * k + n] = v / s;
                upper.push(i);
            }
        }
        for &i in &upper {
            let f = a[i * k + n];
            for &j in &lower {
                a[i * k + j] += f * a[n * k + j];
            }
        }
    }
    let mut pi = vec![0.0f64; k];
    pi[0] = 1.0;
    for j in 1..k {
        pi[j] = (0..j).map(|i| pi[i] * a[i * k + j]).sum();
    }
    let total: f64 = pi.iter().sum();
    let mut full = vec![0.0; m.dim()];
    for (i, &s) in class.iter().enumerate() {
        full[s] = pi[i] / total;
    }
    ProbDist::from_dense_renormalized(&full)
}

/// `||pi M - pi||_e`.
pub fn stationarity_residual(m: &StochasticMatrix, pi: &ProbDist) -> Result<f64> {
    let v = pi.to_dense(m.dim())?;
    let mut out = vec![0.0; m.dim()];
    m.step_dense(&v, &mut out);
    Ok(out.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum())
}

/// Result of [`power_iteration`].
#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult {
    pub dist: ProbDist,
    /// Matrix-vector products performed.
    pub steps: usize,
    /// Final TV gap that met the tolerance.
    pub gap: f64,
}

/// Iterates marginals from `x0` until they settle.
///
/// Plain mode stops when successive marginals are within `tol` in TV.
/// Cesàro mode averages `X_0, ..., X_{m-1}` and compares the averages at
/// dyadic checkpoints `m = 1, 2, 4, ...`; the gap between `m` and `2m`
/// tracks the averaging error, which per-step gaps (of order `1/m^2`)
/// would understate.
pub fn power_iteration(
    m: &StochasticMatrix,
    x0: StateIndex,
    tol: f64,
    max_steps: usize,
    cesaro: bool,
) -> Result<PowerResult> {
    if !(tol > 0.0) {
        return Err(Error::Precondition("tol must be positive".into()));
    }
    if x0 >= m.dim() {
        return Err(Error::Dimension { index: x0, dim: m.dim() });
    }
    let n = m.dim();
    let mut cur = vec![0.0; n];
    cur[x0] = 1.0;
    let mut next = vec![0.0; n];
    if !cesaro {
        let mut gap = f64::INFINITY;
        for step in 1..=max_steps {
            m.step_dense(&cur, &mut next);
            gap = cur.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
            std::mem::swap(&mut cur, &mut next);
            if gap < tol {
                return Ok(PowerResult { dist: ProbDist::from_dense_renormalized(&cur)?, steps: step, gap });
            }
        }
        return Err(Error::NonConvergence { op: "power_iteration", steps: max_steps, gap, last: cur });
    }
    let mut sum = cur.clone();
    let mut averaged = 1usize;
    let mut checkpoint = 2usize;
    let mut prev_avg = cur.clone();
    let mut gap = f64::INFINITY;
    let mut steps = 0usize;
    while steps < max_steps {
        m.step_dense(&cur, &mut next);
        steps += 1;
        std::mem::swap(&mut cur, &mut next);
        sum.iter_mut().zip(&cur).for_each(|(s, c)| *s += c);
        averaged += 1;
        if averaged == checkpoint {
            let avg: Vec<f64> = sum.iter().map(|s| s / averaged as f64).collect();
            gap = avg.iter().zip(&prev_avg).map(|(a, b)| (a - b).abs()).sum();
            if gap < tol {
                return Ok(PowerResult { dist: ProbDist::from_dense_renormalized(&avg)?, steps, gap });
            }
            prev_avg = avg;
            checkpoint *= 2;
        }
    }
    let last: Vec<f64> = sum.iter().map(|s| s / averaged as f64).collect();
    Err(Error::NonConvergence { op: "power_iteration", steps, gap, last })
}

/// Stationary law of a generator: GTH on `I + Q / max_x lambda(x)`.
pub fn ctmc_stationary(q: &RateMatrix) -> Result<ProbDist> {
    if q.dim() == 1 {
        return Ok(ProbDist::point(0));
    }
    let lambda = q.max_rate();
    if lambda <= 0.0 {
        return Err(Error::Structure("all states absorbing (zero uniformization rate)".into()));
    }
    gth(&q.uniformized(lambda)?)
}

/// `max_y |sum_x pi(x) Q(x, y)|`.
pub fn ctmc_residual(q: &RateMatrix, pi: &ProbDist) -> Result<f64> {
    let v = pi.to_dense(q.dim())?;
    let mut out = vec![0.0; q.dim()];
    for (x, row) in q.rows().iter().enumerate() {
        for &(y, r) in row {
            out[y] += v[x] * r;
        }
    }
    Ok(out.iter().fold(0.0, |acc, o| acc.max(o.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(d: &[&[f64]]) -> StochasticMatrix {
        StochasticMatrix::from_dense(&d.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn gth_two_state() {
        let pi = gth(&m(&[&[0.5, 0.5], &[0.25, 0.75]])).unwrap();
        assert!((pi.mass(0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((pi.mass(1) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gth_symmetric_and_periodic() {
        let pi = gth(&m(&[&[0.5, 0.5], &[0.5, 0.5]])).unwrap();
        assert_eq!(pi.support(), &[(0, 0.5), (1, 0.5)]);
        let pi = gth(&m(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert_eq!(pi.support(), &[(0, 0.5), (1, 0.5)]);
    }

    #[test]
    fn gth_zeroes_transient_states() {
        // 0 -> 1 <-> 2, state 0 transient.
        let pi = gth(&m(&[&[0.0, 1.0, 0.0], &[0.0, 0.5, 0.5], &[0.0, 1.0, 0.0]])).unwrap();
        assert_eq!(pi.mass(0), 0.0);
        assert!((pi.mass(1) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gth_rejects_two_closed_classes() {
        assert!(matches!(gth(&StochasticMatrix::identity(2)), Err(Error::Structure(_))));
    }

    #[test]
    fn power_iteration_examples() {
        let half = m(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let r = power_iteration(&half, 0, 1e-9, 10, false).unwrap();
        assert_eq!(r.dist.support(), &[(0, 0.5), (1, 0.5)]);
        assert!(r.steps <= 2);

        let swap = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let err = power_iteration(&swap, 0, 1e-9, 1000, false).unwrap_err();
        match err {
            Error::NonConvergence { gap, last, .. } => {
                assert_eq!(gap, 2.0);
                assert_eq!(last.len(), 2);
            }
            e => panic!("unexpected {e:?}"),
        }
        let r = power_iteration(&swap, 0, 1e-9, 1000, true).unwrap();
        assert_eq!(r.dist.support(), &[(0, 0.5), (1, 0.5)]);
    }

    #[test]
    fn ctmc_stationary_examples() {
        let q = RateMatrix::from_dense(&[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let pi = ctmc_stationary(&q).unwrap();
        assert!((pi.mass(0) - 0.5).abs() < 1e-15);
        let q = RateMatrix::from_dense(&[vec![-2.0, 2.0], vec![1.0, -1.0]]).unwrap();
        let pi = ctmc_stationary(&q).unwrap();
        assert!((pi.mass(0) - 1.0 / 3.0).abs() < 1e-15);
        assert!(ctmc_residual(&q, &pi).unwrap() < 1e-15);
        let q = RateMatrix::from_dense(&[vec![0.0]]).unwrap();
        assert_eq!(ctmc_stationary(&q).unwrap(), ProbDist::point(0));
    }

    #[test]
    fn ctmc_stationary_rejects_frozen_chain() {
        let q = RateMatrix::from_dense(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(ctmc_stationary(&q).is_err());
    }
}
