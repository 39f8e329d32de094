//! Distributions, sparse stochastic matrices, countable kernels and the two
//! distances used throughout: total variation (as the L1 norm of the signed
//! difference, range `[0, 2]`) and weighted total variation.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Index of a state in `{0, 1, 2, ...}`.
pub type StateIndex = usize;

/// Tolerance on total mass for stored distributions and matrix rows.
pub const MASS_TOL: f64 = 1e-12;

/// Largest mass drift that propagation silently renormalizes away.
pub const RENORM_LIMIT: f64 = 1e-10;

/// A finitely supported probability vector over states.
///
/// Entries are stored sorted by state with strictly increasing indices and
/// no zero masses.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist {
    support: Vec<(StateIndex, f64)>,
}

impl ProbDist {
    /// Builds a distribution from `(state, mass)` pairs in any order.
    /// Zero masses are dropped; duplicates, negative or non-finite masses,
    /// and totals off by more than [`MASS_TOL`] are rejected.
    pub fn new(mut pairs: Vec<(StateIndex, f64)>) -> Result<Self> {
        pairs.sort_by_key(|&(s, _)| s);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidDistribution(format!("duplicate state {}", w[0].0)));
            }
        }
        if let Some(&(s, m)) = pairs.iter().find(|&&(_, m)| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidDistribution(format!("mass {m} at state {s}")));
        }
        pairs.retain(|&(_, m)| m > 0.0);
        let total: f64 = pairs.iter().map(|&(_, m)| m).sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!("total mass {total}")));
        }
        Ok(Self { support: pairs })
    }

    /// Point mass at `x`.
    pub fn point(x: StateIndex) -> Self {
        Self { support: vec![(x, 1.0)] }
    }

    /// Uniform distribution over the given distinct states.
    pub fn uniform(states: &[StateIndex]) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let m = 1.0 / states.len() as f64;
        Self::new(states.iter().map(|&s| (s, m)).collect())
    }

    /// Builds from a dense vector indexed by state.
    pub fn from_dense(v: &[f64]) -> Result<Self> {
        Self::new(v.iter().copied().enumerate().filter(|&(_, m)| m != 0.0).collect())
    }

    /// Builds from a dense vector whose total is within [`RENORM_LIMIT`] of 1,
    /// dividing out the drift.
    pub(crate) fn from_dense_renormalized(v: &[f64]) -> Result<Self> {
        let total: f64 = v.iter().sum();
        if !((total - 1.0).abs() < RENORM_LIMIT) {
            return Err(Error::MassDrift { mass: total });
        }
        if let Some((s, &m)) = v.iter().enumerate().find(|&(_, &m)| !(m >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("mass {m} at state {s}")));
        }
        let support = v.iter().enumerate().filter(|&(_, &m)| m > 0.0).map(|(s, &m)| (s, m / total)).collect();
        Ok(Self { support })
    }

    pub fn support(&self) -> &[(StateIndex, f64)] {
        &self.support
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateIndex, f64)> + '_ {
        self.support.iter().copied()
    }

    /// Mass at `x` (zero off the support).
    pub fn mass(&self, x: StateIndex) -> f64 {
        match self.support.binary_search_by_key(&x, |&(s, _)| s) {
            Ok(i) => self.support[i].1,
            Err(_) => 0.0,
        }
    }

    /// Largest state carrying mass.
    pub fn max_state(&self) -> StateIndex {
        self.support.last().map(|&(s, _)| s).unwrap_or(0)
    }

    /// Dense vector of length `dim`; errors if mass sits at or above `dim`.
    pub fn to_dense(&self, dim: usize) -> Result<Vec<f64>> {
        let mut v = vec![0.0; dim];
        for &(s, m) in &self.support {
            if s >= dim {
                return Err(Error::Dimension { index: s, dim });
            }
            v[s] = m;
        }
        Ok(v)
    }
}

/// Finite row-stochastic matrix with sparse rows sorted by column.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    dim: usize,
    rows: Vec<Vec<(StateIndex, f64)>>,
}

fn normalize_row(row: &mut Vec<(StateIndex, f64)>) {
    row.sort_by_key(|&(c, _)| c);
    let mut merged: Vec<(StateIndex, f64)> = Vec::with_capacity(row.len());
    for &(c, p) in row.iter() {
        match merged.last_mut() {
            Some(last) if last.0 == c => last.1 += p,
            _ => merged.push((c, p)),
        }
    }
    merged.retain(|&(_, p)| p != 0.0);
    *row = merged;
}

impl StochasticMatrix {
    /// Builds a matrix from sparse rows, merging duplicate columns and
    /// dropping zeros. Rows must be non-negative and sum to 1 within
    /// [`MASS_TOL`].
    pub fn from_rows(dim: usize, rows: Vec<Vec<(StateIndex, f64)>>) -> Result<Self> {
        let m = Self::from_rows_unchecked(dim, rows)?;
        let report = validate_stochastic(&m, MASS_TOL);
        if let Some(v) = report.violations.first() {
            return Err(Error::InvalidMatrix(format!(
                "row {} sums to {} (min entry {})",
                v.row, v.row_sum, v.min_entry
            )));
        }
        Ok(m)
    }

    /// Structural checks only (dimension, column range, finite entries).
    /// Use [`validate_stochastic`] to inspect row sums.
    pub fn from_rows_unchecked(dim: usize, mut rows: Vec<Vec<(StateIndex, f64)>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMatrix("dimension must be positive".into()));
        }
        if rows.len() != dim {
            return Err(Error::InvalidMatrix(format!("{} rows for dimension {dim}", rows.len())));
        }
        for (x, row) in rows.iter_mut().enumerate() {
            normalize_row(row);
            for &(c, p) in row.iter() {
                if c >= dim {
                    return Err(Error::Dimension { index: c, dim });
                }
                if !p.is_finite() {
                    return Err(Error::InvalidMatrix(format!("non-finite entry at ({x}, {c})")));
                }
            }
        }
        Ok(Self { dim, rows })
    }

    /// Builds from a dense square array.
    pub fn from_dense(dense: &[Vec<f64>]) -> Result<Self> {
        let dim = dense.len();
        let rows = dense.iter().map(|r| r.iter().copied().enumerate().filter(|&(_, p)| p != 0.0).collect()).collect();
        Self::from_rows(dim, rows)
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, rows: (0..dim).map(|x| vec![(x, 1.0)]).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, x: StateIndex) -> &[(StateIndex, f64)] {
        &self.rows[x]
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

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.dim]; self.dim];
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, p) in row {
                d[x][y] = p;
            }
        }
        d
    }

    /// `out = v * self` for dense row vectors of length `dim`.
    pub(crate) fn step_dense(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (x, row) in self.rows.iter().enumerate() {
            let vx = v[x];
            if vx == 0.0 {
                continue;
            }
            for &(y, p) in row {
                out[y] += vx * p;
            }
        }
    }

    fn check_state(&self, x: StateIndex) -> Result<()> {
        if x >= self.dim {
            return Err(Error::Dimension { index: x, dim: self.dim });
        }
        Ok(())
    }
}

/// One row whose sum or entries fall outside the tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct RowViolation {
    pub row: StateIndex,
    pub row_sum: f64,
    /// `row_sum - 1`.
    pub deviation: f64,
    pub min_entry: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<RowViolation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists rows whose sum leaves `[1 - tol, 1 + tol]` or that carry an entry
/// below `-tol`.
pub fn validate_stochastic(m: &StochasticMatrix, tol: f64) -> ValidationReport {
    assert!(tol > 0.0, "tolerance must be positive");
    let violations = m
        .rows
        .iter()
        .enumerate()
        .filter_map(|(x, row)| {
            let row_sum: f64 = row.iter().map(|&(_, p)| p).sum();
            let min_entry = row.iter().map(|&(_, p)| p).fold(f64::INFINITY, f64::min);
            let min_entry = if row.is_empty() { 0.0 } else { min_entry };
            let bad = !((row_sum - 1.0).abs() <= tol) || min_entry < -tol;
            bad.then_some(RowViolation { row: x, row_sum, deviation: row_sum - 1.0, min_entry })
        })
        .collect();
    ValidationReport { violations }
}

/// Clamps entries in `(-tol, 0)` to zero and renormalizes every row whose
/// sum is within `tol` of 1. Returns the repaired matrix and the report of
/// rows that could not be repaired.
pub fn repair_stochastic(m: &StochasticMatrix, tol: f64) -> (StochasticMatrix, ValidationReport) {
    let mut rows = m.rows.clone();
    for row in rows.iter_mut() {
        if row.iter().any(|&(_, p)| p < -tol) {
            continue;
        }
        row.iter_mut().for_each(|e| e.1 = e.1.max(0.0));
        row.retain(|&(_, p)| p > 0.0);
        let s: f64 = row.iter().map(|&(_, p)| p).sum();
        if (s - 1.0).abs() <= tol && s > 0.0 {
            row.iter_mut().for_each(|e| e.1 /= s);
        }
    }
    let repaired = StochasticMatrix { dim: m.dim, rows };
    let report = validate_stochastic(&repaired, tol);
    (repaired, report)
}

/// One application of the transition operator: `d * M`.
pub fn propagate(d: &ProbDist, m: &StochasticMatrix) -> Result<ProbDist> {
    let v = d.to_dense(m.dim)?;
    let mut out = vec![0.0; m.dim];
    m.step_dense(&v, &mut out);
    ProbDist::from_dense_renormalized(&out)
}

/// Law of `X_m` started from `x`.
pub fn marginal(m: &StochasticMatrix, x: StateIndex, steps: usize) -> Result<ProbDist> {
    m.check_state(x)?;
    let mut d = ProbDist::point(x);
    for _ in 0..steps {
        d = propagate(&d, m)?;
    }
    Ok(d)
}

/// Marginal laws of `X_0, ..., X_horizon` from `x`, one propagation each.
pub fn marginal_path(m: &StochasticMatrix, x: StateIndex, horizon: usize) -> Result<Vec<ProbDist>> {
    m.check_state(x)?;
    let mut out = Vec::with_capacity(horizon + 1);
    out.push(ProbDist::point(x));
    for k in 0..horizon {
        let next = propagate(&out[k], m)?;
        out.push(next);
    }
    Ok(out)
}

/// Merge-join over two sorted supports, calling `f(state, a, b)` on the union.
fn for_each_union(a: &ProbDist, b: &ProbDist, mut f: impl FnMut(StateIndex, f64, f64)) {
    let (sa, sb) = (&a.support, &b.support);
    let (mut i, mut j) = (0, 0);
    while i < sa.len() || j < sb.len() {
        match (sa.get(i), sb.get(j)) {
            (Some(&(x, p)), Some(&(y, q))) if x == y => {
                f(x, p, q);
                i += 1;
                j += 1;
            }
            (Some(&(x, p)), Some(&(y, _))) if x < y => {
                f(x, p, 0.0);
                i += 1;
            }
            (Some(&(x, p)), None) => {
                f(x, p, 0.0);
                i += 1;
            }
            (_, Some(&(y, q))) => {
                f(y, 0.0, q);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
}

/// `sum_y |a(y) - b(y)|`, in `[0, 2]`.
pub fn tv_distance(a: &ProbDist, b: &ProbDist) -> f64 {
    let mut acc = 0.0;
    for_each_union(a, b, |_, p, q| acc += (p - q).abs());
    acc
}

/// `sum_y w(y) |a(y) - b(y)|`.
pub fn weighted_tv_distance(a: &ProbDist, b: &ProbDist, w: &WeightFunction) -> Result<f64> {
    let mut acc = 0.0;
    let mut err = None;
    for_each_union(a, b, |y, p, q| {
        if p == q || err.is_some() {
            return;
        }
        match w.eval(y) {
            Ok(wy) => acc += wy * (p - q).abs(),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

/// A transition kernel on the non-negative integers given by a row oracle.
pub trait CountableKernel: Send + Sync {
    /// Finitely supported row `P(x, .)`. Must be deterministic.
    fn row(&self, x: StateIndex) -> Vec<(StateIndex, f64)>;

    /// Largest column reachable in one step from `x`, if known.
    fn support_bound(&self, _x: StateIndex) -> Option<StateIndex> {
        None
    }
}

/// Kernel backed by a closure.
pub struct FnKernel<F> {
    row_fn: F,
}

impl<F> FnKernel<F>
where
    F: Fn(StateIndex) -> Vec<(StateIndex, f64)> + Send + Sync,
{
    pub fn new(row_fn: F) -> Self {
        Self { row_fn }
    }
}

impl<F> CountableKernel for FnKernel<F>
where
    F: Fn(StateIndex) -> Vec<(StateIndex, f64)> + Send + Sync,
{
    fn row(&self, x: StateIndex) -> Vec<(StateIndex, f64)> {
        (self.row_fn)(x)
    }
}

/// Weight `w >= 1` defining the weighted total variation norm.
#[derive(Clone)]
pub struct WeightFunction {
    name: String,
    w: Arc<dyn Fn(StateIndex) -> f64 + Send + Sync>,
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFunction").field("name", &self.name).finish()
    }
}

impl WeightFunction {
    pub fn new(name: impl Into<String>, w: impl Fn(StateIndex) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), w: Arc::new(w) }
    }

    /// `w = 1`.
    pub fn ones() -> Self {
        Self::new("ones", |_| 1.0)
    }

    /// `w(x) = x + 1`.
    pub fn linear() -> Self {
        Self::new("linear", |x| x as f64 + 1.0)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Evaluates `w(x)`, rejecting values below 1 or non-finite.
    pub fn eval(&self, x: StateIndex) -> Result<f64> {
        let v = (self.w)(x);
        if !(v >= 1.0) || !v.is_finite() {
            return Err(Error::Precondition(format!("weight {} gives {v} at state {x}; need w >= 1", self.name)));
        }
        Ok(v)
    }
}
