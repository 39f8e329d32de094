//! Finite prefix truncations `{0, ..., n-1}` of a countable kernel, with a
//! choice of where the escaping mass goes.

use std::fmt;
use std::str::FromStr;

use crate::chain::{validate_stochastic, CountableKernel, ProbDist, StateIndex, StochasticMatrix, MASS_TOL};
use crate::error::{Error, Result};

/// Where mass that leaves the truncation set is sent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationScheme {
    /// All escaping mass goes to a fixed state `z < n`.
    Redirect(StateIndex),
    /// Retained entries are rescaled to sum to one.
    Proportional,
    /// Escaping mass stays at the current state.
    SelfLoop,
}

impl fmt::Display for TruncationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Redirect(z) => write!(f, "redirect:{z}"),
            Self::Proportional => f.write_str("proportional"),
            Self::SelfLoop => f.write_str("self-loop"),
        }
    }
}

impl FromStr for TruncationScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proportional" => Ok(Self::Proportional),
            "self-loop" | "self_loop" => Ok(Self::SelfLoop),
            "redirect" => Ok(Self::Redirect(0)),
            _ => s
                .strip_prefix("redirect:")
                .and_then(|z| z.parse().ok())
                .map(Self::Redirect)
                .ok_or_else(|| Error::Precondition(format!("unknown truncation scheme `{s}`"))),
        }
    }
}

/// A truncated chain together with the per-row mass that escaped the prefix.
#[derive(Debug, Clone)]
pub struct TruncatedChain {
    pub n: usize,
    pub matrix: StochasticMatrix,
    pub scheme: TruncationScheme,
    pub lost_mass: Vec<f64>,
}

impl TruncatedChain {
    pub fn max_lost_mass(&self) -> f64 {
        self.lost_mass.iter().copied().fold(0.0, f64::max)
    }
}

/// Restricts `kernel` to `{0, ..., n-1}` and reassigns escaping mass per `scheme`.
pub fn truncate(kernel: &dyn CountableKernel, n: usize, scheme: TruncationScheme) -> Result<TruncatedChain> {
    if n == 0 {
        return Err(Error::Precondition("truncation size must be at least 1".into()));
    }
    if let TruncationScheme::Redirect(z) = scheme {
        if z >= n {
            return Err(Error::Precondition(format!("redirect target {z} not below n = {n}")));
        }
    }
    let mut rows = Vec::with_capacity(n);
    let mut lost_mass = Vec::with_capacity(n);
    for x in 0..n {
        let mut row: Vec<(StateIndex, f64)> = kernel.row(x).into_iter().filter(|&(y, _)| y < n).collect();
        let kept: f64 = row.iter().map(|&(_, p)| p).sum();
        let lost = (1.0 - kept).clamp(0.0, 1.0);
        // Rounding in the kernel row must not register as escaping mass.
        let lost = if lost <= MASS_TOL { 0.0 } else { lost };
        if lost > 0.0 {
            match scheme {
                TruncationScheme::Redirect(z) => row.push((z, lost)),
                TruncationScheme::SelfLoop => row.push((x, lost)),
                TruncationScheme::Proportional => {
                    if kept <= 0.0 {
                        return Err(Error::DegenerateRow { row: x });
                    }
                    row.iter_mut().for_each(|e| e.1 /= kept);
                }
            }
        }
        rows.push(row);
        lost_mass.push(lost);
    }
    let matrix = StochasticMatrix::from_rows(n, rows)?;
    debug_assert!(validate_stochastic(&matrix, MASS_TOL).is_empty());
    Ok(TruncatedChain { n, matrix, scheme, lost_mass })
}

/// Reads a distribution on `{0, ..., n-1}` as a distribution on the ambient
/// space with zero mass outside the prefix. Stored data is unchanged.
pub fn embed(d: &ProbDist, _ambient_dim: usize) -> ProbDist {
    d.clone()
}

/// Extends an `n`-state matrix to `ambient_dim` states by sending every
/// state outside the prefix to `z` in one step, so the prefix is absorbing.
pub fn extend_absorbing(m: &StochasticMatrix, ambient_dim: usize, z: StateIndex) -> Result<StochasticMatrix> {
    let n = m.dim();
    if ambient_dim < n {
        return Err(Error::DimensionMismatch { left: n, right: ambient_dim });
    }
    if z >= n {
        return Err(Error::Dimension { index: z, dim: n });
    }
    let mut rows: Vec<Vec<(StateIndex, f64)>> = m.rows().to_vec();
    rows.extend((n..ambient_dim).map(|_| vec![(z, 1.0)]));
    StochasticMatrix::from_rows(ambient_dim, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::FnKernel;
    use crate::examples::birth_death_kernel;

    #[test]
    fn redirect_sends_overflow_to_target() {
        let k = birth_death_kernel(1.0 / 3.0).unwrap();
        let t = truncate(&k, 3, TruncationScheme::Redirect(0)).unwrap();
        let row2 = t.matrix.row(2);
        assert_eq!(row2.len(), 2);
        assert_eq!(row2[0].0, 0);
        assert!((row2[0].1 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(row2[1].0, 1);
        assert!((row2[1].1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((t.lost_mass[2] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(t.lost_mass[0], 0.0);
    }

    #[test]
    fn proportional_rescales_retained_entries() {
        let k = birth_death_kernel(1.0 / 3.0).unwrap();
        let t = truncate(&k, 3, TruncationScheme::Proportional).unwrap();
        assert_eq!(t.matrix.row(2).len(), 1);
        assert_eq!(t.matrix.row(2)[0].0, 1);
        assert!((t.matrix.row(2)[0].1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn self_loop_keeps_overflow_in_place() {
        let k = birth_death_kernel(0.25).unwrap();
        let t = truncate(&k, 4, TruncationScheme::SelfLoop).unwrap();
        assert!((t.matrix.entry(3, 3) - 0.25).abs() < 1e-15);
        assert!((t.matrix.entry(3, 2) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn closed_prefix_is_scheme_independent() {
        let k = FnKernel::new(|x| if x < 2 { vec![(0, 0.5), (1, 0.5)] } else { vec![(x + 1, 1.0)] });
        let a = truncate(&k, 2, TruncationScheme::Redirect(1)).unwrap();
        let b = truncate(&k, 2, TruncationScheme::Proportional).unwrap();
        let c = truncate(&k, 2, TruncationScheme::SelfLoop).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(b.matrix, c.matrix);
        assert!(a.lost_mass.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn proportional_fails_on_fully_escaping_row() {
        let k = FnKernel::new(|x| vec![(x + 1, 1.0)]);
        assert_eq!(truncate(&k, 3, TruncationScheme::Proportional).unwrap_err(), Error::DegenerateRow { row: 2 });
    }

    #[test]
    fn redirect_target_must_be_inside() {
        let k = birth_death_kernel(0.3).unwrap();
        assert!(truncate(&k, 3, TruncationScheme::Redirect(3)).is_err());
        assert!(truncate(&k, 0, TruncationScheme::SelfLoop).is_err());
    }

    #[test]
    fn scheme_parses() {
        assert_eq!("redirect:4".parse::<TruncationScheme>().unwrap(), TruncationScheme::Redirect(4));
        assert_eq!("self-loop".parse::<TruncationScheme>().unwrap(), TruncationScheme::SelfLoop);
        assert!("bogus".parse::<TruncationScheme>().is_err());
    }

    #[test]
    fn extension_makes_prefix_absorbing() {
        let k = birth_death_kernel(0.3).unwrap();
        let t = truncate(&k, 3, TruncationScheme::Redirect(0)).unwrap();
        let big = extend_absorbing(&t.matrix, 6, 0).unwrap();
        assert_eq!(big.row(5), &[(0, 1.0)]);
        assert_eq!(big.row(1), t.matrix.row(1));
    }

    #[test]
    fn embed_keeps_masses() {
        let d = ProbDist::uniform(&[0, 1]).unwrap();
        let e = embed(&d, 100);
        assert_eq!(crate::chain::tv_distance(&d, &e), 0.0);
    }
}
