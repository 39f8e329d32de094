use crate::error::{Error, Result};

/// Finitely many atoms on the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    /// Sorted by location, locations distinct, masses positive.
    atoms: Vec<(f64, f64)>,
}

impl AtomicMeasure {
    /// Merges atoms at equal locations; masses must sum to 1 within 1e-12.
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.iter().any(|&(l, m)| !l.is_finite() || !(m >= 0.0)) {
            return Err(Error::InvalidDistribution("non-finite location or negative mass".into()));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (l, m) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == l => last.1 += m,
                _ => merged.push((l, m)),
            }
        }
        merged.retain(|&(_, m)| m > 0.0);
        let total: f64 = merged.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("total mass {total}")));
        }
        Ok(Self { atoms: merged })
    }

    pub fn point(x: f64) -> Self {
        Self { atoms: vec![(x, 1.0)] }
    }

    /// Equal-weight empirical measure.
    pub fn empirical(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidDistribution("no samples".into()));
        }
        let w = 1.0 / samples.len() as f64;
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        let mut count = 0usize;
        for (i, &s) in sorted.iter().enumerate() {
            count += 1;
            if i + 1 == sorted.len() || sorted[i + 1] != s {
                atoms.push((s, count as f64 * w));
                count = 0;
            }
        }
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mass_at(&self, loc: f64) -> f64 {
        self.atoms.iter().find(|a| a.0 == loc).map_or(0.0, |a| a.1)
    }

    /// Mass strictly above `level`.
    pub fn mass_above(&self, level: f64) -> f64 {
        self.atoms.iter().filter(|a| a.0 > level).map(|a| a.1).sum()
    }

    /// Pushes each atom through `step` and merges the results.
    pub fn push_forward(&self, step: impl Fn(f64) -> AtomicMeasure) -> Self {
        let mut out = Vec::new();
        for &(l, m) in &self.atoms {
            out.extend(step(l).atoms.iter().map(|&(l2, m2)| (l2, m * m2)));
        }
        // Products of exact masses may drift by an ulp; renormalize.
        let total: f64 = out.iter().map(|a| a.1).sum();
        out.iter_mut().for_each(|a| a.1 /= total);
        Self::new(out).expect("push-forward of a probability measure")
    }

    /// Joint sorted locations with both cumulative distribution functions.
    fn joint_cdfs<'a>(&'a self, other: &'a Self) -> Vec<(f64, f64, f64)> {
        let mut locs: Vec<f64> = self.atoms.iter().chain(&other.atoms).map(|a| a.0).collect();
        locs.sort_by(f64::total_cmp);
        locs.dedup();
        let (mut fa, mut fb) = (0.0, 0.0);
        let (mut i, mut j) = (0, 0);
        locs.into_iter()
            .map(|l| {
                while i < self.atoms.len() && self.atoms[i].0 <= l {
                    fa += self.atoms[i].1;
                    i += 1;
                }
                while j < other.atoms.len() && other.atoms[j].0 <= l {
                    fb += other.atoms[j].1;
                    j += 1;
                }
                (l, fa, fb)
            })
            .collect()
    }

    /// Wasserstein-1 distance, `int |F_a - F_b| dx`.
    pub fn wasserstein1(&self, other: &Self) -> f64 {
        let pts = self.joint_cdfs(other);
        pts.windows(2).map(|w| (w[0].1 - w[0].2).abs() * (w[1].0 - w[0].0)).sum()
    }

    /// Kolmogorov distance, `sup |F_a - F_b|`.
    pub fn kolmogorov(&self, other: &Self) -> f64 {
        self.joint_cdfs(other).iter().map(|p| (p.1 - p.2).abs()).fold(0.0, f64::max)
    }

    /// Total variation, L1 convention.
    pub fn tv(&self, other: &Self) -> f64 {
        let mut locs: Vec<f64> = self.atoms.iter().chain(&other.atoms).map(|a| a.0).collect();
        locs.sort_by(f64::total_cmp);
        locs.dedup();
        locs.iter().map(|&l| (self.mass_at(l) - other.mass_at(l)).abs()).sum()
    }
}
