//! Plain-text formats for matrices, rate matrices and distributions.
//!
//! ```text
//! mc-matrix v1 N=3        mc-rates v1 N=2
//! 0 1 0.5                 0 0 -1
//! 0 0 0.5                 0 1 1
//! 1 2 1                   1 0 1
//! 2 2 1                   1 1 -1
//! ```
//!
//! Distributions are bare `state mass` lines. Blank lines and lines starting
//! with `#` are ignored everywhere. Numbers are written with the shortest
//! decimal that round-trips.

use std::fmt::Write as _;

use crate::chain::{ProbDist, StateIndex, StochasticMatrix};
use crate::error::{Error, Result};
use crate::jump::RateMatrix;

const MATRIX_MAGIC: &str = "mc-matrix";
const RATES_MAGIC: &str = "mc-rates";

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_header(line: usize, text: &str, magic: &str) -> Result<usize> {
    let mut parts = text.split_whitespace();
    let err = |msg: &str| Error::Parse { line, msg: msg.to_string() };
    if parts.next() != Some(magic) {
        return Err(err(&format!("expected `{magic}` header")));
    }
    if parts.next() != Some("v1") {
        return Err(err("unsupported version"));
    }
    let dim = parts
        .next()
        .and_then(|p| p.strip_prefix("N="))
        .and_then(|n| n.parse::<usize>().ok())
        .ok_or_else(|| err("expected N=<dim>"))?;
    if parts.next().is_some() {
        return Err(err("trailing tokens in header"));
    }
    Ok(dim)
}

fn parse_triplets(text: &str, magic: &str) -> Result<(usize, Vec<Vec<(StateIndex, f64)>>)> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
    let dim = parse_header(hl, header, magic)?;
    let mut rows = vec![Vec::new(); dim];
    for (line, l) in lines {
        let err = |msg: String| Error::Parse { line, msg };
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(err(format!("expected `row col value`, got {} tokens", toks.len())));
        }
        let r: usize = toks[0].parse().map_err(|_| err(format!("bad row `{}`", toks[0])))?;
        let c: usize = toks[1].parse().map_err(|_| err(format!("bad column `{}`", toks[1])))?;
        let v: f64 = toks[2].parse().map_err(|_| err(format!("bad value `{}`", toks[2])))?;
        if r >= dim || c >= dim {
            return Err(err(format!("index ({r}, {c}) outside N={dim}")));
        }
        rows[r].push((c, v));
    }
    Ok((dim, rows))
}

pub fn read_matrix(text: &str) -> Result<StochasticMatrix> {
    let (dim, rows) = parse_triplets(text, MATRIX_MAGIC)?;
    StochasticMatrix::from_rows(dim, rows)
}

pub fn write_matrix(m: &StochasticMatrix) -> String {
    let mut out = format!("{MATRIX_MAGIC} v1 N={}\n", m.dim());
    for (x, row) in m.rows().iter().enumerate() {
        for &(y, p) in row {
            writeln!(out, "{x} {y} {p}").unwrap();
        }
    }
    out
}

pub fn read_rates(text: &str) -> Result<RateMatrix> {
    let (dim, rows) = parse_triplets(text, RATES_MAGIC)?;
    RateMatrix::from_rows(dim, rows)
}

pub fn write_rates(q: &RateMatrix) -> String {
    let mut out = format!("{RATES_MAGIC} v1 N={}\n", q.dim());
    for (x, row) in q.rows().iter().enumerate() {
        for &(y, r) in row {
            writeln!(out, "{x} {y} {r}").unwrap();
        }
    }
    out
}

pub fn read_dist(text: &str) -> Result<ProbDist> {
    let mut pairs = Vec::new();
    for (line, l) in content_lines(text) {
        let err = |msg: String| Error::Parse { line, msg };
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(err("expected `state mass`".into()));
        }
        let s: usize = toks[0].parse().map_err(|_| err(format!("bad state `{}`", toks[0])))?;
        let m: f64 = toks[1].parse().map_err(|_| err(format!("bad mass `{}`", toks[1])))?;
        pairs.push((s, m));
    }
    ProbDist::new(pairs)
}

pub fn write_dist(d: &ProbDist) -> String {
    let mut out = String::new();
    for (s, m) in d.iter() {
        writeln!(out, "{s} {m}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_non_contiguous_rows() {
        let text = "mc-matrix v1 N=2\n# comment\n1 0 1\n0 1 0.25\n\n0 0 0.75\n";
        let m = read_matrix(text).unwrap();
        assert_eq!(m.row(0), &[(0, 0.75), (1, 0.25)]);
        assert_eq!(m.row(1), &[(0, 1.0)]);
    }

    #[test]
    fn rejects_bad_header_and_ranges() {
        assert!(matches!(read_matrix("mc-matrix v2 N=2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_matrix("mc-matrix v1 N=1\n0 1 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_matrix("mc-matrix v1 N=1\n0 0 0.5\n"), Err(Error::InvalidMatrix(_))));
    }

    #[test]
    fn rates_round_trip() {
        let q = RateMatrix::from_dense(&[vec![-2.0, 2.0], vec![1.0, -1.0]]).unwrap();
        assert_eq!(read_rates(&write_rates(&q)).unwrap(), q);
    }

    proptest! {
        #[test]
        fn matrix_and_dist_round_trip(weights in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 4), 4)) {
            let rows: Vec<Vec<(usize, f64)>> = weights
                .iter()
                .map(|w| {
                    let s: f64 = w.iter().sum::<f64>() + 1.0;
                    let mut r: Vec<(usize, f64)> = w.iter().map(|v| v / s).enumerate().collect();
                    r[0].1 += 1.0 / s;
                    r
                })
                .collect();
            let m = StochasticMatrix::from_rows(4, rows).unwrap();
            prop_assert_eq!(read_matrix(&write_matrix(&m)).unwrap(), m.clone());
            let d = crate::chain::marginal(&m, 0, 3).unwrap();
            prop_assert_eq!(read_dist(&write_dist(&d)).unwrap(), d);
        }
    }
}
