use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chaintrunc::examples::{
    counterexample_report, ifs_backward, ifs_coupled_gap, lindley_coupled_sup_distance, AffineLaw, IfsSpec, LindleySpec,
};
use chaintrunc::jump::{ctmc_certified_uniform_bound, transient};
use chaintrunc::{
    certified_uniform_bound, ctmc_stationary, default_threshold, extend_absorbing, gth, io, linear_solve_fte,
    minimal_solution, power_iteration, regenerative_ratio, stationarity_residual, sup_tv_horizon, truncate,
    tv_distance, weighted_uniform_bound, FteOptions, RewardSpec, StochasticMatrix, TruncationScheme, WeightFunction,
};
use rayon::prelude::*;

use crate::cli::{FteMethodChoice, RewardChoice, StationaryMethod};
use crate::error::{CliError, Context};
use crate::experiment::{
    ChainSource, Counterexample, Ctmc, Experiment, ExperimentConfig, Fte, Ifs, Interchange, Lindley, Stationary,
    TruncateSweep,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Agreement tolerance between FTE methods.
const AGREE_TOL: f64 = 1e-8;

/// Shortest round-trip scientific notation.
fn num(v: f64) -> String {
    format!("{v:e}")
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(cfg: &ExperimentConfig, header: &str) -> Self {
        let mut text = format!("# chaintrunc {VERSION} {}", cfg.name());
        for (k, v) in cfg.settings() {
            write!(text, " {k}={v}").unwrap();
        }
        text.push('\n');
        text.push_str(header);
        text.push('\n');
        Self { text }
    }

    fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

/// Runs the experiment and returns the files written, in order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(&cfg.out).map_err(|source| CliError::Io { path: cfg.out.clone(), source })?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cfg.threads {
        pool = pool.num_threads(k);
    }
    let pool = pool.build().map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    pool.install(|| match &cfg.experiment {
        Experiment::TruncateSweep(e) => truncate_sweep(cfg, e),
        Experiment::Stationary(e) => stationary(cfg, e),
        Experiment::Interchange(e) => interchange(cfg, e),
        Experiment::Fte(e) => fte(cfg, e),
        Experiment::Ctmc(e) => ctmc(cfg, e),
        Experiment::Counterexample(e) => counterexample(cfg, e),
        Experiment::Lindley(e) => lindley(cfg, e),
        Experiment::Ifs(e) => ifs(cfg, e),
    })
}

fn finish(cfg: &ExperimentConfig, csv: Csv, mut extra: Vec<PathBuf>) -> Result<Vec<PathBuf>, CliError> {
    let path = cfg.out.join(format!("{}.csv", cfg.name()));
    write_file(&path, &csv.text)?;
    extra.insert(0, path);
    Ok(extra)
}

fn truncate_sweep(cfg: &ExperimentConfig, e: &TruncateSweep) -> Result<Vec<PathBuf>, CliError> {
    let chains = e
        .n_list
        .0
        .par_iter()
        .map(|&n| truncate(&e.kernel.kernel, n, e.scheme).op("truncate"))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = Csv::new(cfg, "n,scheme,max_lost_mass");
    let mut files = Vec::new();
    for c in &chains {
        csv.row(&[c.n.to_string(), c.scheme.to_string(), num(c.max_lost_mass())]);
        let path = cfg.out.join(format!("truncated_n{}.mc", c.n));
        write_file(&path, &io::write_matrix(&c.matrix))?;
        files.push(path);
        eprintln!("n = {:>6}  max lost mass {:e}", c.n, c.max_lost_mass());
    }
    finish(cfg, csv, files)
}

fn stationary(cfg: &ExperimentConfig, e: &Stationary) -> Result<Vec<PathBuf>, CliError> {
    let m = io::read_matrix(&read_file(&e.matrix_file)?).op("read matrix")?;
    let pi = match e.method {
        StationaryMethod::Gth => gth(&m).op("gth")?,
        StationaryMethod::Power | StationaryMethod::Cesaro => {
            let r = power_iteration(&m, e.x, e.tol.value, e.max_steps, e.method == StationaryMethod::Cesaro)
                .op("power_iteration")?;
            eprintln!("converged after {} steps (gap {:e})", r.steps, r.gap);
            r.dist
        }
    };
    let residual = stationarity_residual(&m, &pi).op("stationarity_residual")?;
    eprintln!("residual |pi M - pi| = {residual:e}");
    let path = cfg.out.join("stationary.dist");
    let mut text = String::new();
    write!(text, "# chaintrunc {VERSION} stationary").unwrap();
    for (k, v) in cfg.settings() {
        write!(text, " {k}={v}").unwrap();
    }
    text.push('\n');
    text.push_str(&io::write_dist(&pi));
    write_file(&path, &text)?;
    Ok(vec![path])
}

struct InterchangeRow {
    n: usize,
    m_argmax: usize,
    sup_tv: f64,
    bound: chaintrunc::UniformBoundReport,
    weighted: Option<chaintrunc::WeightedBound>,
}

fn interchange(cfg: &ExperimentConfig, e: &Interchange) -> Result<Vec<PathBuf>, CliError> {
    let reference = truncate(&e.kernel.kernel, e.n_ref, e.scheme).op("truncate")?.matrix;
    let pi_ref = gth(&reference).op("gth")?;
    let z = match e.scheme {
        TruncationScheme::Redirect(z) => z,
        _ => 0,
    };
    let w = WeightFunction::linear();
    let rows = e
        .n_list
        .0
        .par_iter()
        .map(|&n| -> Result<InterchangeRow, CliError> {
            let a = truncate(&e.kernel.kernel, n, e.scheme).op("truncate")?.matrix;
            let pi_a = gth(&a).op("gth")?;
            let padded = extend_absorbing(&a, e.n_ref, z).op("extend_absorbing")?;
            let sup = sup_tv_horizon(&padded, &reference, e.x, e.horizon).op("sup_tv_horizon")?;
            let bound = certified_uniform_bound(&a, &reference, &pi_a, &pi_ref, e.x, e.horizon)
                .op("certified_uniform_bound")?;
            let weighted = match e.weight {
                crate::specs::WeightSpec::None => None,
                crate::specs::WeightSpec::Linear => {
                    let b = match &e.threshold_b {
                        Some(b) => b.value,
                        None => default_threshold(&pi_a, &pi_ref, e.x, bound.total, &w).op("default_threshold")?,
                    };
                    Some(
                        weighted_uniform_bound(&a, &reference, &pi_a, &pi_ref, e.x, e.horizon, &w, b)
                            .op("weighted_uniform_bound")?,
                    )
                }
            };
            Ok(InterchangeRow { n, m_argmax: sup.argmax, sup_tv: sup.max, bound, weighted })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut header = "n,m_argmax,sup_tv,bound_total,bound_transient,bound_stationary,bound_mixing".to_string();
    if e.weight != crate::specs::WeightSpec::None {
        header.push_str(",weighted_bound,threshold_b");
    }
    let mut csv = Csv::new(cfg, &header);
    for r in &rows {
        let mut cells = vec![
            r.n.to_string(),
            r.m_argmax.to_string(),
            num(r.sup_tv),
            num(r.bound.total),
            num(r.bound.term_transient),
            num(r.bound.term_stationary),
            num(r.bound.term_mixing),
        ];
        if let Some(wb) = &r.weighted {
            cells.push(num(wb.bound));
            cells.push(num(wb.threshold));
        }
        csv.row(&cells);
        eprintln!("n = {:>6}  sup TV {:e} at m = {}  bound {:e}", r.n, r.sup_tv, r.m_argmax, r.bound.total);
    }
    finish(cfg, csv, Vec::new())
}

fn read_reward_file(path: &Path, dim: usize) -> Result<Vec<f64>, CliError> {
    let text = read_file(path)?;
    let mut r = vec![0.0; dim];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || CliError::config(format!("{}:{}: expected `state value`", path.display(), i + 1));
        let mut it = line.split_whitespace();
        let (s, v) = (it.next().ok_or_else(bad)?, it.next().ok_or_else(bad)?);
        if it.next().is_some() {
            return Err(bad());
        }
        let s: usize = s.parse().map_err(|_| bad())?;
        let v: f64 = v.parse().map_err(|_| bad())?;
        if s >= dim {
            return Err(CliError::config(format!("{}:{}: state {s} out of range", path.display(), i + 1)));
        }
        r[s] = v;
    }
    Ok(r)
}

fn fte_matrix(source: &ChainSource) -> Result<StochasticMatrix, CliError> {
    match source {
        ChainSource::Kernel { kernel, n, scheme } => Ok(truncate(&kernel.kernel, *n, *scheme).op("truncate")?.matrix),
        ChainSource::File(p) => io::read_matrix(&read_file(p)?).op("read matrix"),
    }
}

fn fte(cfg: &ExperimentConfig, e: &Fte) -> Result<Vec<PathBuf>, CliError> {
    let m = fte_matrix(&e.source)?;
    let dim = m.dim();
    let mut target = vec![false; dim];
    for &t in &e.target_set.0 {
        if t >= dim {
            return Err(CliError::config(format!("target state {t} out of range for dimension {dim}")));
        }
        target[t] = true;
    }
    let reward: Vec<f64> = match &e.reward {
        RewardChoice::Indicator => target.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect(),
        RewardChoice::Time => target.iter().map(|&t| if t { 0.0 } else { 1.0 }).collect(),
        RewardChoice::Ones => vec![1.0; dim],
        RewardChoice::File(p) => read_reward_file(p, dim)?,
    };
    let spec = RewardSpec::new(target.iter().map(|&t| !t).collect(), reward, vec![e.alpha.value; dim]).op("reward")?;
    let states: Vec<usize> = match &e.x {
        Some(l) => l.0.clone(),
        None => (0..dim).filter(|&y| !target[y]).collect(),
    };
    if let Some(&y) = states.iter().find(|&&y| y >= dim || target[y]) {
        return Err(CliError::config(format!("report state {y} must be in range and off the target set")));
    }
    let opts = FteOptions::default();
    let want = |m: FteMethodChoice| e.method == m || e.method == FteMethodChoice::All;
    let vi =
        if want(FteMethodChoice::Vi) { Some(minimal_solution(&m, &spec, opts).op("minimal_solution")?) } else { None };
    let lin =
        if want(FteMethodChoice::Linear) { Some(linear_solve_fte(&m, &spec).op("linear_solve_fte")?) } else { None };
    let ratios: Option<Vec<f64>> = if want(FteMethodChoice::Ratio) {
        Some(
            states
                .par_iter()
                .map(|&y| regenerative_ratio(&m, &spec, y, opts).op("regenerative_ratio"))
                .collect::<Result<_, _>>()?,
        )
    } else {
        None
    };
    let mut csv = Csv::new(cfg, "x,u_vi,u_linear,u_ratio,agree");
    for (i, &y) in states.iter().enumerate() {
        let vals = [vi.as_ref().map(|s| s.u[y]), lin.as_ref().map(|s| s.u[y]), ratios.as_ref().map(|r| r[i])];
        let present: Vec<f64> = vals.iter().flatten().copied().collect();
        let agree =
            present.iter().all(|a| present.iter().all(|b| (a.is_infinite() && a == b) || (a - b).abs() <= AGREE_TOL));
        let cell = |v: Option<f64>| v.map_or(String::new(), num);
        csv.row(&[y.to_string(), cell(vals[0]), cell(vals[1]), cell(vals[2]), agree.to_string()]);
    }
    eprintln!("{} states reported", states.len());
    finish(cfg, csv, Vec::new())
}

struct CtmcRow {
    n: usize,
    report: chaintrunc::jump::CtmcBoundReport,
    empirical_sup: f64,
}

fn ctmc(cfg: &ExperimentConfig, e: &Ctmc) -> Result<Vec<PathBuf>, CliError> {
    let ref_family = e.reference.as_ref().unwrap_or(&e.generator);
    let q_ref = ref_family.generator(e.n_ref).op("reference generator")?;
    let pi_ref = ctmc_stationary(&q_ref).op("ctmc_stationary")?;
    let t = (e.time_horizon.value / e.step.value).ceil() as usize;
    let grid_points = (e.time_horizon.value / e.grid.value + 1e-9).floor() as usize;
    let sizes: Vec<usize> =
        if e.generator.is_sized() { e.n_list.0.clone() } else { vec![e.generator.generator(2).op("generator")?.dim()] };
    let rows = sizes
        .par_iter()
        .map(|&n| -> Result<CtmcRow, CliError> {
            let q = e.generator.generator(n).op("generator")?;
            let pi = ctmc_stationary(&q).op("ctmc_stationary")?;
            let report = ctmc_certified_uniform_bound(&q, &q_ref, &pi, &pi_ref, e.x, t, e.eps.value, e.step.value)
                .op("ctmc_certified_uniform_bound")?;
            let mut empirical_sup = 0.0f64;
            for k in 0..=grid_points {
                let time = k as f64 * e.grid.value;
                let a = transient(&q, e.x, time, e.eps.value).op("transient")?;
                let b = transient(&q_ref, e.x, time, e.eps.value).op("transient")?;
                empirical_sup = empirical_sup.max(tv_distance(&a, &b));
            }
            Ok(CtmcRow { n: q.dim(), report, empirical_sup })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv =
        Csv::new(cfg, "n,bound_total,bound_transient,bound_stationary,bound_mixing,truncation_slack,empirical_sup");
    for r in &rows {
        let s = &r.report.skeleton;
        csv.row(&[
            r.n.to_string(),
            num(r.report.total_with_slack()),
            num(s.term_transient),
            num(s.term_stationary),
            num(s.term_mixing),
            num(r.report.truncation_slack),
            num(r.empirical_sup),
        ]);
        eprintln!("n = {:>6}  bound {:e}  empirical sup {:e}", r.n, r.report.total_with_slack(), r.empirical_sup);
    }
    finish(cfg, csv, Vec::new())
}

fn counterexample(cfg: &ExperimentConfig, e: &Counterexample) -> Result<Vec<PathBuf>, CliError> {
    let mut csv = Csv::new(cfg, "n,m_hit,probe_mass_at_1,w1_pi_to_delta0");
    for &n in &e.n_list.0 {
        let r = counterexample_report(n, e.x.value).op("counterexample_report")?;
        csv.row(&[n.to_string(), r.hit_steps.to_string(), num(r.probe_mass_at_1), num(r.w1_pi_to_delta0)]);
    }
    finish(cfg, csv, Vec::new())
}

fn lindley(cfg: &ExperimentConfig, e: &Lindley) -> Result<Vec<PathBuf>, CliError> {
    let limit = LindleySpec::new(e.drift_family.law);
    let rows = e
        .n_list
        .0
        .par_iter()
        .map(|&n| {
            let member = LindleySpec::new(e.drift_family.member(n));
            lindley_coupled_sup_distance(&member, &limit, e.x.value, e.horizon, e.samples, cfg.seed)
                .op("lindley_coupled_sup_distance")
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = Csv::new(cfg, "n,m_argmax,sup_coupling_estimate,stderr");
    for (&n, r) in e.n_list.0.iter().zip(&rows) {
        csv.row(&[n.to_string(), r.argmax.to_string(), num(r.sup), num(r.stderr)]);
        eprintln!("n = {n:>6}  coupling estimate {:e} +- {:e}", r.sup, r.stderr);
    }
    finish(cfg, csv, Vec::new())
}

fn ifs(cfg: &ExperimentConfig, e: &Ifs) -> Result<Vec<PathBuf>, CliError> {
    let spec = IfsSpec::new(AffineLaw { a: e.a_law.law, b: e.b_law.law }).op("ifs")?;
    let rows = e
        .k_list
        .0
        .par_iter()
        .map(|&k| -> Result<_, CliError> {
            let s = ifs_backward(&spec, k, e.x.value, e.samples, cfg.seed).op("ifs_backward")?;
            let g = ifs_coupled_gap(&spec, k, e.k_ref, e.x.value, e.samples, cfg.seed).op("ifs_coupled_gap")?;
            let mean = s.values.iter().sum::<f64>() / s.values.len() as f64;
            Ok((k, mean, g))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = Csv::new(cfg, "k,mean_beta,tail_bound,gap_mean,gap_stderr,within_bound");
    for (k, mean, g) in &rows {
        let within = g.mean <= g.tail_bound + 3.0 * g.stderr;
        csv.row(&[k.to_string(), num(*mean), num(g.tail_bound), num(g.mean), num(g.stderr), within.to_string()]);
    }
    eprintln!("contraction ratio {}", spec.contraction);
    finish(cfg, csv, Vec::new())
}
