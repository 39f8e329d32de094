//! Resolved experiment settings: command-line flags merged over the config
//! file and built-in defaults, validated before anything runs.

use std::path::PathBuf;

use chaintrunc::TruncationScheme;

use crate::cli::{Cli, Command, FteMethodChoice, RewardChoice, StationaryMethod};
use crate::config::{ConfigFile, List, Real};
use crate::error::CliError;
use crate::specs::{DriftFamily, GeneratorSpec, KernelSpec, ScalarSpec, WeightSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub out: PathBuf,
    /// Pool size for sweeps; does not affect output.
    pub threads: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    TruncateSweep(TruncateSweep),
    Stationary(Stationary),
    Interchange(Interchange),
    Fte(Fte),
    Ctmc(Ctmc),
    Counterexample(Counterexample),
    Lindley(Lindley),
    Ifs(Ifs),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncateSweep {
    pub kernel: KernelSpec,
    pub n_list: List<usize>,
    pub scheme: TruncationScheme,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stationary {
    pub matrix_file: PathBuf,
    pub method: StationaryMethod,
    pub tol: Real,
    pub max_steps: usize,
    pub x: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interchange {
    pub kernel: KernelSpec,
    pub n_list: List<usize>,
    pub n_ref: usize,
    pub x: usize,
    pub horizon: usize,
    pub scheme: TruncationScheme,
    pub weight: WeightSpec,
    pub threshold_b: Option<Real>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChainSource {
    Kernel { kernel: KernelSpec, n: usize, scheme: TruncationScheme },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fte {
    pub source: ChainSource,
    pub target_set: List<usize>,
    pub alpha: Real,
    pub reward: RewardChoice,
    pub x: Option<List<usize>>,
    pub method: FteMethodChoice,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ctmc {
    pub generator: GeneratorSpec,
    pub reference: Option<GeneratorSpec>,
    pub n_list: List<usize>,
    pub n_ref: usize,
    pub x: usize,
    pub time_horizon: Real,
    pub step: Real,
    pub eps: Real,
    pub grid: Real,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub n_list: List<u32>,
    pub x: Real,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lindley {
    pub drift_family: DriftFamily,
    pub n_list: List<usize>,
    pub horizon: usize,
    pub samples: usize,
    pub x: Real,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ifs {
    pub a_law: ScalarSpec,
    pub b_law: ScalarSpec,
    pub k_list: List<usize>,
    pub k_ref: usize,
    pub x: Real,
    pub samples: usize,
}

/// Default given as literal text, echoed verbatim in output headers.
fn real(text: &str) -> Real {
    text.parse().expect("literal default")
}

fn positive(key: &str, r: &Real) -> Result<(), CliError> {
    if r.value > 0.0 {
        Ok(())
    } else {
        Err(CliError::config(format!("`{key}` must be positive, got {r}")))
    }
}

fn nonempty_sizes(key: &str, l: &List<usize>) -> Result<(), CliError> {
    if l.0.contains(&0) {
        return Err(CliError::config(format!("`{key}` entries must be positive")));
    }
    Ok(())
}

fn check_keys(file: &ConfigFile, known: &[&str]) -> Result<(), CliError> {
    const GLOBAL: [&str; 3] = ["out", "threads", "seed"];
    let unknown: Vec<&str> = file.unknown_keys(known).into_iter().filter(|k| !GLOBAL.contains(k)).collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(CliError::config(format!("unknown config keys for this subcommand: {}", unknown.join(", "))))
    }
}

fn redirect_fits(scheme: TruncationScheme, n: usize) -> Result<(), CliError> {
    match scheme {
        TruncationScheme::Redirect(z) if z >= n => {
            Err(CliError::config(format!("redirect target {z} must be below every truncation size (got n = {n})")))
        }
        _ => Ok(()),
    }
}

impl ExperimentConfig {
    /// Merges flags over the config file (if any) and validates.
    pub fn resolve(cli: Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let out = file.pick_or("out", cli.out, PathBuf::from("."))?;
        let threads = file.pick("threads", cli.threads)?;
        if threads == Some(0) {
            return Err(CliError::config("`threads` must be at least 1"));
        }
        let seed = file.pick_or("seed", cli.seed, 0u64)?;
        let redirect0 = TruncationScheme::Redirect(0);
        let experiment = match cli.command {
            Command::TruncateSweep(a) => {
                check_keys(&file, &["kernel", "n-list", "scheme"])?;
                let e = TruncateSweep {
                    kernel: file.require("kernel", a.kernel)?,
                    n_list: file.require("n-list", a.n_list)?,
                    scheme: file.pick_or("scheme", a.scheme, redirect0)?,
                };
                nonempty_sizes("n-list", &e.n_list)?;
                for &n in &e.n_list.0 {
                    redirect_fits(e.scheme, n)?;
                }
                Experiment::TruncateSweep(e)
            }
            Command::Stationary(a) => {
                check_keys(&file, &["matrix-file", "method", "tol", "max-steps", "x"])?;
                let method = match (a.method, file.get("method")) {
                    (Some(m), _) => m,
                    (None, Some(s)) => <StationaryMethod as clap::ValueEnum>::from_str(s, true)
                        .map_err(|e| CliError::config(format!("config key `method`: {e}")))?,
                    (None, None) => StationaryMethod::Gth,
                };
                let e = Stationary {
                    matrix_file: file.require("matrix-file", a.matrix_file)?,
                    method,
                    tol: file.pick_or("tol", a.tol, real("1e-12"))?,
                    max_steps: file.pick_or("max-steps", a.max_steps, 10_000_000)?,
                    x: file.pick_or("x", a.x, 0)?,
                };
                positive("tol", &e.tol)?;
                Experiment::Stationary(e)
            }
            Command::Interchange(a) => {
                check_keys(&file, &["kernel", "n-list", "n-ref", "x", "horizon", "scheme", "weight", "threshold-b"])?;
                let e = Interchange {
                    kernel: file.require("kernel", a.kernel)?,
                    n_list: file.require("n-list", a.n_list)?,
                    n_ref: file.require("n-ref", a.n_ref)?,
                    x: file.pick_or("x", a.x, 0)?,
                    horizon: file.pick_or("horizon", a.horizon, 1000)?,
                    scheme: file.pick_or("scheme", a.scheme, redirect0)?,
                    weight: file.pick_or("weight", a.weight, WeightSpec::None)?,
                    threshold_b: file.pick("threshold-b", a.threshold_b)?,
                };
                nonempty_sizes("n-list", &e.n_list)?;
                let max_n = *e.n_list.0.iter().max().unwrap();
                if e.n_ref <= max_n {
                    return Err(CliError::config(format!("n-ref = {} must exceed max n-list = {max_n}", e.n_ref)));
                }
                let min_n = *e.n_list.0.iter().min().unwrap();
                redirect_fits(e.scheme, min_n)?;
                if e.x >= min_n {
                    return Err(CliError::config(format!("start state {} must lie below every n (min {min_n})", e.x)));
                }
                if let Some(b) = &e.threshold_b {
                    if !(b.value >= 1.0) {
                        return Err(CliError::config(format!("threshold-b must be at least 1, got {b}")));
                    }
                }
                Experiment::Interchange(e)
            }
            Command::Fte(a) => {
                check_keys(
                    &file,
                    &["kernel", "n", "scheme", "matrix-file", "target-set", "alpha", "reward", "x", "method"],
                )?;
                let kernel = file.pick("kernel", a.kernel)?;
                let matrix_file = file.pick("matrix-file", a.matrix_file)?;
                let source = match (kernel, matrix_file) {
                    (Some(kernel), None) => {
                        let n = file.pick_or("n", a.n, 200)?;
                        let scheme = file.pick_or("scheme", a.scheme, redirect0)?;
                        if n == 0 {
                            return Err(CliError::config("`n` must be positive"));
                        }
                        redirect_fits(scheme, n)?;
                        ChainSource::Kernel { kernel, n, scheme }
                    }
                    (None, Some(p)) => ChainSource::File(p),
                    _ => return Err(CliError::config("give exactly one of `kernel` and `matrix-file`")),
                };
                let method = match (a.method, file.get("method")) {
                    (Some(m), _) => m,
                    (None, Some(s)) => <FteMethodChoice as clap::ValueEnum>::from_str(s, true)
                        .map_err(|e| CliError::config(format!("config key `method`: {e}")))?,
                    (None, None) => FteMethodChoice::All,
                };
                let e = Fte {
                    source,
                    target_set: file.require("target-set", a.target_set)?,
                    alpha: file.pick_or("alpha", a.alpha, real("0"))?,
                    reward: file.pick_or("reward", a.reward, RewardChoice::Time)?,
                    x: file.pick("x", a.x)?,
                    method,
                };
                if !(e.alpha.value >= 0.0) {
                    return Err(CliError::config(format!("`alpha` must be non-negative, got {}", e.alpha)));
                }
                Experiment::Fte(e)
            }
            Command::Ctmc(a) => {
                check_keys(
                    &file,
                    &["generator", "reference", "n-list", "n-ref", "x", "time-horizon", "step", "eps", "grid"],
                )?;
                let generator: GeneratorSpec = file.require("generator", a.generator)?;
                let reference: Option<GeneratorSpec> = file.pick("reference", a.reference)?;
                let n_list = file.pick_or("n-list", a.n_list, List(vec![2]))?;
                let sized_ref = reference.as_ref().unwrap_or(&generator).is_sized();
                let n_ref =
                    if sized_ref { file.require("n-ref", a.n_ref)? } else { file.pick_or("n-ref", a.n_ref, 2)? };
                let e = Ctmc {
                    generator,
                    reference,
                    n_list,
                    n_ref,
                    x: file.pick_or("x", a.x, 0)?,
                    time_horizon: file.pick_or("time-horizon", a.time_horizon, real("20"))?,
                    step: file.pick_or("step", a.step, real("1"))?,
                    eps: file.pick_or("eps", a.eps, real("1e-12"))?,
                    grid: file.pick_or("grid", a.grid, real("0.1"))?,
                };
                positive("time-horizon", &e.time_horizon)?;
                positive("step", &e.step)?;
                positive("eps", &e.eps)?;
                positive("grid", &e.grid)?;
                nonempty_sizes("n-list", &e.n_list)?;
                if e.generator.is_sized() && sized_ref {
                    let max_n = *e.n_list.0.iter().max().unwrap();
                    if e.n_ref <= max_n {
                        return Err(CliError::config(format!("n-ref = {} must exceed max n-list = {max_n}", e.n_ref)));
                    }
                }
                Experiment::Ctmc(e)
            }
            Command::Counterexample(a) => {
                check_keys(&file, &["n-list", "x"])?;
                let e = Counterexample {
                    n_list: file.require("n-list", a.n_list)?,
                    x: file.pick_or("x", a.x, real("0.3"))?,
                };
                if !(e.x.value > 0.0 && e.x.value <= 1.0) {
                    return Err(CliError::config(format!("x = {} must lie in (0, 1]", e.x)));
                }
                Experiment::Counterexample(e)
            }
            Command::Lindley(a) => {
                check_keys(&file, &["drift-family", "n-list", "horizon", "samples", "x"])?;
                let e = Lindley {
                    drift_family: file.require("drift-family", a.drift_family)?,
                    n_list: file.require("n-list", a.n_list)?,
                    horizon: file.pick_or("horizon", a.horizon, 200)?,
                    samples: file.pick_or("samples", a.samples, 10_000)?,
                    x: file.pick_or("x", a.x, real("0"))?,
                };
                nonempty_sizes("n-list", &e.n_list)?;
                if e.samples < 100 {
                    return Err(CliError::config(format!("`samples` must be at least 100, got {}", e.samples)));
                }
                if !(e.x.value >= 0.0) {
                    return Err(CliError::config(format!("x = {} must be non-negative", e.x)));
                }
                Experiment::Lindley(e)
            }
            Command::Ifs(a) => {
                check_keys(&file, &["a-law", "b-law", "k-list", "k-ref", "x", "samples"])?;
                let e = Ifs {
                    a_law: file.require("a-law", a.a_law)?,
                    b_law: file.require("b-law", a.b_law)?,
                    k_list: file.require("k-list", a.k_list)?,
                    k_ref: file.pick_or("k-ref", a.k_ref, 60)?,
                    x: file.pick_or("x", a.x, real("0"))?,
                    samples: file.pick_or("samples", a.samples, 10_000)?,
                };
                if let Some(k) = e.k_list.0.iter().find(|&&k| k > e.k_ref) {
                    return Err(CliError::config(format!("depth {k} exceeds k-ref = {}", e.k_ref)));
                }
                if e.samples < 2 {
                    return Err(CliError::config("`samples` must be at least 2"));
                }
                Experiment::Ifs(e)
            }
        };
        Ok(Self { experiment, out, threads, seed })
    }

    pub fn name(&self) -> &'static str {
        match self.experiment {
            Experiment::TruncateSweep(_) => "truncate-sweep",
            Experiment::Stationary(_) => "stationary",
            Experiment::Interchange(_) => "interchange",
            Experiment::Fte(_) => "fte",
            Experiment::Ctmc(_) => "ctmc",
            Experiment::Counterexample(_) => "counterexample",
            Experiment::Lindley(_) => "lindley",
            Experiment::Ifs(_) => "ifs",
        }
    }

    /// Every setting that affects output, as `key=value` pairs in a fixed
    /// order. The output directory and thread count are excluded.
    pub fn settings(&self) -> Vec<(&'static str, String)> {
        let mut s: Vec<(&'static str, String)> = match &self.experiment {
            Experiment::TruncateSweep(e) => vec![
                ("kernel", e.kernel.to_string()),
                ("n-list", e.n_list.to_string()),
                ("scheme", e.scheme.to_string()),
            ],
            Experiment::Stationary(e) => vec![
                ("matrix-file", e.matrix_file.display().to_string()),
                ("method", format!("{:?}", e.method).to_lowercase()),
                ("tol", e.tol.to_string()),
                ("max-steps", e.max_steps.to_string()),
                ("x", e.x.to_string()),
            ],
            Experiment::Interchange(e) => vec![
                ("kernel", e.kernel.to_string()),
                ("n-list", e.n_list.to_string()),
                ("n-ref", e.n_ref.to_string()),
                ("x", e.x.to_string()),
                ("horizon", e.horizon.to_string()),
                ("scheme", e.scheme.to_string()),
                ("weight", e.weight.to_string()),
                ("threshold-b", e.threshold_b.as_ref().map_or("auto".into(), |b| b.to_string())),
            ],
            Experiment::Fte(e) => {
                let mut v = match &e.source {
                    ChainSource::Kernel { kernel, n, scheme } => {
                        vec![("kernel", kernel.to_string()), ("n", n.to_string()), ("scheme", scheme.to_string())]
                    }
                    ChainSource::File(p) => vec![("matrix-file", p.display().to_string())],
                };
                v.extend([
                    ("target-set", e.target_set.to_string()),
                    ("alpha", e.alpha.to_string()),
                    ("reward", e.reward.to_string()),
                    ("x", e.x.as_ref().map_or("all".into(), |l| l.to_string())),
                    ("method", format!("{:?}", e.method).to_lowercase()),
                ]);
                v
            }
            Experiment::Ctmc(e) => vec![
                ("generator", e.generator.to_string()),
                ("reference", e.reference.as_ref().map_or("same".into(), |r| r.to_string())),
                ("n-list", e.n_list.to_string()),
                ("n-ref", e.n_ref.to_string()),
                ("x", e.x.to_string()),
                ("time-horizon", e.time_horizon.to_string()),
                ("step", e.step.to_string()),
                ("eps", e.eps.to_string()),
                ("grid", e.grid.to_string()),
            ],
            Experiment::Counterexample(e) => vec![("n-list", e.n_list.to_string()), ("x", e.x.to_string())],
            Experiment::Lindley(e) => vec![
                ("drift-family", e.drift_family.to_string()),
                ("n-list", e.n_list.to_string()),
                ("horizon", e.horizon.to_string()),
                ("samples", e.samples.to_string()),
                ("x", e.x.to_string()),
            ],
            Experiment::Ifs(e) => vec![
                ("a-law", e.a_law.to_string()),
                ("b-law", e.b_law.to_string()),
                ("k-list", e.k_list.to_string()),
                ("k-ref", e.k_ref.to_string()),
                ("x", e.x.to_string()),
                ("samples", e.samples.to_string()),
            ],
        };
        s.push(("seed", self.seed.to_string()));
        s
    }
}
