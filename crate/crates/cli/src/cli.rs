use std::path::PathBuf;

use chaintrunc::TruncationScheme;
use clap::{Args, Parser, Subcommand};

use crate::config::{List, Real};
use crate::specs::{DriftFamily, GeneratorSpec, KernelSpec, ScalarSpec, WeightSpec};

/// Truncation sweeps, stationary solves, interchange bounds and
/// first-transition expectations for Markov chains. Each run writes CSV
/// files to the output directory; summaries go to standard error.
#[derive(Debug, Parser)]
#[command(name = "chaintrunc", version, propagate_version = true)]
pub struct Cli {
    /// Key-value config file (`key = value`, keys are long flag names);
    /// flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory [default: .]
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads for sweeps [default: all cores]
    #[arg(long, global = true, value_name = "K")]
    pub threads: Option<usize>,

    /// Seed for Monte-Carlo subcommands [default: 0]
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Truncate a countable kernel at each n; writes one matrix file per n
    /// and `truncate-sweep.csv` (n,scheme,max_lost_mass).
    TruncateSweep(TruncateSweepArgs),
    /// Stationary law of a matrix file; writes `stationary.dist` and
    /// reports the residual on standard error.
    Stationary(StationaryArgs),
    /// Uniform-in-time TV bounds between truncations and a reference
    /// truncation; writes `interchange.csv`.
    Interchange(InterchangeArgs),
    /// First-transition expectations by value iteration, linear solve and
    /// the regenerative ratio; writes `fte.csv`.
    Fte(FteArgs),
    /// Uniform-in-time TV bounds for generator truncations through their
    /// skeleton chains; writes `ctmc.csv`.
    Ctmc(CtmcArgs),
    /// Exact computations for the halving-map chains on [0, 1]; writes
    /// `counterexample.csv`.
    Counterexample(CounterexampleArgs),
    /// Coupled Lindley chains with drift shifted by 1/n; writes
    /// `lindley.csv`.
    Lindley(LindleyArgs),
    /// Backward iteration of a contractive random affine map; writes
    /// `ifs.csv`.
    Ifs(IfsArgs),
}

#[derive(Debug, Args)]
pub struct TruncateSweepArgs {
    /// Countable kernel, e.g. `birth-death:p=1/3`
    #[arg(long)]
    pub kernel: Option<KernelSpec>,
    /// Truncation sizes, e.g. `10,20,40`
    #[arg(long, value_name = "LIST")]
    pub n_list: Option<List<usize>>,
    /// `redirect:<z>`, `proportional` or `self-loop` [default: redirect:0]
    #[arg(long)]
    pub scheme: Option<TruncationScheme>,
}

#[derive(Debug, Args)]
pub struct StationaryArgs {
    /// Matrix in `mc-matrix v1` format
    #[arg(long, value_name = "PATH")]
    pub matrix_file: Option<PathBuf>,
    /// `gth`, `power` or `cesaro` [default: gth]
    #[arg(long)]
    pub method: Option<StationaryMethod>,
    /// Stopping tolerance for the iterative methods [default: 1e-12]
    #[arg(long)]
    pub tol: Option<Real>,
    /// Step limit for the iterative methods [default: 10000000]
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Start state for the iterative methods [default: 0]
    #[arg(long)]
    pub x: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StationaryMethod {
    Gth,
    Power,
    Cesaro,
}

#[derive(Debug, Args)]
pub struct InterchangeArgs {
    /// Countable kernel, e.g. `birth-death:p=1/3`
    #[arg(long)]
    pub kernel: Option<KernelSpec>,
    /// Truncation sizes
    #[arg(long, value_name = "LIST")]
    pub n_list: Option<List<usize>>,
    /// Reference truncation size, larger than every n
    #[arg(long)]
    pub n_ref: Option<usize>,
    /// Start state [default: 0]
    #[arg(long)]
    pub x: Option<usize>,
    /// Steps for the sup-TV sweep and the bound [default: 1000]
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Truncation scheme [default: redirect:0]
    #[arg(long)]
    pub scheme: Option<TruncationScheme>,
    /// `none` or `linear` (w(x) = x + 1); `linear` adds weighted-bound
    /// columns [default: none]
    #[arg(long)]
    pub weight: Option<WeightSpec>,
    /// Threshold b for the weighted bound [default: automatic]
    #[arg(long)]
    pub threshold_b: Option<Real>,
}

#[derive(Debug, Args)]
pub struct FteArgs {
    /// Countable kernel, truncated at `--n`
    #[arg(long, conflicts_with = "matrix_file")]
    pub kernel: Option<KernelSpec>,
    /// Truncation size for `--kernel` [default: 200]
    #[arg(long)]
    pub n: Option<usize>,
    /// Truncation scheme for `--kernel` [default: redirect:0]
    #[arg(long)]
    pub scheme: Option<TruncationScheme>,
    /// Matrix in `mc-matrix v1` format
    #[arg(long, value_name = "PATH")]
    pub matrix_file: Option<PathBuf>,
    /// States where the expectation stops (complement of the continuation region)
    #[arg(long, value_name = "LIST")]
    pub target_set: Option<List<usize>>,
    /// Constant discount rate per step [default: 0]
    #[arg(long)]
    pub alpha: Option<Real>,
    /// `indicator` (1 on the target set), `time` (1 off the target set),
    /// `ones`, or `file:<path>` with `state value` lines [default: time]
    #[arg(long)]
    pub reward: Option<RewardChoice>,
    /// States to report [default: every state off the target set]
    #[arg(long, value_name = "LIST")]
    pub x: Option<List<usize>>,
    /// `vi`, `linear`, `ratio` or `all` [default: all]
    #[arg(long)]
    pub method: Option<FteMethodChoice>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RewardChoice {
    Indicator,
    Time,
    Ones,
    File(PathBuf),
}

impl std::str::FromStr for RewardChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "indicator" => Ok(Self::Indicator),
            "time" => Ok(Self::Time),
            "ones" => Ok(Self::Ones),
            other => other
                .strip_prefix("file:")
                .map(|p| Self::File(PathBuf::from(p)))
                .ok_or_else(|| format!("unknown reward `{other}`")),
        }
    }
}

impl std::fmt::Display for RewardChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Indicator => f.write_str("indicator"),
            Self::Time => f.write_str("time"),
            Self::Ones => f.write_str("ones"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FteMethodChoice {
    Vi,
    Linear,
    Ratio,
    All,
}

#[derive(Debug, Args)]
pub struct CtmcArgs {
    /// Generator family, e.g. `mm1:lambda=1,mu=2` or `two-state:rate=1`
    #[arg(long)]
    pub generator: Option<GeneratorSpec>,
    /// Reference family [default: the `--generator` family at `--n-ref`]
    #[arg(long)]
    pub reference: Option<GeneratorSpec>,
    /// Truncation sizes (ignored by the two-state family) [default: 2]
    #[arg(long, value_name = "LIST")]
    pub n_list: Option<List<usize>>,
    /// Reference size for sized families
    #[arg(long)]
    pub n_ref: Option<usize>,
    /// Start state [default: 0]
    #[arg(long)]
    pub x: Option<usize>,
    /// Time horizon covered by the skeleton bound [default: 20]
    #[arg(long)]
    pub time_horizon: Option<Real>,
    /// Skeleton step [default: 1]
    #[arg(long)]
    pub step: Option<Real>,
    /// Poisson truncation tolerance [default: 1e-12]
    #[arg(long)]
    pub eps: Option<Real>,
    /// Spacing of the time grid for the empirical sup [default: 0.1]
    #[arg(long)]
    pub grid: Option<Real>,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    /// Levels n
    #[arg(long, value_name = "LIST")]
    pub n_list: Option<List<u32>>,
    /// Start point in (2^-(n+1), 1] [default: 0.3]
    #[arg(long)]
    pub x: Option<Real>,
}

#[derive(Debug, Args)]
pub struct LindleyArgs {
    /// Increment law of the limit chain, e.g. `uniform:lo=-0.75,hi=0.25`;
    /// member n is shifted down by 1/n
    #[arg(long)]
    pub drift_family: Option<DriftFamily>,
    /// Family members n
    #[arg(long, value_name = "LIST")]
    pub n_list: Option<List<usize>>,
    /// Steps per coupled path [default: 200]
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Coupled paths [default: 10000]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Start point [default: 0]
    #[arg(long)]
    pub x: Option<Real>,
}

#[derive(Debug, Args)]
pub struct IfsArgs {
    /// Law of the slope A, e.g. `uniform:lo=0,hi=1`
    #[arg(long)]
    pub a_law: Option<ScalarSpec>,
    /// Law of the intercept B, e.g. `constant:c=1`
    #[arg(long)]
    pub b_law: Option<ScalarSpec>,
    /// Depths k
    #[arg(long, value_name = "LIST")]
    pub k_list: Option<List<usize>>,
    /// Depth used as a proxy for the limit [default: 60]
    #[arg(long)]
    pub k_ref: Option<usize>,
    /// Start point [default: 0]
    #[arg(long)]
    pub x: Option<Real>,
    /// Sampled compositions per depth [default: 10000]
    #[arg(long)]
    pub samples: Option<usize>,
}
