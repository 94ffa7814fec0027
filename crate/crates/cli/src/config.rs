//! Command-line configuration. The parsed form is also what gets embedded
//! in JSON output, so it serializes and deserializes losslessly.

use std::path::PathBuf;
use std::str::FromStr;

use bifbm_core::{AscltScheme, TestFunction, DEFAULT_CAP};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "bifbm", version, about = "Exact Berry-Esseen bounds and Monte Carlo checks for bifractional Brownian motion")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Evaluate covariance kernels at given points.
    ///
    /// CSV columns: quantity, arguments, value.
    Kernel(KernelArgs),
    /// Exact Var(Z_n), A(n), Stein bound and rate-normalized bound for a list of n.
    ///
    /// CSV columns: n, var_zn, a_n, stein_bound, variance_ratio, regime, normalized_bound.
    RateTable(RateTableArgs),
    /// Monte Carlo sample of V_n and its Kolmogorov distance to N(0,1).
    ///
    /// CSV columns: n, m, seed, ks_distance, stein_bound.
    Mc(McArgs),
    /// Log-weighted almost sure CLT averages over one or more seeds.
    ///
    /// CSV columns: seed, phi, scheme, n_max, terms, weighted_average, target, error, pass.
    Asclt(AscltArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Args, Serialize, Deserialize)]
pub struct ParamArgs {
    /// Hurst-type parameter, 0 < H < 1.
    #[arg(long = "H", allow_hyphen_values = true)]
    pub h: f64,
    /// Bifractional parameter, 0 < K <= 1.
    #[arg(long = "K", allow_hyphen_values = true)]
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the main output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a two-column whitespace-separated data file for plotting.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
    /// Omit the wall-clock timestamp so output is a pure function of the inputs.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct KernelArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// R(s,t); repeatable.
    #[arg(long, num_args = 2, value_names = ["S", "T"], action = clap::ArgAction::Append)]
    pub cov: Vec<f64>,
    /// E[(B_b-B_a)(B_d-B_c)]; repeatable.
    #[arg(long, num_args = 4, value_names = ["A", "B", "C", "D"], action = clap::ArgAction::Append)]
    pub inc: Vec<f64>,
    /// rho(r) for an integer or inclusive range `a..b`; repeatable.
    #[arg(long, allow_hyphen_values = true, action = clap::ArgAction::Append)]
    pub rho: Vec<IntRange>,
    /// theta(i,j); repeatable.
    #[arg(long, num_args = 2, value_names = ["I", "J"], action = clap::ArgAction::Append)]
    pub theta: Vec<u64>,
    /// gamma(i,j); repeatable.
    #[arg(long, num_args = 2, value_names = ["I", "J"], action = clap::ArgAction::Append)]
    pub gamma: Vec<u64>,
    /// sigma^2 (requires H·K < 3/4).
    #[arg(long)]
    pub sigma_sq: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RateTableArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Single n.
    #[arg(long, conflicts_with = "n_list")]
    pub n: Option<usize>,
    /// Comma-separated strictly ascending list of n.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Vec<usize>,
    #[command(flatten)]
    pub cap: CapArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct McArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Number of unit increments per path.
    #[arg(long)]
    pub n: usize,
    /// Number of Monte Carlo paths.
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Write the sampled increments as CSV, one row per path.
    #[arg(long)]
    pub dump_paths: Option<PathBuf>,
    #[command(flatten)]
    pub cap: CapArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AscltMode {
    /// k^{-HK} B_k at integer times k <= n.
    Bifbm,
    /// V_k on the grid i/n.
    Vn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    ExactDivisor,
    SnappedGrid,
}

impl From<SchemeArg> for AscltScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::ExactDivisor => AscltScheme::ExactDivisor,
            SchemeArg::SnappedGrid => AscltScheme::SnappedGrid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AscltArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value_t = AscltMode::Bifbm)]
    pub mode: AscltMode,
    /// n_max in bifbm mode, N_grid in vn mode.
    #[arg(long)]
    pub n: usize,
    /// cos, sin, const=C, logistic=SLOPE, or clamped-poly=C0;C1;...@LO;HI.
    #[arg(long, default_value = "cos")]
    pub phi: PhiSpec,
    /// First seed; runs use seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// Count runs whose error is within this tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Resolution scheme in vn mode.
    #[arg(long, value_enum, default_value_t = SchemeArg::ExactDivisor)]
    pub scheme: SchemeArg,
    #[command(flatten)]
    pub cap: CapArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct CapArgs {
    /// Largest matrix dimension allowed.
    #[arg(long = "cap", env = "BIFBM_CAP", default_value_t = DEFAULT_CAP)]
    pub cap: usize,
}

/// Inclusive integer range written `a..b`, or a single integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub start: i64,
    pub end: i64,
}

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("bad integer {t:?}: {e}"));
        let (start, end) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if start > end {
            return Err(format!("empty range {s:?}"));
        }
        Ok(IntRange { start, end })
    }
}

/// Test function given on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhiSpec(pub TestFunction);

impl FromStr for PhiSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
        let (name, arg) = match s.split_once('=') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let f = match (name, arg) {
            ("cos", None) => TestFunction::Cos,
            ("sin", None) => TestFunction::Sin,
            ("const", Some(a)) => TestFunction::Constant { value: num(a)? },
            ("logistic", Some(a)) => TestFunction::Logistic { slope: num(a)? },
            ("clamped-poly", Some(a)) => {
                let (coeffs, bounds) = a.split_once('@').ok_or("clamped-poly needs C0;C1;...@LO;HI")?;
                let (lo, hi) = bounds.split_once(';').ok_or("clamped-poly needs LO;HI")?;
                let coeffs = coeffs.split(';').map(num).collect::<Result<Vec<_>, _>>()?;
                let (lo, hi) = (num(lo)?, num(hi)?);
                if lo.is_nan() || hi.is_nan() || lo > hi {
                    return Err(format!("clamped-poly bounds {lo} > {hi}"));
                }
                TestFunction::ClampedPoly { coeffs, lo, hi }
            }
            _ => return Err(format!("unknown test function {s:?}")),
        };
        Ok(PhiSpec(f))
    }
}
