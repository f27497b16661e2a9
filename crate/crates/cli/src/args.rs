use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Everything that determines a run. Serialized into every report.
#[derive(Parser, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[command(name = "iel", version, about = "Inaccessible-entropy experiment driver")]
pub struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// Trials for Monte Carlo estimates.
    #[arg(long, global = true, default_value_t = 1000)]
    pub trials: u64,
    /// Report destination; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Exit with status 4 when a checked inequality fails.
    #[arg(long = "assert", global = true)]
    pub assert: bool,
    /// Re-run the spec embedded in an earlier JSON report.
    #[arg(long)]
    #[serde(skip)]
    pub replay: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Mc,
}

#[derive(Subcommand, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Real entropy of a function's inverse.
    Entropy(EntropyArgs),
    /// Accessible entropy of a collision finder.
    Audit(AuditArgs),
    /// Build a keyed family and its parameter sheet.
    Pipeline(PipelineArgs),
    /// Average-case search experiments.
    Avgcase(AvgcaseArgs),
    /// Parameter sheet only.
    Params(ParamsArgs),
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    Perm,
    Random,
    Identity,
    Constant,
}

/// Where the base function comes from.
#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct FunctionSource {
    #[arg(long = "gen", value_enum, default_value_t = Generator::Random)]
    pub generator: Generator,
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Output length; defaults to `n`.
    #[arg(long)]
    pub m: Option<usize>,
    /// Table file in the `.ffn` format; overrides the generator.
    #[arg(long = "fn")]
    pub file: Option<PathBuf>,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    None,
    Trunc,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub source: FunctionSource,
    #[arg(long, value_enum, default_value_t = Construction::None)]
    pub construction: Construction,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum FinderKind {
    Optimal,
    Identity,
    Canonical,
    Lazy,
    Sampling,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct AuditArgs {
    #[command(flatten)]
    pub source: FunctionSource,
    #[arg(long, value_enum, default_value_t = Construction::None)]
    pub construction: Construction,
    #[arg(long, value_enum, default_value_t = FinderKind::Optimal)]
    pub finder: FinderKind,
    /// Laziness of the lazy finder, as a rational.
    #[arg(long, default_value = "1/4")]
    pub eps: String,
    /// Draws of the sampling finder.
    #[arg(long, default_value_t = 4)]
    pub tries: u32,
    /// Inclusive range `a..b` of input lengths; writes a CSV gap series.
    #[arg(long)]
    pub series: Option<String>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct PipelineArgs {
    #[arg(long, default_value = "avg-max")]
    pub path: String,
    /// Security parameter.
    #[arg(long, default_value_t = 4)]
    pub n: u64,
    #[arg(long, default_value_t = 4)]
    pub n0: usize,
    #[arg(long, default_value_t = 4)]
    pub m0: usize,
    /// Entropy gap, as a rational.
    #[arg(long, default_value = "4")]
    pub delta: String,
    #[arg(long, default_value_t = 1)]
    pub s: u64,
    #[arg(long = "gen", value_enum, default_value_t = Generator::Random)]
    pub generator: Generator,
    #[arg(long = "fn")]
    pub file: Option<PathBuf>,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    Identity,
    Truncation,
    Planted,
    FOutput,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Vv,
    Heuristic,
    Buckets,
    Measure,
    Picking,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    Exhaustive,
    Random,
    Mismatched,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct AvgcaseArgs {
    #[arg(long, value_enum)]
    pub task: Task,
    #[arg(long, value_enum, default_value_t = SamplerKind::Identity)]
    pub sampler: SamplerKind,
    #[arg(long, default_value_t = 4)]
    pub coins: usize,
    /// Bits dropped by the truncation sampler.
    #[arg(long, default_value_t = 1)]
    pub drop: usize,
    /// Instance length of the planted sampler.
    #[arg(long, default_value_t = 2)]
    pub len: usize,
    #[arg(long, value_enum, default_value_t = OracleKind::Exhaustive)]
    pub oracle: OracleKind,
    /// Isolation parameter.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Size of the isolated set; drawn from `[2^k, 2^(k+1)]` when absent.
    #[arg(long)]
    pub size: Option<usize>,
    /// Per-loop hitting threshold for bad instances.
    #[arg(long, default_value = "1/8")]
    pub tau: String,
    #[arg(long, default_value = "1/4")]
    pub delta: String,
    #[arg(long, default_value_t = 2)]
    pub beta: u32,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ParamsArgs {
    #[arg(long, default_value = "avg-max")]
    pub path: String,
    /// Security parameter; the other inputs default to the one-way-function instance.
    #[arg(long, default_value_t = 16)]
    pub n: u64,
    #[arg(long)]
    pub n0: Option<u64>,
    #[arg(long)]
    pub m0: Option<u64>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub s: Option<u64>,
    /// Comma-separated security parameters; reports the fitted output exponent
    /// and a CSV series when `--out` ends in `.csv`.
    #[arg(long)]
    pub fit: Option<String>,
}
