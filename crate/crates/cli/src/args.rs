//! Command-line grammar. Every subcommand's arguments serialize into the run
//! manifest, so a manifest holds the full resolved flag set for a rerun.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use scrambled_nets::experiment::Statistic;
use scrambled_nets::integrands::{Family, IntegrandSpec};
use scrambled_nets::net_gen::{Offset, Ordering};
use scrambled_nets::ScrambleKind;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "snets", version, about = "Scrambled Sobol' nets, net certification and variance-rate experiments")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "SNETS_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    /// Generate (optionally scrambled) Sobol' net points.
    Gen(GenArgs),
    /// Certify the (t,m,s)-net property of a point file.
    Verify(VerifyArgs),
    /// Vitali-variation lower bounds against the derivative norm.
    Variation(VariationArgs),
    /// Run a randomized QMC ensemble over a range of sample sizes.
    Experiment(ExperimentArgs),
    /// Fit the convergence rate of an experiment result.
    Rate(RateArgs),
    /// Compute an RQMC reference integral.
    Reference(ReferenceArgs),
    /// Re-execute the command recorded in a manifest.
    #[serde(skip)]
    Rerun(RerunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Verify(_) => "verify",
            Command::Variation(_) => "variation",
            Command::Experiment(_) => "experiment",
            Command::Rate(_) => "rate",
            Command::Reference(_) => "reference",
            Command::Rerun(_) => "rerun",
        }
    }

    pub fn input(&self) -> Option<&PathBuf> {
        match self {
            Command::Verify(a) => Some(&a.input),
            Command::Rate(a) => Some(&a.input),
            Command::Rerun(a) => Some(&a.manifest),
            _ => None,
        }
    }

    pub fn output(&self) -> Option<&PathBuf> {
        match self {
            Command::Gen(a) => a.out.as_ref(),
            Command::Verify(a) => a.out.as_ref(),
            Command::Variation(a) => a.out.as_ref(),
            Command::Experiment(a) => a.out.as_ref(),
            Command::Rate(a) => a.out.as_ref(),
            Command::Reference(a) => a.out.as_ref(),
            Command::Rerun(a) => a.out.as_ref(),
        }
    }

    /// Redirects the primary output (and the CSV export, next to it).
    pub fn set_output(&mut self, out: PathBuf) {
        match self {
            Command::Gen(a) => a.out = Some(out),
            Command::Verify(a) => a.out = Some(out),
            Command::Variation(a) => a.out = Some(out),
            Command::Experiment(a) => {
                if a.errors_csv.is_some() {
                    a.errors_csv = Some(out.with_extension("errors.csv"));
                }
                a.out = Some(out);
            }
            Command::Rate(a) => a.out = Some(out),
            Command::Reference(a) => a.out = Some(out),
            Command::Rerun(a) => a.out = Some(out),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Gen(a) => Some(a.seed),
            Command::Experiment(a) => Some(a.seed),
            Command::Reference(a) => Some(a.seed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExampleArg {
    #[value(name = "1")]
    #[serde(rename = "1")]
    One,
    #[value(name = "2")]
    #[serde(rename = "2")]
    Two,
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScrambleArg {
    None,
    Owen,
    Lms,
}

impl From<ScrambleArg> for ScrambleKind {
    fn from(a: ScrambleArg) -> Self {
        match a {
            ScrambleArg::None => ScrambleKind::None,
            ScrambleArg::Owen => ScrambleKind::Owen,
            ScrambleArg::Lms => ScrambleKind::LmsShift,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderingArg {
    Natural,
    Gray,
}

impl From<OrderingArg> for Ordering {
    fn from(a: OrderingArg) -> Self {
        match a {
            OrderingArg::Natural => Ordering::Natural,
            OrderingArg::Gray => Ordering::Gray,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OffsetArg {
    None,
    Center,
}

impl From<OffsetArg> for Offset {
    fn from(a: OffsetArg) -> Self {
        match a {
            OffsetArg::None => Offset::None,
            OffsetArg::Center => Offset::Center,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionArg {
    Dyadic,
    Kink,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatisticArg {
    Median,
    Mse,
    Variance,
}

impl From<StatisticArg> for Statistic {
    fn from(a: StatisticArg) -> Self {
        match a {
            StatisticArg::Median => Statistic::Median,
            StatisticArg::Mse => Statistic::Mse,
            StatisticArg::Variance => Statistic::Variance,
        }
    }
}

/// Integrand selection shared by several subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Args, Serialize, Deserialize)]
pub struct IntegrandArgs {
    /// Integrand family.
    #[arg(long, value_enum)]
    pub example: ExampleArg,
    /// Smoothness parameter (ignored by `smooth`).
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Dimension.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
}

impl IntegrandArgs {
    pub fn spec(&self) -> scrambled_nets::Result<IntegrandSpec> {
        let family = match self.example {
            ExampleArg::One => Family::Example1,
            ExampleArg::Two => Family::Example2,
            ExampleArg::Smooth => Family::SmoothProduct,
        };
        IntegrandSpec::new(family, self.dim, self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GenArgs {
    /// Dimension.
    #[arg(long)]
    pub dim: usize,
    /// log2 of the number of points.
    #[arg(long)]
    pub m: u32,
    /// Digit precision in bits.
    #[arg(long, default_value_t = 32)]
    pub precision: u32,
    #[arg(long, value_enum, default_value_t = OrderingArg::Natural)]
    pub ordering: OrderingArg,
    #[arg(long, value_enum, default_value_t = OffsetArg::None)]
    pub offset: OffsetArg,
    #[arg(long, value_enum, default_value_t = ScrambleArg::None)]
    pub scramble: ScrambleArg,
    #[arg(long, env = "SNETS_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub replicate: u64,
    /// `csv`: one row per point; `json`: raw digit integers.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// Point file: CSV of coordinates or digit JSON as written by `gen`.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub base: u32,
    /// Net size exponent (default: inferred from the point count).
    #[arg(long)]
    pub m: Option<u32>,
    /// Quality parameter to check (default: compute the smallest).
    #[arg(long)]
    pub t: Option<u32>,
    /// Violating cells to report at most.
    #[arg(long, default_value_t = 10)]
    pub max_violations: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct VariationArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub integrand: IntegrandArgs,
    /// Variation order; the norm is taken at p = 2/(3 - 2 alpha_var).
    #[arg(long)]
    pub alpha_var: f64,
    #[arg(long, value_enum, default_value_t = PartitionArg::Both)]
    pub partition: PartitionArg,
    #[arg(long, default_value_t = 4)]
    pub max_level: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReferenceBudgetArgs {
    /// log2 of the reference net size (default 18; 25 with --paper-scale).
    #[arg(long)]
    pub reference_m: Option<u32>,
    /// Reference replicates (default 4096; 8192 with --paper-scale).
    #[arg(long)]
    pub reference_replicates: Option<u64>,
    /// Seed of the reference replicates.
    #[arg(long, default_value_t = 0)]
    pub reference_seed: u64,
    /// Required reference accuracy.
    #[arg(long, default_value_t = 1e-6)]
    pub reference_tolerance: f64,
    /// JSON cache of reference values, reused when the key matches.
    #[arg(long)]
    pub reference_cache: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ExperimentArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub integrand: IntegrandArgs,
    #[arg(long, value_enum, default_value_t = ScrambleArg::Owen)]
    pub scramble: ScrambleArg,
    /// Smallest sample-size exponent (default 6).
    #[arg(long)]
    pub m_min: Option<u32>,
    /// Largest sample-size exponent (default 14; 25 with --paper-scale).
    #[arg(long)]
    pub m_max: Option<u32>,
    /// Independent replicates (default 512; 8192 with --paper-scale).
    #[arg(long)]
    pub replicates: Option<u64>,
    #[arg(long, env = "SNETS_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OffsetArg::None)]
    pub offset: OffsetArg,
    #[arg(long, default_value_t = 32)]
    pub precision: u32,
    /// Percentiles of the squared error reported per sample size.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 25.0, 50.0, 75.0, 99.0])]
    pub percentiles: Vec<f64>,
    /// Large-scale defaults for replicates, m_max and the reference budget.
    #[arg(long)]
    pub paper_scale: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub reference: ReferenceBudgetArgs,
    /// CSV of per-replicate squared errors, one column per m.
    #[arg(long)]
    pub errors_csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RateArgs {
    /// Experiment result JSON.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = StatisticArg::Median)]
    pub statistic: StatisticArg,
    /// Restrict the fit to m >= this.
    #[arg(long)]
    pub m_min: Option<u32>,
    /// Restrict the fit to m <= this.
    #[arg(long)]
    pub m_max: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReferenceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub integrand: IntegrandArgs,
    /// log2 of the net size (default 18; 25 with --paper-scale).
    #[arg(long)]
    pub m: Option<u32>,
    /// Replicates (default 4096; 8192 with --paper-scale).
    #[arg(long)]
    pub replicates: Option<u64>,
    #[arg(long, env = "SNETS_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ScrambleArg::Lms)]
    pub scramble: ScrambleArg,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long)]
    pub paper_scale: bool,
    /// JSON cache of reference values.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RerunArgs {
    /// Manifest written next to an earlier output.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write the output here instead of the recorded path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
