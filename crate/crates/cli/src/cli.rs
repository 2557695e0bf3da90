use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Settings;
use crate::error::Result;

/// Low-coherence sequence design under PAPR constraints.
#[derive(Debug, Parser)]
#[command(name = "seqforge", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Design a sequence set and write it together with a JSON run report.
    Generate(GenerateArgs),
    /// Report coherence, PAPR and the Welch bound of a sequence file.
    Evaluate(EvaluateArgs),
    /// Write a reference sequence set (Zadoff-Chu or random Gaussian).
    Baseline(BaselineArgs),
    /// Run a parameter sweep and emit a CSV table.
    Sweep(SweepArgs),
    /// Print the Welch lower bound for L and N.
    WelchBound(WelchArgs),
}

/// Design parameters; each flag overrides the same key in `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct DesignArgs {
    /// Flat key=value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sequence length.
    #[arg(long = "L")]
    pub len: Option<String>,
    /// Number of sequences.
    #[arg(long = "N")]
    pub count: Option<String>,
    #[arg(long, alias = "N_C")]
    pub n_subcarriers: Option<String>,
    #[arg(long, alias = "N_S")]
    pub n_samples: Option<String>,
    /// `contiguous`, `stride=k`, or a comma-separated 1-based index list.
    #[arg(long)]
    pub subcarriers: Option<String>,
    /// Maximum admissible PAPR, or `inf`.
    #[arg(long)]
    pub papr_threshold: Option<String>,
    #[arg(long, alias = "K")]
    pub collision_rounds: Option<String>,
    #[arg(long, alias = "K1")]
    pub review_period: Option<String>,
    #[arg(long, alias = "gamma")]
    pub radius_step: Option<String>,
    #[arg(long, alias = "rho")]
    pub adaptation_rate: Option<String>,
    #[arg(long)]
    pub tau_seq: Option<String>,
    #[arg(long)]
    pub tau_papr: Option<String>,
    #[arg(long)]
    pub max_iterations: Option<String>,
    #[arg(long)]
    pub stall_limit: Option<String>,
    #[arg(long)]
    pub papr_inner_cap: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Warm-start from an existing sequence file.
    #[arg(long)]
    pub init: Option<String>,
}

impl DesignArgs {
    /// Config file entries with flag overrides applied.
    pub fn settings(&self) -> Result<Settings> {
        let mut settings = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        let flags = [
            ("L", &self.len),
            ("N", &self.count),
            ("n_subcarriers", &self.n_subcarriers),
            ("n_samples", &self.n_samples),
            ("subcarriers", &self.subcarriers),
            ("papr_threshold", &self.papr_threshold),
            ("collision_rounds", &self.collision_rounds),
            ("review_period", &self.review_period),
            ("radius_step", &self.radius_step),
            ("adaptation_rate", &self.adaptation_rate),
            ("tau_seq", &self.tau_seq),
            ("tau_papr", &self.tau_papr),
            ("max_iterations", &self.max_iterations),
            ("stall_limit", &self.stall_limit),
            ("papr_inner_cap", &self.papr_inner_cap),
            ("seed", &self.seed),
            ("init", &self.init),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                settings.set(key, v.as_str())?;
            }
        }
        Ok(settings)
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Output sequence file (`.json` selects the JSON format).
    #[arg(long, short)]
    pub out: PathBuf,
    /// Run report path [default: <out>.report.json].
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Suppress progress lines on stderr.
    #[arg(long)]
    pub quiet: bool,
}

/// Optional assignment overrides for evaluation and baselines.
#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    #[arg(long, alias = "N_C")]
    pub n_subcarriers: Option<usize>,
    #[arg(long, alias = "N_S")]
    pub n_samples: Option<usize>,
    /// `contiguous`, `stride=k`, or a comma-separated 1-based index list.
    #[arg(long)]
    pub subcarriers: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Sequence file to evaluate.
    pub file: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Check every sequence against this PAPR threshold.
    #[arg(long)]
    pub papr_threshold: Option<String>,
    /// Also write the metrics as JSON to this path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BaselineArgs {
    #[command(subcommand)]
    pub kind: BaselineKind,
}

#[derive(Debug, Clone, Subcommand)]
pub enum BaselineKind {
    /// Zadoff-Chu family, zero-padded to the target length.
    Zc(ZcArgs),
    /// Random complex Gaussian set.
    Gaussian(GaussianArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ZcArgs {
    /// ZC length (odd) [default: largest prime <= --pad-to].
    #[arg(long)]
    pub length: Option<usize>,
    /// `all` or a comma-separated list of roots.
    #[arg(long, default_value = "all")]
    pub roots: String,
    /// Cyclic shifts per root.
    #[arg(long, default_value_t = 1)]
    pub shifts: usize,
    /// Target sequence length L [default: --length].
    #[arg(long)]
    pub pad_to: Option<usize>,
    /// Keep only this many sequences (greedy lowest-coherence selection).
    #[arg(long)]
    pub select: Option<usize>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GaussianArgs {
    #[arg(long = "L")]
    pub len: usize,
    #[arg(long = "N")]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub select: Option<usize>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Axis {
    PaprThreshold,
    SequenceLength,
    SequenceCount,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::PaprThreshold => "papr_threshold",
            Axis::SequenceLength => "sequence_length",
            Axis::SequenceCount => "sequence_count",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    #[arg(long, value_enum)]
    pub axis: Axis,
    /// Comma-separated, strictly increasing axis values (`inf` allowed for thresholds).
    #[arg(long)]
    pub values: String,
    /// Seeds per point: `seed, seed+1, ...`.
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
    /// Concurrent runs [default: $SEQFORGE_JOBS, else available cores].
    #[arg(long)]
    pub jobs: Option<usize>,
    /// CSV output path [default: stdout].
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Leave the wall-time column empty so output is byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Args)]
pub struct WelchArgs {
    #[arg(long = "L")]
    pub len: usize,
    #[arg(long = "N")]
    pub count: usize,
}
