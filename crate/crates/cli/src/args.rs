use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use randev_core::{BitFormat, DeadTimePolicy, SourceKind};

#[derive(Debug, Parser)]
#[command(name = "randev", version, about = "Simulate bit sources and measure their deviation from randomness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate bits from a simulated source.
    Generate(GenerateArgs),
    /// Measure bias, autocorrelation, entropy and deviation of a bit file.
    Analyze(AnalyzeArgs),
    /// Print the model prediction for a source as JSON.
    Predict(PredictArgs),
    /// Longest undetectable sequence length for a given deviation.
    Nmax(NmaxArgs),
    /// Windowed deviation alarm over a raw bit stream.
    Monitor(MonitorArgs),
    /// Check the quadratic deviation formula on the |b|, |a1| <= 0.1 grid.
    ValidateApprox(ValidateArgs),
    /// Exact and parabolic mutual information versus a1, as CSV.
    Fig2(Fig2Args),
    /// Concatenate bit files.
    Concat(ConcatArgs),
    /// Analyse a xorshift64 stream next to its seed-entropy bound.
    PrngDemo(PrngDemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Raw,
    Ascii,
}

impl From<FormatArg> for BitFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Raw => BitFormat::Raw,
            FormatArg::Ascii => BitFormat::Ascii,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Ideal,
    Bernoulli,
    Splitter,
    Markov,
    Deadtime,
    Xorshift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Reroute,
    Lose,
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Source kind.
    #[arg(long, value_enum)]
    pub source: SourceArg,
    /// P(1) for the bernoulli source.
    #[arg(long)]
    pub p: Option<f64>,
    /// Bias b = P(1) - P(0) (splitter, markov).
    #[arg(long, allow_hyphen_values = true)]
    pub bias: Option<f64>,
    /// Lag-1 autocorrelation (markov).
    #[arg(long, allow_hyphen_values = true)]
    pub a1: Option<f64>,
    /// Mean photon inter-arrival time (deadtime).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Detector dead time, same units as --tau (deadtime).
    #[arg(long = "dead-time")]
    pub dead_time: Option<f64>,
    /// Fate of a photon that reaches a dead detector (deadtime).
    #[arg(long = "dead-time-policy", value_enum, default_value = "reroute")]
    pub dead_time_policy: PolicyArg,
}

fn required(value: Option<f64>, flag: &str, source: &str) -> Result<f64, String> {
    value.ok_or_else(|| format!("--source {source} requires --{flag}"))
}

impl SourceArgs {
    pub fn kind(&self) -> Result<SourceKind, String> {
        Ok(match self.source {
            SourceArg::Ideal => SourceKind::Ideal,
            SourceArg::Bernoulli => SourceKind::Bernoulli {
                p: required(self.p, "p", "bernoulli")?,
            },
            SourceArg::Splitter => SourceKind::UnbalancedSplitter {
                b: required(self.bias, "bias", "splitter")?,
            },
            SourceArg::Markov => SourceKind::Markov {
                b: self.bias.unwrap_or(0.0),
                a1: required(self.a1, "a1", "markov")?,
            },
            SourceArg::Deadtime => SourceKind::DeadTime {
                tau: required(self.tau, "tau", "deadtime")?,
                tau_d: required(self.dead_time, "dead-time", "deadtime")?,
                policy: match self.dead_time_policy {
                    PolicyArg::Reroute => DeadTimePolicy::Reroute,
                    PolicyArg::Lose => DeadTimePolicy::Lose,
                },
            },
            SourceArg::Xorshift => SourceKind::Xorshift64,
        })
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Number of bits to emit.
    #[arg(long)]
    pub nbits: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; `-` writes to stdout.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "raw")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Input file; `-` reads raw bits from stdin.
    pub file: PathBuf,
    #[arg(long, value_enum, default_value = "raw")]
    pub format: FormatArg,
    /// Use only the first N bits of the input.
    #[arg(long)]
    pub nbits: Option<usize>,
    #[arg(long = "max-lag", default_value_t = 8)]
    pub max_lag: usize,
    /// Emit the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub source: SourceArgs,
}

#[derive(Debug, Args)]
pub struct NmaxArgs {
    /// Deviation from randomness.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["a1", "bias"], required_unless_present = "a1")]
    pub deviation: Option<f64>,
    /// Lag-1 autocorrelation; combined with --bias through the quadratic formula.
    #[arg(long, allow_hyphen_values = true)]
    pub a1: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "a1")]
    pub bias: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct MonitorArgs {
    /// Raw input; `-` (the default) reads stdin.
    #[arg(default_value = "-")]
    pub input: PathBuf,
    #[arg(long = "window-bits", default_value_t = 1 << 20)]
    pub window_bits: usize,
    #[arg(long = "sigma-k", default_value_t = 3.0)]
    pub sigma_k: f64,
    /// Additional absolute level the windowed deviation must exceed to alarm.
    #[arg(long = "deviation-threshold")]
    pub deviation_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long = "grid-step", default_value_t = 0.02)]
    pub grid_step: f64,
    /// Also simulate this many bits per grid point.
    #[arg(long)]
    pub nbits: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the grid as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Fig2Args {
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub min: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Output file; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConcatArgs {
    /// Input files, in order.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "raw")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct PrngDemoArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of bits L to emit.
    #[arg(long, default_value_t = 1 << 20)]
    pub length: usize,
    #[arg(long = "max-lag", default_value_t = 8)]
    pub max_lag: usize,
}
