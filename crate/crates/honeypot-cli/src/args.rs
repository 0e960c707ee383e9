//! Command-line surface: subcommands, flags, and the two built-in profiles.

use std::path::PathBuf;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "honeypot",
    version,
    about = "Learns a cyclic two-rotor process from recordings and serves it as a protocol decoy"
)]
pub struct Cli {
    /// Increase log verbosity (repeat for more).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Record a closed-loop plant run to CSV.
    Simulate(SimulateArgs),
    /// Fit the eight per-variable forecast models on a recorded run.
    Train(TrainArgs),
    /// Extend a seed window into a generated trajectory CSV.
    Generate(GenerateArgs),
    /// Score per-segment error quantiles against a validation run.
    Evaluate(EvaluateArgs),
    /// Time the per-segment computation of a trained generator.
    Bench(BenchArgs),
    /// Run the decoy: generation pipeline plus protocol server.
    Serve(ServeArgs),
}

/// Scale presets. `paper` mirrors the deployment numbers (500 Hz, L=2000,
/// H=200, 1000 epochs); `desk` is the scaled-down configuration that a
/// desktop CPU finishes in minutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Profile {
    Paper,
    Desk,
}

#[derive(Debug, Parser)]
pub struct SimulateArgs {
    /// Plant and schedule description; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scale preset supplying defaults for duration and rate.
    #[arg(long, value_enum, default_value = "paper")]
    pub profile: Profile,
    /// Run length in seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Sample rate in Hz.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Measurement noise seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Parser)]
pub struct TrainArgs {
    /// Recorded run to fit on.
    #[arg(long)]
    pub data: PathBuf,
    /// Directory receiving the eight model files plus the manifest.
    #[arg(long)]
    pub out: PathBuf,
    /// Scale preset supplying defaults for the window and model sizes.
    #[arg(long, value_enum, default_value = "paper")]
    pub profile: Profile,
    /// Look-back length L, in samples.
    #[arg(long)]
    pub lookback: Option<usize>,
    /// Look-ahead length H, in samples.
    #[arg(long)]
    pub lookahead: Option<usize>,
    /// Hidden units per LSTM cell.
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Adam learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Windows per gradient update.
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Offset between consecutive training windows, in samples.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Leading fraction of the run used for fitting; the rest validates.
    #[arg(long, default_value_t = 0.75)]
    pub train_fraction: f64,
    /// Weight-init and shuffle seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Mark the models for single-step recursion instead of one decoder
    /// rollout per segment (slower, compounds error faster; for comparison).
    #[arg(long)]
    pub single_step: bool,
}

#[derive(Debug, Parser)]
pub struct GenerateArgs {
    /// Trained generator manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    /// CSV whose tail seeds the look-back window.
    #[arg(long, conflicts_with = "seed_sim")]
    pub seed_data: Option<PathBuf>,
    /// Seed the look-back from a fresh simulator run with this noise seed.
    #[arg(long)]
    pub seed_sim: Option<u64>,
    /// Number of segments to generate.
    #[arg(long, default_value_t = 16)]
    pub segments: usize,
    /// Scale preset supplying the default sample rate.
    #[arg(long, value_enum, default_value = "paper")]
    pub profile: Profile,
    /// Sample rate stamped on the output, in Hz.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Parser)]
pub struct EvaluateArgs {
    /// Trained generator manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Validation run the trajectories are scored against.
    #[arg(long)]
    pub data: PathBuf,
    /// Number of seed positions T drawn from the validation run.
    #[arg(long, default_value_t = 301)]
    pub seeds: usize,
    /// Segments S generated per seed position.
    #[arg(long, default_value_t = 20)]
    pub segments: usize,
    /// Seed-position draw seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Where the long-form quantile CSV goes.
    #[arg(long)]
    pub out: PathBuf,
    /// Also print the full table as JSON on stdout.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Parser)]
pub struct BenchArgs {
    /// Trained generator manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Timed segment computations (after three warm-ups).
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    /// Look-back fill seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Print the timing stats as JSON on stdout.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Parser)]
pub struct ServeArgs {
    /// Runtime configuration file; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Trained generator manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Listen address for the protocol front-end.
    #[arg(long)]
    pub listen: Option<String>,
    /// Samples published per second.
    #[arg(long)]
    pub publish_rate: Option<f64>,
    /// Bounded queue size, in segments.
    #[arg(long)]
    pub queue_capacity: Option<usize>,
    /// CSV whose tail seeds the look-back window.
    #[arg(long, conflicts_with = "seed_sim")]
    pub seed_data: Option<PathBuf>,
    /// Seed the look-back from a fresh simulator run with this noise seed.
    #[arg(long)]
    pub seed_sim: Option<u64>,
    /// Append-only record of client write attempts.
    #[arg(long)]
    pub intrusion_log: Option<PathBuf>,
}

impl Profile {
    pub fn sim_duration(self) -> f64 {
        match self {
            Profile::Paper => 7200.0,
            Profile::Desk => 120.0,
        }
    }

    pub fn sample_rate(self) -> f64 {
        match self {
            Profile::Paper => 500.0,
            Profile::Desk => 50.0,
        }
    }

    pub fn lookback(self) -> usize {
        match self {
            Profile::Paper => 2000,
            Profile::Desk => 200,
        }
    }

    pub fn lookahead(self) -> usize {
        match self {
            Profile::Paper => 200,
            Profile::Desk => 20,
        }
    }

    pub fn hidden(self) -> usize {
        match self {
            Profile::Paper => 64,
            Profile::Desk => 32,
        }
    }

    pub fn epochs(self) -> usize {
        match self {
            Profile::Paper => 1000,
            Profile::Desk => 150,
        }
    }

    pub fn stride(self) -> usize {
        match self {
            Profile::Paper => 200,
            Profile::Desk => 100,
        }
    }
}
