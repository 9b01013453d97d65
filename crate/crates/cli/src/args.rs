use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

use duffamp_core::{BranchFilter, LoSideband};

/// Steady states, gain and noise of a pumped Kerr (Duffing) resonator amplifier.
///
/// Rates are in arbitrary units (e.g. `--gamma 2`) unless the device is given
/// in SI through --effective-mass, --omega0, --quality-factor and
/// --critical-amplitude. Values from --config are overridden by flags.
/// Set RAYON_NUM_THREADS to limit the worker threads.
#[derive(Debug, Parser)]
#[command(name = "duffamp", version)]
pub struct Cli {
    /// TOML file with [model], [drive] and per-command sections.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixed points at one pump amplitude, or a response curve with --curve.
    Steady(SteadyArgs),
    /// Optimal-phase gain surface g(δ, n0).
    Gain(SurfaceArgs),
    /// DC output noise surface S(δ, n0).
    Noise(SurfaceArgs),
    /// Minimum detectable force against n0.
    Minforce(MinForceArgs),
    /// Run the numerical oracle suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Damping rate γ.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Pump detuning Δ = ω0 − ωp.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Kerr coefficient χ.
    #[arg(long, allow_negative_numbers = true)]
    pub chi: Option<f64>,
    /// Effective mass in kg (SI input; replaces --gamma and --chi).
    #[arg(long, value_name = "KG")]
    pub effective_mass: Option<f64>,
    /// Resonance frequency ω0 in rad/s (SI input).
    #[arg(long, value_name = "RAD_PER_S")]
    pub omega0: Option<f64>,
    /// Quality factor (SI input).
    #[arg(long)]
    pub quality_factor: Option<f64>,
    /// Critical amplitude a_c in m (SI input).
    #[arg(long, value_name = "M")]
    pub critical_amplitude: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaModeArg {
    Optimal,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SidebandArg {
    Lower,
    Upper,
}

impl From<SidebandArg> for LoSideband {
    fn from(s: SidebandArg) -> Self {
        match s {
            SidebandArg::Lower => LoSideband::Lower,
            SidebandArg::Upper => LoSideband::Upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Lower,
    Upper,
    All,
}

impl From<BranchArg> for BranchFilter {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Lower => BranchFilter::Lower,
            BranchArg::Upper => BranchFilter::Upper,
            BranchArg::All => BranchFilter::All,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct DriveArgs {
    /// Pump amplitude ε_p.
    #[arg(long, allow_negative_numbers = true)]
    pub eps_p: Option<f64>,
    /// Signal amplitude ε_s (default 1).
    #[arg(long, allow_negative_numbers = true)]
    pub eps_s: Option<f64>,
    /// Signal detuning δ = ωs − ωp.
    #[arg(long, allow_negative_numbers = true)]
    pub signal_detuning: Option<f64>,
    /// Local-oscillator phase θ; implies --theta-mode fixed.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Phase choice for surfaces (default optimal).
    #[arg(long, value_enum)]
    pub theta_mode: Option<ThetaModeArg>,
    /// Local-oscillator sideband (default lower).
    #[arg(long, value_enum)]
    pub lo_sideband: Option<SidebandArg>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    /// Branches to emit (default all).
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
    /// Near-critical mask threshold λ²_min (default 1e-3 γ²).
    #[arg(long)]
    pub mask_lambda_sq: Option<f64>,
    /// Occupation grid START:STOP:POINTS (default: each stable branch).
    #[arg(long, value_name = "START:STOP:POINTS", allow_hyphen_values = true)]
    pub n0_range: Option<String>,
    /// Also emit middle-branch (unstable) rows.
    #[arg(long)]
    pub include_unstable: bool,
    /// CSV output path; a PATH.meta.toml sidecar is written next to it.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SteadyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub drive: DriveArgs,
    /// Pump grid START:STOP:POINTS for a response curve.
    #[arg(long, value_name = "START:STOP:POINTS", allow_hyphen_values = true)]
    pub curve: Option<String>,
    /// Branches to emit on a curve (default all).
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
    /// CSV output path; a PATH.meta.toml sidecar is written next to it.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SurfaceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub drive: DriveArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Signal-detuning grid START:STOP:POINTS (default −3γ:3γ:201).
    #[arg(long, value_name = "START:STOP:POINTS", allow_hyphen_values = true)]
    pub detuning_range: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct MinForceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub drive: DriveArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Seed for the sampled fixed points (default 42).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Samples per check; the ODE check uses a tenth (default 1000).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Also write the reports as TOML to PATH.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}
