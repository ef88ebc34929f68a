use std::path::PathBuf;

use ccdgf::synth::SynthKind;
use ccdgf::Boundary;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "ccdgf",
    version,
    about = "Guided-filter family: filtering, metrics, benchmarks"
)]
pub struct Cli {
    /// Worker threads for the filters (default: hardware count). Results do
    /// not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Guided filter, optionally rolled.
    Gf(GfArgs),
    /// Guided filter with a squared-TV output term (periodic windows).
    Tvgf(TvgfArgs),
    /// Conservative (anchored) guided filter.
    Cgf(CgfArgs),
    /// Inverse guided filter.
    Igf(IgfArgs),
    /// Inverse conservative guided filter. Can amplify noise where the
    /// input is flat; keep lambda > 0 on real data.
    Icgf(IcgfArgs),
    /// Mutual-structure filtering built on GF / IGF.
    RmsfGf(RmsfArgs),
    /// Mutual-structure filtering built on CGF / ICGF.
    RmsfCgf(RmsfCgfArgs),
    /// Cross-guided rolling without inverse terms (baseline).
    Roll37(Roll37Args),
    /// Flash / no-flash fusion by additive detail transfer.
    RfnfSeo(RfnfSeoArgs),
    /// Flash / no-flash fusion anchored to an enhanced flash image.
    RfnfGen(RfnfGenArgs),
    /// MSE, PSNR and SSIM between two images.
    Metrics(MetricsArgs),
    /// Median wall time of a filter on a synthetic image.
    Bench(BenchArgs),
    /// Write deterministic synthetic test images.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryArg {
    Truncate,
    Periodic,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Truncate => Boundary::Truncate,
            BoundaryArg::Periodic => Boundary::Periodic,
        }
    }
}

/// Paths shared by every filtering subcommand.
#[derive(Debug, Args, Serialize)]
pub struct Io {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Also write every intermediate iterate as 16-bit PNM next to the output.
    #[arg(long)]
    pub dump_iterates: bool,
    /// Reference image; adds mse / psnr / ssim of the output to the report.
    #[arg(long)]
    pub metrics_against: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: Io,
    /// Guidance image (default: the input).
    #[arg(long)]
    pub guidance: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub radius: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Truncate)]
    pub boundary: BoundaryArg,
    #[arg(long, default_value_t = 1)]
    pub iters: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct TvgfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: Io,
    #[arg(long)]
    pub guidance: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub radius: usize,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    #[arg(long, default_value_t = 45.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1)]
    pub iters: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CgfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: Io,
    #[arg(long)]
    pub guidance: Option<PathBuf>,
    /// Fidelity anchor g (default: the input).
    #[arg(long)]
    pub anchor: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    pub radius: usize,
    #[arg(long, default_value_t = 0.001)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.01)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Truncate)]
    pub boundary: BoundaryArg,
    #[arg(long, default_value_t = 1)]
    pub iters: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct IgfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: Io,
    /// Prior guidance estimate (default: the input).
    #[arg(long)]
    pub guidance: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub radius: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Truncate)]
    pub boundary: BoundaryArg,
}

#[derive(Debug, Args, Serialize)]
pub struct IcgfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: Io,
    #[arg(long)]
    pub guidance: Option<PathBuf>,
    /// Anchor for the recovered guidance (default: the guidance).
    #[arg(long)]
    pub anchor: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    pub radius: usize,
    #[arg(long, default_value_t = 0.001)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.01)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Truncate)]
    pub boundary: BoundaryArg,
}

#[derive(Debug, Args, Serialize)]
pub struct RmsfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: Io,
    #[arg(long)]
    pub guidance: Option<PathBuf>,
    /// Where to write the filtered guidance track.
    #[arg(long)]
    pub guidance_output: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub radius: usize,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.01)]
    pub eps2: f64,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Truncate)]
    pub boundary: BoundaryArg,
    #[arg(long, default_value_t = 10)]
    pub iters: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct RmsfCgfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub rmsf: RmsfArgs,
    #[arg(long, default_value_t = 0.01)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.01)]
    pub beta: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct Roll37Args {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: Io,
    #[arg(long)]
    pub guidance: Option<PathBuf>,
    #[arg(long)]
    pub guidance_output: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub radius: usize,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Truncate)]
    pub boundary: BoundaryArg,
    #[arg(long, default_value_t = 10)]
    pub iters: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct RfnfSeoArgs {
    /// `--input` is the no-flash image.
    #[command(flatten)]
    #[serde(flatten)]
    pub io: Io,
    /// The flash image.
    #[arg(long)]
    pub guidance: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub radius: usize,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Detail gain.
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Truncate)]
    pub boundary: BoundaryArg,
    #[arg(long, default_value_t = 3)]
    pub iters: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct RfnfGenArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: Io,
    #[arg(long)]
    pub guidance: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub radius: usize,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Anchor weight toward the enhanced flash image.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Detail gain of the enhanced flash image.
    #[arg(long, default_value_t = 1.5)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Truncate)]
    pub boundary: BoundaryArg,
    #[arg(long, default_value_t = 3)]
    pub iters: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct MetricsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub metrics_against: PathBuf,
    /// Also write the metrics as a one-row CSV file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchFilter {
    Box,
    Gf,
    Tvgf,
    Cgf,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 1000)]
    pub width: usize,
    #[arg(long, default_value_t = 1000)]
    pub height: usize,
    #[arg(long, value_enum, default_value_t = BenchFilter::Gf)]
    pub filter: BenchFilter,
    #[arg(long, default_value_t = 10)]
    pub radius: usize,
    #[arg(long, default_value_t = 5)]
    pub repeat: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// noise, piecewise, texture or flash-pair.
    #[arg(long)]
    pub kind: SynthKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    /// Main image: noisy, clean, textured, or the no-flash exposure.
    #[arg(long)]
    pub output: PathBuf,
    /// Companion image: clean scene, (none), structure, or the flash exposure.
    #[arg(long)]
    pub companion: Option<PathBuf>,
    /// Noise level of the `noise` kind.
    #[arg(long, default_value_t = 0.05)]
    pub sigma: f64,
    /// 255 or 65535.
    #[arg(long, default_value_t = 65535)]
    pub maxval: u16,
}
