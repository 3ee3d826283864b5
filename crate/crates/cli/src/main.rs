//! `noisesynth` command-line entry point.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit status for a run where at least one file failed.
const EXIT_FILE_FAILURE: u8 = 1;
/// Exit status for unusable configuration or flags.
const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "noisesynth",
    version,
    about = "Seeded camera and radar degradation toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Degrade one image or every image under a directory.
    Camera(CameraArgs),
    /// Degrade one radar PCD file or every PCD under a directory.
    Radar(RadarArgs),
    /// Generate the full labeled grid for a dataset tree, with manifest.
    GenDataset(GenArgs),
    /// Run the statistical validation suite.
    Validate(ValidateArgs),
    /// Render comparison strips (degraded images and radar bird-eye views).
    Render(RenderArgs),
}

#[derive(Debug, Args, Clone, Default)]
struct CommonArgs {
    /// Input file or directory.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file or directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated levels: `30%` or a fraction such as `0.3`.
    #[arg(long)]
    levels: Option<String>,
    /// Comma-separated camera kinds: blur, high_exposure, low_exposure, additive.
    #[arg(long)]
    kinds: Option<String>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    workers: Option<usize>,
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// List planned outputs without writing anything.
    #[arg(long)]
    dry_run: bool,
    /// Keep outputs that already exist.
    #[arg(long)]
    resume: bool,
    /// File listing input-relative paths to process (one per line).
    #[arg(long)]
    include: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Default)]
struct RadarFlags {
    /// JSON object mapping input-relative PCD paths to ego velocity `[vx, vy]`.
    #[arg(long)]
    ego_metadata: Option<PathBuf>,
    /// Disable the random term of the detection coefficient.
    #[arg(long)]
    no_w_noise: bool,
    /// Do not shift points at a zero level.
    #[arg(long)]
    skip_shift_at_zero: bool,
    /// Sensor minimum range, meters.
    #[arg(long)]
    r_min: Option<f64>,
    /// Sensor maximum range, meters.
    #[arg(long)]
    r_max: Option<f64>,
    /// Ghost range margin beyond the farthest point, meters.
    #[arg(long)]
    ghost_margin: Option<f64>,
    /// Maximum number of ghosts per frame.
    #[arg(long)]
    ghost_max: Option<u32>,
    /// Manufacturer range accuracy, meters.
    #[arg(long)]
    acc_r: Option<f64>,
    /// Manufacturer azimuth accuracy, degrees.
    #[arg(long)]
    acc_theta: Option<f64>,
    /// Manufacturer velocity accuracy, m/s.
    #[arg(long)]
    acc_v: Option<f64>,
}

#[derive(Debug, Args)]
struct CameraArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct RadarArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    radar: RadarFlags,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    radar: RadarFlags,
    /// Only process images.
    #[arg(long, conflicts_with = "radar_only")]
    camera_only: bool,
    /// Only process radar files.
    #[arg(long)]
    radar_only: bool,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write the report as JSON to this path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Print the checks that would run without running them.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// Image to degrade; a built-in test scene is used when omitted.
    #[arg(long)]
    image: Option<PathBuf>,
    /// Radar PCD to degrade; a synthetic sweep is used when omitted.
    #[arg(long)]
    pcd: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated levels for the strips (default 0%,30%,60%,100%).
    #[arg(long)]
    levels: Option<String>,
    /// BEV resolution in meters per pixel.
    #[arg(long, default_value_t = 0.25)]
    resolution: f64,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dry_run: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Camera(a) => commands::camera(a),
        Command::Radar(a) => commands::radar(a),
        Command::GenDataset(a) => commands::gen_dataset(a),
        Command::Validate(a) => commands::validate(a),
        Command::Render(a) => commands::render(a),
    };
    match result {
        Ok(commands::Outcome::Success) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Failures(n)) => {
            eprintln!("{n} file(s) failed");
            ExitCode::from(EXIT_FILE_FAILURE)
        }
        Err(commands::CommandError::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(commands::CommandError::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FILE_FAILURE)
        }
    }
}
