use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bandshift", version, about = "Detect movers in multi-spectral push-broom scenes and measure their speed")]
pub struct Cli {
    /// Print machine-readable JSON on stdout instead of a summary.
    #[arg(long, global = true)]
    pub json: bool,

    /// Worker threads for band-parallel stages (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inter-band acquisition timing from orbit and sensor parameters.
    Timing(TimingArgs),
    /// Render a scene script into band rasters, a manifest and ground truth.
    Simulate(SimulateArgs),
    /// Find moving objects in a scene and write a detection report.
    Detect(DetectArgs),
    /// Turn a detection report into velocities and altitude solutions.
    Analyze(AnalyzeArgs),
}

/// Where the mean motion comes from, when not from a manifest or report.
#[derive(Debug, Args, Clone)]
pub struct OrbitArgs {
    /// Two-line element file; its mean motion is used.
    #[arg(long, conflicts_with = "mean_motion")]
    pub tle: Option<PathBuf>,

    /// Mean motion, revolutions per day.
    #[arg(long)]
    pub mean_motion: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TimingArgs {
    /// Take sensor and orbit from a scene manifest; flags still override.
    #[arg(long)]
    pub manifest: Option<PathBuf>,

    #[command(flatten)]
    pub orbit: OrbitArgs,

    /// Native ground sample distance, m. Required without a manifest.
    #[arg(long)]
    pub gsd: Option<f64>,

    /// Along-track strip width, sensor pixels.
    #[arg(long)]
    pub strip_width_px: Option<u32>,

    /// Time between exposures, s.
    #[arg(long)]
    pub frame_interval: Option<f64>,

    #[arg(long)]
    pub earth_radius_km: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Pgm,
    Png,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scene script (JSON).
    pub script: PathBuf,

    /// Output directory.
    #[arg(long, env = "BANDSHIFT_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,

    /// Override the script's random seed.
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long, value_enum, default_value = "pgm")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Scene manifest.
    pub manifest: PathBuf,

    /// Output directory for the report and optional rasters.
    #[arg(long, env = "BANDSHIFT_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,

    /// Detection configuration file (JSON); flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Keep pixels above this quantile of |difference| (default 0.95).
    #[arg(long, conflicts_with = "fraction_of_peak")]
    pub percentile: Option<f64>,

    /// Keep pixels above this fraction of the peak |difference|.
    #[arg(long)]
    pub fraction_of_peak: Option<f64>,

    /// Minimum threshold in robust standard deviations (0 disables).
    #[arg(long)]
    pub noise_floor: Option<f64>,

    /// Use one threshold level for all difference images.
    #[arg(long)]
    pub shared_threshold: bool,

    #[arg(long)]
    pub min_area: Option<usize>,

    /// Largest positive-to-negative blob distance, px.
    #[arg(long)]
    pub max_displacement: Option<f64>,

    /// Cross-band link gate, px.
    #[arg(long)]
    pub gate: Option<f64>,

    /// Fewest linked pairs for a track.
    #[arg(long)]
    pub min_pairs: Option<usize>,

    /// Keep the pair-derived positions instead of re-measuring them.
    #[arg(long)]
    pub no_refine: bool,

    /// Also write every difference image and its thresholded version.
    #[arg(long)]
    pub emit_rasters: bool,

    /// Also write an RGB composite (R, G1, B).
    #[arg(long)]
    pub composite: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Detection report written by `detect`.
    pub report: PathBuf,

    /// Output directory for the analysis report and curve.
    #[arg(long, env = "BANDSHIFT_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,

    /// Override the report's orbit.
    #[command(flatten)]
    pub orbit: OrbitArgs,

    /// Keep every frame-shift adjustment at zero.
    #[arg(long)]
    pub no_adjust: bool,

    /// Position uncertainty of one sample, px.
    #[arg(long)]
    pub pixel_sigma: Option<f64>,

    /// Known direction of motion "x,y" for altitude resolution.
    #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
    pub heading: Option<[f64; 2]>,

    /// Heading uncertainty, degrees.
    #[arg(long, default_value_t = 0.0)]
    pub heading_sigma: f64,

    /// Highest altitude of the ambiguity curve, m.
    #[arg(long, default_value_t = 50_000.0)]
    pub curve_max_altitude: f64,
}

fn parse_vec2(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [x, y] = parts[..] else {
        return Err("expected two comma-separated numbers".into());
    };
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    let v = [p(x)?, p(y)?];
    if v[0] == 0.0 && v[1] == 0.0 {
        return Err("heading must be nonzero".into());
    }
    Ok(v)
}
