use std::path::{Path, PathBuf};

use bandshift::detection::{spectral_adjacent_pairs, ThresholdMode};
use bandshift::figures::{diff_to_gray, rgb_composite, save_png};
use bandshift::imaging::band_time_offset;
use bandshift::io::manifest::read_manifest;
use bandshift::io::{load_scene, parse_tle_text, read_report, save_scene, write_json, write_report, DetectionReport, RasterFormat};
use bandshift::pipeline::{analyze, detection_report, AnalysisConfig, DetectionConfig};
use bandshift::sim::{simulate, SceneScript};
use bandshift::{Band, OrbitSpec, SensorSpec, Timing, Vec2};
use serde::Serialize;

use crate::args::{AnalyzeArgs, DetectArgs, Format, OrbitArgs, SimulateArgs, TimingArgs};
use crate::error::{CliError, CliResult};

/// What a subcommand hands back for printing.
pub struct Outcome {
    pub summary: String,
    pub json: serde_json::Value,
}

fn outcome<T: Serialize>(summary: String, value: &T) -> Outcome {
    Outcome { summary, json: serde_json::to_value(value).expect("outputs serialize") }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Output { path: dir.to_path_buf(), source })
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Output { path: path.to_path_buf(), source })
}

/// Mean motion from flags, if any were given.
fn mean_motion_override(args: &OrbitArgs) -> CliResult<Option<f64>> {
    if let Some(path) = &args.tle {
        let text = std::fs::read_to_string(path).map_err(|e| bandshift::Error::Io { path: path.clone(), source: e })?;
        let tle = parse_tle_text(&text).map_err(bandshift::Error::from)?;
        log::info!("mean motion {} rev/day from TLE {}", tle.mean_motion_rev_per_day, tle.satellite_number);
        return Ok(Some(tle.mean_motion_rev_per_day));
    }
    Ok(args.mean_motion)
}

#[derive(Debug, Serialize)]
struct PairOffset {
    pair: String,
    offset_s: f64,
}

#[derive(Debug, Serialize)]
struct BandOffset {
    band: Band,
    strip_position: u32,
    offset_s: f64,
}

#[derive(Debug, Serialize)]
struct TimingTable {
    mean_motion_rev_per_day: f64,
    gsd_m: f64,
    strip_width_px: u32,
    #[serde(flatten)]
    timing: Timing,
    pair_offsets: Vec<PairOffset>,
    band_offsets: Vec<BandOffset>,
}

pub fn cmd_timing(args: &TimingArgs) -> CliResult<Outcome> {
    let (mut sensor, mut orbit, layout) = match &args.manifest {
        Some(path) => {
            let m = read_manifest(path)?;
            (m.sensor, m.orbit, m.layout)
        }
        None => {
            let Some(gsd) = args.gsd else {
                return Err(CliError::Usage("timing needs --gsd (or --manifest)".into()));
            };
            (SensorSpec { gsd_m: gsd, ..SensorSpec::default() }, OrbitSpec::default(), Default::default())
        }
    };
    if let Some(gsd) = args.gsd {
        sensor.gsd_m = gsd;
    }
    if let Some(n) = args.strip_width_px {
        sensor.strip_width_px = n;
    }
    if let Some(f) = args.frame_interval {
        sensor.frame_interval_s = f;
    }
    if let Some(r) = args.earth_radius_km {
        orbit.earth_radius_km = r;
    }
    if let Some(mm) = mean_motion_override(&args.orbit)? {
        orbit.mean_motion_rev_per_day = mm;
    }
    let timing = Timing::new(&sensor, &orbit)?;
    let dt = timing.delta_t_color_s;
    let pair_offsets = spectral_adjacent_pairs(&layout)?
        .into_iter()
        .map(|p| Ok(PairOffset { pair: p.to_string(), offset_s: band_time_offset(&layout, p.minuend, p.subtrahend, dt)? }))
        .collect::<bandshift::Result<Vec<_>>>()?;
    let band_offsets = layout
        .temporal_order()
        .into_iter()
        .map(|b| {
            let p = layout.strip_position(b)?;
            Ok(BandOffset { band: b, strip_position: p, offset_s: f64::from(p) * dt })
        })
        .collect::<bandshift::Result<Vec<_>>>()?;
    let table = TimingTable {
        mean_motion_rev_per_day: orbit.mean_motion_rev_per_day,
        gsd_m: sensor.gsd_m,
        strip_width_px: sensor.strip_width_px,
        timing,
        pair_offsets,
        band_offsets,
    };

    let mut s = String::new();
    s += &format!("mean motion         {:.8} rev/day\n", table.mean_motion_rev_per_day);
    s += &format!("ground speed        {:.2} m/s\n", timing.ground_speed_mps);
    s += &format!("strip extent        {:.1} m\n", timing.strip_extent_m);
    s += &format!("delta t (color)     {:.6} s\n", dt);
    s += &format!("frame interval      {:.3} s\n", timing.frame_interval_s);
    s += &format!("frame advance       {:.1} m\n", timing.frame_advance_m);
    s += &format!("satellite altitude  {:.1} km\n", timing.satellite_altitude_m / 1000.0);
    s += "pair offsets:\n";
    for p in &table.pair_offsets {
        s += &format!("  {:<7} {:+.6} s\n", p.pair, p.offset_s);
    }
    s += "band offsets (acquisition order):\n";
    for b in &table.band_offsets {
        s += &format!("  {:<4} strip {}  {:.6} s\n", b.band.to_string(), b.strip_position, b.offset_s);
    }
    Ok(outcome(s, &table))
}

#[derive(Debug, Serialize)]
struct SimulateOutput {
    manifest: PathBuf,
    truth: PathBuf,
    objects: usize,
    clean_objects: usize,
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<Outcome> {
    let mut script = SceneScript::load(&args.script)?;
    if let Some(seed) = args.seed {
        script.seed = seed;
    }
    let sim = simulate(&script)?;
    create_dir(&args.out_dir)?;
    let format = match args.format {
        Format::Pgm => RasterFormat::Pgm,
        Format::Png => RasterFormat::Png,
    };
    let manifest = save_scene(&sim.scene, &args.out_dir, format)?;
    let truth = args.out_dir.join("truth.json");
    write_json(&truth, &sim.truth)?;
    let out = SimulateOutput {
        manifest: manifest.clone(),
        truth: truth.clone(),
        objects: sim.truth.objects.len(),
        clean_objects: sim.truth.objects.iter().filter(|o| o.is_clean()).count(),
    };
    let summary = format!(
        "simulated {}x{} scene with {} object(s)\nmanifest  {}\ntruth     {}\n",
        script.width_px,
        script.height_px,
        out.objects,
        manifest.display(),
        truth.display()
    );
    Ok(outcome(summary, &out))
}

fn detection_config(args: &DetectArgs) -> CliResult<DetectionConfig> {
    let mut c: DetectionConfig = match &args.config {
        Some(p) => bandshift::io::read_json(p)?,
        None => DetectionConfig::default(),
    };
    if let Some(p) = args.percentile {
        c.threshold = ThresholdMode::Percentile { percentile: p };
    }
    if let Some(f) = args.fraction_of_peak {
        c.threshold = ThresholdMode::FractionOfPeak { fraction: f };
    }
    if let Some(n) = args.noise_floor {
        c.noise_floor_sigma = n;
    }
    c.shared_threshold |= args.shared_threshold;
    if let Some(a) = args.min_area {
        c.min_area_px = a;
    }
    if let Some(d) = args.max_displacement {
        c.max_displacement_px = d;
    }
    if let Some(g) = args.gate {
        c.link.gate_px = g;
    }
    if let Some(n) = args.min_pairs {
        c.link.min_pairs = n;
    }
    if args.no_refine {
        c.refine = false;
    }
    c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(c)
}

pub fn cmd_detect(args: &DetectArgs) -> CliResult<Outcome> {
    let config = detection_config(args)?;
    let scene = load_scene(&args.manifest)?;
    let (report, det) = detection_report(&scene, &config)?;
    create_dir(&args.out_dir)?;
    let path = args.out_dir.join("detections.json");
    write_report(&path, &report)?;
    if args.emit_rasters {
        for (d, t) in det.diffs.iter().zip(&det.thresholded) {
            let name = format!("{}_{}", d.bands.minuend, d.bands.subtrahend);
            save_png(&args.out_dir.join(format!("diff_{name}.png")), &diff_to_gray(d))?;
            save_png(&args.out_dir.join(format!("threshold_{name}.png")), &diff_to_gray(t))?;
        }
    }
    if args.composite {
        let img = rgb_composite(&scene, [Band::Red, Band::GreenI, Band::Blue]);
        save_png(&args.out_dir.join("composite.png"), &img)?;
    }
    let mut s = format!("{} track(s) in {}\n", report.tracks.len(), report.scene_id);
    for t in &report.tracks {
        let p = t.samples[0].position_px;
        s += &format!(
            "  track {}: {:?}, {} pairs, {} bands, first at ({:.1}, {:.1}) px{}\n",
            t.id,
            t.polarity,
            t.pair_count,
            t.samples.len(),
            p.x,
            p.y,
            if t.ambiguous { ", ambiguous links" } else { "" }
        );
    }
    s += &format!("report    {}\n", path.display());
    Ok(outcome(s, &report))
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> CliResult<Outcome> {
    let report: DetectionReport = read_report(&args.report)?;
    let mut orbit = report.orbit;
    if let Some(mm) = mean_motion_override(&args.orbit)? {
        orbit.mean_motion_rev_per_day = mm;
    }
    let timing = Timing::new(&report.sensor, &orbit)?;
    let mut config = AnalysisConfig {
        heading: args.heading.map(|[x, y]| Vec2::new(x, y)),
        heading_sigma_deg: args.heading_sigma,
        curve_max_altitude_m: args.curve_max_altitude,
        ..AnalysisConfig::default()
    };
    config.kinematics.adjust = !args.no_adjust;
    if let Some(s) = args.pixel_sigma {
        config.kinematics.pixel_sigma_px = s;
    }
    let analysis = analyze(&report, &timing, &config)?;
    create_dir(&args.out_dir)?;
    let path = args.out_dir.join("analysis.json");
    write_report(&path, &analysis)?;
    let curve = args.out_dir.join("ambiguity.csv");
    write_text(&curve, &analysis.ambiguity_curve.to_csv())?;

    let mut s = format!("{} velocity estimate(s)\n", analysis.velocities.len());
    for v in &analysis.velocities {
        let shifts = v.segments.iter().filter(|g| g.adjustment_s != 0.0).count();
        s += &format!(
            "  track {}: {:.1} +/- {:.1} m/s, heading {:.1} deg, {} frame shift(s){}\n",
            v.track_id,
            v.speed_mps,
            v.sigma_v_mps,
            v.heading_deg,
            shifts,
            if v.low_confidence { ", low confidence" } else { "" }
        );
    }
    for a in &analysis.altitudes {
        match (&a.solution, &a.note) {
            (Some(sol), _) => {
                s += &format!(
                    "  track {}: altitude {:.0} m, true speed {:.1} m/s\n",
                    a.track_id, sol.altitude_m, sol.true_speed_mps
                )
            }
            (None, note) => s += &format!("  track {}: altitude unresolved ({})\n", a.track_id, note.as_deref().unwrap_or("")),
        }
    }
    s += &format!("report    {}\ncurve     {}\n", path.display(), curve.display());
    Ok(outcome(s, &analysis))
}
