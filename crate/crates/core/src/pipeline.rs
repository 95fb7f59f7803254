//! End-to-end detection and analysis of a scene.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{
    apply_level, extract_blobs, link_track, normalize, pair_blobs, refine_track, shared_threshold_level,
    spectral_adjacent_pairs, threshold_level, DiffImage, LinkConfig, NormalizedBand, PairSet, ThresholdMode, Track,
};
use crate::detection::difference_normalized;
use crate::error::{Error, Result};
use crate::io::report::{AnalysisReport, DetectionReport, PairSummary, ThresholdSummary, TrackAltitude, REPORT_SCHEMA_VERSION};
use crate::kinematics::{estimate_velocity, resolve_altitude, AltitudeGeometry, AmbiguityCurve, KinematicsConfig};
use crate::scene::MultiBandScene;
use crate::{Timing, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionConfig {
    pub threshold: ThresholdMode,
    /// Lower bound on the threshold in robust standard deviations of the
    /// difference image; 0 disables it.
    pub noise_floor_sigma: f64,
    /// One threshold level pooled over all difference images.
    pub shared_threshold: bool,
    pub min_area_px: usize,
    pub max_displacement_px: f64,
    pub link: LinkConfig,
    /// Re-measure track positions on the band images.
    pub refine: bool,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            threshold: ThresholdMode::default(),
            noise_floor_sigma: 5.0,
            shared_threshold: false,
            min_area_px: 3,
            max_displacement_px: 320.0,
            link: LinkConfig::default(),
            refine: true,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        self.threshold.validate()?;
        if !(self.noise_floor_sigma >= 0.0) {
            return Err(Error::invalid("noise floor must be non-negative"));
        }
        if !(self.max_displacement_px > 0.0) {
            return Err(Error::invalid("maximum pair displacement must be positive"));
        }
        if !(self.link.gate_px >= 0.0) {
            return Err(Error::invalid("link gate must be non-negative"));
        }
        Ok(())
    }
}

/// Everything the detection stages produce, in spectral pair order.
#[derive(Debug, Clone)]
pub struct Detection {
    pub diffs: Vec<DiffImage>,
    pub thresholded: Vec<DiffImage>,
    pub levels: Vec<Option<f32>>,
    pub pair_sets: Vec<PairSet>,
    pub tracks: Vec<Track>,
}

pub fn detect(scene: &MultiBandScene, config: &DetectionConfig) -> Result<Detection> {
    config.validate()?;
    let normalized: Vec<NormalizedBand> = scene.bands.par_iter().map(normalize).collect();
    let by_band = |b| normalized.iter().find(|n: &&NormalizedBand| n.band == b).expect("scenes hold every band");
    let band_pairs = spectral_adjacent_pairs(&scene.layout)?;
    let diffs = band_pairs
        .par_iter()
        .map(|p| difference_normalized(by_band(p.minuend), by_band(p.subtrahend)))
        .collect::<Result<Vec<_>>>()?;
    let levels: Vec<Option<f32>> = if config.shared_threshold {
        let level = shared_threshold_level(&diffs, config.threshold, config.noise_floor_sigma)?;
        vec![level; diffs.len()]
    } else {
        diffs
            .par_iter()
            .map(|d| threshold_level(&d.values, config.threshold, config.noise_floor_sigma))
            .collect::<Result<_>>()?
    };
    let g = scene.grid_spacing_m();
    let (thresholded, pair_sets): (Vec<DiffImage>, Vec<PairSet>) = diffs
        .par_iter()
        .zip(&levels)
        .map(|(d, level)| {
            let t = apply_level(d, *level);
            let blobs = extract_blobs(&t, config.min_area_px);
            let pairs = pair_blobs(&blobs, config.max_displacement_px, d.bands, g);
            (t, pairs)
        })
        .unzip();
    let mut tracks = link_track(&pair_sets, &scene.layout, g, &config.link)?;
    if config.refine {
        let spectral: Vec<NormalizedBand> = scene.layout.spectral_order().into_iter().map(|b| by_band(b).clone()).collect();
        tracks = tracks
            .par_iter()
            .map(|t| refine_track(t, &spectral, &scene.layout))
            .collect::<Result<_>>()?;
    }
    Ok(Detection { diffs, thresholded, levels, pair_sets, tracks })
}

/// Runs detection and condenses it into a report.
pub fn detection_report(scene: &MultiBandScene, config: &DetectionConfig) -> Result<(DetectionReport, Detection)> {
    let det = detect(scene, config)?;
    let report = DetectionReport {
        schema_version: REPORT_SCHEMA_VERSION,
        scene_id: scene.scene_id.clone(),
        width_px: scene.width(),
        height_px: scene.height(),
        grid_spacing_m: scene.grid_spacing_m(),
        sensor: scene.sensor,
        orbit: scene.orbit,
        layout: scene.layout.clone(),
        config: *config,
        thresholds: det
            .thresholded
            .iter()
            .zip(&det.levels)
            .map(|(t, level)| ThresholdSummary { bands: t.bands, level: *level, surviving_px: t.nonzero_count() })
            .collect(),
        pairs: det
            .pair_sets
            .iter()
            .map(|p| PairSummary { bands: p.bands, pairs: p.pairs.clone(), unmatched_blobs: p.unmatched.len() })
            .collect(),
        tracks: det.tracks.clone(),
    };
    Ok((report, det))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub kinematics: KinematicsConfig,
    /// Known direction of motion of every track; when set, each track's
    /// altitude and true speed are resolved.
    pub heading: Option<Vec2>,
    pub heading_sigma_deg: f64,
    /// Headings closer than this to the flight direction are not resolved.
    pub min_heading_angle_deg: f64,
    pub curve_max_altitude_m: f64,
    pub curve_samples: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            kinematics: KinematicsConfig::default(),
            heading: None,
            heading_sigma_deg: 0.0,
            min_heading_angle_deg: 5.0,
            curve_max_altitude_m: 50e3,
            curve_samples: 51,
        }
    }
}

/// Velocities, altitude solutions and the ambiguity curve for a detection
/// report under `timing`.
pub fn analyze(report: &DetectionReport, timing: &Timing, config: &AnalysisConfig) -> Result<AnalysisReport> {
    let velocities = report
        .tracks
        .iter()
        .filter(|t| t.samples.len() >= 2)
        .map(|t| estimate_velocity(t, timing, report.grid_spacing_m, &config.kinematics))
        .collect::<Result<Vec<_>>>()?;
    let altitudes = match config.heading {
        Some(heading) => {
            let mut geometry = AltitudeGeometry::new(heading, timing);
            geometry.heading_sigma_deg = config.heading_sigma_deg;
            geometry.min_angle_deg = config.min_heading_angle_deg;
            velocities
                .iter()
                .map(|v| match resolve_altitude(v.mean_velocity_mps, &geometry) {
                    Ok(s) => Ok(TrackAltitude { track_id: v.track_id, solution: Some(s), note: None }),
                    Err(Error::Ambiguous(msg)) => Ok(TrackAltitude { track_id: v.track_id, solution: None, note: Some(msg) }),
                    Err(e) => Err(e),
                })
                .collect::<Result<_>>()?
        }
        None => Vec::new(),
    };
    let curve = AmbiguityCurve::sample(
        timing.satellite_altitude_m,
        timing.strip_extent_m,
        timing.delta_t_color_s,
        config.curve_max_altitude_m,
        config.curve_samples,
    )?;
    Ok(AnalysisReport {
        schema_version: REPORT_SCHEMA_VERSION,
        scene_id: report.scene_id.clone(),
        timing: *timing,
        config: *config,
        velocities,
        altitudes,
        ambiguity_curve: curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate, BandValues, ObjectScript, SceneScript, Shape};

    fn script(objects: Vec<ObjectScript>) -> SceneScript {
        let mut s = SceneScript::new(256, 256, 3.0);
        s.objects = objects;
        s.noise_sigma_dn = 4.0;
        s.seed = 11;
        s
    }

    fn mover(x: f64, y: f64, vx: f64, vy: f64) -> ObjectScript {
        ObjectScript {
            shape: Shape::Rectangle,
            length_m: 15.0,
            width_m: 9.0,
            orientation_deg: None,
            reflectance_dn: BandValues::Uniform(4000.0),
            position_m: Vec2::new(x, y),
            velocity_mps: Vec2::new(vx, vy),
            altitude_m: 0.0,
        }
    }

    #[test]
    fn static_scene_has_no_tracks() {
        let sim = simulate(&script(Vec::new())).unwrap();
        let det = detect(&sim.scene, &DetectionConfig::default()).unwrap();
        assert!(det.tracks.is_empty());
    }

    #[test]
    fn cross_track_mover_is_found_and_timed() {
        let sim = simulate(&script(vec![mover(150.0, 400.0, 60.0, 0.0)])).unwrap();
        assert!(sim.truth.objects[0].is_clean());
        let (report, _) = detection_report(&sim.scene, &DetectionConfig::default()).unwrap();
        assert_eq!(report.tracks.len(), 1);
        assert_eq!(report.tracks[0].samples.len(), 8);
        let timing = sim.scene.timing().unwrap();
        let analysis = analyze(&report, &timing, &AnalysisConfig::default()).unwrap();
        let v = &analysis.velocities[0];
        assert!((v.mean_velocity_mps - Vec2::new(60.0, 0.0)).norm() < 3.0, "{:?}", v.mean_velocity_mps);
        assert!(analysis.altitudes.is_empty());
        assert_eq!(analysis.ambiguity_curve.points[0].apparent_speed_mps, 0.0);
    }

    #[test]
    fn rejects_bad_config() {
        let sim = simulate(&script(Vec::new())).unwrap();
        let config = DetectionConfig { max_displacement_px: 0.0, ..DetectionConfig::default() };
        assert!(detect(&sim.scene, &config).is_err());
    }
}
