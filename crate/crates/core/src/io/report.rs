//! Detection and analysis reports: schema-versioned JSON whose bytes depend
//! only on the values.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::detection::{BandPair, DetectionPair, Track};
use crate::error::Result;
use crate::imaging::{BandLayout, OrbitSpec, SensorSpec, Timing};
use crate::io::{read_json, write_json};
use crate::kinematics::{AltitudeSolution, AmbiguityCurve, VelocityEstimate};
use crate::pipeline::{AnalysisConfig, DetectionConfig};

/// Bumped whenever a report field changes meaning or disappears.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSummary {
    pub bands: BandPair,
    /// `None` when the difference image was flat.
    pub level: Option<f32>,
    pub surviving_px: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub bands: BandPair,
    pub pairs: Vec<DetectionPair>,
    pub unmatched_blobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub schema_version: u32,
    pub scene_id: String,
    pub width_px: usize,
    pub height_px: usize,
    pub grid_spacing_m: f64,
    pub sensor: SensorSpec,
    pub orbit: OrbitSpec,
    pub layout: BandLayout,
    /// Effective configuration of the run.
    pub config: DetectionConfig,
    pub thresholds: Vec<ThresholdSummary>,
    pub pairs: Vec<PairSummary>,
    pub tracks: Vec<Track>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackAltitude {
    pub track_id: usize,
    pub solution: Option<AltitudeSolution>,
    /// Why no solution was possible.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub scene_id: String,
    pub timing: Timing,
    pub config: AnalysisConfig,
    pub velocities: Vec<VelocityEstimate>,
    pub altitudes: Vec<TrackAltitude>,
    pub ambiguity_curve: AmbiguityCurve,
}

pub fn write_report<R: Serialize>(path: &Path, report: &R) -> Result<()> {
    write_json(path, report)
}

pub fn read_report<R: DeserializeOwned>(path: &Path) -> Result<R> {
    read_json(path)
}
