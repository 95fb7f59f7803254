//! Files in and out: band rasters, scene manifests, reports, ephemerides
//! and scene identifiers.

pub mod manifest;
pub mod raster;
pub mod report;
pub mod scene_id;
pub mod tle;

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub use manifest::{load_scene, save_scene, BandFile, RasterFormat, SceneManifest, MANIFEST_SCHEMA_VERSION};
pub use raster::{read_band, write_band};
pub use report::{read_report, write_report, AnalysisReport, DetectionReport, REPORT_SCHEMA_VERSION};
pub use scene_id::{parse_scene_id, SceneId};
pub use tle::{parse_tle, parse_tle_text, TleError, TleRecord};

/// Pretty JSON with a trailing newline. Field order follows the struct
/// definitions, so equal values always give identical bytes.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })
}
