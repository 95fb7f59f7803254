//! Scene manifests: one JSON document that names the band rasters and
//! carries the sensor, orbit and layout metadata. Raster paths are relative
//! to the manifest's directory.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{Band, BandLayout, OrbitSpec, SensorSpec};
use crate::io::raster::{read_band, write_band};
use crate::io::{read_json, write_json};
use crate::scene::MultiBandScene;
use crate::sim::RowTimeMap;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
const ROW_TIMES_FILE: &str = "row_times.json";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RasterFormat {
    #[default]
    Pgm,
    Png,
}

impl RasterFormat {
    pub fn extension(self) -> &'static str {
        match self {
            RasterFormat::Pgm => "pgm",
            RasterFormat::Png => "png",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandFile {
    pub band: Band,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneManifest {
    pub schema_version: u32,
    pub scene_id: String,
    pub width_px: usize,
    pub height_px: usize,
    pub grid_spacing_m: f64,
    pub sensor: SensorSpec,
    pub orbit: OrbitSpec,
    pub layout: BandLayout,
    pub bands: Vec<BandFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_times_path: Option<String>,
}

/// Writes the band rasters, the row-time map if any, and the manifest into
/// `dir`. Returns the manifest path.
pub fn save_scene(scene: &MultiBandScene, dir: &Path, format: RasterFormat) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let bands = scene
        .bands
        .par_iter()
        .map(|b| {
            let name = format!("{}.{}", b.band, format.extension());
            write_band(&dir.join(&name), b)?;
            Ok(BandFile { band: b.band, path: name })
        })
        .collect::<Result<Vec<_>>>()?;
    let row_times_path = match &scene.row_times {
        Some(rt) => {
            write_json(&dir.join(ROW_TIMES_FILE), rt)?;
            Some(ROW_TIMES_FILE.to_string())
        }
        None => None,
    };
    let manifest = SceneManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        scene_id: scene.scene_id.clone(),
        width_px: scene.width(),
        height_px: scene.height(),
        grid_spacing_m: scene.grid_spacing_m(),
        sensor: scene.sensor,
        orbit: scene.orbit,
        layout: scene.layout.clone(),
        bands,
        row_times_path,
    };
    let path = dir.join(MANIFEST_FILE);
    write_json(&path, &manifest)?;
    Ok(path)
}

pub fn read_manifest(path: &Path) -> Result<SceneManifest> {
    let m: SceneManifest = read_json(path)?;
    if m.schema_version == 0 || m.schema_version > MANIFEST_SCHEMA_VERSION {
        return Err(Error::invalid(format!(
            "{}: manifest schema version {} is not supported (latest {MANIFEST_SCHEMA_VERSION})",
            path.display(),
            m.schema_version
        )));
    }
    Ok(m)
}

/// Loads a scene from its manifest. Bands are read concurrently.
pub fn load_scene(manifest_path: &Path) -> Result<MultiBandScene> {
    let m = read_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let files: Vec<&BandFile> = Band::ALL
        .iter()
        .map(|&band| m.bands.iter().find(|f| f.band == band).ok_or(Error::MissingBand(band)))
        .collect::<Result<_>>()?;
    let images = files
        .par_iter()
        .map(|f| {
            let img = read_band(&base.join(&f.path), f.band, m.grid_spacing_m)?;
            if img.width != m.width_px || img.height != m.height_px {
                return Err(Error::DimensionMismatch(format!(
                    "band {} raster is {}x{}, manifest says {}x{}",
                    f.band, img.width, img.height, m.width_px, m.height_px
                )));
            }
            Ok(img)
        })
        .collect::<Result<Vec<_>>>()?;
    let row_times: Option<RowTimeMap> = m.row_times_path.as_ref().map(|p| read_json(&base.join(p))).transpose()?;
    MultiBandScene::new(m.scene_id, m.sensor, m.orbit, m.layout, images, row_times)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::BandImage;

    fn scene(w: usize, h: usize) -> MultiBandScene {
        let bands = Band::ALL
            .iter()
            .map(|&b| {
                let values = (0..w * h).map(|i| ((i * 31 + b.index() * 977) % 4096) as f32).collect();
                BandImage::new(b, w, h, 3.0, values).unwrap()
            })
            .collect();
        MultiBandScene::new("s", SensorSpec::default(), OrbitSpec::default(), BandLayout::default(), bands, None).unwrap()
    }

    #[test]
    fn round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let s = scene(21, 13);
        for format in [RasterFormat::Pgm, RasterFormat::Png] {
            let p = save_scene(&s, &dir.path().join(format.extension()), format).unwrap();
            assert_eq!(load_scene(&p).unwrap(), s);
        }
    }

    #[test]
    fn missing_band() {
        let dir = tempfile::tempdir().unwrap();
        let p = save_scene(&scene(8, 8), dir.path(), RasterFormat::Pgm).unwrap();
        let mut m = read_manifest(&p).unwrap();
        m.bands.retain(|b| b.band != Band::NearInfrared);
        write_json(&p, &m).unwrap();
        assert!(matches!(load_scene(&p), Err(Error::MissingBand(Band::NearInfrared))));
    }

    #[test]
    fn mismatched_raster_size() {
        let dir = tempfile::tempdir().unwrap();
        let p = save_scene(&scene(8, 8), dir.path(), RasterFormat::Pgm).unwrap();
        write_band(&dir.path().join("R.pgm"), &BandImage::filled(Band::Red, 8, 9, 3.0, 1.0).unwrap()).unwrap();
        assert!(matches!(load_scene(&p), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn unreadable_raster() {
        let dir = tempfile::tempdir().unwrap();
        let p = save_scene(&scene(8, 8), dir.path(), RasterFormat::Pgm).unwrap();
        std::fs::write(dir.path().join("G1.pgm"), b"not an image").unwrap();
        assert!(matches!(load_scene(&p), Err(Error::Raster { .. })));
    }
}
