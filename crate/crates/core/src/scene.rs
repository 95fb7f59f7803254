//! In-memory rasters and scenes.

use crate::error::{Error, Result};
use crate::imaging::{Band, BandLayout, OrbitSpec, SensorSpec, Timing};
use crate::sim::RowTimeMap;

/// One spectral band on the scene grid. Pixel `(col, row)` is centred on the
/// ground point `(col, row) * grid_spacing_m`; rows advance in the direction
/// of flight.
#[derive(Debug, Clone, PartialEq)]
pub struct BandImage {
    pub band: Band,
    pub width: usize,
    pub height: usize,
    pub grid_spacing_m: f64,
    pub values: Vec<f32>,
}

impl BandImage {
    pub fn new(band: Band, width: usize, height: usize, grid_spacing_m: f64, values: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be positive"));
        }
        if values.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {width}x{height} image",
                values.len()
            )));
        }
        if !(grid_spacing_m.is_finite() && grid_spacing_m > 0.0) {
            return Err(Error::invalid("grid spacing must be positive"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("band {band} contains non-finite values")));
        }
        Ok(Self { band, width, height, grid_spacing_m, values })
    }

    pub fn filled(band: Band, width: usize, height: usize, grid_spacing_m: f64, value: f32) -> Result<Self> {
        Self::new(band, width, height, grid_spacing_m, vec![value; width * height])
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f32 {
        self.values[row * self.width + col]
    }

    pub fn same_grid(&self, other: &BandImage) -> bool {
        self.width == other.width && self.height == other.height && self.grid_spacing_m == other.grid_spacing_m
    }
}

/// Eight co-registered bands plus the metadata needed to time them.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiBandScene {
    pub scene_id: String,
    pub sensor: SensorSpec,
    pub orbit: OrbitSpec,
    pub layout: BandLayout,
    /// Bands in spectral order.
    pub bands: Vec<BandImage>,
    /// Per-row acquisition times, when known (simulated scenes).
    pub row_times: Option<RowTimeMap>,
}

impl MultiBandScene {
    pub fn new(
        scene_id: impl Into<String>,
        sensor: SensorSpec,
        orbit: OrbitSpec,
        layout: BandLayout,
        mut bands: Vec<BandImage>,
        row_times: Option<RowTimeMap>,
    ) -> Result<Self> {
        sensor.validate()?;
        orbit.validate()?;
        if !layout.is_complete() {
            return Err(Error::IncompleteLayout { found: layout.len() });
        }
        bands.sort_by_key(|b| b.band);
        for band in Band::ALL {
            if !bands.iter().any(|b| b.band == band) {
                return Err(Error::MissingBand(band));
            }
        }
        if bands.len() != Band::ALL.len() {
            return Err(Error::invalid("scene lists a band more than once"));
        }
        let first = &bands[0];
        for b in &bands[1..] {
            if !first.same_grid(b) {
                return Err(Error::DimensionMismatch(format!(
                    "band {} is {}x{} @ {} m, band {} is {}x{} @ {} m",
                    first.band, first.width, first.height, first.grid_spacing_m, b.band, b.width, b.height,
                    b.grid_spacing_m
                )));
            }
        }
        if let Some(rt) = &row_times {
            if rt.height() != first.height {
                return Err(Error::DimensionMismatch(format!(
                    "row-time map covers {} rows, scene has {}",
                    rt.height(),
                    first.height
                )));
            }
        }
        Ok(Self { scene_id: scene_id.into(), sensor, orbit, layout, bands, row_times })
    }

    pub fn band(&self, band: Band) -> &BandImage {
        &self.bands[band.index()]
    }

    pub fn width(&self) -> usize {
        self.bands[0].width
    }

    pub fn height(&self) -> usize {
        self.bands[0].height
    }

    pub fn grid_spacing_m(&self) -> f64 {
        self.bands[0].grid_spacing_m
    }

    pub fn timing(&self) -> Result<Timing> {
        Timing::new(&self.sensor, &self.orbit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bands(w: usize, h: usize) -> Vec<BandImage> {
        Band::ALL.iter().map(|&b| BandImage::filled(b, w, h, 3.0, 100.0).unwrap()).collect()
    }

    #[test]
    fn scene_requires_all_bands() {
        let mut b = bands(4, 4);
        b.retain(|i| i.band != Band::NearInfrared);
        let err = MultiBandScene::new("s", SensorSpec::default(), OrbitSpec::default(), BandLayout::default(), b, None)
            .unwrap_err();
        assert!(matches!(err, Error::MissingBand(Band::NearInfrared)));
    }

    #[test]
    fn scene_requires_matching_grids() {
        let mut b = bands(4, 4);
        b[3] = BandImage::filled(b[3].band, 5, 4, 3.0, 0.0).unwrap();
        let err = MultiBandScene::new("s", SensorSpec::default(), OrbitSpec::default(), BandLayout::default(), b, None)
            .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn band_image_rejects_nan() {
        assert!(BandImage::new(Band::Blue, 1, 1, 3.0, vec![f32::NAN]).is_err());
        assert!(BandImage::new(Band::Blue, 0, 1, 3.0, vec![]).is_err());
    }
}
