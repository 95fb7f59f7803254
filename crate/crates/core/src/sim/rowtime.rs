//! Per-row acquisition times of mosaicked band images.
//!
//! Successive exposures advance the footprint by one frame advance
//! (ground speed x frame interval), which is shorter than a strip, so
//! consecutive strips of the same band overlap and the mosaic keeps one
//! contributing exposure per ground row. Rows therefore come in contiguous
//! blocks that share an exposure, one frame interval apart. The block
//! progression is common to all bands; a band at strip position `p` sees the
//! same ground `p` strip-crossing times after the leading strip.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{Band, BandLayout, Timing};

/// Which exposure contributes a ground row covered by two overlapping strips.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OverlapPolicy {
    Earliest,
    #[default]
    Latest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandRowTimes {
    pub band: Band,
    pub strip_position: u32,
    pub times_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowTimeMap {
    pub frame_interval_s: f64,
    pub delta_t_color_s: f64,
    pub policy: OverlapPolicy,
    /// Block index of every row, counted from the block holding row 0.
    pub row_blocks: Vec<u32>,
    /// One entry per band, in spectral order.
    pub bands: Vec<BandRowTimes>,
}

impl RowTimeMap {
    /// Builds the map for a scene of `height` rows. `strip_phase_m` shifts the
    /// exposure sequence relative to the first scene row, since strip edges
    /// need not line up with the scene edge.
    pub fn build(
        height: usize,
        grid_spacing_m: f64,
        timing: &Timing,
        layout: &BandLayout,
        policy: OverlapPolicy,
        strip_phase_m: f64,
    ) -> Result<Self> {
        if height == 0 {
            return Err(Error::invalid("scene has no rows"));
        }
        if !layout.is_complete() {
            return Err(Error::IncompleteLayout { found: layout.len() });
        }
        if !strip_phase_m.is_finite() {
            return Err(Error::invalid("strip phase must be finite"));
        }
        let advance = timing.frame_advance_m;
        let strip = timing.strip_extent_m;
        // Index of the exposure that contributes ground coordinate y to the
        // leading strip. The latest exposure still covering y is the one whose
        // trailing edge has not yet passed it.
        let exposure = |y: f64| -> i64 {
            match policy {
                OverlapPolicy::Latest => ((y + strip_phase_m + strip) / advance).floor() as i64,
                OverlapPolicy::Earliest => ((y + strip_phase_m) / advance).floor() as i64 + 1,
            }
        };
        let first = exposure(0.0);
        let row_blocks: Vec<u32> = (0..height)
            .map(|r| (exposure(r as f64 * grid_spacing_m) - first) as u32)
            .collect();

        let bands = Band::ALL
            .iter()
            .map(|&band| {
                let p = layout.strip_position(band)?;
                let offset = f64::from(p) * timing.delta_t_color_s;
                let times_s = row_blocks
                    .iter()
                    .map(|&k| f64::from(k) * timing.frame_interval_s + offset)
                    .collect();
                Ok(BandRowTimes { band, strip_position: p, times_s })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            frame_interval_s: timing.frame_interval_s,
            delta_t_color_s: timing.delta_t_color_s,
            policy,
            row_blocks,
            bands,
        })
    }

    pub fn height(&self) -> usize {
        self.row_blocks.len()
    }

    pub fn block_of_row(&self, row: usize) -> Result<u32> {
        self.row_blocks
            .get(row)
            .copied()
            .ok_or_else(|| Error::OutOfRange(format!("row {row}")))
    }

    /// Row ranges of each block, in order.
    pub fn blocks(&self) -> Vec<(u32, Range<usize>)> {
        let mut out: Vec<(u32, Range<usize>)> = Vec::new();
        for (r, &k) in self.row_blocks.iter().enumerate() {
            match out.last_mut() {
                Some((last, range)) if *last == k => range.end = r + 1,
                _ => out.push((k, r..r + 1)),
            }
        }
        out
    }

    /// Acquisition time of a block in a band.
    pub fn block_time(&self, band: Band, block: u32) -> f64 {
        let p = self.bands[band.index()].strip_position;
        f64::from(block) * self.frame_interval_s + f64::from(p) * self.delta_t_color_s
    }
}

/// Scene-relative acquisition time of one row of one band.
pub fn row_time(map: &RowTimeMap, band: Band, row: usize) -> Result<f64> {
    let entry = map
        .bands
        .iter()
        .find(|b| b.band == band)
        .ok_or_else(|| Error::UnknownBand(band.to_string()))?;
    entry
        .times_s
        .get(row)
        .copied()
        .ok_or_else(|| Error::OutOfRange(format!("row {row} of band {band}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{OrbitSpec, SensorSpec};
    use approx::assert_relative_eq;

    fn map(policy: OverlapPolicy, phase: f64) -> RowTimeMap {
        let timing = Timing::new(&SensorSpec::default(), &OrbitSpec::default()).unwrap();
        RowTimeMap::build(2000, 3.0, &timing, &BandLayout::default(), policy, phase).unwrap()
    }

    #[test]
    fn first_row_of_leading_band_is_time_zero() {
        for policy in [OverlapPolicy::Earliest, OverlapPolicy::Latest] {
            let m = map(policy, 100.0);
            assert_eq!(row_time(&m, Band::Blue, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn blocks_step_by_one_frame() {
        for policy in [OverlapPolicy::Earliest, OverlapPolicy::Latest] {
            let m = map(policy, 250.0);
            let blocks = m.blocks();
            assert!(blocks.len() >= 4);
            for w in blocks.windows(2) {
                assert_eq!(w[1].0, w[0].0 + 1);
                assert_eq!(w[0].1.end, w[1].1.start);
                let t0 = row_time(&m, Band::Red, w[0].1.start).unwrap();
                let t1 = row_time(&m, Band::Red, w[1].1.start).unwrap();
                assert_relative_eq!(t1 - t0, 0.17, epsilon = 1e-12);
            }
            // Interior blocks span one frame advance (~398 rows at 3 m).
            let interior = &blocks[1].1;
            assert!((interior.len() as f64 - 1194.57 / 3.0).abs() <= 1.0);
            for band in m.bands.iter() {
                assert!(band.times_s.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn same_row_across_bands_differs_by_band_offset() {
        let m = map(OverlapPolicy::Latest, 0.0);
        let dt = m.delta_t_color_s;
        for row in [0, 500, 1999] {
            let b = row_time(&m, Band::Blue, row).unwrap();
            let cb = row_time(&m, Band::CoastalBlue, row).unwrap();
            assert_relative_eq!(cb - b, 7.0 * dt, epsilon = 1e-12);
        }
    }

    #[test]
    fn policies_shift_block_boundaries() {
        let a = map(OverlapPolicy::Earliest, 0.0);
        let b = map(OverlapPolicy::Latest, 0.0);
        assert_ne!(a.blocks()[0].1, b.blocks()[0].1);
    }

    #[test]
    fn out_of_range_row() {
        let m = map(OverlapPolicy::Latest, 0.0);
        assert!(matches!(row_time(&m, Band::Blue, 2000), Err(Error::OutOfRange(_))));
    }
}
