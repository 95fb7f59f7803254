use serde::{Deserialize, Serialize};

use crate::detection::difference::{median, select_rank, DiffImage};
use crate::error::{Error, Result};

/// How the suppression level of a difference image is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Zero everything at or below this quantile of |value|.
    Percentile { percentile: f64 },
    /// Zero everything at or below this fraction of the peak |value|.
    FractionOfPeak { fraction: f64 },
}

impl Default for ThresholdMode {
    fn default() -> Self {
        ThresholdMode::Percentile { percentile: 0.95 }
    }
}

impl ThresholdMode {
    pub fn validate(&self) -> Result<()> {
        let v = match self {
            ThresholdMode::Percentile { percentile } => percentile,
            ThresholdMode::FractionOfPeak { fraction } => fraction,
        };
        if !(*v > 0.0 && *v < 1.0) {
            return Err(Error::invalid(format!("threshold {v} must lie in (0, 1)")));
        }
        Ok(())
    }
}

/// 1.4826 x median absolute deviation.
pub fn robust_sigma(values: &[f32]) -> f32 {
    if values.is_empty() {
        return 0.0;
    }
    let mut scratch = values.to_vec();
    let m = median(&mut scratch);
    for v in scratch.iter_mut() {
        *v = (*v - m).abs();
    }
    1.4826 * median(&mut scratch)
}

/// Absolute level for a set of difference values: the mode's level, raised
/// to `noise_floor_sigma` robust standard deviations when that is higher.
/// Returns `None` when every |value| is equal, so no level separates
/// anything.
pub fn threshold_level(values: &[f32], mode: ThresholdMode, noise_floor_sigma: f64) -> Result<Option<f32>> {
    mode.validate()?;
    if values.is_empty() {
        return Ok(None);
    }
    let mut abs: Vec<f32> = values.iter().map(|v| v.abs()).collect();
    let (lo, hi) = abs
        .iter()
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo == hi {
        log::warn!("degenerate difference histogram (all |values| = {hi}); nothing survives thresholding");
        return Ok(None);
    }
    let level = match mode {
        ThresholdMode::Percentile { percentile } => {
            let n = abs.len();
            let k = ((percentile * n as f64).ceil() as usize).clamp(1, n);
            select_rank(&mut abs, k - 1)
        }
        ThresholdMode::FractionOfPeak { fraction } => fraction as f32 * hi,
    };
    let floor = if noise_floor_sigma > 0.0 {
        noise_floor_sigma as f32 * robust_sigma(values)
    } else {
        0.0
    };
    Ok(Some(level.max(floor)))
}

/// Zeroes every pixel with |value| <= `level`.
pub fn apply_level(d: &DiffImage, level: Option<f32>) -> DiffImage {
    let values = match level {
        Some(level) => d.values.iter().map(|&v| if v.abs() > level { v } else { 0.0 }).collect(),
        None => vec![0.0; d.values.len()],
    };
    DiffImage { values, ..d.clone() }
}

/// Percentile threshold of a single difference image.
pub fn threshold(d: &DiffImage, percentile: f64) -> Result<DiffImage> {
    let level = threshold_level(&d.values, ThresholdMode::Percentile { percentile }, 0.0)?;
    Ok(apply_level(d, level))
}

/// One level computed over the pooled values of several difference images.
pub fn shared_threshold_level(diffs: &[DiffImage], mode: ThresholdMode, noise_floor_sigma: f64) -> Result<Option<f32>> {
    let pooled: Vec<f32> = diffs.iter().flat_map(|d| d.values.iter().copied()).collect();
    threshold_level(&pooled, mode, noise_floor_sigma)
}
