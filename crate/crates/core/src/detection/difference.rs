use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{Band, BandLayout};
use crate::scene::BandImage;

/// Ordered (minuend, subtrahend) band pair of a difference image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandPair {
    pub minuend: Band,
    pub subtrahend: Band,
}

impl std::fmt::Display for BandPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}", self.minuend, self.subtrahend)
    }
}

/// The seven wavelength-adjacent pairs, in spectral order. Differencing
/// neighbours in wavelength keeps the static background flatter than
/// differencing neighbours in time.
pub fn spectral_adjacent_pairs(layout: &BandLayout) -> Result<Vec<BandPair>> {
    if !layout.is_complete() {
        return Err(Error::IncompleteLayout { found: layout.len() });
    }
    Ok(layout
        .spectral_order()
        .windows(2)
        .map(|w| BandPair { minuend: w[0], subtrahend: w[1] })
        .collect())
}

/// A band rescaled to zero median and unit interquartile range.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedBand {
    pub band: Band,
    pub width: usize,
    pub height: usize,
    pub grid_spacing_m: f64,
    pub median: f32,
    pub scale: f32,
    pub values: Vec<f32>,
}

impl NormalizedBand {
    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f32 {
        self.values[row * self.width + col]
    }
}

/// Value at rank `k` (0-based) of an unsorted slice; reorders the slice.
pub(crate) fn select_rank(values: &mut [f32], k: usize) -> f32 {
    *values.select_nth_unstable_by(k, |a, b| a.total_cmp(b)).1
}

pub(crate) fn median(values: &mut [f32]) -> f32 {
    let n = values.len();
    let hi = select_rank(values, n / 2);
    if n % 2 == 1 {
        hi
    } else {
        let lo = values[..n / 2].iter().copied().fold(f32::NEG_INFINITY, f32::max);
        0.5 * (lo + hi)
    }
}

/// Subtracts the band median and divides by its interquartile range. A band
/// with zero IQR (flat background) is only median-subtracted.
pub fn normalize(image: &BandImage) -> NormalizedBand {
    let mut scratch = image.values.clone();
    let n = scratch.len();
    let med = median(&mut scratch);
    let q1 = select_rank(&mut scratch, (n - 1) / 4);
    let q3 = select_rank(&mut scratch, (3 * (n - 1)) / 4);
    let iqr = q3 - q1;
    let scale = if iqr > 0.0 { iqr } else { 1.0 };
    let values = image.values.iter().map(|v| (v - med) / scale).collect();
    NormalizedBand {
        band: image.band,
        width: image.width,
        height: image.height,
        grid_spacing_m: image.grid_spacing_m,
        median: med,
        scale,
        values,
    }
}

/// Signed difference of two bands.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffImage {
    pub bands: BandPair,
    pub width: usize,
    pub height: usize,
    pub grid_spacing_m: f64,
    pub values: Vec<f32>,
}

impl DiffImage {
    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f32 {
        self.values[row * self.width + col]
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }
}

pub fn difference_normalized(a: &NormalizedBand, b: &NormalizedBand) -> Result<DiffImage> {
    if a.width != b.width || a.height != b.height || a.grid_spacing_m != b.grid_spacing_m {
        return Err(Error::DimensionMismatch(format!(
            "{} is {}x{} @ {} m, {} is {}x{} @ {} m",
            a.band, a.width, a.height, a.grid_spacing_m, b.band, b.width, b.height, b.grid_spacing_m
        )));
    }
    Ok(DiffImage {
        bands: BandPair { minuend: a.band, subtrahend: b.band },
        width: a.width,
        height: a.height,
        grid_spacing_m: a.grid_spacing_m,
        values: a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect(),
    })
}

/// `a - b` after normalizing each band.
pub fn difference(a: &BandImage, b: &BandImage) -> Result<DiffImage> {
    if !a.same_grid(b) {
        return Err(Error::DimensionMismatch(format!(
            "{} is {}x{}, {} is {}x{}",
            a.band, a.width, a.height, b.band, b.width, b.height
        )));
    }
    difference_normalized(&normalize(a), &normalize(b))
}
