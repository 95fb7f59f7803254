use serde::{Deserialize, Serialize};

use crate::detection::difference::DiffImage;
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn of(v: f32) -> Option<Self> {
        if v > 0.0 {
            Some(Polarity::Positive)
        } else if v < 0.0 {
            Some(Polarity::Negative)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blob {
    pub polarity: Polarity,
    /// Intensity-weighted centroid, (column, row) in pixels.
    pub centroid_px: Vec2,
    pub area_px: usize,
    /// Largest |value| in the component.
    pub peak: f32,
    /// Sum of |value| over the component.
    pub flux: f64,
    /// Inclusive bounding box: [min_col, min_row, max_col, max_row].
    pub bbox: [usize; 4],
}

impl Blob {
    /// Longest side of the bounding box, in pixels.
    pub fn extent_px(&self) -> usize {
        (self.bbox[2] - self.bbox[0] + 1).max(self.bbox[3] - self.bbox[1] + 1)
    }
}

/// 8-connected components of same-signed pixels among those passing
/// `accept`, as sorted pixel-index lists.
pub(crate) fn components(
    width: usize,
    height: usize,
    values: &[f32],
    accept: impl Fn(f32) -> bool,
) -> Vec<Vec<usize>> {
    let mut visited = vec![false; values.len()];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..values.len() {
        let v0 = values[start];
        if visited[start] || !accept(v0) {
            continue;
        }
        let sign = v0 > 0.0;
        visited[start] = true;
        stack.push(start);
        let mut members = Vec::new();
        while let Some(i) = stack.pop() {
            members.push(i);
            let (c, r) = ((i % width) as i64, (i / width) as i64);
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (nc, nr) = (c + dc, r + dr);
                    if nc < 0 || nr < 0 || nc >= width as i64 || nr >= height as i64 {
                        continue;
                    }
                    let j = nr as usize * width + nc as usize;
                    let v = values[j];
                    if !visited[j] && accept(v) && (v > 0.0) == sign {
                        visited[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

pub(crate) fn blob_from_members(width: usize, values: &[f32], members: &[usize]) -> Blob {
    let polarity = Polarity::of(values[members[0]]).expect("components hold nonzero pixels");
    let mut flux = 0.0f64;
    let mut moment = Vec2::zeros();
    let mut peak = 0.0f32;
    let mut bbox = [usize::MAX, usize::MAX, 0, 0];
    for &i in members {
        let (c, r) = (i % width, i / width);
        let w = values[i].abs();
        flux += f64::from(w);
        moment += Vec2::new(c as f64, r as f64) * f64::from(w);
        peak = peak.max(w);
        bbox = [bbox[0].min(c), bbox[1].min(r), bbox[2].max(c), bbox[3].max(r)];
    }
    Blob { polarity, centroid_px: moment / flux, area_px: members.len(), peak, flux, bbox }
}

/// Connected same-sign regions of a thresholded difference image, at least
/// `min_area_px` pixels each, in raster order of their first pixel.
pub fn extract_blobs(d: &DiffImage, min_area_px: usize) -> Vec<Blob> {
    components(d.width, d.height, &d.values, |v| v != 0.0)
        .into_iter()
        .filter(|m| m.len() >= min_area_px.max(1))
        .map(|m| blob_from_members(d.width, &d.values, &m))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::difference::BandPair;
    use crate::imaging::Band;

    fn canvas(w: usize, h: usize) -> DiffImage {
        DiffImage {
            bands: BandPair { minuend: Band::Blue, subtrahend: Band::GreenI },
            width: w,
            height: h,
            grid_spacing_m: 3.0,
            values: vec![0.0; w * h],
        }
    }

    fn fill(d: &mut DiffImage, cols: std::ops::RangeInclusive<usize>, rows: std::ops::RangeInclusive<usize>, v: f32) {
        for r in rows {
            for c in cols.clone() {
                d.values[r * d.width + c] = v;
            }
        }
    }

    #[test]
    fn uniform_square_centroid() {
        let mut d = canvas(30, 30);
        fill(&mut d, 10..=14, 10..=14, 2.0);
        let blobs = extract_blobs(&d, 3);
        assert_eq!(blobs.len(), 1);
        assert_eq!(blobs[0].centroid_px, Vec2::new(12.0, 12.0));
        assert_eq!(blobs[0].area_px, 25);
        assert_eq!(blobs[0].polarity, Polarity::Positive);
        assert_eq!(blobs[0].extent_px(), 5);
    }

    #[test]
    fn separated_squares_and_signs() {
        let mut d = canvas(40, 20);
        fill(&mut d, 2..=4, 2..=4, 1.0);
        fill(&mut d, 20..=23, 5..=8, -1.0);
        // Touching but opposite sign: its own component.
        fill(&mut d, 5..=6, 2..=4, -3.0);
        let blobs = extract_blobs(&d, 3);
        assert_eq!(blobs.len(), 3);
        assert_eq!(blobs.iter().filter(|b| b.polarity == Polarity::Negative).count(), 2);
    }

    #[test]
    fn diagonal_neighbours_connect() {
        let mut d = canvas(10, 10);
        for i in 0..4 {
            d.values[i * 10 + i] = 1.0;
        }
        let blobs = extract_blobs(&d, 3);
        assert_eq!(blobs.len(), 1);
        assert_eq!(blobs[0].area_px, 4);
    }

    #[test]
    fn small_components_dropped() {
        let mut d = canvas(10, 10);
        d.values[55] = 4.0;
        d.values[56] = 4.0;
        assert!(extract_blobs(&d, 3).is_empty());
        assert_eq!(extract_blobs(&d, 2).len(), 1);
    }

    #[test]
    fn weighted_centroid() {
        let mut d = canvas(10, 3);
        d.values[10 + 2] = 1.0;
        d.values[10 + 3] = 3.0;
        let b = &extract_blobs(&d, 1)[0];
        assert_eq!(b.centroid_px, Vec2::new(2.75, 1.0));
    }
}
