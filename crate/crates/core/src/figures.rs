//! Raster figures: signed difference images as gray and band composites
//! as RGB.

use std::path::Path;

use image::{GrayImage, Luma, Rgb, RgbImage};

use crate::detection::difference::select_rank;
use crate::detection::DiffImage;
use crate::error::{Error, Result};
use crate::imaging::Band;
use crate::scene::MultiBandScene;

/// Maps a signed image to gray with zero at mid-gray and the largest
/// magnitude at black or white.
pub fn diff_to_gray(d: &DiffImage) -> GrayImage {
    let peak = d.values.iter().fold(0.0f32, |m, v| m.max(v.abs()));
    let scale = if peak > 0.0 { 127.0 / peak } else { 0.0 };
    GrayImage::from_fn(d.width as u32, d.height as u32, |x, y| {
        let v = d.get(x as usize, y as usize);
        Luma([(128.0 + v * scale).round().clamp(0.0, 255.0) as u8])
    })
}

/// Per-band linear stretch between the 2nd and 98th percentiles.
fn stretch(values: &[f32]) -> (f32, f32) {
    let mut scratch = values.to_vec();
    let n = scratch.len();
    let lo = select_rank(&mut scratch, n / 50);
    let hi = select_rank(&mut scratch, n - 1 - n / 50);
    (lo, if hi > lo { hi } else { lo + 1.0 })
}

/// Three bands of a scene as an RGB image. Movers show as colour fringes
/// because each band sees them at a different place.
pub fn rgb_composite(scene: &MultiBandScene, channels: [Band; 3]) -> RgbImage {
    let bands = channels.map(|b| scene.band(b));
    let ranges = bands.map(|b| stretch(&b.values));
    RgbImage::from_fn(scene.width() as u32, scene.height() as u32, |x, y| {
        Rgb(std::array::from_fn(|k| {
            let (lo, hi) = ranges[k];
            let v = bands[k].get(x as usize, y as usize);
            ((v - lo) / (hi - lo) * 255.0).round().clamp(0.0, 255.0) as u8
        }))
    })
}

pub fn save_png<P, C>(path: &Path, img: &image::ImageBuffer<P, C>) -> Result<()>
where
    P: image::PixelWithColorType,
    [P::Subpixel]: image::EncodableLayout,
    C: std::ops::Deref<Target = [P::Subpixel]>,
{
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Raster { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::BandPair;

    #[test]
    fn zero_maps_to_mid_gray() {
        let d = DiffImage {
            bands: BandPair { minuend: Band::Blue, subtrahend: Band::GreenI },
            width: 3,
            height: 1,
            grid_spacing_m: 3.0,
            values: vec![-2.0, 0.0, 2.0],
        };
        let g = diff_to_gray(&d);
        assert_eq!(g.into_raw(), vec![1, 128, 255]);
    }

    #[test]
    fn composite_dimensions() {
        let sim = crate::sim::simulate(&crate::sim::SceneScript::new(40, 30, 3.0)).unwrap();
        let img = rgb_composite(&sim.scene, [Band::Red, Band::GreenI, Band::Blue]);
        assert_eq!(img.dimensions(), (40, 30));
    }
}
