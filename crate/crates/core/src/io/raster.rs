//! Single-band 16-bit rasters as binary PGM or PNG, chosen by extension.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma};

use crate::error::{Error, Result};
use crate::imaging::Band;
use crate::scene::BandImage;

fn format_of(path: &Path) -> Result<ImageFormat> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("pgm") => Ok(ImageFormat::Pnm),
        Some("png") => Ok(ImageFormat::Png),
        other => Err(Error::invalid(format!("{}: unsupported raster extension {other:?}", path.display()))),
    }
}

/// Writes a band as 16-bit grayscale. Values must be whole numbers in the
/// 16-bit range; anything else cannot be stored losslessly.
pub fn write_band(path: &Path, image: &BandImage) -> Result<()> {
    let format = format_of(path)?;
    let mut data = Vec::with_capacity(image.values.len());
    for &v in &image.values {
        if !(v >= 0.0 && v <= f32::from(u16::MAX) && v.fract() == 0.0) {
            return Err(Error::OutOfRange(format!("{} value {v} for a 16-bit raster", image.band)));
        }
        data.push(v as u16);
    }
    let buffer: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(image.width as u32, image.height as u32, data).expect("buffer matches dimensions");
    buffer
        .save_with_format(path, format)
        .map_err(|source| Error::Raster { path: path.to_path_buf(), source })
}

/// Reads an 8- or 16-bit grayscale raster as band `band`.
pub fn read_band(path: &Path, band: Band, grid_spacing_m: f64) -> Result<BandImage> {
    format_of(path)?;
    let img = image::open(path).map_err(|source| Error::Raster { path: path.to_path_buf(), source })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let values: Vec<f32> = match img {
        DynamicImage::ImageLuma16(b) => b.into_raw().into_iter().map(f32::from).collect(),
        DynamicImage::ImageLuma8(b) => b.into_raw().into_iter().map(f32::from).collect(),
        other => {
            return Err(Error::invalid(format!(
                "{}: expected single-channel grayscale, found {:?}",
                path.display(),
                other.color()
            )))
        }
    };
    BandImage::new(band, w, h, grid_spacing_m, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> BandImage {
        let values = (0..37 * 23).map(|i| ((i * 2749) % 65536) as f32).collect();
        BandImage::new(Band::RedEdge, 37, 23, 3.0, values).unwrap()
    }

    #[test]
    fn lossless_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = sample();
        for name in ["a.pgm", "a.png"] {
            let p = dir.path().join(name);
            write_band(&p, &img).unwrap();
            assert_eq!(read_band(&p, Band::RedEdge, 3.0).unwrap(), img);
        }
    }

    #[test]
    fn rejects_unstorable_values() {
        let dir = tempfile::tempdir().unwrap();
        let mut img = sample();
        img.values[3] = 1.5;
        assert!(matches!(write_band(&dir.path().join("x.pgm"), &img), Err(Error::OutOfRange(_))));
        img.values[3] = 70000.0;
        assert!(write_band(&dir.path().join("x.png"), &img).is_err());
    }

    #[test]
    fn unknown_extension() {
        assert!(write_band(Path::new("x.tif"), &sample()).is_err());
    }
}
