//! 8-bit PNG input and output.
//!
//! Pixels map to `[0, 1]` by `v / 255` on load and back by
//! `round(clamp(v) * 255)` on save, so images that are already 8-bit
//! quantized round-trip exactly.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{ImageBuffer, ImageFormat, Luma, Rgb};

use crate::error::{AsdError, Result};
use crate::spectral_mask::{BinaryMask, RgbImage};

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn check_png(path: &Path) -> Result<()> {
    match ImageFormat::from_path(path) {
        Ok(ImageFormat::Png) => Ok(()),
        _ => Err(AsdError::UnsupportedFormat(path.to_path_buf())),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> AsdError + '_ {
    move |source| AsdError::Io { path: path.to_path_buf(), source }
}

pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(AsdError::MissingFile(path.to_path_buf()));
    }
    check_png(path)?;
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode_png(&bytes).map_err(|e| match e {
        AsdError::Codec(message) => AsdError::Decode { path: path.to_path_buf(), message },
        other => other,
    })
}

/// Decodes PNG bytes.
pub fn decode_png(bytes: &[u8]) -> Result<RgbImage> {
    let decoded = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| AsdError::Codec(e.to_string()))?
        .to_rgb8();
    let (w, h) = decoded.dimensions();
    Ok(RgbImage::from_fn(h as usize, w as usize, |y, x| {
        let p = decoded.get_pixel(x as u32, y as u32).0;
        p.map(|v| f64::from(v) / 255.0)
    }))
}

pub fn to_rgb8(image: &RgbImage) -> ImageBuffer<Rgb<u8>, Vec<u8>> {
    let (h, w) = image.dims();
    ImageBuffer::from_fn(w as u32, h as u32, |x, y| Rgb(image.get(y as usize, x as usize).map(quantize)))
}

pub fn encode_png(image: &RgbImage) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    to_rgb8(image)
        .write_to(&mut out, ImageFormat::Png)
        .map_err(|e| AsdError::Codec(format!("png encoding failed: {e}")))?;
    Ok(out.into_inner())
}

pub fn save_image(image: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    check_png(path)?;
    fs::write(path, encode_png(image)?).map_err(io_err(path))
}

/// Writes a mask as a single-channel 8-bit PNG.
pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    check_png(path)?;
    let (h, w) = mask.dims();
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(w as u32, h as u32, mask.to_gray8()).expect("buffer size matches");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png).map_err(|e| AsdError::Codec(format!("png encoding failed: {e}")))?;
    fs::write(path, out.into_inner()).map_err(io_err(path))
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(AsdError::MissingFile(path.to_path_buf()));
    }
    check_png(path)?;
    let img = image::open(path)
        .map_err(|e| AsdError::Decode { path: path.to_path_buf(), message: e.to_string() })?
        .to_luma8();
    let (w, h) = img.dimensions();
    BinaryMask::new(h as usize, w as usize, img.into_raw().into_iter().map(|v| v >= 128).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quantized(h: usize, w: usize) -> RgbImage {
        RgbImage::from_fn(h, w, |y, x| [(y * 13 + x) % 256, (x * 7) % 256, 255 - (y % 256)].map(|v| v as f64 / 255.0))
    }

    #[test]
    fn full_scale_maps_to_one() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("white.png");
        save_image(&RgbImage::filled(2, 3, 1.0), &path).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back.dims(), (2, 3));
        assert!(back.channel(1).iter().all(|&v| v == 1.0));
    }

    #[test]
    fn quantized_images_round_trip_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.png"), dir.path().join("b.png"));
        let img = quantized(9, 17);
        save_image(&img, &a).unwrap();
        let back = load_image(&a).unwrap();
        assert_eq!(back, img);
        save_image(&back, &b).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }

    #[test]
    fn error_paths() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_image(dir.path().join("nope.png")), Err(AsdError::MissingFile(_))));
        let jpg = dir.path().join("x.jpg");
        fs::write(&jpg, b"abc").unwrap();
        assert!(matches!(load_image(&jpg), Err(AsdError::UnsupportedFormat(_))));
        let junk = dir.path().join("junk.png");
        fs::write(&junk, b"not a png").unwrap();
        assert!(matches!(load_image(&junk), Err(AsdError::Decode { .. })));
    }

    #[test]
    fn mask_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        let mut m = BinaryMask::empty(4, 5);
        m.set(1, 2, true);
        m.set(3, 4, true);
        save_mask(&m, &path).unwrap();
        assert_eq!(load_mask(&path).unwrap(), m);
    }
}
