//! PNG ingestion: 16-bit depth, 8-bit RGB, and 8-bit masks.

use std::path::Path;

use image::{ColorType, DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb};

use super::raster::{DepthMap, Mask, RgbImage};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// KITTI convention: raw `u16` over 256 gives meters.
pub const DEFAULT_DEPTH_DIVISOR: f64 = 256.0;

fn open(path: &Path) -> Result<DynamicImage> {
    image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| Error::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
}

fn save(img: DynamicImage, path: &Path) -> Result<()> {
    img.save_with_format(path, ImageFormat::Png)
        .map_err(|e| Error::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
}

/// Loads a single-channel 16-bit PNG; `depth = raw / scale_divisor`, raw 0 stays invalid.
pub fn load_depth_png16<T: Real>(path: impl AsRef<Path>, scale_divisor: f64) -> Result<DepthMap<T>> {
    let path = path.as_ref();
    if !(scale_divisor > 0.0 && scale_divisor.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "scale divisor must be positive, got {scale_divisor}"
        )));
    }
    let img = open(path)?;
    if img.color() != ColorType::L16 {
        return Err(Error::malformed(
            path,
            format!("expected 16-bit grayscale PNG, found {:?}", img.color()),
        ));
    }
    let buf = img.into_luma16();
    let (w, h) = (buf.width() as usize, buf.height() as usize);
    let inv = T::of(scale_divisor);
    let values = buf.into_raw().into_iter().map(|raw| T::of(raw as f64) / inv).collect();
    DepthMap::new(w, h, values)
}

/// Stores `round(depth * scale_divisor)` as 16-bit grayscale.
pub fn store_depth_png16<T: Real>(map: &DepthMap<T>, path: impl AsRef<Path>, scale_divisor: f64) -> Result<()> {
    let path = path.as_ref();
    let mut raw = Vec::with_capacity(map.values().len());
    for &v in map.values() {
        let r = (v.f64() * scale_divisor).round();
        if r > u16::MAX as f64 {
            return Err(Error::InvalidValue(format!(
                "depth {v} exceeds the 16-bit range at divisor {scale_divisor}"
            )));
        }
        raw.push(r as u16);
    }
    let buf = ImageBuffer::<Luma<u16>, _>::from_raw(map.width() as u32, map.height() as u32, raw)
        .expect("buffer size matches dimensions");
    save(DynamicImage::ImageLuma16(buf), path)
}

/// Loads an 8-bit RGB(A) PNG with `max_value = 255`.
pub fn load_rgb_png<T: Real>(path: impl AsRef<Path>) -> Result<RgbImage<T>> {
    let path = path.as_ref();
    let img = open(path)?;
    if !matches!(img.color(), ColorType::Rgb8 | ColorType::Rgba8 | ColorType::L8) {
        return Err(Error::malformed(
            path,
            format!("expected 8-bit RGB PNG, found {:?}", img.color()),
        ));
    }
    let buf = img.into_rgb8();
    let (w, h) = (buf.width() as usize, buf.height() as usize);
    let data = buf.into_raw().into_iter().map(|v| T::of(v as f64)).collect();
    RgbImage::new(w, h, T::of(255.0), data)
}

/// Quantizes to 8 bits: `round(v / max_value * 255)`.
pub fn store_rgb_png<T: Real>(img: &RgbImage<T>, path: impl AsRef<Path>) -> Result<()> {
    let scale = 255.0 / img.max_value().f64();
    let raw = img
        .data()
        .iter()
        .map(|v| (v.f64() * scale).round().clamp(0.0, 255.0) as u8)
        .collect();
    let buf = ImageBuffer::<Rgb<u8>, _>::from_raw(img.width() as u32, img.height() as u32, raw)
        .expect("buffer size matches dimensions");
    save(DynamicImage::ImageRgb8(buf), path.as_ref())
}

/// 8-bit mask: values above 127 are `true`.
pub fn load_mask_png(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    let buf = open(path)?.into_luma8();
    let (w, h) = (buf.width() as usize, buf.height() as usize);
    Mask::new(w, h, buf.into_raw().into_iter().map(|v| v > 127).collect())
}

pub fn store_mask_png(mask: &Mask, path: impl AsRef<Path>) -> Result<()> {
    let raw = mask.values().iter().map(|&m| if m { 255u8 } else { 0 }).collect();
    let buf = ImageBuffer::<Luma<u8>, _>::from_raw(mask.width() as u32, mask.height() as u32, raw)
        .expect("buffer size matches dimensions");
    save(DynamicImage::ImageLuma8(buf), path.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_raw16(path: &Path, w: u32, h: u32, raw: Vec<u16>) {
        let buf = ImageBuffer::<Luma<u16>, _>::from_raw(w, h, raw).unwrap();
        DynamicImage::ImageLuma16(buf).save_with_format(path, ImageFormat::Png).unwrap();
    }

    #[test]
    fn kitti_raw_values() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.png");
        write_raw16(&p, 3, 1, vec![0, 256, 5120]);
        let map: DepthMap<f64> = load_depth_png16(&p, 256.0).unwrap();
        assert_eq!(map.values(), &[0.0, 1.0, 20.0]);
    }

    #[test]
    fn eight_bit_depth_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d8.png");
        let buf = ImageBuffer::<Luma<u8>, _>::from_raw(1, 1, vec![9u8]).unwrap();
        DynamicImage::ImageLuma8(buf).save_with_format(&p, ImageFormat::Png).unwrap();
        assert!(matches!(
            load_depth_png16::<f64>(&p, 256.0),
            Err(Error::Malformed { .. })
        ));
        let junk = dir.path().join("junk.png");
        std::fs::write(&junk, b"not a png").unwrap();
        assert!(load_depth_png16::<f64>(&junk, 256.0).is_err());
    }

    #[test]
    fn depth_png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.png");
        let map = DepthMap::new(2, 1, vec![0.0, 3.5]).unwrap();
        store_depth_png16(&map, &p, 256.0).unwrap();
        assert_eq!(load_depth_png16::<f64>(&p, 256.0).unwrap(), map);
        let too_deep = DepthMap::new(1, 1, vec![300.0]).unwrap();
        assert!(store_depth_png16(&too_deep, &p, 256.0).is_err());
    }

    #[test]
    fn mask_and_rgb_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mask = Mask::new(2, 2, vec![true, false, false, true]).unwrap();
        let mp = dir.path().join("m.png");
        store_mask_png(&mask, &mp).unwrap();
        assert_eq!(load_mask_png(&mp).unwrap(), mask);

        let img = RgbImage::new(1, 2, 255.0, vec![0.0, 10.0, 20.0, 255.0, 128.0, 1.0]).unwrap();
        let ip = dir.path().join("i.png");
        store_rgb_png(&img, &ip).unwrap();
        assert_eq!(load_rgb_png::<f64>(&ip).unwrap(), img);
    }
}
