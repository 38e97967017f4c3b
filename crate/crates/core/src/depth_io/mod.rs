//! Depth, image, and mask containers plus their on-disk formats.

mod bins;
mod pfm;
mod png;
mod raster;

pub use bins::{decode_bin_depth, BinDepthPrediction, PROBABILITY_TOLERANCE};
pub use pfm::{decode_pfm, encode_pfm, load_depth_pfm, store_depth_pfm};
pub use png::{
    load_depth_png16, load_mask_png, load_rgb_png, store_depth_png16, store_mask_png, store_rgb_png,
    DEFAULT_DEPTH_DIVISOR,
};
pub use raster::{density, DepthMap, Mask, RgbImage};

use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Loads a depth map by extension: `.pfm`, or `.png` (16-bit, divided by `divisor`).
pub fn load_depth<T: Real>(path: impl AsRef<Path>, divisor: f64) -> Result<DepthMap<T>> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("pfm") => load_depth_pfm(path),
        Some("png") => load_depth_png16(path, divisor),
        _ => Err(Error::Unsupported(format!("depth file {}", path.display()))),
    }
}
