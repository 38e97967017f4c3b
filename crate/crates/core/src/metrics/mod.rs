//! Per-frame depth and image quality metrics.

mod depth;
mod psnr;
mod ssim;

pub use depth::{delta_accuracy, delta_threshold, frame_metrics, log10_error, rmse, FrameMetrics};
pub use psnr::{mse, psnr, psnr_with_peak, Psnr};
pub use ssim::{ssim, SsimMode, SsimParams};

use crate::depth_io::{DepthMap, RgbImage};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Multi-channel raster view used by the image metrics.
pub trait Planes<T: Real> {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn channels(&self) -> usize;
    /// Row-major samples of channel `c`.
    fn plane(&self, c: usize) -> Vec<T>;
}

impl<T: Real> Planes<T> for DepthMap<T> {
    fn width(&self) -> usize {
        DepthMap::width(self)
    }
    fn height(&self) -> usize {
        DepthMap::height(self)
    }
    fn channels(&self) -> usize {
        1
    }
    fn plane(&self, _c: usize) -> Vec<T> {
        self.values().to_vec()
    }
}

impl<T: Real> Planes<T> for RgbImage<T> {
    fn width(&self) -> usize {
        RgbImage::width(self)
    }
    fn height(&self) -> usize {
        RgbImage::height(self)
    }
    fn channels(&self) -> usize {
        3
    }
    fn plane(&self, c: usize) -> Vec<T> {
        self.channel(c)
    }
}

pub(crate) fn check_same_dims<T: Real, P: Planes<T>>(a: &P, b: &P) -> Result<()> {
    if (a.height(), a.width()) != (b.height(), b.width()) || a.channels() != b.channels() {
        return Err(Error::DimensionMismatch {
            left: (a.height(), a.width()),
            right: (b.height(), b.width()),
        });
    }
    Ok(())
}
