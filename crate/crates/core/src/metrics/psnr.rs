use serde::{Serialize, Serializer};

use super::{check_same_dims, Planes};
use crate::depth_io::RgbImage;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Peak signal-to-noise ratio in decibels; identical inputs have no finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> Psnr<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Psnr::Finite(v) => Some(v),
            Psnr::Infinite => None,
        }
    }
}

impl<T: Real> std::fmt::Display for Psnr<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Psnr::Finite(v) => write!(f, "{v}"),
            Psnr::Infinite => f.write_str("inf"),
        }
    }
}

impl<T: Real> Serialize for Psnr<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Psnr::Finite(v) => v.serialize(s),
            Psnr::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Mean squared error over every sample of every channel.
pub fn mse<T: Real, P: Planes<T>>(a: &P, b: &P) -> Result<T> {
    check_same_dims(a, b)?;
    let mut sum = T::zero();
    let mut n = 0usize;
    for c in 0..a.channels() {
        for (x, y) in a.plane(c).into_iter().zip(b.plane(c)) {
            sum += (x - y) * (x - y);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::InvalidArgument("empty raster".into()));
    }
    Ok(sum / T::of_usize(n))
}

/// `20·log10(peak / sqrt(MSE))`.
pub fn psnr_with_peak<T: Real, P: Planes<T>>(reference: &P, test: &P, peak: T) -> Result<Psnr<T>> {
    if !(peak > T::zero()) {
        return Err(Error::InvalidArgument(format!("peak must be positive, got {peak}")));
    }
    let m = mse(reference, test)?;
    if m == T::zero() {
        return Ok(Psnr::Infinite);
    }
    Ok(Psnr::Finite(T::of(20.0) * (peak / m.sqrt()).log10()))
}

/// PSNR of two RGB images sharing the same `max_value`.
pub fn psnr<T: Real>(reference: &RgbImage<T>, test: &RgbImage<T>) -> Result<Psnr<T>> {
    if reference.max_value() != test.max_value() {
        return Err(Error::InvalidArgument(format!(
            "max value mismatch: {} vs {}",
            reference.max_value(),
            test.max_value()
        )));
    }
    psnr_with_peak(reference, test, reference.max_value())
}
