//! Pinhole cameras and per-pixel ray generation.

use crate::error::{Error, Result};
use crate::field::Ray;
use crate::geometry::{Rigid, Vec3};
use crate::scalar::Real;

/// Pinhole intrinsics plus a camera-to-world pose. Camera looks down +z,
/// image x to the right, image y down.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub width: usize,
    pub height: usize,
    pub pose: Rigid<T>,
}

impl<T: Real> Camera<T> {
    pub fn new(fx: T, fy: T, cx: T, cy: T, width: usize, height: usize, pose: Rigid<T>) -> Result<Self> {
        let cam = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            pose,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > T::zero() && self.fy > T::zero()) {
            return Err(Error::InvalidArgument("focal lengths must be positive".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument("camera resolution must be positive".into()));
        }
        let err = self.pose.orthonormality_error();
        if !(err <= T::unit_tolerance()) {
            return Err(Error::InvalidArgument(format!("rotation is not orthonormal (error {err})")));
        }
        Ok(())
    }

    /// Camera centered on the image with the given focal length.
    pub fn centered(focal: T, width: usize, height: usize, pose: Rigid<T>) -> Result<Self> {
        let half = |n: usize| T::of_usize(n - 1) / T::of(2.0);
        Self::new(focal, focal, half(width.max(1)), half(height.max(1)), width, height, pose)
    }

    pub fn center(&self) -> Vec3<T> {
        self.pose.translation
    }

    /// World-space unit direction through pixel `(u, v)`.
    pub fn direction(&self, u: T, v: T) -> Vec3<T> {
        let d = Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, T::one());
        self.pose.rotate(d).normalized()
    }

    /// Ray through integer pixel `(x, y)`.
    pub fn ray(&self, x: usize, y: usize, near: T, far: T) -> Ray<T> {
        Ray::new_unchecked(self.center(), self.direction(T::of_usize(x), T::of_usize(y)), near, far)
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }
}

/// One ray per pixel, row-major.
pub fn generate_rays<T: Real>(camera: &Camera<T>, near: T, far: T) -> Result<Vec<Ray<T>>> {
    camera.validate()?;
    if !(near > T::zero() && near < far) {
        return Err(Error::InvalidArgument(format!("need 0 < near < far, got {near}, {far}")));
    }
    let mut rays = Vec::with_capacity(camera.pixel_count());
    for y in 0..camera.height {
        for x in 0..camera.width {
            rays.push(camera.ray(x, y, near, far));
        }
    }
    Ok(rays)
}
