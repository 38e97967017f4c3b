use rayon::prelude::*;

use super::grid::VoxelGrid;
use super::ray::{sample_ray, Ray, RaySamples};
use crate::camera::Camera;
use crate::depth_io::{DepthMap, RgbImage};
use crate::error::Result;
use crate::scalar::Real;

/// Accumulated opacity below which a rendered depth is marked invalid.
pub const OPACITY_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutput<T> {
    pub color: [T; 3],
    pub depth: T,
    pub opacity: T,
    pub weights: Vec<T>,
    /// `T_i` for each sample, plus the residual transmittance past the last one.
    pub transmittance: Vec<T>,
}

/// `α_i = 1 - exp(-σ_i δ_i)`.
#[inline]
pub fn segment_alpha<T: Real>(sigma: T, delta: T) -> T {
    -(-(sigma * delta)).exp_m1()
}

/// Alpha-composites per-sample densities and colors along one ray.
pub fn composite<T: Real>(sigmas: &[T], colors: &[[T; 3]], samples: &RaySamples<T>) -> RenderOutput<T> {
    let n = samples.len();
    debug_assert!(sigmas.len() == n && colors.len() == n);
    let mut weights = Vec::with_capacity(n);
    let mut transmittance = Vec::with_capacity(n + 1);
    let mut trans = T::one();
    let mut color = [T::zero(); 3];
    let mut depth = T::zero();
    let mut opacity = T::zero();
    for i in 0..n {
        let alpha = segment_alpha(sigmas[i], samples.delta[i]);
        let w = trans * alpha;
        transmittance.push(trans);
        weights.push(w);
        for c in 0..3 {
            color[c] += w * colors[i][c];
        }
        depth += w * samples.t[i];
        opacity += w;
        trans = trans * (T::one() - alpha);
    }
    transmittance.push(trans);
    RenderOutput {
        color,
        depth,
        opacity,
        weights,
        transmittance,
    }
}

/// Renders one ray through the grid at the given samples.
pub fn render<T: Real>(grid: &VoxelGrid<T>, samples: &RaySamples<T>, ray: &Ray<T>) -> RenderOutput<T> {
    let (sigmas, colors): (Vec<T>, Vec<[T; 3]>) =
        samples.t.iter().map(|&t| grid.query(ray.at(t))).unzip();
    composite(&sigmas, &colors, samples)
}

/// Per-pixel sampling seed.
#[inline]
pub fn pixel_seed(seed: u64, pixel: usize) -> u64 {
    seed ^ pixel as u64
}

/// Renders every pixel of `camera`. Depth is zeroed where opacity < 1e-3.
pub fn render_image<T: Real>(
    grid: &VoxelGrid<T>,
    camera: &Camera<T>,
    near: T,
    far: T,
    n_samples: usize,
    jitter: bool,
    seed: u64,
) -> Result<(RgbImage<T>, DepthMap<T>)> {
    let rays = crate::camera::generate_rays(camera, near, far)?;
    let eps = T::of(OPACITY_EPSILON);
    let out: Vec<([T; 3], T)> = rays
        .par_iter()
        .enumerate()
        .map(|(i, ray)| {
            let s = sample_ray(ray, n_samples, jitter, pixel_seed(seed, i));
            let r = render(grid, &s, ray);
            let d = if r.opacity < eps { T::zero() } else { r.depth };
            (r.color, d)
        })
        .collect();
    let mut data = Vec::with_capacity(3 * out.len());
    let mut depth = Vec::with_capacity(out.len());
    for (c, d) in out {
        data.extend(c.iter().map(|v| v.max(T::zero()).min(T::one())));
        depth.push(d);
    }
    Ok((
        RgbImage::new(camera.width, camera.height, T::one(), data)?,
        DepthMap::new(camera.width, camera.height, depth)?,
    ))
}
