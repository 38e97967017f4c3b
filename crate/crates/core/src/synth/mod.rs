//! Analytic primitive scenes with exact depth, used as oracles.

mod scene;

pub use scene::{analytic_depth, bake_grid, removal_mask, ring_cameras, Primitive, SceneSpec, Shape};

use serde::{Deserialize, Serialize};

use crate::camera::Camera;
use crate::dataset::{frame_id, SceneDataset};
use crate::error::Result;
use crate::field::{render_image, Aabb, VoxelGrid};
use crate::geometry::Vec3;
use crate::scalar::Real;

/// Grid and ray settings used to bake and render a synthetic scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub resolution: [usize; 3],
    pub bounds_min: [f64; 3],
    pub bounds_max: [f64; 3],
    pub near: f64,
    pub far: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            resolution: [64; 3],
            bounds_min: [-1.5; 3],
            bounds_max: [1.5; 3],
            near: 2.0,
            far: 5.5,
        }
    }
}

impl SynthConfig {
    pub fn bounds<T: Real>(&self) -> Result<Aabb<T>> {
        Aabb::new(Vec3::from_f64(self.bounds_min), Vec3::from_f64(self.bounds_max))
    }
}

/// Bakes `spec`, renders one jittered image per camera with `n_samples`
/// samples, and attaches analytic depths and removal masks.
pub fn make_dataset<T: Real>(
    spec: &SceneSpec,
    cameras: &[Camera<T>],
    n_samples: usize,
    seed: u64,
    cfg: &SynthConfig,
) -> Result<(SceneDataset<T>, VoxelGrid<T>)> {
    let grid = bake_grid(spec, cfg.resolution, cfg.bounds()?)?;
    let (near, far) = (T::of(cfg.near), T::of(cfg.far));
    let mut ds = SceneDataset {
        ids: Vec::new(),
        images: Vec::new(),
        depths: Vec::new(),
        masks: Vec::new(),
        cameras: cameras.to_vec(),
        near,
        far,
    };
    for (i, cam) in cameras.iter().enumerate() {
        let frame_seed = seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let (image, _) = render_image(&grid, cam, near, far, n_samples, true, frame_seed)?;
        ds.ids.push(frame_id(i));
        ds.images.push(image);
        ds.depths.push(analytic_depth(spec, cam));
        ds.masks.push(removal_mask(spec, cam));
    }
    ds.validate()?;
    Ok((ds, grid))
}
