//! Gradient-based fitting of a voxel grid to images, depth priors, and
//! masked-region targets.

mod adam;
mod log;
mod loss;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use log::{LogEntry, TrainingLog};
pub use loss::{
    depth_loss, loss_and_gradients, render_batch, rgb_loss, Gradients, LossBreakdown, LossWeights, RayBatch,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::SceneDataset;
use crate::error::{Error, Result};
use crate::field::{render_image, VoxelGrid};
use crate::metrics::{psnr, Psnr};
use crate::scalar::Real;

/// Masked rays are supervised by plain squared error against inpainted
/// colors in place of a perceptual loss.
pub const MASKED_LOSS_NOTE: &str = "perceptual-proxy: masked rays use MSE against inpainted targets";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub iterations: usize,
    pub rays_per_batch: usize,
    pub sample_count: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    /// Log every this many iterations (the first and last are always logged).
    pub log_every: usize,
    /// Frame left out of the ray pool and rendered for the PSNR column.
    /// Without one, frame 0 is rendered.
    pub holdout: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        Self {
            iterations: 2000,
            rays_per_batch: 256,
            sample_count: 64,
            learning_rate: adam.learning_rate,
            adam_beta1: adam.beta1,
            adam_beta2: adam.beta2,
            adam_eps: adam.eps,
            seed: 0,
            log_every: 10,
            holdout: None,
        }
    }
}

impl TrainConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.adam().validate()?;
        if self.rays_per_batch == 0 || self.sample_count == 0 || self.log_every == 0 {
            return Err(Error::InvalidArgument(
                "rays_per_batch, sample_count and log_every must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn iteration_seed(seed: u64, iter: usize) -> u64 {
    seed ^ (iter as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Draws `count` pixels uniformly over the pool frames.
pub fn sample_batch<T: Real>(ds: &SceneDataset<T>, pool: &[usize], count: usize, rng: &mut impl Rng) -> RayBatch<T> {
    let sizes: Vec<usize> = pool.iter().map(|&f| ds.cameras[f].pixel_count()).collect();
    let total: usize = sizes.iter().sum();
    let mut batch = RayBatch {
        rays: Vec::with_capacity(count),
        target_color: Vec::with_capacity(count),
        target_depth: Vec::with_capacity(count),
        in_mask: Vec::with_capacity(count),
    };
    for _ in 0..count {
        let mut k = rng.gen_range(0..total);
        let mut slot = 0;
        while k >= sizes[slot] {
            k -= sizes[slot];
            slot += 1;
        }
        let f = pool[slot];
        let cam = &ds.cameras[f];
        let (x, y) = (k % cam.width, k / cam.width);
        let img = &ds.images[f];
        let max = img.max_value();
        batch.rays.push(cam.ray(x, y, ds.near, ds.far));
        batch.target_color.push(img.pixel(x, y).map(|v| v / max));
        batch.target_depth.push(ds.depths[f].get(x, y));
        batch.in_mask.push(ds.masks[f].get(x, y));
    }
    batch
}

fn holdout_psnr<T: Real>(grid: &VoxelGrid<T>, ds: &SceneDataset<T>, frame: usize, n: usize) -> Result<Psnr<T>> {
    let (img, _) = render_image(grid, &ds.cameras[frame], ds.near, ds.far, n, false, 0)?;
    psnr(&img, &ds.images[frame].normalized())
}

/// Fits `grid` to the dataset. The images and depths are the targets;
/// masked pixels feed the masked term. The run is fully determined by
/// `cfg.seed`.
pub fn train<T: Real>(
    ds: &SceneDataset<T>,
    grid: VoxelGrid<T>,
    cfg: &TrainConfig,
    weights: &LossWeights,
) -> Result<(VoxelGrid<T>, TrainingLog<T>)> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    ds.validate()?;
    cfg.validate()?;
    weights.validate()?;
    let pool: Vec<usize> = (0..ds.len()).filter(|&f| Some(f) != cfg.holdout).collect();
    if pool.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let eval_frame = match cfg.holdout {
        Some(h) if h >= ds.len() => {
            return Err(Error::InvalidArgument(format!("holdout frame {h} out of range")));
        }
        Some(h) => h,
        None => 0,
    };
    let mut grid = grid;
    let mut log = TrainingLog::default();
    let mut state = AdamState::new(grid.cell_count());
    let adam = cfg.adam();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for it in 1..=cfg.iterations {
        let batch = sample_batch(ds, &pool, cfg.rays_per_batch, &mut rng);
        let (losses, grads) = loss_and_gradients(&grid, &batch, weights, cfg.sample_count, iteration_seed(cfg.seed, it))?;
        if it == 1 || it % cfg.log_every == 0 || it == cfg.iterations {
            log.entries.push(LogEntry {
                iter: it,
                total: losses.total,
                rgb: losses.rgb,
                depth: losses.depth,
                masked: losses.masked,
                psnr_holdout: holdout_psnr(&grid, ds, eval_frame, cfg.sample_count)?,
            });
        }
        adam_step(&mut grid, &grads, &mut state, &adam);
    }
    Ok((grid, log))
}
