use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{composite, pixel_seed, sample_ray, Ray, RaySamples, Stencil, VoxelGrid};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda_rgb: f64,
    pub lambda_depth: f64,
    pub lambda_masked: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_rgb: 1.0,
            lambda_depth: 0.1,
            lambda_masked: 1.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let w = [self.lambda_rgb, self.lambda_depth, self.lambda_masked];
        if w.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument("loss weights must be non-negative".into()));
        }
        if w.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidArgument("at least one loss weight must be positive".into()));
        }
        Ok(())
    }
}

/// Rays with their supervision. A target depth of 0 means unsupervised.
#[derive(Debug, Clone, PartialEq)]
pub struct RayBatch<T> {
    pub rays: Vec<Ray<T>>,
    pub target_color: Vec<[T; 3]>,
    pub target_depth: Vec<T>,
    pub in_mask: Vec<bool>,
}

impl<T: Real> RayBatch<T> {
    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.rays.len();
        if self.target_color.len() != n || self.target_depth.len() != n || self.in_mask.len() != n {
            return Err(Error::InvalidArgument("ray batch fields have unequal lengths".into()));
        }
        if self.target_depth.iter().any(|d| !(*d >= T::zero() && d.is_finite())) {
            return Err(Error::InvalidValue("target depth must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Mean over supervised rays (target > 0) of the squared depth error.
pub fn depth_loss<T: Real>(rendered: &[T], target: &[T]) -> Result<T> {
    assert_eq!(rendered.len(), target.len());
    let (sum, n) = rendered
        .iter()
        .zip(target)
        .filter(|(_, &t)| t > T::zero())
        .fold((T::zero(), 0usize), |(s, n), (&d, &t)| (s + (d - t) * (d - t), n + 1));
    if n == 0 {
        return Err(Error::NoSupervisedRays);
    }
    Ok(sum / T::of_usize(n))
}

fn color_sq<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    (0..3).map(|c| (a[c] - b[c]) * (a[c] - b[c])).sum()
}

/// `(unmasked, masked)` channel-mean squared color errors; an empty set gives 0.
pub fn rgb_loss<T: Real>(rendered: &[[T; 3]], targets: &[[T; 3]], in_mask: &[bool]) -> (T, T) {
    assert!(rendered.len() == targets.len() && targets.len() == in_mask.len());
    let mut acc = [(T::zero(), 0usize); 2];
    for ((r, t), &m) in rendered.iter().zip(targets).zip(in_mask) {
        let slot = &mut acc[m as usize];
        slot.0 += color_sq(r, t);
        slot.1 += 1;
    }
    let mean = |(s, n): (T, usize)| if n == 0 { T::zero() } else { s / T::of_usize(3 * n) };
    (mean(acc[0]), mean(acc[1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LossBreakdown<T> {
    pub total: T,
    pub rgb: T,
    pub depth: T,
    pub masked: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub sigma: Vec<T>,
    pub color: Vec<[T; 3]>,
}

impl<T: Real> Gradients<T> {
    pub fn zeros(cells: usize) -> Self {
        Self {
            sigma: vec![T::zero(); cells],
            color: vec![[T::zero(); 3]; cells],
        }
    }
}

struct Traced<T> {
    samples: RaySamples<T>,
    stencils: Vec<Option<Stencil<T>>>,
    sigmas: Vec<T>,
    colors: Vec<[T; 3]>,
}

fn trace<T: Real>(grid: &VoxelGrid<T>, ray: &Ray<T>, n: usize, seed: u64) -> Traced<T> {
    let samples = sample_ray(ray, n, true, seed);
    let stencils: Vec<_> = samples.t.iter().map(|&t| grid.stencil(ray.at(t))).collect();
    let (sigmas, colors) = stencils
        .iter()
        .map(|st| st.as_ref().map_or((T::zero(), [T::zero(); 3]), |s| grid.eval_stencil(s)))
        .unzip();
    Traced {
        samples,
        stencils,
        sigmas,
        colors,
    }
}

/// Renders every ray of the batch with jittered samples (`seed ^ ray index`).
pub fn render_batch<T: Real>(grid: &VoxelGrid<T>, batch: &RayBatch<T>, n_samples: usize, seed: u64) -> Vec<([T; 3], T)> {
    batch
        .rays
        .par_iter()
        .enumerate()
        .map(|(r, ray)| {
            let tr = trace(grid, ray, n_samples, pixel_seed(seed, r));
            let out = composite(&tr.sigmas, &tr.colors, &tr.samples);
            (out.color, out.depth)
        })
        .collect()
}

type Contribution<T> = Vec<(usize, T, [T; 3])>;

/// Weighted loss over the batch and its exact gradient with respect to
/// every cell's density and color. Each ray's sample offsets are drawn
/// with `seed ^ ray index`. Per-ray terms are reduced in ray order, so
/// the result does not depend on the thread count. When no ray carries
/// depth supervision the depth term is 0.
pub fn loss_and_gradients<T: Real>(
    grid: &VoxelGrid<T>,
    batch: &RayBatch<T>,
    weights: &LossWeights,
    n_samples: usize,
    seed: u64,
) -> Result<(LossBreakdown<T>, Gradients<T>)> {
    batch.validate()?;
    let traced: Vec<(Traced<T>, _)> = batch
        .rays
        .par_iter()
        .enumerate()
        .map(|(r, ray)| {
            let tr = trace(grid, ray, n_samples, pixel_seed(seed, r));
            let out = composite(&tr.sigmas, &tr.colors, &tr.samples);
            (tr, out)
        })
        .collect();

    let colors: Vec<[T; 3]> = traced.iter().map(|(_, o)| o.color).collect();
    let depths: Vec<T> = traced.iter().map(|(_, o)| o.depth).collect();
    let (rgb, masked) = rgb_loss(&colors, &batch.target_color, &batch.in_mask);
    let depth = match depth_loss(&depths, &batch.target_depth) {
        Ok(d) => d,
        Err(Error::NoSupervisedRays) => T::zero(),
        Err(e) => return Err(e),
    };
    let (lr, ld, lm) = (T::of(weights.lambda_rgb), T::of(weights.lambda_depth), T::of(weights.lambda_masked));
    let total = lr * rgb + lm * masked + ld * depth;
    let losses = LossBreakdown {
        total,
        rgb,
        depth,
        masked,
    };

    let n_masked = batch.in_mask.iter().filter(|&&m| m).count();
    let n_unmasked = batch.len() - n_masked;
    let n_depth = batch.target_depth.iter().filter(|&&d| d > T::zero()).count();
    let two = T::of(2.0);
    let scale = |lambda: T, n: usize, channels: usize| {
        if n == 0 {
            T::zero()
        } else {
            two * lambda / T::of_usize(channels * n)
        }
    };
    let color_scale = [scale(lr, n_unmasked, 3), scale(lm, n_masked, 3)];
    let depth_scale = scale(ld, n_depth, 1);

    let contributions: Vec<Contribution<T>> = traced
        .par_iter()
        .enumerate()
        .map(|(r, (tr, out))| {
            let cs = color_scale[batch.in_mask[r] as usize];
            let target = batch.target_color[r];
            let d_c: [T; 3] = std::array::from_fn(|c| cs * (out.color[c] - target[c]));
            let td = batch.target_depth[r];
            let d_d = if td > T::zero() { depth_scale * (out.depth - td) } else { T::zero() };
            let n = tr.samples.len();
            let g: Vec<T> = (0..n)
                .map(|i| (0..3).map(|c| d_c[c] * tr.colors[i][c]).sum::<T>() + d_d * tr.samples.t[i])
                .collect();
            let mut suffix = T::zero();
            let mut list = Vec::with_capacity(8 * n);
            for i in (0..n).rev() {
                let d_x = out.transmittance[i + 1] * g[i] - suffix;
                suffix += out.weights[i] * g[i];
                let Some(st) = &tr.stencils[i] else { continue };
                let d_sigma = tr.samples.delta[i] * d_x;
                let w = out.weights[i];
                for &(idx, wt) in st.iter() {
                    if wt != T::zero() {
                        list.push((idx, wt * d_sigma, d_c.map(|v| wt * w * v)));
                    }
                }
            }
            list
        })
        .collect();

    let mut grads = Gradients::zeros(grid.cell_count());
    for list in &contributions {
        for &(idx, ds, dc) in list {
            grads.sigma[idx] += ds;
            for c in 0..3 {
                grads.color[idx][c] += dc[c];
            }
        }
    }
    Ok((losses, grads))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_loss_examples() {
        assert_eq!(depth_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(depth_loss(&[2.0, 6.0], &[1.0, 3.0]).unwrap(), 5.0);
        assert_eq!(depth_loss(&[3.0, 7.0], &[1.0, 0.0]).unwrap(), 4.0);
        assert!(matches!(depth_loss(&[3.0f64], &[0.0]), Err(Error::NoSupervisedRays)));
    }

    #[test]
    fn rgb_loss_examples() {
        let t = [[0.2, 0.4, 0.6], [0.1, 0.1, 0.1]];
        assert_eq!(rgb_loss(&t, &t, &[false, true]), (0.0, 0.0));
        let r = [[0.7f64, 0.4, 0.6]];
        let (u, m) = rgb_loss(&r, &t[..1], &[false]);
        assert!((u - 0.25 / 3.0).abs() < 1e-15);
        assert_eq!(m, 0.0);
        let (u, m) = rgb_loss(&r, &t[..1], &[true]);
        assert_eq!(u, 0.0);
        assert!((m - 0.25 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn weights_validation() {
        assert!(LossWeights::default().validate().is_ok());
        let zero = LossWeights {
            lambda_rgb: 0.0,
            lambda_depth: 0.0,
            lambda_masked: 0.0,
        };
        assert!(zero.validate().is_err());
    }
}
