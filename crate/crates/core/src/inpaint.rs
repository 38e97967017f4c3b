//! Harmonic (discrete Laplace) fill of masked depth and color regions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::depth_io::{DepthMap, Mask, RgbImage};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InpaintConfig {
    /// `None` means `min(10 * (width + height)^2, 1e6)`.
    #[serde(default)]
    pub max_iterations: Option<usize>,
    pub tolerance: f64,
}

impl Default for InpaintConfig {
    fn default() -> Self {
        Self {
            max_iterations: None,
            tolerance: 1e-6,
        }
    }
}

impl InpaintConfig {
    pub fn iteration_cap(&self, width: usize, height: usize) -> usize {
        self.max_iterations
            .unwrap_or_else(|| (10 * (width + height).pow(2)).min(1_000_000))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FillOutcome {
    pub values: Vec<f64>,
    pub iterations: usize,
    /// Max over unknown pixels of |value - mean of in-image 4-neighbors|.
    pub residual: f64,
}

fn neighbors(i: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = (i % w, i / w);
    [
        (x > 0).then(|| i - 1),
        (x + 1 < w).then(|| i + 1),
        (y > 0).then(|| i - w),
        (y + 1 < h).then(|| i + w),
    ]
    .into_iter()
    .flatten()
}

fn neighbor_mean(v: &[f64], i: usize, w: usize, h: usize) -> f64 {
    let (sum, n) = neighbors(i, w, h).fold((0.0, 0usize), |(s, n), j| (s + v[j], n + 1));
    sum / n as f64
}

/// Max Laplace residual over the `unknown` pixels.
pub fn laplace_residual(values: &[f64], width: usize, height: usize, unknown: &[bool]) -> f64 {
    (0..values.len())
        .into_par_iter()
        .filter(|&i| unknown[i])
        .map(|i| (values[i] - neighbor_mean(values, i, width, height)).abs())
        .reduce(|| 0.0, f64::max)
}

/// Solves the Laplace equation over the `unknown` pixels with the known
/// pixels as Dirichlet data. Red-black SOR; each connected unknown region
/// starts at the mean of its boundary and stays within its boundary range.
pub fn harmonic_fill(
    values: &[f64],
    width: usize,
    height: usize,
    unknown: &[bool],
    cfg: &InpaintConfig,
) -> Result<FillOutcome> {
    let n = width * height;
    assert!(values.len() == n && unknown.len() == n);
    if !(cfg.tolerance > 0.0) {
        return Err(Error::InvalidArgument("inpaint tolerance must be positive".into()));
    }
    let mut v = values.to_vec();
    if !unknown.iter().any(|&u| u) {
        return Ok(FillOutcome {
            values: v,
            iterations: 0,
            residual: 0.0,
        });
    }
    if unknown.iter().all(|&u| u) {
        return Err(Error::NothingKnown);
    }

    // connected unknown regions and their boundary ranges
    let mut label = vec![usize::MAX; n];
    let mut ranges: Vec<(f64, f64)> = Vec::new();
    for start in 0..n {
        if !unknown[start] || label[start] != usize::MAX {
            continue;
        }
        let id = ranges.len();
        let (mut lo, mut hi, mut sum, mut count) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
        let mut stack = vec![start];
        let mut members = Vec::new();
        label[start] = id;
        while let Some(i) = stack.pop() {
            members.push(i);
            for j in neighbors(i, width, height) {
                if unknown[j] {
                    if label[j] == usize::MAX {
                        label[j] = id;
                        stack.push(j);
                    }
                } else {
                    lo = lo.min(values[j]);
                    hi = hi.max(values[j]);
                    sum += values[j];
                    count += 1;
                }
            }
        }
        let init = sum / count as f64;
        for i in members {
            v[i] = init;
        }
        ranges.push((lo, hi));
    }

    let colors: [Vec<usize>; 2] = [0, 1].map(|c| {
        (0..n)
            .filter(|&i| unknown[i] && (i % width + i / width) % 2 == c)
            .collect()
    });
    let side = width.max(height) as f64;
    let omega = 2.0 / (1.0 + (std::f64::consts::PI / (side + 1.0)).sin());
    let cap = cfg.iteration_cap(width, height);
    let mut residual = laplace_residual(&v, width, height, unknown);
    let mut iterations = 0;
    while residual > cfg.tolerance {
        if iterations >= cap {
            return Err(Error::NotConverged { iterations, residual });
        }
        for pixels in &colors {
            let updates: Vec<f64> = pixels
                .par_iter()
                .map(|&i| {
                    let (lo, hi) = ranges[label[i]];
                    let next = v[i] + omega * (neighbor_mean(&v, i, width, height) - v[i]);
                    next.clamp(lo, hi)
                })
                .collect();
            for (&i, u) in pixels.iter().zip(updates) {
                v[i] = u;
            }
        }
        iterations += 1;
        residual = laplace_residual(&v, width, height, unknown);
    }
    Ok(FillOutcome {
        values: v,
        iterations,
        residual,
    })
}

fn check_mask(w: usize, h: usize, mask: &Mask) -> Result<()> {
    if (mask.width(), mask.height()) != (w, h) {
        return Err(Error::DimensionMismatch {
            left: (h, w),
            right: (mask.height(), mask.width()),
        });
    }
    Ok(())
}

/// Fills masked pixels and unmasked invalid (0) pixels; other pixels are unchanged.
pub fn inpaint_depth<T: Real>(depth: &DepthMap<T>, mask: &Mask, cfg: &InpaintConfig) -> Result<DepthMap<T>> {
    let (w, h) = (depth.width(), depth.height());
    check_mask(w, h, mask)?;
    let unknown: Vec<bool> = depth
        .values()
        .iter()
        .zip(mask.values())
        .map(|(&d, &m)| m || !(d > T::zero()))
        .collect();
    if !unknown.iter().any(|&u| u) {
        return Ok(depth.clone());
    }
    let raw: Vec<f64> = depth.values().iter().map(|d| d.f64()).collect();
    let out = harmonic_fill(&raw, w, h, &unknown, cfg)?;
    let values = out
        .values
        .iter()
        .zip(depth.values())
        .zip(&unknown)
        .map(|((&f, &orig), &u)| if u { T::of(f) } else { orig })
        .collect();
    DepthMap::new(w, h, values)
}

/// Channel-wise harmonic fill of the masked pixels of a color image.
pub fn inpaint_rgb<T: Real>(image: &RgbImage<T>, mask: &Mask, cfg: &InpaintConfig) -> Result<RgbImage<T>> {
    let (w, h) = (image.width(), image.height());
    check_mask(w, h, mask)?;
    if mask.count() == 0 {
        return Ok(image.clone());
    }
    let mut planes = Vec::with_capacity(3);
    for c in 0..3 {
        let plane = image.channel(c);
        let raw: Vec<f64> = plane.iter().map(|v| v.f64()).collect();
        let out = harmonic_fill(&raw, w, h, mask.values(), cfg)?;
        planes.push(
            out.values
                .iter()
                .zip(&plane)
                .zip(mask.values())
                .map(|((&f, &orig), &m)| if m { T::of(f) } else { orig })
                .collect::<Vec<T>>(),
        );
    }
    RgbImage::from_channels(w, h, image.max_value(), [&planes[0], &planes[1], &planes[2]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pixel_is_neighbor_mean() {
        #[rustfmt::skip]
        let d = DepthMap::new(3, 3, vec![
            9.0, 1.0, 9.0,
            2.0, 7.0, 3.0,
            9.0, 6.0, 9.0,
        ]).unwrap();
        let mut m = vec![false; 9];
        m[4] = true;
        let out = inpaint_depth(&d, &Mask::new(3, 3, m).unwrap(), &InpaintConfig::default()).unwrap();
        assert_eq!(out.get(1, 1), 3.0);
        assert_eq!(out.get(0, 0), 9.0);
    }

    #[test]
    fn constant_plane() {
        let d = DepthMap::new(5, 4, vec![5.0f64; 20]).unwrap();
        let mut m = vec![false; 20];
        m[7] = true;
        m[8] = true;
        let out = inpaint_depth(&d, &Mask::new(5, 4, m).unwrap(), &InpaintConfig::default()).unwrap();
        assert!(out.values().iter().all(|&v| v == 5.0));
    }

    #[test]
    fn empty_mask_is_identity() {
        let d = DepthMap::new(2, 2, vec![1.0f32, 2.0, 3.0, 4.0]).unwrap();
        let out = inpaint_depth(&d, &Mask::empty(2, 2), &InpaintConfig::default()).unwrap();
        assert_eq!(out, d);
    }

    #[test]
    fn invalid_pixels_are_filled() {
        let d = DepthMap::new(3, 1, vec![2.0f64, 0.0, 4.0]).unwrap();
        let out = inpaint_depth(&d, &Mask::empty(3, 1), &InpaintConfig::default()).unwrap();
        assert!((out.get(1, 0) - 3.0).abs() < 1e-6);
    }

    #[test]
    fn errors() {
        let d = DepthMap::new(2, 1, vec![1.0f64, 0.0]).unwrap();
        let all = Mask::new(2, 1, vec![true, false]).unwrap();
        assert!(matches!(inpaint_depth(&d, &all, &InpaintConfig::default()), Err(Error::NothingKnown)));

        let d = DepthMap::new(40, 1, (0..40).map(|i| if i == 0 { 1.0 } else if i == 39 { 2.0 } else { 0.0 }).collect()).unwrap();
        let cfg = InpaintConfig {
            max_iterations: Some(2),
            tolerance: 1e-12,
        };
        match inpaint_depth(&d, &Mask::empty(40, 1), &cfg) {
            Err(Error::NotConverged { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-12);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn iteration_cap_default() {
        let cfg = InpaintConfig::default();
        assert_eq!(cfg.iteration_cap(3, 2), 250);
        assert_eq!(cfg.iteration_cap(1000, 1000), 1_000_000);
    }
}
