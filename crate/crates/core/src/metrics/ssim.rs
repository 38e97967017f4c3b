//! Structural similarity, either from whole-image statistics or averaged
//! over sliding Gaussian windows.

use super::{check_same_dims, Planes};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsimMode {
    Global,
    Windowed,
}

/// Stabilizer constants and the window. The 2-D window weights are the
/// outer product of the normalized 1-D `kernel`.
#[derive(Debug, Clone, PartialEq)]
pub struct SsimParams<T> {
    pub k1: T,
    pub k2: T,
    pub dynamic_range: T,
    kernel: Vec<T>,
}

impl<T: Real> SsimParams<T> {
    /// k1 = 0.01, k2 = 0.03, 11×11 Gaussian window with σ = 1.5.
    pub fn new(dynamic_range: T) -> Self {
        Self::gaussian(T::of(0.01), T::of(0.03), dynamic_range, 11, T::of(1.5))
            .expect("canonical parameters are valid")
    }

    pub fn gaussian(k1: T, k2: T, dynamic_range: T, side: usize, sigma: T) -> Result<Self> {
        if side == 0 || !(sigma > T::zero()) {
            return Err(Error::InvalidArgument("window side and sigma must be positive".into()));
        }
        let center = T::of_usize(side - 1) / T::of(2.0);
        let raw: Vec<T> = (0..side)
            .map(|i| {
                let d = T::of_usize(i) - center;
                (-(d * d) / (T::of(2.0) * sigma * sigma)).exp()
            })
            .collect();
        Self::with_kernel(k1, k2, dynamic_range, raw)
    }

    /// Any non-negative 1-D kernel; it is normalized to unit sum.
    pub fn with_kernel(k1: T, k2: T, dynamic_range: T, kernel: Vec<T>) -> Result<Self> {
        if !(k1 > T::zero() && k2 > T::zero() && dynamic_range > T::zero()) {
            return Err(Error::InvalidArgument("k1, k2 and dynamic range must be positive".into()));
        }
        let total: T = kernel.iter().copied().sum();
        if kernel.is_empty() || kernel.iter().any(|w| *w < T::zero()) || !(total > T::zero()) {
            return Err(Error::InvalidArgument("kernel must be non-negative with positive sum".into()));
        }
        Ok(Self {
            k1,
            k2,
            dynamic_range,
            kernel: kernel.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn side(&self) -> usize {
        self.kernel.len()
    }

    pub fn kernel(&self) -> &[T] {
        &self.kernel
    }

    /// Weight of window cell (row `i`, column `j`).
    pub fn weight(&self, i: usize, j: usize) -> T {
        self.kernel[i] * self.kernel[j]
    }

    pub fn c1(&self) -> T {
        let v = self.k1 * self.dynamic_range;
        v * v
    }

    pub fn c2(&self) -> T {
        let v = self.k2 * self.dynamic_range;
        v * v
    }
}

#[inline]
fn ssim_formula<T: Real>(mx: T, my: T, vx: T, vy: T, cxy: T, c1: T, c2: T) -> T {
    let two = T::of(2.0);
    ((two * mx * my + c1) * (two * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
}

fn global_plane<T: Real>(x: &[T], y: &[T], c1: T, c2: T) -> T {
    let n = T::of_usize(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut vx, mut vy, mut cxy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        vx += da * da;
        vy += db * db;
        cxy += da * db;
    }
    ssim_formula(mx, my, vx / n, vy / n, cxy / n, c1, c2)
}

/// Separable weighted filter over every fully-contained window.
fn filter_valid<T: Real>(plane: &[T], width: usize, height: usize, k: &[T]) -> Vec<T> {
    let s = k.len();
    let (ow, oh) = (width + 1 - s, height + 1 - s);
    let mut horiz = vec![T::zero(); ow * height];
    for y in 0..height {
        let row = &plane[y * width..(y + 1) * width];
        for x in 0..ow {
            horiz[y * ow + x] = k.iter().zip(&row[x..x + s]).map(|(&w, &v)| w * v).sum();
        }
    }
    let mut out = vec![T::zero(); ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k
                .iter()
                .enumerate()
                .map(|(i, &w)| w * horiz[(y + i) * ow + x])
                .sum();
        }
    }
    out
}

fn windowed_plane<T: Real>(x: &[T], y: &[T], width: usize, height: usize, params: &SsimParams<T>) -> T {
    let k = params.kernel();
    let xx: Vec<T> = x.iter().map(|&v| v * v).collect();
    let yy: Vec<T> = y.iter().map(|&v| v * v).collect();
    let xy: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a * b).collect();
    let mx = filter_valid(x, width, height, k);
    let my = filter_valid(y, width, height, k);
    let exx = filter_valid(&xx, width, height, k);
    let eyy = filter_valid(&yy, width, height, k);
    let exy = filter_valid(&xy, width, height, k);
    let (c1, c2) = (params.c1(), params.c2());
    let total: T = (0..mx.len())
        .map(|i| {
            let (a, b) = (mx[i], my[i]);
            ssim_formula(a, b, exx[i] - a * a, eyy[i] - b * b, exy[i] - a * b, c1, c2)
        })
        .sum();
    total / T::of_usize(mx.len())
}

/// SSIM averaged over channels (and, in windowed mode, over window positions).
pub fn ssim<T: Real, P: Planes<T>>(x: &P, y: &P, params: &SsimParams<T>, mode: SsimMode) -> Result<T> {
    check_same_dims(x, y)?;
    let (w, h) = (x.width(), x.height());
    if w == 0 || h == 0 {
        return Err(Error::InvalidArgument("empty raster".into()));
    }
    if mode == SsimMode::Windowed && (w < params.side() || h < params.side()) {
        return Err(Error::InvalidArgument(format!(
            "{w}x{h} raster is smaller than the {}-pixel window",
            params.side()
        )));
    }
    let channels = x.channels();
    let mut acc = T::zero();
    for c in 0..channels {
        let (px, py) = (x.plane(c), y.plane(c));
        acc += match mode {
            SsimMode::Global => global_plane(&px, &py, params.c1(), params.c2()),
            SsimMode::Windowed => windowed_plane(&px, &py, w, h, params),
        };
    }
    Ok(acc / T::of_usize(channels))
}
