use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major grid of metric depth. A value of exactly zero marks a pixel
/// without a measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap<T> {
    width: usize,
    height: usize,
    values: Vec<T>,
}

impl<T: Real> DepthMap<T> {
    /// Rejects negative and non-finite values.
    pub fn new(width: usize, height: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "depth map {width}x{height} needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < T::zero())
        {
            return Err(Error::InvalidValue(format!("depth {v} at index {i}")));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![T::zero(); width * height],
        }
    }

    /// Builds a map from `f(x, y)`; negative or non-finite results become invalid.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                values.push(if v.is_finite() && v > T::zero() { v } else { T::zero() });
            }
        }
        Self {
            width,
            height,
            values,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// `(height, width)`, i.e. rows by columns.
    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.values[y * self.width + x]
    }

    #[inline]
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.get(x, y) > T::zero()
    }

    /// Multiplies every value by a non-negative finite factor.
    pub fn scaled(&self, s: T) -> Self {
        assert!(s.is_finite() && s >= T::zero(), "scale must be finite and non-negative");
        Self {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|&v| v * s).collect(),
        }
    }

    /// Sub-window `[x0, x0+w) × [y0, y0+h)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Self {
        assert!(x0 + w <= self.width && y0 + h <= self.height, "crop out of range");
        let mut values = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            values.extend_from_slice(&self.values[y * self.width + x0..y * self.width + x0 + w]);
        }
        Self {
            width: w,
            height: h,
            values,
        }
    }

    /// Pads at the bottom and right with the invalid sentinel.
    pub fn padded_to(&self, width: usize, height: usize) -> Self {
        assert!(width >= self.width && height >= self.height, "padding cannot shrink");
        let mut out = Self::zeros(width, height);
        for y in 0..self.height {
            out.values[y * width..y * width + self.width]
                .copy_from_slice(&self.values[y * self.width..(y + 1) * self.width]);
        }
        out
    }

    pub fn convert<U: Real>(&self) -> DepthMap<U> {
        DepthMap {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|v| U::of(v.f64())).collect(),
        }
    }
}

/// Interleaved RGB image with intensities in `[0, max_value]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage<T> {
    width: usize,
    height: usize,
    max_value: T,
    data: Vec<T>,
}

impl<T: Real> RgbImage<T> {
    pub fn new(width: usize, height: usize, max_value: T, data: Vec<T>) -> Result<Self> {
        if !(max_value > T::zero() && max_value.is_finite()) {
            return Err(Error::InvalidValue(format!("max_value {max_value} must be positive")));
        }
        if data.len() != 3 * width * height {
            return Err(Error::InvalidArgument(format!(
                "rgb image {width}x{height} needs {} samples, got {}",
                3 * width * height,
                data.len()
            )));
        }
        if let Some(v) = data
            .iter()
            .find(|v| !v.is_finite() || **v < T::zero() || **v > max_value)
        {
            return Err(Error::InvalidValue(format!(
                "intensity {v} outside [0, {max_value}]"
            )));
        }
        Ok(Self {
            width,
            height,
            max_value,
            data,
        })
    }

    pub fn black(width: usize, height: usize, max_value: T) -> Self {
        Self {
            width,
            height,
            max_value,
            data: vec![T::zero(); 3 * width * height],
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn max_value(&self) -> T {
        self.max_value
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [T; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Writes a pixel, clamping each channel into `[0, max_value]`.
    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [T; 3]) {
        let i = 3 * (y * self.width + x);
        for c in 0..3 {
            self.data[i + c] = rgb[c].max(T::zero()).min(self.max_value);
        }
    }

    /// One channel as a row-major plane.
    pub fn channel(&self, c: usize) -> Vec<T> {
        self.data.iter().skip(c).step_by(3).copied().collect()
    }

    /// Same image rescaled so that `max_value == 1`.
    pub fn normalized(&self) -> Self {
        let inv = T::one() / self.max_value;
        Self {
            width: self.width,
            height: self.height,
            max_value: T::one(),
            data: self.data.iter().map(|&v| (v * inv).min(T::one())).collect(),
        }
    }

    pub fn from_channels(width: usize, height: usize, max_value: T, planes: [&[T]; 3]) -> Result<Self> {
        let n = width * height;
        if planes.iter().any(|p| p.len() != n) {
            return Err(Error::InvalidArgument("channel plane size mismatch".into()));
        }
        let mut data = Vec::with_capacity(3 * n);
        for i in 0..n {
            data.extend(planes.iter().map(|p| p[i]));
        }
        Self::new(width, height, max_value, data)
    }
}

/// Per-pixel removal mask; `true` marks the region to remove.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    values: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, values: Vec<bool>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "mask {width}x{height} needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![false; width * height],
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn values(&self) -> &[bool] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.values[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&m| m).count()
    }
}

/// Fraction of pixels holding a valid (non-zero) depth.
pub fn density<T: Real>(map: &DepthMap<T>) -> T {
    let n = map.values().len();
    if n == 0 {
        return T::zero();
    }
    let valid = map.values().iter().filter(|&&v| v > T::zero()).count();
    T::of_usize(valid) / T::of_usize(n)
}
