use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::Real;

/// `r(t) = origin + t · direction` for `t` in `[t_near, t_far]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray<T> {
    pub origin: Vec3<T>,
    pub direction: Vec3<T>,
    pub t_near: T,
    pub t_far: T,
}

impl<T: Real> Ray<T> {
    pub fn new(origin: Vec3<T>, direction: Vec3<T>, t_near: T, t_far: T) -> Result<Self> {
        if !((direction.norm() - T::one()).abs() <= T::unit_tolerance()) {
            return Err(Error::InvalidArgument(format!(
                "ray direction must be unit length, |d| = {}",
                direction.norm()
            )));
        }
        if !(t_near > T::zero() && t_near < t_far) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < t_near < t_far, got {t_near}, {t_far}"
            )));
        }
        Ok(Self::new_unchecked(origin, direction, t_near, t_far))
    }

    pub(crate) fn new_unchecked(origin: Vec3<T>, direction: Vec3<T>, t_near: T, t_far: T) -> Self {
        Self {
            origin,
            direction,
            t_near,
            t_far,
        }
    }

    #[inline]
    pub fn at(&self, t: T) -> Vec3<T> {
        self.origin + self.direction * t
    }
}

/// Sorted sample depths and the segment length attached to each.
#[derive(Debug, Clone, PartialEq)]
pub struct RaySamples<T> {
    pub t: Vec<T>,
    pub delta: Vec<T>,
}

impl<T: Real> RaySamples<T> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Stratified samples: one per equal-width bin, at the bin midpoint or
/// uniformly inside it when `jitter` is set. `delta_i = t_{i+1} - t_i`,
/// and the last segment runs to `t_far`.
///
/// Panics if `n == 0`.
pub fn sample_ray<T: Real>(ray: &Ray<T>, n: usize, jitter: bool, seed: u64) -> RaySamples<T> {
    assert!(n >= 1, "at least one sample per ray");
    let width = (ray.t_far - ray.t_near) / T::of_usize(n);
    let mut rng = jitter.then(|| ChaCha8Rng::seed_from_u64(seed));
    let t: Vec<T> = (0..n)
        .map(|i| {
            let u = match rng.as_mut() {
                Some(r) => T::of(r.gen::<f64>()),
                None => T::of(0.5),
            };
            ray.t_near + (T::of_usize(i) + u) * width
        })
        .collect();
    let delta = (0..n)
        .map(|i| if i + 1 < n { t[i + 1] - t[i] } else { ray.t_far - t[i] })
        .collect();
    RaySamples { t, delta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn axial(near: f64, far: f64) -> Ray<f64> {
        Ray::new(Vec3::zero(), Vec3::new(0.0, 0.0, 1.0), near, far).unwrap()
    }

    #[test]
    fn midpoint_examples() {
        let s = sample_ray(&axial(1.0, 3.0), 2, false, 0);
        assert_eq!(s.t, vec![1.5, 2.5]);
        assert_eq!(s.delta, vec![1.0, 0.5]);
        let s = sample_ray(&axial(1.0, 3.0), 1, false, 0);
        assert_eq!((s.t[0], s.delta[0]), (2.0, 1.0));
    }

    #[test]
    fn seeded_jitter_is_deterministic() {
        let r = axial(0.5, 4.0);
        assert_eq!(sample_ray(&r, 16, true, 42), sample_ray(&r, 16, true, 42));
        assert_ne!(sample_ray(&r, 16, true, 42), sample_ray(&r, 16, true, 43));
    }

    #[test]
    fn ray_validation() {
        assert!(Ray::new(Vec3::zero(), Vec3::new(0.0, 0.0, 2.0), 1.0, 2.0).is_err());
        assert!(Ray::new(Vec3::zero(), Vec3::new(0.0, 0.0, 1.0), 0.0, 2.0).is_err());
        assert!(Ray::new(Vec3::zero(), Vec3::new(0.0, 0.0, 1.0), 3.0, 2.0).is_err());
    }

    proptest! {
        #[test]
        fn samples_are_stratified(near in 0.01f64..5.0, len in 0.01f64..10.0, n in 1usize..64, seed: u64) {
            let r = axial(near, near + len);
            let s = sample_ray(&r, n, true, seed);
            let w = len / n as f64;
            for i in 0..n {
                prop_assert!(s.t[i] >= near + i as f64 * w - 1e-12 && s.t[i] <= near + (i + 1) as f64 * w + 1e-12);
                prop_assert!(s.delta[i] >= 0.0);
            }
            prop_assert!(s.t.windows(2).all(|p| p[0] < p[1]));
            prop_assert!(s.delta.iter().sum::<f64>() <= len + 1e-9);
        }
    }
}
