use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Real> Aabb<T> {
    pub fn new(min: Vec3<T>, max: Vec3<T>) -> Result<Self> {
        if !(max.x > min.x && max.y > min.y && max.z > min.z) {
            return Err(Error::InvalidArgument("bounds need positive extent on every axis".into()));
        }
        Ok(Self { min, max })
    }

    pub fn cube(half: T) -> Self {
        Self::new(Vec3::new(-half, -half, -half), Vec3::new(half, half, half)).expect("half > 0")
    }

    pub fn extent(&self) -> Vec3<T> {
        self.max - self.min
    }

    #[inline]
    pub fn contains(&self, p: Vec3<T>) -> bool {
        p.x >= self.min.x
            && p.y >= self.min.y
            && p.z >= self.min.z
            && p.x <= self.max.x
            && p.y <= self.max.y
            && p.z <= self.max.z
    }
}

/// Eight cell indices with their trilinear weights.
pub type Stencil<T> = [(usize, T); 8];

/// Axis-aligned grid of cells carrying density and Lambertian color.
/// Cell `(i, j, k)` is stored at `(k * ny + j) * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid<T> {
    resolution: [usize; 3],
    bounds: Aabb<T>,
    pub sigma: Vec<T>,
    pub color: Vec<[T; 3]>,
}

impl<T: Real> VoxelGrid<T> {
    pub fn filled(resolution: [usize; 3], bounds: Aabb<T>, sigma: T, color: [T; 3]) -> Result<Self> {
        let n = Self::cell_count_of(resolution)?;
        Self::from_parts(resolution, bounds, vec![sigma; n], vec![color; n])
    }

    pub fn empty(resolution: [usize; 3], bounds: Aabb<T>) -> Result<Self> {
        Self::filled(resolution, bounds, T::zero(), [T::zero(); 3])
    }

    pub fn from_parts(resolution: [usize; 3], bounds: Aabb<T>, sigma: Vec<T>, color: Vec<[T; 3]>) -> Result<Self> {
        let n = Self::cell_count_of(resolution)?;
        Aabb::new(bounds.min, bounds.max)?;
        if sigma.len() != n || color.len() != n {
            return Err(Error::InvalidArgument(format!(
                "grid {resolution:?} needs {n} cells, got {} sigma / {} color",
                sigma.len(),
                color.len()
            )));
        }
        if sigma.iter().any(|s| !(s.is_finite() && *s >= T::zero())) {
            return Err(Error::InvalidValue("density must be finite and non-negative".into()));
        }
        if color.iter().flatten().any(|c| !(*c >= T::zero() && *c <= T::one())) {
            return Err(Error::InvalidValue("color channels must lie in [0, 1]".into()));
        }
        Ok(Self {
            resolution,
            bounds,
            sigma,
            color,
        })
    }

    fn cell_count_of(resolution: [usize; 3]) -> Result<usize> {
        if resolution.iter().any(|&r| r == 0) {
            return Err(Error::InvalidArgument("grid resolution must be positive".into()));
        }
        Ok(resolution.iter().product())
    }

    pub fn resolution(&self) -> [usize; 3] {
        self.resolution
    }

    pub fn bounds(&self) -> Aabb<T> {
        self.bounds
    }

    pub fn cell_count(&self) -> usize {
        self.sigma.len()
    }

    pub fn cell_size(&self) -> Vec3<T> {
        let e = self.bounds.extent();
        Vec3::new(
            e.x / T::of_usize(self.resolution[0]),
            e.y / T::of_usize(self.resolution[1]),
            e.z / T::of_usize(self.resolution[2]),
        )
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.resolution[1] + j) * self.resolution[0] + i
    }

    pub fn cell_center(&self, i: usize, j: usize, k: usize) -> Vec3<T> {
        let c = self.cell_size();
        let half = T::of(0.5);
        self.bounds.min
            + Vec3::new(
                (T::of_usize(i) + half) * c.x,
                (T::of_usize(j) + half) * c.y,
                (T::of_usize(k) + half) * c.z,
            )
    }

    /// Trilinear stencil over the 8 surrounding cell centers, clamped to the
    /// outermost cells near the boundary. `None` outside the bounds.
    pub fn stencil(&self, p: Vec3<T>) -> Option<Stencil<T>> {
        if !self.bounds.contains(p) {
            return None;
        }
        let cell = self.cell_size();
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        let mut frac = [T::zero(); 3];
        for a in 0..3 {
            let n = self.resolution[a];
            let g = (p.get(a) - self.bounds.min.get(a)) / cell.get(a) - T::of(0.5);
            let f0 = g.floor();
            let i0 = f0.to_isize().unwrap_or(0);
            frac[a] = g - f0;
            let clamp = |i: isize| i.clamp(0, n as isize - 1) as usize;
            lo[a] = clamp(i0);
            hi[a] = clamp(i0 + 1);
        }
        let mut out = [(0usize, T::zero()); 8];
        for (corner, slot) in out.iter_mut().enumerate() {
            let pick = |a: usize| corner >> a & 1 == 1;
            let mut w = T::one();
            let mut ijk = [0usize; 3];
            for a in 0..3 {
                if pick(a) {
                    w *= frac[a];
                    ijk[a] = hi[a];
                } else {
                    w *= T::one() - frac[a];
                    ijk[a] = lo[a];
                }
            }
            *slot = (self.index(ijk[0], ijk[1], ijk[2]), w);
        }
        Some(out)
    }

    /// Interpolated `(sigma, color)`; empty space outside the bounds.
    pub fn query(&self, p: Vec3<T>) -> (T, [T; 3]) {
        match self.stencil(p) {
            Some(st) => self.eval_stencil(&st),
            None => (T::zero(), [T::zero(); 3]),
        }
    }

    #[inline]
    pub fn eval_stencil(&self, st: &Stencil<T>) -> (T, [T; 3]) {
        let mut s = T::zero();
        let mut c = [T::zero(); 3];
        for &(idx, w) in st {
            s += w * self.sigma[idx];
            let col = self.color[idx];
            for ch in 0..3 {
                c[ch] += w * col[ch];
            }
        }
        (s, c)
    }

    pub fn convert<U: Real>(&self) -> VoxelGrid<U> {
        VoxelGrid {
            resolution: self.resolution,
            bounds: Aabb {
                min: Vec3::from_f64(self.bounds.min.to_f64()),
                max: Vec3::from_f64(self.bounds.max.to_f64()),
            },
            sigma: self.sigma.iter().map(|s| U::of(s.f64())).collect(),
            color: self.color.iter().map(|c| c.map(|v| U::of(v.f64()))).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(n: [usize; 3]) -> VoxelGrid<f64> {
        let b = Aabb::new(Vec3::zero(), Vec3::new(n[0] as f64, n[1] as f64, n[2] as f64)).unwrap();
        VoxelGrid::empty(n, b).unwrap()
    }

    #[test]
    fn cell_center_returns_cell_value() {
        let mut g = unit_grid([3, 3, 3]);
        let idx = g.index(1, 2, 0);
        g.sigma[idx] = 7.0;
        g.color[idx] = [0.1, 0.2, 0.3];
        let (s, c) = g.query(g.cell_center(1, 2, 0));
        assert_eq!(s, 7.0);
        assert_eq!(c, [0.1, 0.2, 0.3]);
    }

    #[test]
    fn midpoint_interpolates() {
        let mut g = unit_grid([2, 1, 1]);
        g.sigma = vec![2.0, 4.0];
        let (s, _) = g.query(Vec3::new(1.0, 0.5, 0.5));
        assert_eq!(s, 3.0);
    }

    #[test]
    fn outside_is_empty() {
        let g = VoxelGrid::filled([2, 2, 2], Aabb::cube(1.0), 5.0, [1.0; 3]).unwrap();
        assert_eq!(g.query(Vec3::new(0.0, 0.0, 1.5)), (0.0, [0.0; 3]));
        // boundary clamps to the edge cells
        assert_eq!(g.query(Vec3::new(1.0, 1.0, 1.0)).0, 5.0);
    }

    #[test]
    fn stencil_weights_sum_to_one() {
        let g = unit_grid([4, 5, 3]);
        for p in [Vec3::new(0.1, 4.9, 2.2), Vec3::new(3.3, 0.0, 1.5), Vec3::new(2.0, 2.5, 1.5)] {
            let total: f64 = g.stencil(p).unwrap().iter().map(|s| s.1).sum();
            assert!((total - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn invalid_grids() {
        assert!(VoxelGrid::filled([0, 1, 1], Aabb::cube(1.0), 0.0, [0.0; 3]).is_err());
        assert!(VoxelGrid::filled([1, 1, 1], Aabb::cube(1.0), -1.0, [0.0; 3]).is_err());
        assert!(VoxelGrid::filled([1, 1, 1], Aabb::cube(1.0), 0.0, [2.0; 3]).is_err());
        assert!(Aabb::new(Vec3::zero(), Vec3::new(1.0, 0.0, 1.0)).is_err());
    }
}
