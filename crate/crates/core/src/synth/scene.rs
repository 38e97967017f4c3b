use serde::{Deserialize, Serialize};

use crate::camera::Camera;
use crate::depth_io::{DepthMap, Mask};
use crate::error::{Error, Result};
use crate::field::{Aabb, Ray, VoxelGrid};
use crate::geometry::{Rigid, Vec3};
use crate::scalar::Real;

fn z_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

/// Solid primitives. A slab is the region `z0 <= normal·p <= z1`; a plane
/// is the half-space behind it, `normal·(p - point) <= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    Sphere {
        center: [f64; 3],
        radius: f64,
    },
    Slab {
        z0: f64,
        z1: f64,
        #[serde(default = "z_axis")]
        normal: [f64; 3],
    },
    Plane {
        point: [f64; 3],
        normal: [f64; 3],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    #[serde(flatten)]
    pub shape: Shape,
    pub color: [f64; 3],
    pub density: f64,
}

/// Scene description. `removal` designates the primitive whose silhouette
/// forms the removal mask.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SceneSpec {
    pub primitives: Vec<Primitive>,
    #[serde(default)]
    pub removal: Option<usize>,
}

fn v3<T: Real>(a: [f64; 3]) -> Vec3<T> {
    Vec3::from_f64(a)
}

impl Shape {
    /// Nearest `t > 0` where the ray crosses the primitive's boundary.
    pub fn intersect<T: Real>(&self, ray: &Ray<T>) -> Option<T> {
        let (o, d) = (ray.origin, ray.direction);
        let nearest = |cands: [T; 2]| {
            cands
                .into_iter()
                .filter(|t| t.is_finite() && *t > T::zero())
                .fold(None, |best: Option<T>, t| Some(best.map_or(t, |b| b.min(t))))
        };
        match *self {
            Shape::Sphere { center, radius } => {
                let oc = o - v3(center);
                let b = d.dot(oc);
                let c = oc.dot(oc) - T::of(radius * radius);
                let disc = b * b - c;
                if disc < T::zero() {
                    return None;
                }
                let q = disc.sqrt();
                nearest([-b - q, -b + q])
            }
            Shape::Slab { z0, z1, normal } => {
                let n = v3::<T>(normal).normalized();
                let (no, nd) = (n.dot(o), n.dot(d));
                nearest([(T::of(z0) - no) / nd, (T::of(z1) - no) / nd])
            }
            Shape::Plane { point, normal } => {
                let n = v3::<T>(normal).normalized();
                let t = n.dot(v3::<T>(point) - o) / n.dot(d);
                nearest([t, T::nan()])
            }
        }
    }

    pub fn contains<T: Real>(&self, p: Vec3<T>) -> bool {
        match *self {
            Shape::Sphere { center, radius } => {
                let r = p - v3(center);
                r.dot(r) <= T::of(radius * radius)
            }
            Shape::Slab { z0, z1, normal } => {
                let h = v3::<T>(normal).normalized().dot(p);
                h >= T::of(z0) && h <= T::of(z1)
            }
            Shape::Plane { point, normal } => v3::<T>(normal).dot(p - v3(point)) <= T::zero(),
        }
    }

    pub fn transformed(&self, g: &Rigid<f64>) -> Shape {
        match *self {
            Shape::Sphere { center, radius } => Shape::Sphere {
                center: g.apply(Vec3::from_array(center)).to_array(),
                radius,
            },
            Shape::Slab { z0, z1, normal } => {
                let n = g.rotate(Vec3::from_array(normal).normalized());
                let shift = n.dot(g.translation);
                Shape::Slab {
                    z0: z0 + shift,
                    z1: z1 + shift,
                    normal: n.to_array(),
                }
            }
            Shape::Plane { point, normal } => Shape::Plane {
                point: g.apply(Vec3::from_array(point)).to_array(),
                normal: g.rotate(Vec3::from_array(normal)).to_array(),
            },
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.primitives.iter().enumerate() {
            if !(p.density >= 0.0 && p.density.is_finite()) {
                return Err(Error::InvalidValue(format!("primitive {i}: density must be non-negative")));
            }
            if p.color.iter().any(|c| !(0.0..=1.0).contains(c)) {
                return Err(Error::InvalidValue(format!("primitive {i}: color must lie in [0, 1]")));
            }
            match p.shape {
                Shape::Sphere { radius, .. } if !(radius > 0.0) => {
                    return Err(Error::InvalidValue(format!("primitive {i}: radius must be positive")))
                }
                Shape::Slab { z0, z1, .. } if !(z1 >= z0) => {
                    return Err(Error::InvalidValue(format!("primitive {i}: slab needs z0 <= z1")))
                }
                _ => {}
            }
        }
        if let Some(r) = self.removal {
            if r >= self.primitives.len() {
                return Err(Error::InvalidArgument(format!("removal index {r} out of range")));
            }
        }
        Ok(())
    }

    /// The same scene with the designated removal primitive taken out.
    pub fn without_removal(&self) -> SceneSpec {
        let mut primitives = self.primitives.clone();
        if let Some(r) = self.removal {
            primitives.remove(r);
        }
        SceneSpec {
            primitives,
            removal: None,
        }
    }

    pub fn transformed(&self, g: &Rigid<f64>) -> SceneSpec {
        SceneSpec {
            primitives: self
                .primitives
                .iter()
                .map(|p| Primitive {
                    shape: p.shape.transformed(g),
                    ..p.clone()
                })
                .collect(),
            removal: self.removal,
        }
    }

    /// Nearest hit `(t, primitive index)` along a ray.
    pub fn first_hit<T: Real>(&self, ray: &Ray<T>) -> Option<(T, usize)> {
        self.primitives
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.shape.intersect(ray).map(|t| (t, i)))
            .fold(None, |best, cur| match best {
                Some(b) if b.0 <= cur.0 => Some(b),
                _ => Some(cur),
            })
    }

    /// Sphere in front of a colored backdrop slab; the sphere is the removal target.
    pub fn demo() -> SceneSpec {
        SceneSpec {
            primitives: vec![
                Primitive {
                    shape: Shape::Sphere {
                        center: [0.0, 0.0, 0.0],
                        radius: 0.45,
                    },
                    color: [0.9, 0.35, 0.2],
                    density: 50.0,
                },
                Primitive {
                    shape: Shape::Slab {
                        z0: 0.8,
                        z1: 1.3,
                        normal: z_axis(),
                    },
                    color: [0.2, 0.45, 0.85],
                    density: 50.0,
                },
            ],
            removal: Some(0),
        }
    }
}

fn pixel_hits<T: Real>(spec: &SceneSpec, camera: &Camera<T>) -> Vec<Option<(T, usize)>> {
    let mut out = Vec::with_capacity(camera.pixel_count());
    for y in 0..camera.height {
        for x in 0..camera.width {
            // near/far do not restrict the analytic hit
            out.push(spec.first_hit(&camera.ray(x, y, T::one(), T::of(2.0))));
        }
    }
    out
}

/// Ray distance to the nearest primitive per pixel; 0 where nothing is hit.
pub fn analytic_depth<T: Real>(spec: &SceneSpec, camera: &Camera<T>) -> DepthMap<T> {
    let hits = pixel_hits(spec, camera);
    DepthMap::from_fn(camera.width, camera.height, |x, y| {
        hits[y * camera.width + x].map_or(T::zero(), |h| h.0)
    })
}

/// Pixels whose nearest hit is the designated removal primitive.
pub fn removal_mask<T: Real>(spec: &SceneSpec, camera: &Camera<T>) -> Mask {
    let values = match spec.removal {
        Some(r) => pixel_hits(spec, camera)
            .into_iter()
            .map(|h| h.is_some_and(|h| h.1 == r))
            .collect(),
        None => vec![false; camera.pixel_count()],
    };
    Mask::new(camera.width, camera.height, values).expect("one value per pixel")
}

/// Sets every cell from the first primitive (in list order) containing its center.
pub fn bake_grid<T: Real>(spec: &SceneSpec, resolution: [usize; 3], bounds: Aabb<T>) -> Result<VoxelGrid<T>> {
    spec.validate()?;
    let mut grid = VoxelGrid::empty(resolution, bounds)?;
    let [nx, ny, nz] = resolution;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let c = grid.cell_center(i, j, k);
                if let Some(p) = spec.primitives.iter().find(|p| p.shape.contains(c)) {
                    let idx = grid.index(i, j, k);
                    grid.sigma[idx] = T::of(p.density);
                    grid.color[idx] = p.color.map(T::of);
                }
            }
        }
    }
    Ok(grid)
}

/// `count` cameras on a cone of half-angle `spread` (radians) around the
/// −z axis at `distance` from the origin, all looking at the origin.
pub fn ring_cameras<T: Real>(
    count: usize,
    distance: T,
    spread: T,
    focal: T,
    width: usize,
    height: usize,
) -> Result<Vec<Camera<T>>> {
    (0..count)
        .map(|i| {
            let phi = T::TAU() * T::of_usize(i) / T::of_usize(count.max(1));
            let (s, c) = spread.sin_cos();
            let eye = Vec3::new(distance * s * phi.cos(), distance * s * phi.sin(), -distance * c);
            let pose = Rigid::look_at(eye, Vec3::zero(), Vec3::new(T::zero(), -T::one(), T::zero()));
            Camera::centered(focal, width, height, pose)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(center: [f64; 3], radius: f64) -> Primitive {
        Primitive {
            shape: Shape::Sphere { center, radius },
            color: [1.0, 0.0, 0.0],
            density: 50.0,
        }
    }

    fn axis_camera() -> Camera<f64> {
        Camera::centered(10.0, 5, 5, Rigid::identity()).unwrap()
    }

    #[test]
    fn sphere_depth_on_axis() {
        let spec = SceneSpec {
            primitives: vec![sphere([0.0, 0.0, 4.0], 1.0)],
            removal: None,
        };
        let d = analytic_depth(&spec, &axis_camera());
        assert!((d.get(2, 2) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn slab_depth_on_axis() {
        let spec = SceneSpec {
            primitives: vec![Primitive {
                shape: Shape::Slab {
                    z0: 3.0,
                    z1: 5.0,
                    normal: z_axis(),
                },
                color: [0.0; 3],
                density: 1.0,
            }],
            removal: None,
        };
        assert_eq!(analytic_depth(&spec, &axis_camera()).get(2, 2), 3.0);
    }

    #[test]
    fn empty_scene_is_invalid_everywhere() {
        let d = analytic_depth(&SceneSpec::default(), &axis_camera());
        assert!(d.values().iter().all(|&v| v == 0.0));
        assert_eq!(removal_mask(&SceneSpec::default(), &axis_camera()).count(), 0);
    }

    #[test]
    fn mask_follows_nearest_hit() {
        let spec = SceneSpec {
            primitives: vec![sphere([0.0, 0.0, 4.0], 1.0), sphere([0.0, 0.0, 10.0], 100.0)],
            removal: Some(0),
        };
        let cam = axis_camera();
        let mask = removal_mask(&spec, &cam);
        for y in 0..5 {
            for x in 0..5 {
                let hit = spec.first_hit(&cam.ray(x, y, 1.0, 2.0)).unwrap();
                assert_eq!(mask.get(x, y), hit.1 == 0);
            }
        }
        assert!(mask.get(2, 2));
    }

    #[test]
    fn plane_half_space() {
        let s = Shape::Plane {
            point: [0.0, 0.0, 2.0],
            normal: [0.0, 0.0, -1.0],
        };
        let r = Ray::new(Vec3::zero(), Vec3::new(0.0, 0.0, 1.0), 0.1, 5.0).unwrap();
        assert_eq!(s.intersect(&r), Some(2.0));
        assert!(s.contains(Vec3::new(0.0, 0.0, 3.0)));
        assert!(!s.contains(Vec3::new(0.0, 0.0, 1.0)));
    }

    #[test]
    fn bake_containment() {
        let spec = SceneSpec {
            primitives: vec![sphere([0.0, 0.0, 0.0], 0.5)],
            removal: None,
        };
        let b = Aabb::cube(1.0);
        let g = bake_grid(&spec, [8, 8, 8], b).unwrap();
        let center = g.index(4, 4, 4);
        assert_eq!(g.sigma[center], 50.0);
        assert_eq!(g.sigma[g.index(0, 0, 0)], 0.0);
        // containment oracle: count cell centers with |c| <= 0.5
        let mut expect = 0;
        for k in 0..8 {
            for j in 0..8 {
                for i in 0..8 {
                    let c = |n: usize| -1.0 + (n as f64 + 0.5) * 0.25;
                    if c(i).powi(2) + c(j).powi(2) + c(k).powi(2) <= 0.25 {
                        expect += 1;
                    }
                }
            }
        }
        assert_eq!(g.sigma.iter().filter(|&&s| s > 0.0).count(), expect);
    }

    #[test]
    fn json_schema() {
        let text = r#"{"primitives":[{"type":"slab","z0":3,"z1":5,"color":[0,0,1],"density":10},
                       {"type":"sphere","center":[0,0,4],"radius":1,"color":[1,0,0],"density":50}],
                       "removal":1}"#;
        let spec: SceneSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.removal, Some(1));
        assert!(matches!(spec.primitives[0].shape, Shape::Slab { normal: [0.0, 0.0, 1.0], .. }));
        let back: SceneSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }
}
