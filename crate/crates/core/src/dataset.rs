//! Multi-view datasets and their directory layout:
//! `images/NNNN.png`, `depths/NNNN.pfm|png`, `masks/NNNN.png`, `cameras.json`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::camera::Camera;
use crate::depth_io::{
    load_depth, load_mask_png, load_rgb_png, store_depth_pfm, store_mask_png, store_rgb_png, DepthMap, Mask,
    RgbImage,
};
use crate::error::{Error, Result};
use crate::geometry::{Rigid, Vec3};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneDataset<T> {
    pub ids: Vec<String>,
    pub images: Vec<RgbImage<T>>,
    pub depths: Vec<DepthMap<T>>,
    pub masks: Vec<Mask>,
    pub cameras: Vec<Camera<T>>,
    pub near: T,
    pub far: T,
}

/// One entry of `cameras.json`. The rotation is camera-to-world, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraRecord {
    pub id: String,
    pub width: usize,
    pub height: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CamerasFile {
    pub near: f64,
    pub far: f64,
    pub frames: Vec<CameraRecord>,
}

impl CameraRecord {
    pub fn from_camera<T: Real>(id: impl Into<String>, cam: &Camera<T>) -> Self {
        Self {
            id: id.into(),
            width: cam.width,
            height: cam.height,
            fx: cam.fx.f64(),
            fy: cam.fy.f64(),
            cx: cam.cx.f64(),
            cy: cam.cy.f64(),
            rotation: cam.pose.rotation.map(|r| r.map(|v| v.f64())),
            translation: cam.pose.translation.to_f64(),
        }
    }

    pub fn to_camera<T: Real>(&self) -> Result<Camera<T>> {
        let pose = Rigid {
            rotation: self.rotation.map(|r| r.map(T::of)),
            translation: Vec3::from_f64(self.translation),
        };
        Camera::new(
            T::of(self.fx),
            T::of(self.fy),
            T::of(self.cx),
            T::of(self.cy),
            self.width,
            self.height,
            pose,
        )
    }
}

/// Zero-padded frame id used for file stems.
pub fn frame_id(index: usize) -> String {
    format!("{index:04}")
}

impl<T: Real> SceneDataset<T> {
    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.cameras.len();
        if [self.ids.len(), self.images.len(), self.depths.len(), self.masks.len()]
            .iter()
            .any(|&l| l != n)
        {
            return Err(Error::InvalidArgument("dataset lists have unequal lengths".into()));
        }
        if !(self.near > T::zero() && self.near < self.far) {
            return Err(Error::InvalidArgument("need 0 < near < far".into()));
        }
        for i in 0..n {
            let cam = &self.cameras[i];
            cam.validate()?;
            let dims = (cam.height, cam.width);
            let others = [
                (self.images[i].height(), self.images[i].width()),
                self.depths[i].dims(),
                (self.masks[i].height(), self.masks[i].width()),
            ];
            if let Some(&bad) = others.iter().find(|&&d| d != dims) {
                return Err(Error::DimensionMismatch { left: dims, right: bad });
            }
        }
        Ok(())
    }

    pub fn cameras_file(&self) -> CamerasFile {
        CamerasFile {
            near: self.near.f64(),
            far: self.far.f64(),
            frames: self
                .ids
                .iter()
                .zip(&self.cameras)
                .map(|(id, cam)| CameraRecord::from_camera(id.clone(), cam))
                .collect(),
        }
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Writes the dataset layout under `dir`. Images are quantized to 8 bits.
pub fn save_dataset<T: Real>(ds: &SceneDataset<T>, dir: impl AsRef<Path>) -> Result<()> {
    ds.validate()?;
    let dir = dir.as_ref();
    for sub in ["images", "depths", "masks"] {
        create_dir(&dir.join(sub))?;
    }
    for i in 0..ds.len() {
        let id = &ds.ids[i];
        store_rgb_png(&ds.images[i], dir.join("images").join(format!("{id}.png")))?;
        store_depth_pfm(&ds.depths[i], dir.join("depths").join(format!("{id}.pfm")))?;
        store_mask_png(&ds.masks[i], dir.join("masks").join(format!("{id}.png")))?;
    }
    save_cameras(&ds.cameras_file(), dir.join("cameras.json"))
}

pub fn save_cameras(file: &CamerasFile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(file)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_cameras(path: impl AsRef<Path>) -> Result<CamerasFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Reads a dataset directory. Images are required; a missing depth map
/// becomes all-invalid and a missing mask becomes empty. Depth PNGs are
/// divided by `depth_divisor`.
pub fn load_dataset<T: Real>(dir: impl AsRef<Path>, depth_divisor: f64) -> Result<SceneDataset<T>> {
    let dir = dir.as_ref();
    let file = load_cameras(dir.join("cameras.json"))?;
    let mut ds = SceneDataset {
        ids: Vec::new(),
        images: Vec::new(),
        depths: Vec::new(),
        masks: Vec::new(),
        cameras: Vec::new(),
        near: T::of(file.near),
        far: T::of(file.far),
    };
    for rec in &file.frames {
        let cam: Camera<T> = rec.to_camera()?;
        let image = load_rgb_png(dir.join("images").join(format!("{}.png", rec.id)))?.normalized();
        let depth_dir = dir.join("depths");
        let depth = ["pfm", "png"]
            .iter()
            .map(|ext| depth_dir.join(format!("{}.{ext}", rec.id)))
            .find(|p| p.exists())
            .map(|p| load_depth(p, depth_divisor))
            .transpose()?
            .unwrap_or_else(|| DepthMap::zeros(cam.width, cam.height));
        let mask_path = dir.join("masks").join(format!("{}.png", rec.id));
        let mask = if mask_path.exists() {
            load_mask_png(mask_path)?
        } else {
            Mask::empty(cam.width, cam.height)
        };
        ds.ids.push(rec.id.clone());
        ds.images.push(image);
        ds.depths.push(depth);
        ds.masks.push(mask);
        ds.cameras.push(cam);
    }
    ds.validate()?;
    Ok(ds)
}
