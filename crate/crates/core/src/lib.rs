//! Depth-map evaluation and a depth-supervised voxel radiance field.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar for the common cases.

pub mod camera;
pub mod dataset;
pub mod depth_io;
pub mod error;
pub mod eval;
pub mod field;
pub mod geometry;
pub mod inpaint;
pub mod metrics;
pub mod scalar;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
pub use scalar::Real;

pub type DepthMap64 = depth_io::DepthMap<f64>;
pub type DepthMap32 = depth_io::DepthMap<f32>;
pub type RgbImage64 = depth_io::RgbImage<f64>;
pub type RgbImage32 = depth_io::RgbImage<f32>;
pub type VoxelGrid64 = field::VoxelGrid<f64>;
pub type VoxelGrid32 = field::VoxelGrid<f32>;
pub type Camera64 = camera::Camera<f64>;
pub type Camera32 = camera::Camera<f32>;
pub type Ray64 = field::Ray<f64>;
pub type Ray32 = field::Ray<f32>;
pub type SceneDataset64 = dataset::SceneDataset<f64>;
pub type SceneDataset32 = dataset::SceneDataset<f32>;
pub type FrameMetrics64 = metrics::FrameMetrics<f64>;
pub type DatasetReport64 = eval::DatasetReport<f64>;
