//! Voxel radiance field: point queries, stratified ray sampling and the
//! discrete volume-rendering quadrature for color and expected depth.

mod grid;
mod ray;
mod render;
mod store;

pub use grid::{Aabb, Stencil, VoxelGrid};
pub use ray::{sample_ray, Ray, RaySamples};
pub use render::{composite, pixel_seed, render, render_image, segment_alpha, RenderOutput, OPACITY_EPSILON};
pub use store::{decode_grid, encode_grid, load_grid, store_grid, GRID_MAGIC, GRID_VERSION};
