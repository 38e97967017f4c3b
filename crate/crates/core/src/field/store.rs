//! Binary grid container, little-endian:
//!
//! ```text
//! offset  size        field
//! 0       4           magic "DKVG"
//! 4       4   u32     format version (1)
//! 8       1   u8      dtype: 4 = f32, 8 = f64
//! 9       3           reserved, zero
//! 12      12  u32×3   resolution nx, ny, nz
//! 24      48  f64×6   bounds min xyz, max xyz
//! 72      n·dtype     sigma, cell order (k·ny + j)·nx + i
//! ...     3n·dtype    color, interleaved rgb
//! ```

use std::path::Path;

use super::grid::{Aabb, VoxelGrid};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::Real;

pub const GRID_MAGIC: &[u8; 4] = b"DKVG";
pub const GRID_VERSION: u32 = 1;
const HEADER_LEN: usize = 72;

pub fn encode_grid<T: Real>(grid: &VoxelGrid<T>) -> Vec<u8> {
    let n = grid.cell_count();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * n * T::DTYPE as usize);
    out.extend_from_slice(GRID_MAGIC);
    out.extend_from_slice(&GRID_VERSION.to_le_bytes());
    out.extend_from_slice(&[T::DTYPE, 0, 0, 0]);
    for r in grid.resolution() {
        out.extend_from_slice(&(r as u32).to_le_bytes());
    }
    let b = grid.bounds();
    for v in b.min.to_f64().into_iter().chain(b.max.to_f64()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &s in &grid.sigma {
        s.write_le(&mut out);
    }
    for c in &grid.color {
        for &v in c {
            v.write_le(&mut out);
        }
    }
    out
}

pub fn decode_grid<T: Real>(bytes: &[u8]) -> Result<VoxelGrid<T>> {
    let bad = |m: String| Error::malformed("<grid>", m);
    if bytes.len() < HEADER_LEN || &bytes[..4] != GRID_MAGIC {
        return Err(bad("missing grid magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let version = u32_at(4);
    if version != GRID_VERSION {
        return Err(Error::Unsupported(format!("grid format version {version}")));
    }
    let dtype = bytes[8] as usize;
    if dtype != 4 && dtype != 8 {
        return Err(bad(format!("unknown dtype {dtype}")));
    }
    let res = [u32_at(12) as usize, u32_at(16) as usize, u32_at(20) as usize];
    let min = Vec3::from_f64([f64_at(24), f64_at(32), f64_at(40)]);
    let max = Vec3::from_f64([f64_at(48), f64_at(56), f64_at(64)]);
    let n = res
        .iter()
        .try_fold(1usize, |a, &r| a.checked_mul(r))
        .ok_or_else(|| bad("resolution overflow".into()))?;
    let expect = HEADER_LEN + 4 * n * dtype;
    if bytes.len() != expect {
        return Err(bad(format!("expected {expect} bytes, found {}", bytes.len())));
    }
    let read = |i: usize| -> T {
        let o = HEADER_LEN + i * dtype;
        if dtype == 4 {
            T::of(f32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes")) as f64)
        } else {
            T::of(f64_at(o))
        }
    };
    let sigma = (0..n).map(read).collect();
    let color = (0..n).map(|i| [read(n + 3 * i), read(n + 3 * i + 1), read(n + 3 * i + 2)]).collect();
    VoxelGrid::from_parts(res, Aabb::new(min, max)?, sigma, color)
}

pub fn store_grid<T: Real>(grid: &VoxelGrid<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_grid(grid)).map_err(|e| Error::io(path, e))
}

pub fn load_grid<T: Real>(path: impl AsRef<Path>) -> Result<VoxelGrid<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_grid(&bytes).map_err(|e| match e {
        Error::Malformed { message, .. } => Error::malformed(path, message),
        other => other,
    })
}
