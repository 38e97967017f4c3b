//! Grayscale Portable Float Map (`Pf`) codec.
//!
//! Layout: ASCII `Pf`, width and height, and a scale whose sign selects the
//! byte order (negative = little-endian), each followed by whitespace; then
//! `width * height` 32-bit floats, rows stored bottom-to-top.

use std::path::Path;

use super::raster::DepthMap;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn load_depth_pfm<T: Real>(path: impl AsRef<Path>) -> Result<DepthMap<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pfm(&bytes).map_err(|e| match e {
        Error::Malformed { message, .. } => Error::malformed(path, message),
        other => other,
    })
}

pub fn store_depth_pfm<T: Real>(map: &DepthMap<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_pfm(map)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Little-endian encoding. Values are narrowed to `f32`.
pub fn encode_pfm<T: Real>(map: &DepthMap<T>) -> Result<Vec<u8>> {
    let (w, h) = (map.width(), map.height());
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(4 * w * h);
    for y in (0..h).rev() {
        for x in 0..w {
            let v = map.get(x, y).to_f32().unwrap_or(f32::NAN);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidValue(format!(
                    "pfm stores finite non-negative depth, got {v} at ({x}, {y})"
                )));
            }
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_pfm<T: Real>(bytes: &[u8]) -> Result<DepthMap<T>> {
    let bad = |m: &str| Error::malformed("<pfm>", m);
    let mut cursor = 0usize;
    let mut token = || -> Result<&[u8]> {
        while cursor < bytes.len() && bytes[cursor].is_ascii_whitespace() {
            cursor += 1;
        }
        let start = cursor;
        while cursor < bytes.len() && !bytes[cursor].is_ascii_whitespace() {
            cursor += 1;
        }
        if start == cursor {
            return Err(bad("truncated header"));
        }
        let tok = &bytes[start..cursor];
        // exactly one whitespace byte terminates each header field
        cursor += 1;
        Ok(tok)
    };

    let magic = token()?;
    match magic {
        b"Pf" => {}
        b"PF" => return Err(Error::Unsupported("color PFM (\"PF\") is not a depth map".into())),
        _ => return Err(bad("bad magic, expected \"Pf\"")),
    }
    let parse_usize = |t: &[u8]| -> Result<usize> {
        std::str::from_utf8(t)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad dimension"))
    };
    let width = parse_usize(token()?)?;
    let height = parse_usize(token()?)?;
    let scale: f64 = std::str::from_utf8(token()?)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("bad scale"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(bad("scale must be non-zero"));
    }
    let little = scale < 0.0;

    let n = width
        .checked_mul(height)
        .ok_or_else(|| bad("dimensions overflow"))?;
    let body = bytes.get(cursor..).unwrap_or(&[]);
    if body.len() < 4 * n {
        return Err(bad("truncated pixel data"));
    }
    let mut values = vec![T::zero(); n];
    for (i, chunk) in body[..4 * n].chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        let (row_from_bottom, x) = (i / width, i % width);
        let y = height - 1 - row_from_bottom;
        values[y * width + x] = T::of(v as f64);
    }
    DepthMap::new(width, height, values)
}
