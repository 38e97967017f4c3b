//! Matching frame files across directories by numeric stem.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Files in `dir` with one of `exts`, keyed by the integer value of their stem
/// (`0007.pfm` and `7.png` both map to 7). Other files are ignored.
pub fn numbered_files(dir: &Path, exts: &[&str]) -> Result<BTreeMap<u64, PathBuf>> {
    let mut out: BTreeMap<u64, PathBuf> = BTreeMap::new();
    let entries = std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))?;
    for entry in entries {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if !ext.as_deref().is_some_and(|e| exts.contains(&e)) {
            continue;
        }
        let Some(key) = path.file_stem().and_then(|s| s.to_str()).and_then(|s| s.parse::<u64>().ok()) else {
            continue;
        };
        // a .pfm wins over a .png with the same stem
        let replace = match out.get(&key) {
            None => true,
            Some(prev) => ext_rank(&path, exts) < ext_rank(prev, exts),
        };
        if replace {
            out.insert(key, path);
        }
    }
    Ok(out)
}

fn ext_rank(path: &Path, exts: &[&str]) -> usize {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    exts.iter().position(|e| *e == ext).unwrap_or(usize::MAX)
}

pub fn frame_name(key: u64) -> String {
    format!("{key:04}")
}
