use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::Psnr;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct LogEntry<T> {
    pub iter: usize,
    pub total: T,
    pub rgb: T,
    pub depth: T,
    pub masked: T,
    pub psnr_holdout: Psnr<T>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(bound = "T: Real")]
pub struct TrainingLog<T> {
    pub entries: Vec<LogEntry<T>>,
}

impl<T: Real> TrainingLog<T> {
    /// First logged iteration whose unweighted RGB loss is at or below `threshold`.
    pub fn first_rgb_below(&self, threshold: T) -> Option<usize> {
        self.entries.iter().find(|e| e.rgb <= threshold).map(|e| e.iter)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,total,rgb,depth,masked,psnr_holdout\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{},{},{},{}", e.iter, e.total, e.rgb, e.depth, e.masked, e.psnr_holdout);
        }
        out
    }

    /// Parses the CSV produced by [`TrainingLog::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::InvalidValue(format!("training log line {line}: {msg}"));
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("iter,total,rgb,depth,masked,psnr_holdout") {
            return Err(bad(1, "unexpected header"));
        }
        let mut entries = Vec::new();
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let f: Vec<&str> = line.trim().split(',').collect();
            if f.len() != 6 {
                return Err(bad(n + 2, "expected 6 fields"));
            }
            let num = |s: &str| s.parse::<f64>().map(T::of).map_err(|_| bad(n + 2, "bad number"));
            entries.push(LogEntry {
                iter: f[0].parse().map_err(|_| bad(n + 2, "bad iteration"))?,
                total: num(f[1])?,
                rgb: num(f[2])?,
                depth: num(f[3])?,
                masked: num(f[4])?,
                psnr_holdout: if f[5] == "inf" { Psnr::Infinite } else { Psnr::Finite(num(f[5])?) },
            });
        }
        Ok(Self { entries })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Two stacked panels: total loss (log scale) and hold-out PSNR against iteration.
    pub fn to_svg(&self) -> String {
        let (w, ph, pad) = (640.0, 240.0, 48.0);
        let height = 2.0 * ph + 3.0 * pad;
        let mut svg = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{height}\" viewBox=\"0 0 {w} {height}\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        );
        let iters: Vec<f64> = self.entries.iter().map(|e| e.iter as f64).collect();
        let loss: Vec<f64> = self
            .entries
            .iter()
            .map(|e| e.total.f64().max(1e-12).log10())
            .collect();
        let psnr: Vec<f64> = self
            .entries
            .iter()
            .filter_map(|e| match e.psnr_holdout {
                Psnr::Finite(v) => Some(v.f64()),
                Psnr::Infinite => None,
            })
            .collect();
        let psnr_iters: Vec<f64> = self
            .entries
            .iter()
            .filter(|e| matches!(e.psnr_holdout, Psnr::Finite(_)))
            .map(|e| e.iter as f64)
            .collect();
        panel(&mut svg, pad, pad, w - 2.0 * pad, ph, &iters, &loss, "log10 total loss", "#1f77b4");
        panel(&mut svg, pad, 2.0 * pad + ph, w - 2.0 * pad, ph, &psnr_iters, &psnr, "hold-out PSNR (dB)", "#d62728");
        svg.push_str("</svg>\n");
        svg
    }

    pub fn write_svg(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_svg()).map_err(|e| Error::io(path, e))
    }
}

#[allow(clippy::too_many_arguments)]
fn panel(svg: &mut String, x0: f64, y0: f64, w: f64, h: f64, xs: &[f64], ys: &[f64], label: &str, stroke: &str) {
    let _ = writeln!(
        svg,
        "<rect x=\"{x0}\" y=\"{y0}\" width=\"{w}\" height=\"{h}\" fill=\"none\" stroke=\"#444\"/>\n<text x=\"{x0}\" y=\"{}\">{label}</text>",
        y0 - 8.0
    );
    if xs.is_empty() {
        return;
    }
    let range = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, lo + 0.5)
        }
    };
    let (xl, xh) = range(xs);
    let (yl, yh) = range(ys);
    let pts: Vec<String> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| format!("{:.2},{:.2}", x0 + (x - xl) / (xh - xl) * w, y0 + h - (y - yl) / (yh - yl) * h))
        .collect();
    let _ = writeln!(
        svg,
        "<polyline fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.5\" points=\"{}\"/>",
        pts.join(" ")
    );
    let _ = writeln!(
        svg,
        "<text x=\"{x0}\" y=\"{}\">{xl}</text><text x=\"{}\" y=\"{}\" text-anchor=\"end\">{xh}</text>\n<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{yh:.3}</text><text x=\"{}\" y=\"{}\" text-anchor=\"end\">{yl:.3}</text>",
        y0 + h + 16.0,
        x0 + w,
        y0 + h + 16.0,
        x0 - 4.0,
        y0 + 10.0,
        x0 - 4.0,
        y0 + h
    );
}
