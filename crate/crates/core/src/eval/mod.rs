//! Dense depth evaluation: pad to common dimensions, remove the global
//! scale, crop to the ground-truth support, then score each frame and
//! average over the dataset.

mod report;

pub use report::{write_report_csv, write_summary_json, ReportSummary, DENSITY_NOTE};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::depth_io::DepthMap;
use crate::error::{Error, Result};
use crate::metrics::{frame_metrics, FrameMetrics};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleMode {
    #[default]
    MedianRatio,
    LeastSquares,
    None,
}

impl std::str::FromStr for ScaleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "median" | "median-ratio" => Ok(ScaleMode::MedianRatio),
            "lsq" | "least-squares" => Ok(ScaleMode::LeastSquares),
            "none" => Ok(ScaleMode::None),
            other => Err(Error::InvalidArgument(format!("unknown scale mode {other:?}"))),
        }
    }
}

/// Padding always uses the invalid sentinel, so only the scale mode is configurable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AlignmentConfig {
    pub scale_mode: ScaleMode,
}

/// Pads both maps at the bottom/right to `(max height, max width)`.
pub fn align_dims<T: Real>(gt: &DepthMap<T>, pred: &DepthMap<T>) -> (DepthMap<T>, DepthMap<T>) {
    let w = gt.width().max(pred.width());
    let h = gt.height().max(pred.height());
    (gt.padded_to(w, h), pred.padded_to(w, h))
}

fn median_of<T: Real>(mut v: Vec<T>) -> T {
    v.sort_by(|a, b| a.partial_cmp(b).expect("ratios are finite"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::of(2.0)
    }
}

/// Factor `s` such that `s · pred` best matches `gt` over jointly valid pixels.
pub fn scale_factor<T: Real>(gt: &DepthMap<T>, pred: &DepthMap<T>, mode: ScaleMode) -> Result<T> {
    if gt.dims() != pred.dims() {
        return Err(Error::DimensionMismatch {
            left: gt.dims(),
            right: pred.dims(),
        });
    }
    let pairs = gt
        .values()
        .iter()
        .zip(pred.values())
        .filter(|(g, p)| **g > T::zero() && **p > T::zero());
    let s = match mode {
        ScaleMode::MedianRatio => {
            let ratios: Vec<T> = pairs.map(|(&g, &p)| g / p).collect();
            if ratios.is_empty() {
                return Err(Error::NoValidPixels);
            }
            median_of(ratios)
        }
        ScaleMode::LeastSquares => {
            let (mut num, mut den, mut n) = (T::zero(), T::zero(), 0usize);
            for (&g, &p) in pairs {
                num += g * p;
                den += p * p;
                n += 1;
            }
            if n == 0 {
                return Err(Error::NoValidPixels);
            }
            num / den
        }
        ScaleMode::None => {
            if pairs.count() == 0 {
                return Err(Error::NoValidPixels);
            }
            T::one()
        }
    };
    if !(s.is_finite() && s > T::zero()) {
        return Err(Error::InvalidValue(format!("degenerate scale factor {s}")));
    }
    Ok(s)
}

/// Crops both maps to the tight bounding box of valid ground-truth pixels.
pub fn valid_crop<T: Real>(gt: &DepthMap<T>, pred: &DepthMap<T>) -> Result<(DepthMap<T>, DepthMap<T>)> {
    if gt.dims() != pred.dims() {
        return Err(Error::DimensionMismatch {
            left: gt.dims(),
            right: pred.dims(),
        });
    }
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    for y in 0..gt.height() {
        for x in 0..gt.width() {
            if gt.is_valid(x, y) {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    if x0 == usize::MAX {
        return Err(Error::NoValidPixels);
    }
    let (w, h) = (x1 - x0 + 1, y1 - y0 + 1);
    Ok((gt.crop(x0, y0, w, h), pred.crop(x0, y0, w, h)))
}

/// Metrics of one frame together with the scale that was applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameEvaluation<T> {
    pub metrics: FrameMetrics<T>,
    pub scale: T,
}

/// align → scale → crop → metrics, in that order.
pub fn evaluate_frame<T: Real>(
    gt: &DepthMap<T>,
    pred: &DepthMap<T>,
    cfg: &AlignmentConfig,
) -> Result<FrameEvaluation<T>> {
    let (gt, pred) = align_dims(gt, pred);
    let scale = scale_factor(&gt, &pred, cfg.scale_mode)?;
    let pred = if scale == T::one() { pred } else { pred.scaled(scale) };
    let (gt, pred) = valid_crop(&gt, &pred)?;
    Ok(FrameEvaluation {
        metrics: frame_metrics(&gt, &pred)?,
        scale,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum FrameOutcome<T> {
    Evaluated(FrameEvaluation<T>),
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameRecord<T> {
    pub id: String,
    #[serde(flatten)]
    pub outcome: FrameOutcome<T>,
}

/// Unweighted per-frame means; `n_valid` is averaged too.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricMeans<T> {
    pub rmse: T,
    pub delta1: T,
    pub delta2: T,
    pub delta3: T,
    pub log10: T,
    pub density: T,
    pub n_valid: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetReport<T> {
    pub per_frame: Vec<FrameRecord<T>>,
    pub means: MetricMeans<T>,
    pub scale_mode: ScaleMode,
}

impl<T: Real> DatasetReport<T> {
    pub fn evaluated(&self) -> impl Iterator<Item = (&str, &FrameEvaluation<T>)> {
        self.per_frame.iter().filter_map(|r| match &r.outcome {
            FrameOutcome::Evaluated(e) => Some((r.id.as_str(), e)),
            FrameOutcome::Skipped { .. } => None,
        })
    }

    pub fn skipped(&self) -> impl Iterator<Item = (&str, &str)> {
        self.per_frame.iter().filter_map(|r| match &r.outcome {
            FrameOutcome::Skipped { reason } => Some((r.id.as_str(), reason.as_str())),
            FrameOutcome::Evaluated(_) => None,
        })
    }
}

/// Input for one frame; `None` on either side, or a `failure`, records a skip.
pub struct FrameInput<T> {
    pub id: String,
    pub gt: Option<DepthMap<T>>,
    pub pred: Option<DepthMap<T>>,
    pub failure: Option<String>,
}

impl<T> FrameInput<T> {
    pub fn pair(id: impl Into<String>, gt: DepthMap<T>, pred: DepthMap<T>) -> Self {
        Self {
            id: id.into(),
            gt: Some(gt),
            pred: Some(pred),
            failure: None,
        }
    }

    /// A frame that could not be loaded.
    pub fn failed(id: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            gt: None,
            pred: None,
            failure: Some(reason.into()),
        }
    }
}

fn mean_metrics<T: Real>(evals: &[&FrameEvaluation<T>]) -> MetricMeans<T> {
    let n = T::of_usize(evals.len());
    let avg = |f: &dyn Fn(&FrameMetrics<T>) -> T| evals.iter().map(|e| f(&e.metrics)).sum::<T>() / n;
    MetricMeans {
        rmse: avg(&|m| m.rmse),
        delta1: avg(&|m| m.delta1),
        delta2: avg(&|m| m.delta2),
        delta3: avg(&|m| m.delta3),
        log10: avg(&|m| m.log10),
        density: avg(&|m| m.density),
        n_valid: avg(&|m| T::of_usize(m.n_valid)),
    }
}

/// Evaluates frames independently (in parallel) and reduces in input order.
pub fn evaluate_dataset<T: Real>(frames: Vec<FrameInput<T>>, cfg: &AlignmentConfig) -> Result<DatasetReport<T>> {
    if frames.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let per_frame: Vec<FrameRecord<T>> = frames
        .into_par_iter()
        .map(|f| {
            let outcome = match (&f.gt, &f.pred) {
                _ if f.failure.is_some() => FrameOutcome::Skipped {
                    reason: f.failure.clone().unwrap_or_default(),
                },
                (Some(gt), Some(pred)) => match evaluate_frame(gt, pred, cfg) {
                    Ok(e) => FrameOutcome::Evaluated(e),
                    Err(e) => FrameOutcome::Skipped { reason: e.to_string() },
                },
                (None, _) => FrameOutcome::Skipped {
                    reason: "missing ground truth".into(),
                },
                (_, None) => FrameOutcome::Skipped {
                    reason: "missing prediction".into(),
                },
            };
            FrameRecord { id: f.id, outcome }
        })
        .collect();
    let evals: Vec<&FrameEvaluation<T>> = per_frame
        .iter()
        .filter_map(|r| match &r.outcome {
            FrameOutcome::Evaluated(e) => Some(e),
            FrameOutcome::Skipped { .. } => None,
        })
        .collect();
    if evals.is_empty() {
        return Err(Error::AllFramesSkipped);
    }
    let means = mean_metrics(&evals);
    Ok(DatasetReport {
        per_frame,
        means,
        scale_mode: cfg.scale_mode,
    })
}
