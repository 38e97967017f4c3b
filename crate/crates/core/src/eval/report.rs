use std::io::Write;

use serde::Serialize;

use super::{DatasetReport, FrameOutcome, MetricMeans, ScaleMode};
use crate::error::Result;
use crate::scalar::Real;

pub const DENSITY_NOTE: &str = "density is measured on the rescaled prediction inside the ground-truth valid crop";

const CSV_HEADER: [&str; 10] = [
    "frame", "rmse", "delta1", "delta2", "delta3", "log10", "density", "n_valid", "skipped", "reason",
];

/// One row per frame with the fixed column set.
pub fn write_report_csv<T: Real, W: Write>(report: &DatasetReport<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for rec in &report.per_frame {
        match &rec.outcome {
            FrameOutcome::Evaluated(e) => {
                let m = &e.metrics;
                w.write_record([
                    rec.id.clone(),
                    m.rmse.to_string(),
                    m.delta1.to_string(),
                    m.delta2.to_string(),
                    m.delta3.to_string(),
                    m.log10.to_string(),
                    m.density.to_string(),
                    m.n_valid.to_string(),
                    "false".into(),
                    String::new(),
                ])?;
            }
            FrameOutcome::Skipped { reason } => {
                let mut row = vec![rec.id.clone()];
                row.extend(std::iter::repeat(String::new()).take(7));
                row.push("true".into());
                row.push(reason.clone());
                w.write_record(row)?;
            }
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedFrame {
    pub frame: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameScale<T> {
    pub frame: String,
    pub scale: T,
}

/// JSON summary: `{frames, means, skipped, ...}`.
#[derive(Debug, Clone, Serialize)]
pub struct ReportSummary<T> {
    pub frames: usize,
    pub means: MetricMeans<T>,
    pub skipped: usize,
    pub skipped_frames: Vec<SkippedFrame>,
    pub scale_mode: ScaleMode,
    pub scales: Vec<FrameScale<T>>,
    pub density_note: &'static str,
}

impl<T: Real> ReportSummary<T> {
    pub fn from_report(report: &DatasetReport<T>) -> Self {
        Self {
            frames: report.evaluated().count(),
            means: report.means,
            skipped: report.skipped().count(),
            skipped_frames: report
                .skipped()
                .map(|(f, r)| SkippedFrame {
                    frame: f.to_string(),
                    reason: r.to_string(),
                })
                .collect(),
            scale_mode: report.scale_mode,
            scales: report
                .evaluated()
                .map(|(f, e)| FrameScale {
                    frame: f.to_string(),
                    scale: e.scale,
                })
                .collect(),
            density_note: DENSITY_NOTE,
        }
    }
}

pub fn write_summary_json<T: Real, W: Write>(report: &DatasetReport<T>, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, &ReportSummary::from_report(report))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;
    use crate::depth_io::DepthMap;

    #[test]
    fn csv_and_json_shapes() {
        let gt = DepthMap::new(2, 1, vec![1.0, 2.0]).unwrap();
        let report = evaluate_dataset(
            vec![
                FrameInput::pair("0000", gt.clone(), gt.scaled(2.0)),
                FrameInput {
                    id: "0001".into(),
                    gt: Some(gt.clone()),
                    pred: None,
                    failure: None,
                },
            ],
            &AlignmentConfig::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_report_csv(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "frame,rmse,delta1,delta2,delta3,log10,density,n_valid,skipped,reason");
        assert_eq!(lines[1], "0000,0,1,1,1,0,1,2,false,");
        assert_eq!(lines[2], "0001,,,,,,,,true,missing prediction");

        let mut buf = Vec::new();
        write_summary_json(&report, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["frames"], 1);
        assert_eq!(v["skipped"], 1);
        assert_eq!(v["means"]["delta1"], 1.0);
        assert_eq!(v["scales"][0]["scale"], 0.5);
        assert_eq!(v["scale_mode"], "median-ratio");
    }
}
