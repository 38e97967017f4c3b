use super::raster::DepthMap;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const PROBABILITY_TOLERANCE: f64 = 1e-6;

/// Per-pixel metric-bin output of a depth network: `n_bins` probabilities
/// and bin centers for each pixel, pixel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BinDepthPrediction<T> {
    pub width: usize,
    pub height: usize,
    pub n_bins: usize,
    pub probabilities: Vec<T>,
    pub centers: Vec<T>,
}

impl<T: Real> BinDepthPrediction<T> {
    pub fn validate(&self) -> Result<()> {
        let n = self.width * self.height * self.n_bins;
        if self.n_bins == 0 || self.probabilities.len() != n || self.centers.len() != n {
            return Err(Error::InvalidArgument(format!(
                "bin prediction {}x{}x{} needs {n} probabilities and centers",
                self.width, self.height, self.n_bins
            )));
        }
        for (pixel, (probs, centers)) in self
            .probabilities
            .chunks_exact(self.n_bins)
            .zip(self.centers.chunks_exact(self.n_bins))
            .enumerate()
        {
            if probs.iter().any(|p| !(*p >= T::zero()) || !p.is_finite()) {
                return Err(Error::InvalidValue(format!("negative probability at pixel {pixel}")));
            }
            if centers.iter().any(|c| !(*c > T::zero()) || !c.is_finite()) {
                return Err(Error::InvalidValue(format!("non-positive bin center at pixel {pixel}")));
            }
            let sum: T = probs.iter().copied().sum();
            if (sum.f64() - 1.0).abs() > PROBABILITY_TOLERANCE {
                return Err(Error::ProbabilitySum {
                    pixel,
                    sum: sum.f64(),
                    tolerance: PROBABILITY_TOLERANCE,
                });
            }
        }
        Ok(())
    }
}

/// Expected depth per pixel: the probability-weighted sum of bin centers.
pub fn decode_bin_depth<T: Real>(pred: &BinDepthPrediction<T>) -> Result<DepthMap<T>> {
    pred.validate()?;
    let values = pred
        .probabilities
        .chunks_exact(pred.n_bins)
        .zip(pred.centers.chunks_exact(pred.n_bins))
        .map(|(p, c)| p.iter().zip(c).map(|(&p, &c)| p * c).sum())
        .collect();
    DepthMap::new(pred.width, pred.height, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single(probs: Vec<f64>, centers: Vec<f64>) -> BinDepthPrediction<f64> {
        BinDepthPrediction {
            width: 1,
            height: 1,
            n_bins: probs.len(),
            probabilities: probs,
            centers,
        }
    }

    #[test]
    fn decode_examples() {
        let one_hot = single(vec![0.0, 1.0, 0.0], vec![2.0, 4.0, 8.0]);
        assert_eq!(decode_bin_depth(&one_hot).unwrap().values(), &[4.0]);
        let uniform = single(vec![0.5, 0.5], vec![1.0, 3.0]);
        assert_eq!(decode_bin_depth(&uniform).unwrap().values(), &[2.0]);
        let skewed = single(vec![0.25, 0.75], vec![2.0, 4.0]);
        assert_eq!(decode_bin_depth(&skewed).unwrap().values(), &[3.5]);
    }

    #[test]
    fn bad_probability_sum() {
        let err = decode_bin_depth(&single(vec![0.5, 0.49], vec![1.0, 2.0])).unwrap_err();
        assert!(matches!(err, Error::ProbabilitySum { .. }));
        // within tolerance
        assert!(decode_bin_depth(&single(vec![0.5, 0.5 + 5e-7], vec![1.0, 2.0])).is_ok());
        assert!(decode_bin_depth(&single(vec![1.0], vec![0.0])).is_err());
    }

    proptest! {
        #[test]
        fn decoded_depth_within_center_range(
            raw in prop::collection::vec((0.0f64..1.0, 0.1f64..80.0), 1..12)
        ) {
            let total: f64 = raw.iter().map(|r| r.0).sum::<f64>() + 1e-3;
            let probs: Vec<f64> = raw.iter().map(|r| (r.0 + 1e-3 / raw.len() as f64) / total).collect();
            let centers: Vec<f64> = raw.iter().map(|r| r.1).collect();
            let lo = centers.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = centers.iter().cloned().fold(0.0, f64::max);
            let d = decode_bin_depth(&single(probs, centers)).unwrap().values()[0];
            prop_assert!(d >= lo * (1.0 - 1e-6) && d <= hi * (1.0 + 1e-6));
        }
    }
}
