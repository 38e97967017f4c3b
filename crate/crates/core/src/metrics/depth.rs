use serde::Serialize;

use crate::depth_io::{density, DepthMap};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Metrics of one evaluated frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameMetrics<T> {
    pub rmse: T,
    pub delta1: T,
    pub delta2: T,
    pub delta3: T,
    pub log10: T,
    pub density: T,
    /// Pixels where both maps are valid.
    pub n_valid: usize,
}

fn check_dims<T: Real>(gt: &DepthMap<T>, pred: &DepthMap<T>) -> Result<()> {
    if gt.dims() != pred.dims() {
        return Err(Error::DimensionMismatch {
            left: gt.dims(),
            right: pred.dims(),
        });
    }
    Ok(())
}

fn jointly_valid<'a, T: Real>(
    gt: &'a DepthMap<T>,
    pred: &'a DepthMap<T>,
) -> impl Iterator<Item = (T, T)> + 'a {
    gt.values()
        .iter()
        .zip(pred.values())
        .filter(|(g, p)| **g > T::zero() && **p > T::zero())
        .map(|(&g, &p)| (g, p))
}

/// Root mean squared error over jointly valid pixels.
pub fn rmse<T: Real>(gt: &DepthMap<T>, pred: &DepthMap<T>) -> Result<T> {
    check_dims(gt, pred)?;
    let (sum, n) = jointly_valid(gt, pred).fold((T::zero(), 0usize), |(s, n), (g, p)| {
        (s + (g - p) * (g - p), n + 1)
    });
    if n == 0 {
        return Err(Error::NoValidPixels);
    }
    Ok((sum / T::of_usize(n)).sqrt())
}

/// `1.25^k`.
pub fn delta_threshold<T: Real>(k: u32) -> T {
    T::of(1.25f64.powi(k as i32))
}

/// Fraction of valid-gt pixels with `max(gt/pred, pred/gt) < 1.25^k`.
/// A non-positive prediction at a valid-gt pixel fails the threshold.
pub fn delta_accuracy<T: Real>(gt: &DepthMap<T>, pred: &DepthMap<T>, k: u32) -> Result<T> {
    check_dims(gt, pred)?;
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidArgument(format!("delta order must be 1, 2 or 3, got {k}")));
    }
    let threshold = delta_threshold::<T>(k);
    let mut total = 0usize;
    let mut hits = 0usize;
    for (&g, &p) in gt.values().iter().zip(pred.values()) {
        if g <= T::zero() {
            continue;
        }
        total += 1;
        if p > T::zero() && (g / p).max(p / g) < threshold {
            hits += 1;
        }
    }
    if total == 0 {
        return Err(Error::NoValidPixels);
    }
    Ok(T::of_usize(hits) / T::of_usize(total))
}

/// Mean absolute difference of base-10 logarithms over jointly valid pixels.
pub fn log10_error<T: Real>(gt: &DepthMap<T>, pred: &DepthMap<T>) -> Result<T> {
    check_dims(gt, pred)?;
    let (sum, n) = jointly_valid(gt, pred).fold((T::zero(), 0usize), |(s, n), (g, p)| {
        (s + (g.log10() - p.log10()).abs(), n + 1)
    });
    if n == 0 {
        return Err(Error::NoValidPixels);
    }
    Ok(sum / T::of_usize(n))
}

/// All depth metrics for one already-aligned frame; density is that of `pred`.
pub fn frame_metrics<T: Real>(gt: &DepthMap<T>, pred: &DepthMap<T>) -> Result<FrameMetrics<T>> {
    Ok(FrameMetrics {
        rmse: rmse(gt, pred)?,
        delta1: delta_accuracy(gt, pred, 1)?,
        delta2: delta_accuracy(gt, pred, 2)?,
        delta3: delta_accuracy(gt, pred, 3)?,
        log10: log10_error(gt, pred)?,
        density: density(pred),
        n_valid: jointly_valid(gt, pred).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(v: &[f64]) -> DepthMap<f64> {
        DepthMap::new(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn rmse_examples() {
        let a = row(&[1.0, 2.0, 3.0]);
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        assert_eq!(rmse(&row(&[2.0, 2.0]), &row(&[1.0, 3.0])).unwrap(), 1.0);
        assert_eq!(rmse(&row(&[4.0, 0.0]), &row(&[1.0, 7.0])).unwrap(), 3.0);
    }

    #[test]
    fn rmse_errors() {
        assert!(matches!(
            rmse(&row(&[1.0]), &row(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            rmse(&row(&[0.0, 1.0]), &row(&[1.0, 0.0])),
            Err(Error::NoValidPixels)
        ));
    }

    #[test]
    fn delta_examples() {
        let a = row(&[1.0, 5.0]);
        assert_eq!(delta_accuracy(&a, &a, 1).unwrap(), 1.0);
        assert_eq!(delta_accuracy(&row(&[1.0]), &row(&[1.3]), 1).unwrap(), 0.0);
        let gt = row(&[1.0, 1.0]);
        let pred = row(&[1.2, 2.0]);
        assert_eq!(delta_accuracy(&gt, &pred, 1).unwrap(), 0.5);
        // ratio 2.0 exceeds 1.25^2 = 1.5625 and 1.25^3 = 1.953125
        assert_eq!(delta_accuracy(&gt, &pred, 2).unwrap(), 0.5);
        assert_eq!(delta_accuracy(&gt, &pred, 3).unwrap(), 0.5);
        assert_eq!(delta_accuracy(&gt, &row(&[1.2, 1.5]), 2).unwrap(), 1.0);
        assert!(delta_accuracy(&gt, &pred, 4).is_err());
    }

    #[test]
    fn delta_nonpositive_prediction_fails() {
        assert_eq!(delta_accuracy(&row(&[1.0, 2.0]), &row(&[0.0, 2.0]), 3).unwrap(), 0.5);
    }

    #[test]
    fn log10_examples() {
        let a = row(&[3.0]);
        assert_eq!(log10_error(&a, &a).unwrap(), 0.0);
        assert_eq!(log10_error(&row(&[10.0]), &row(&[1.0])).unwrap(), 1.0);
        assert_eq!(log10_error(&row(&[100.0, 10.0]), &row(&[10.0, 10.0])).unwrap(), 0.5);
        assert!(log10_error(&row(&[0.0]), &row(&[1.0])).is_err());
    }

    fn depth_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..40).prop_flat_map(|n| {
            let cell = prop_oneof![1 => Just(0.0), 4 => 0.05f64..50.0];
            (prop::collection::vec(cell.clone(), n), prop::collection::vec(cell, n))
        })
    }

    proptest! {
        #[test]
        fn delta_is_monotone_in_k((g, p) in depth_pair()) {
            let (gt, pred) = (row(&g), row(&p));
            if let (Ok(d1), Ok(d2), Ok(d3)) = (
                delta_accuracy(&gt, &pred, 1),
                delta_accuracy(&gt, &pred, 2),
                delta_accuracy(&gt, &pred, 3),
            ) {
                prop_assert!(d1 <= d2 && d2 <= d3);
                prop_assert!((0.0..=1.0).contains(&d1) && d3 <= 1.0);
            }
        }

        #[test]
        fn rmse_and_delta_symmetric((g, p) in depth_pair()) {
            let (gt, pred) = (row(&g), row(&p));
            prop_assert_eq!(rmse(&gt, &pred).ok(), rmse(&pred, &gt).ok());
            prop_assert_eq!(log10_error(&gt, &pred).ok(), log10_error(&pred, &gt).ok());
            // delta is symmetric whenever both maps share a validity pattern
            let shared: Vec<f64> = p.iter().zip(&g).map(|(p, g)| if *g > 0.0 { p.max(0.01) } else { 0.0 }).collect();
            let pred = row(&shared);
            for k in 1..=3 {
                prop_assert_eq!(delta_accuracy(&gt, &pred, k).ok(), delta_accuracy(&pred, &gt, k).ok());
            }
        }
    }
}
