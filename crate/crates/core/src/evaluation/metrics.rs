use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    /// `None` when the true values have zero variance.
    pub r2: Option<f64>,
    pub mae: f64,
    pub medae: f64,
    pub rmse: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub r2: Option<f64>,
    pub mae: f64,
    pub medae: f64,
    pub rmse: f64,
    /// `None` when no row has a defined direction.
    pub binary_accuracy: Option<f64>,
    pub majority_baseline_accuracy: Option<f64>,
    pub n: usize,
}

impl MetricsReport {
    pub fn new(regression: RegressionMetrics, binary: Option<(f64, f64)>) -> Self {
        Self {
            r2: regression.r2,
            mae: regression.mae,
            medae: regression.medae,
            rmse: regression.rmse,
            binary_accuracy: binary.map(|b| b.0),
            majority_baseline_accuracy: binary.map(|b| b.1),
            n: regression.n,
        }
    }
}

fn check<T: Scalar>(y: &[T], p: &[T]) -> Result<(), EvalError> {
    if y.len() != p.len() {
        return Err(EvalError::LengthMismatch {
            left: y.len(),
            right: p.len(),
        });
    }
    if y.is_empty() {
        return Err(EvalError::Empty);
    }
    if y.iter().chain(p).any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    Ok(())
}

/// Median of a non-empty slice; the mean of the middle pair for even length.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn regression_metrics<T: Scalar>(y_true: &[T], y_pred: &[T]) -> Result<RegressionMetrics, EvalError> {
    check(y_true, y_pred)?;
    let n = y_true.len();
    let y: Vec<f64> = y_true.iter().map(|v| v.as_f64()).collect();
    let p: Vec<f64> = y_pred.iter().map(|v| v.as_f64()).collect();
    let nf = n as f64;
    let mean = y.iter().sum::<f64>() / nf;
    let abs_err: Vec<f64> = y.iter().zip(&p).map(|(a, b)| (a - b).abs()).collect();
    let ss_res: f64 = y.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum();
    let ss_tot: f64 = y.iter().map(|a| (a - mean) * (a - mean)).sum();
    // Tolerates round-off in the mean of a constant vector.
    let constant = y.iter().all(|&v| v == y[0]);
    Ok(RegressionMetrics {
        r2: (!constant && ss_tot > 0.0).then(|| 1.0 - ss_res / ss_tot),
        mae: abs_err.iter().sum::<f64>() / nf,
        medae: median(&abs_err),
        rmse: (ss_res / nf).sqrt(),
        n,
    })
}

/// `(accuracy, majority baseline)` of the up/not-up direction.
///
/// A value is "up" when strictly positive.
pub fn binary_trend_accuracy<T: Scalar>(pct_true: &[T], pct_pred: &[T]) -> Result<(f64, f64), EvalError> {
    if pct_true.len() != pct_pred.len() {
        return Err(EvalError::LengthMismatch {
            left: pct_true.len(),
            right: pct_pred.len(),
        });
    }
    if pct_true.is_empty() {
        return Err(EvalError::Empty);
    }
    let n = pct_true.len() as f64;
    let up = |v: &T| *v > T::zero();
    let hits = pct_true.iter().zip(pct_pred).filter(|(a, b)| up(a) == up(b)).count();
    let ups = pct_true.iter().filter(|v| up(v)).count() as f64;
    Ok((hits as f64 / n, ups.max(n - ups) / n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction() {
        let m = regression_metrics(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.r2, Some(1.0));
        assert_eq!((m.mae, m.medae, m.rmse), (0.0, 0.0, 0.0));
    }

    #[test]
    fn mean_predictor() {
        let m = regression_metrics(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(m.r2, Some(0.0));
        assert!((m.mae - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.medae, 1.0);
        assert!((m.rmse - (2.0_f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((m.rmse - 0.8165).abs() < 1e-4);
    }

    #[test]
    fn even_length_median_averages_middle_pair() {
        let m = regression_metrics(&[0.0, 0.0, 0.0, 0.0], &[1.0, 4.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.medae, 2.5);
        assert_eq!(m.r2, None);
        assert_eq!(m.mae, 2.5);
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(regression_metrics::<f64>(&[], &[]), Err(EvalError::Empty)));
        assert!(matches!(
            regression_metrics(&[1.0], &[1.0, 2.0]),
            Err(EvalError::LengthMismatch { .. })
        ));
        assert!(matches!(regression_metrics(&[1.0], &[f64::NAN]), Err(EvalError::NonFinite)));
        assert!(matches!(binary_trend_accuracy::<f64>(&[], &[]), Err(EvalError::Empty)));
    }

    #[test]
    fn binary_examples() {
        assert_eq!(binary_trend_accuracy(&[5.0, -3.0, 2.0, 1.0], &[1.0, 1.0, 1.0, 1.0]).unwrap(), (0.75, 0.75));
        let t = [3.0, -1.0, 2.5, -7.0, 0.5];
        let neg: Vec<f64> = t.iter().map(|v| -v).collect();
        assert_eq!(binary_trend_accuracy(&t, &t).unwrap().0, 1.0);
        assert_eq!(binary_trend_accuracy(&t, &neg).unwrap().0, 0.0);
        // Zero counts as not up.
        assert_eq!(binary_trend_accuracy(&[0.0, -1.0], &[-2.0, 0.0]).unwrap(), (1.0, 1.0));
    }
}
