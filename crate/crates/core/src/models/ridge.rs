//! Ridge regression on standardized features.
//!
//! Minimizes `sum (y - b - Z w)^2 + alpha * |w|^2` where `Z` is the
//! standardized design matrix and the intercept `b` is unpenalized. Since
//! the columns of `Z` are centered, `b` is the training mean of `y` and `w`
//! solves `(Z'Z + alpha I) w = Z'(y - mean(y))`.

use serde::{Deserialize, Serialize};

use super::standardize::Standardizer;
use super::ModelError;
use crate::features::FeatureSchema;
use crate::matrix::{solve, Matrix};
use crate::scalar::{shifted_mean, Scalar};

pub const DEFAULT_ALPHA_GRID: [f64; 3] = [0.1, 1.0, 10.0];
pub const DEFAULT_K_FOLDS: usize = 5;

/// How missing inputs are filled before standardization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingFill {
    /// Training column mean.
    #[default]
    Mean,
    /// Literal zero.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeConfig {
    pub alpha_grid: Vec<f64>,
    pub k_folds: usize,
    pub missing: MissingFill,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        Self {
            alpha_grid: DEFAULT_ALPHA_GRID.to_vec(),
            k_folds: DEFAULT_K_FOLDS,
            missing: MissingFill::Mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel<T> {
    pub schema: FeatureSchema,
    pub standardizer: Standardizer<T>,
    /// Weights on the standardized columns.
    pub weights: Vec<T>,
    pub intercept: T,
    pub chosen_alpha: T,
    pub missing: MissingFill,
}

fn fill_missing<T: Scalar>(x: &Matrix<T>, fill: MissingFill) -> Matrix<T> {
    match fill {
        MissingFill::Mean => x.clone(),
        MissingFill::Zero => Matrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            let v = x.get(i, j);
            if v.is_nan() {
                T::zero()
            } else {
                v
            }
        }),
    }
}

fn check_inputs<T: Scalar>(x: &Matrix<T>, y: &[T]) -> Result<(), ModelError> {
    if x.nrows() == 0 {
        return Err(ModelError::EmptyTable);
    }
    if x.nrows() != y.len() {
        return Err(ModelError::LengthMismatch {
            rows: x.nrows(),
            targets: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFiniteTarget);
    }
    Ok(())
}

/// Fits ridge with a fixed penalty.
pub fn fit_ridge<T: Scalar>(
    schema: FeatureSchema,
    x: &Matrix<T>,
    y: &[T],
    alpha: T,
    missing: MissingFill,
) -> Result<RidgeModel<T>, ModelError> {
    check_inputs(x, y)?;
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(ModelError::InvalidAlpha(alpha.as_f64()));
    }
    if schema.len() != x.ncols() {
        return Err(ModelError::LengthMismatch {
            rows: schema.len(),
            targets: x.ncols(),
        });
    }
    let x = fill_missing(x, missing);
    let standardizer = Standardizer::fit(&x)?;
    let z = standardizer.transform(&x);
    let y_mean = shifted_mean(y).ok_or(ModelError::EmptyTable)?;
    let p = z.ncols();

    let mut gram = Matrix::zeros(p, p);
    let mut rhs = vec![T::zero(); p];
    for i in 0..z.nrows() {
        let row = z.row(i);
        let yc = y[i] - y_mean;
        for a in 0..p {
            if row[a] == T::zero() {
                continue;
            }
            rhs[a] = rhs[a] + row[a] * yc;
            for b in a..p {
                let v = gram.get(a, b) + row[a] * row[b];
                gram.set(a, b, v);
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram.set(a, b, gram.get(b, a));
        }
        gram.set(a, a, gram.get(a, a) + alpha);
    }
    let weights = solve(gram, rhs).ok_or(ModelError::Singular)?;
    Ok(RidgeModel {
        schema,
        standardizer,
        weights,
        intercept: y_mean,
        chosen_alpha: alpha,
        missing,
    })
}

/// Picks the penalty from `config.alpha_grid` by contiguous k-fold
/// cross-validation (lowest mean fold MSE, ties to the smaller penalty),
/// then refits on all rows.
pub fn fit_ridge_cv<T: Scalar>(
    schema: FeatureSchema,
    x: &Matrix<T>,
    y: &[T],
    config: &RidgeConfig,
) -> Result<RidgeModel<T>, ModelError> {
    check_inputs(x, y)?;
    if config.alpha_grid.is_empty() {
        return Err(ModelError::InvalidAlpha(f64::NAN));
    }
    if let Some(&bad) = config.alpha_grid.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
        return Err(ModelError::InvalidAlpha(bad));
    }
    let mut grid = config.alpha_grid.clone();
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup();

    let n = x.nrows();
    let k = config.k_folds;
    if k < 2 || n < 2 * k {
        if grid.len() == 1 {
            return fit_ridge(schema, x, y, T::of(grid[0]), config.missing);
        }
        return Err(ModelError::TooFewRows {
            needed: 2 * k.max(2),
            got: n,
        });
    }

    let bounds: Vec<(usize, usize)> = (0..k).map(|f| (f * n / k, (f + 1) * n / k)).collect();
    let mut best: Option<(f64, f64)> = None;
    for &alpha in &grid {
        let mut fold_mse = 0.0;
        for &(lo, hi) in &bounds {
            let train: Vec<usize> = (0..lo).chain(hi..n).collect();
            let test: Vec<usize> = (lo..hi).collect();
            let y_train: Vec<T> = train.iter().map(|&i| y[i]).collect();
            let model = fit_ridge(
                schema.clone(),
                &x.select_rows(&train),
                &y_train,
                T::of(alpha),
                config.missing,
            )?;
            let pred = model.predict_matrix(&x.select_rows(&test));
            let sse: f64 = test
                .iter()
                .zip(&pred)
                .map(|(&i, &p)| (y[i] - p).as_f64().powi(2))
                .sum();
            fold_mse += sse / test.len() as f64;
        }
        let mse = fold_mse / k as f64;
        log::debug!("ridge alpha={alpha} cv_mse={mse}");
        if best.is_none_or(|(_, b)| mse < b) {
            best = Some((alpha, mse));
        }
    }
    let (alpha, _) = best.expect("non-empty grid");
    fit_ridge(schema, x, y, T::of(alpha), config.missing)
}

impl<T: Scalar> RidgeModel<T> {
    /// Standardized inputs exactly as the model sees them.
    pub fn design(&self, x: &Matrix<T>) -> Matrix<T> {
        self.standardizer.transform(&fill_missing(x, self.missing))
    }

    pub fn predict_matrix(&self, x: &Matrix<T>) -> Vec<T> {
        let z = self.design(x);
        (0..z.nrows())
            .map(|i| self.predict_standardized(z.row(i)))
            .collect()
    }

    pub fn predict_standardized(&self, z: &[T]) -> T {
        self.intercept
            + z.iter()
                .zip(&self.weights)
                .map(|(&a, &w)| a * w)
                .sum::<T>()
    }

    /// Weights and intercept expressed on the raw feature scale.
    pub fn coefficients_original_scale(&self) -> (Vec<T>, T) {
        let mut intercept = self.intercept;
        let weights = self
            .weights
            .iter()
            .zip(&self.standardizer.stds)
            .zip(&self.standardizer.means)
            .map(|((&w, &s), &m)| {
                if s == T::zero() {
                    T::zero()
                } else {
                    let raw = w / s;
                    intercept = intercept - raw * m;
                    raw
                }
            })
            .collect();
        (weights, intercept)
    }
}

/// `sum (y - b - Z w)^2 + alpha * |w|^2` on an already standardized design.
pub fn ridge_objective<T: Scalar>(z: &Matrix<T>, y: &[T], intercept: T, weights: &[T], alpha: T) -> T {
    let sse: T = (0..z.nrows())
        .map(|i| {
            let pred = intercept
                + z.row(i)
                    .iter()
                    .zip(weights)
                    .map(|(&a, &w)| a * w)
                    .sum::<T>();
            (y[i] - pred) * (y[i] - pred)
        })
        .sum();
    sse + alpha * weights.iter().map(|&w| w * w).sum::<T>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn schema(p: usize) -> FeatureSchema {
        FeatureSchema::custom((0..p).map(|i| format!("x{i}")).collect())
    }

    fn linear_data(n: usize, seed: u64) -> (Matrix<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Matrix::from_fn(n, 2, |_, _| rng.random_range(-5.0..5.0));
        let y = (0..n).map(|i| 3.0 * x.get(i, 0) - 2.0 * x.get(i, 1) + 1.0).collect();
        (x, y)
    }

    #[test]
    fn recovers_generating_coefficients() {
        let (x, y) = linear_data(200, 1);
        let cfg = RidgeConfig {
            alpha_grid: vec![0.1],
            ..RidgeConfig::default()
        };
        let model = fit_ridge_cv(schema(2), &x, &y, &cfg).unwrap();
        let (w, b) = model.coefficients_original_scale();
        assert!((w[0] - 3.0).abs() < 0.05, "{w:?}");
        assert!((w[1] + 2.0).abs() < 0.05, "{w:?}");
        assert!((b - 1.0).abs() < 0.05, "{b}");
    }

    #[test]
    fn huge_penalty_predicts_the_mean() {
        let (x, y) = linear_data(100, 2);
        let model = fit_ridge(schema(2), &x, &y, 1e9, MissingFill::Mean).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!(model.weights.iter().all(|w| w.abs() < 1e-5));
        for p in model.predict_matrix(&x) {
            assert!((p - mean).abs() <= 1e-3 * mean.abs().max(1.0));
        }
    }

    #[test]
    fn perturbing_weights_never_lowers_the_objective() {
        let (x, mut y) = linear_data(200, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for v in &mut y {
            *v += rng.random_range(-1.0..1.0);
        }
        let model = fit_ridge_cv(schema(2), &x, &y, &RidgeConfig::default()).unwrap();
        let z = model.design(&x);
        let alpha = model.chosen_alpha;
        let base = ridge_objective(&z, &y, model.intercept, &model.weights, alpha);
        for j in 0..model.weights.len() {
            for delta in [1e-3, -1e-3] {
                let mut w = model.weights.clone();
                w[j] += delta;
                assert!(ridge_objective(&z, &y, model.intercept, &w, alpha) >= base);
            }
        }
    }

    #[test]
    fn selects_smallest_alpha_on_ties() {
        // All-zero targets give zero CV error for every penalty.
        let (x, _) = linear_data(40, 4);
        let y = vec![0.0; 40];
        let cfg = RidgeConfig {
            alpha_grid: vec![10.0, 1.0, 0.1],
            ..RidgeConfig::default()
        };
        let model = fit_ridge_cv(schema(2), &x, &y, &cfg).unwrap();
        assert_eq!(model.chosen_alpha, 0.1);
    }

    #[test]
    fn prefers_heavier_penalty_for_pure_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = Matrix::from_fn(60, 8, |_, _| rng.random_range(-1.0..1.0));
        let y: Vec<f64> = (0..60).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cfg = RidgeConfig {
            alpha_grid: vec![1e-3, 1e4],
            ..RidgeConfig::default()
        };
        let model = fit_ridge_cv(schema(8), &x, &y, &cfg).unwrap();
        assert_eq!(model.chosen_alpha, 1e4);
    }

    #[test]
    fn zero_weights_predict_the_intercept() {
        let model = RidgeModel {
            schema: schema(2),
            standardizer: Standardizer {
                means: vec![0.0, 0.0],
                stds: vec![1.0, 1.0],
            },
            weights: vec![0.0, 0.0],
            intercept: 4.5,
            chosen_alpha: 1.0,
            missing: MissingFill::Mean,
        };
        let x = Matrix::from_rows(&[vec![1.0, -7.0], vec![f64::NAN, 3.0]]);
        assert_eq!(model.predict_matrix(&x), vec![4.5, 4.5]);
    }

    #[test]
    fn constant_columns_get_zero_weight() {
        let (x, y) = linear_data(50, 6);
        let x = x.with_column(&[7.0; 50]);
        let model = fit_ridge(schema(3), &x, &y, 1.0, MissingFill::Mean).unwrap();
        assert_eq!(model.weights[2], 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (x, y) = linear_data(20, 7);
        assert!(matches!(
            fit_ridge(schema(2), &x, &y, 0.0, MissingFill::Mean),
            Err(ModelError::InvalidAlpha(_))
        ));
        let cfg = RidgeConfig {
            k_folds: 11,
            ..RidgeConfig::default()
        };
        assert!(matches!(
            fit_ridge_cv(schema(2), &x, &y, &cfg),
            Err(ModelError::TooFewRows { .. })
        ));
        let mut bad = y.clone();
        bad[3] = f64::INFINITY;
        assert!(matches!(
            fit_ridge_cv(schema(2), &x, &bad, &RidgeConfig::default()),
            Err(ModelError::NonFiniteTarget)
        ));
    }

    #[test]
    fn single_precision_fit() {
        let (x, y) = linear_data(200, 8);
        let xf = Matrix::from_fn(x.nrows(), 2, |i, j| x.get(i, j) as f32);
        let yf: Vec<f32> = y.iter().map(|&v| v as f32).collect();
        let model = fit_ridge(schema(2), &xf, &yf, 0.1, MissingFill::Mean).unwrap();
        let (w, _) = model.coefficients_original_scale();
        assert!((w[0] - 3.0).abs() < 0.05 && (w[1] + 2.0).abs() < 0.05);
    }
}
