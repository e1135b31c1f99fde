use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::matrix::Matrix;
use crate::scalar::{nan_mean, Scalar};

/// Column means and population standard deviations.
///
/// Missing entries (NaN) are imputed with the column mean, so they map to 0
/// after standardization. Constant columns map to all zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer<T> {
    pub means: Vec<T>,
    /// Zero marks a constant column.
    pub stds: Vec<T>,
}

impl<T: Scalar> Standardizer<T> {
    pub fn fit(x: &Matrix<T>) -> Result<Self, ModelError> {
        if x.nrows() == 0 {
            return Err(ModelError::EmptyTable);
        }
        let mut means = Vec::with_capacity(x.ncols());
        let mut stds = Vec::with_capacity(x.ncols());
        for j in 0..x.ncols() {
            let col = x.column(j);
            let mean = nan_mean(col.iter().copied()).unwrap_or_else(T::zero);
            let n = T::of_usize(col.len());
            let var = col
                .iter()
                .map(|&v| if v.is_nan() { T::zero() } else { (v - mean) * (v - mean) })
                .sum::<T>()
                / n;
            let std = var.sqrt();
            // Round-off on a constant column leaves a tiny positive spread.
            let constant = std <= T::epsilon() * mean.abs() * T::of(16.0) || std == T::zero();
            means.push(mean);
            stds.push(if constant { T::zero() } else { std });
        }
        Ok(Self { means, stds })
    }

    pub fn transform_value(&self, j: usize, v: T) -> T {
        if v.is_nan() || self.stds[j] == T::zero() {
            T::zero()
        } else {
            (v - self.means[j]) / self.stds[j]
        }
    }

    pub fn transform(&self, x: &Matrix<T>) -> Matrix<T> {
        Matrix::from_fn(x.nrows(), x.ncols(), |i, j| self.transform_value(j, x.get(i, j)))
    }
}

/// Fits column statistics on `x` and applies them.
pub fn standardize_fit_apply<T: Scalar>(
    x: &Matrix<T>,
) -> Result<(Standardizer<T>, Matrix<T>), ModelError> {
    let stats = Standardizer::fit(x)?;
    let z = stats.transform(x);
    Ok((stats, z))
}
