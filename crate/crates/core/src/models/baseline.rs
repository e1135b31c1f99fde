use super::ridge::{fit_ridge_cv, MissingFill, RidgeConfig, RidgeModel};
use super::ModelError;
use crate::features::{FeatureSchema, FeatureTable, TargetKind};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// The single input of the lag baseline for each target.
pub fn baseline_feature(target: TargetKind) -> &'static str {
    match target {
        TargetKind::Pop => "pop_lag0",
        TargetKind::Pct => "lag5_pct_new",
    }
}

/// Ridge on the target's own value `h` years earlier.
///
/// Undefined lag values are read as 0.
pub fn fit_lag_baseline<T: Scalar>(
    table: &FeatureTable,
    targets: &[T],
    target: TargetKind,
    config: &RidgeConfig,
) -> Result<RidgeModel<T>, ModelError> {
    let name = baseline_feature(target);
    let j = table
        .schema
        .index_of(name)
        .ok_or_else(|| ModelError::MissingFeature(name.to_string()))?;
    let x = Matrix::from_fn(table.rows.len(), 1, |i, _| {
        table.rows[i].features[j].map_or_else(T::nan, T::of)
    });
    let config = RidgeConfig {
        missing: MissingFill::Zero,
        ..config.clone()
    };
    fit_ridge_cv(FeatureSchema::custom(vec![name.to_string()]), &x, targets, &config)
}
