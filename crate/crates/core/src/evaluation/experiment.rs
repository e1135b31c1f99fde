//! Cross-validated model comparison.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{binary_trend_accuracy, regression_metrics, MetricsReport};
use super::splits::{temporal_splits, topic_splits, SplitKind, SplitPlan};
use super::EvalError;
use crate::features::{pct_change, FeatureTable, TargetKind};
use crate::models::{FitConfig, ModelKind, TrainedModel};
use crate::scalar::Scalar;

pub const DEFAULT_N_SPLITS: usize = 30;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub target: TargetKind,
    pub split: SplitKind,
    pub n_splits: usize,
    pub seed: u64,
    pub embeddings: bool,
    pub fit: FitConfig,
}

impl ExperimentConfig {
    pub fn new(model: ModelKind, target: TargetKind, split: SplitKind) -> Self {
        Self {
            model,
            target,
            split,
            n_splits: DEFAULT_N_SPLITS,
            seed: DEFAULT_SEED,
            embeddings: false,
            fit: FitConfig::default(),
        }
    }

    /// `gbdt`, `ridge`, `baseline`, with `+embed` when embeddings are used.
    pub fn label(&self) -> String {
        if self.embeddings {
            format!("{}+embed", self.model)
        } else {
            self.model.to_string()
        }
    }
}

/// One held-out prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub fold: usize,
    pub topic_id: String,
    pub base_year: i32,
    pub actual: f64,
    pub predicted: f64,
    /// True and predicted percent change, when defined.
    pub direction: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub label: String,
    pub target: TargetKind,
    pub split: SplitKind,
    pub folds: Vec<MetricsReport>,
    /// Metrics over the concatenated predictions of every fold.
    pub pooled: MetricsReport,
    pub predictions: Vec<Prediction>,
}

pub fn split_plan(table: &FeatureTable, split: SplitKind, n_splits: usize, seed: u64) -> Result<SplitPlan, EvalError> {
    match split {
        SplitKind::Temporal => {
            let years: Vec<i32> = table.rows.iter().map(|r| r.base_year).collect();
            temporal_splits(&years, n_splits)
        }
        SplitKind::Topic => topic_splits(&table.topic_ids(), n_splits, seed),
    }
}

fn metrics_for(predictions: &[Prediction]) -> Result<MetricsReport, EvalError> {
    let y: Vec<f64> = predictions.iter().map(|p| p.actual).collect();
    let p: Vec<f64> = predictions.iter().map(|p| p.predicted).collect();
    let regression = regression_metrics(&y, &p)?;
    let (dt, dp): (Vec<f64>, Vec<f64>) = predictions.iter().filter_map(|p| p.direction).unzip();
    let binary = if dt.is_empty() {
        None
    } else {
        Some(binary_trend_accuracy(&dt, &dp)?)
    };
    Ok(MetricsReport::new(regression, binary))
}

/// Fits on each fold's training rows and scores its test rows.
///
/// Only rows with a defined target take part. Direction for the binary
/// accuracy comes from the predicted percent change; for the popularity
/// target it is derived against `pop_lag0`.
pub fn run_experiment<T: Scalar>(table: &FeatureTable, config: &ExperimentConfig) -> Result<ExperimentReport, EvalError> {
    let table = table.with_defined_target(config.target);
    let plan = split_plan(&table, config.split, config.n_splits, config.seed)?;
    let current = table.schema.index_of("pop_lag0");

    let per_fold: Vec<Vec<Prediction>> = plan
        .folds
        .par_iter()
        .enumerate()
        .map(|(k, fold)| -> Result<Vec<Prediction>, EvalError> {
            let train = table.select(&fold.train);
            let test = table.select(&fold.test);
            let model = TrainedModel::<T>::fit(config.model, config.target, config.embeddings, &train, &config.fit)?;
            let predicted = model.predict_table(&test)?;
            Ok(test
                .rows
                .iter()
                .zip(predicted)
                .map(|(row, pred)| {
                    let pred = pred.as_f64();
                    let actual = row.target(config.target).expect("defined target");
                    let direction = match config.target {
                        TargetKind::Pct => Some((actual, pred)),
                        TargetKind::Pop => current
                            .and_then(|j| row.features[j])
                            .and_then(|now| Some((row.target_pct?, pct_change(pred, now)?))),
                    };
                    Prediction {
                        fold: k,
                        topic_id: row.topic_id.clone(),
                        base_year: row.base_year,
                        actual,
                        predicted: pred,
                        direction,
                    }
                })
                .collect())
        })
        .collect::<Result<_, _>>()?;

    let folds = per_fold.iter().map(|p| metrics_for(p)).collect::<Result<Vec<_>, _>>()?;
    let predictions: Vec<Prediction> = per_fold.into_iter().flatten().collect();
    Ok(ExperimentReport {
        label: config.label(),
        target: config.target,
        split: config.split,
        pooled: metrics_for(&predictions)?,
        folds,
        predictions,
    })
}

pub const REPORT_HEADER: [&str; 11] = [
    "model", "target", "split", "fold", "r2", "mae", "medae", "rmse", "binary_acc", "baseline_acc", "n",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn metric_record(r: &ExperimentReport, fold: &str, m: &MetricsReport) -> Vec<String> {
    vec![
        r.label.clone(),
        r.target.to_string(),
        r.split.to_string(),
        fold.to_string(),
        opt(m.r2),
        m.mae.to_string(),
        m.medae.to_string(),
        m.rmse.to_string(),
        opt(m.binary_accuracy),
        opt(m.majority_baseline_accuracy),
        m.n.to_string(),
    ]
}

/// Per-fold rows followed by a `pooled` row for each report.
pub fn write_reports_csv<W: Write>(reports: &[ExperimentReport], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in reports {
        for (k, m) in r.folds.iter().enumerate() {
            w.write_record(metric_record(r, &k.to_string(), m))?;
        }
        w.write_record(metric_record(r, "pooled", &r.pooled))?;
    }
    w.flush()?;
    Ok(())
}

/// Pooled metrics as an aligned text table.
pub fn format_pooled_table(reports: &[ExperimentReport]) -> String {
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"));
    let mut rows = vec![[
        "model".to_string(),
        "target".into(),
        "split".into(),
        "r2".into(),
        "mae".into(),
        "medae".into(),
        "rmse".into(),
        "binary_acc".into(),
        "baseline_acc".into(),
        "n".into(),
    ]];
    for r in reports {
        let m = &r.pooled;
        rows.push([
            r.label.clone(),
            r.target.to_string(),
            r.split.to_string(),
            fmt(m.r2),
            fmt(Some(m.mae)),
            fmt(Some(m.medae)),
            fmt(Some(m.rmse)),
            fmt(m.binary_accuracy),
            fmt(m.majority_baseline_accuracy),
            m.n.to_string(),
        ]);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|j| rows.iter().map(|r| r[j].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(j, (c, &w))| if j < 3 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureRow, FeatureSchema};

    /// target_pop equals pop_lag0 exactly.
    fn persistent_table() -> FeatureTable {
        let schema = FeatureSchema::custom(vec!["pop_lag0".into(), "lag5_pct_new".into(), "other".into()]);
        let mut rows = Vec::new();
        for topic in 0..6 {
            for year in 1990..2010 {
                let pop = 1.0 + ((topic * 31 + year * 7) % 23) as f64;
                rows.push(FeatureRow {
                    topic_id: format!("topic{topic}"),
                    base_year: year,
                    horizon: 5,
                    features: vec![Some(pop), Some(0.0), Some((year % 3) as f64)],
                    target_pop: pop,
                    target_pct: Some(0.0),
                });
            }
        }
        FeatureTable {
            schema,
            horizon: 5,
            rows,
        }
    }

    #[test]
    fn baseline_on_persistent_corpus() {
        let mut config = ExperimentConfig::new(ModelKind::Baseline, TargetKind::Pop, SplitKind::Temporal);
        config.n_splits = 10;
        let report = run_experiment::<f64>(&persistent_table(), &config).unwrap();
        assert_eq!(report.folds.len(), 10);
        let r2 = report.pooled.r2.unwrap();
        assert!(r2 > 1.0 - 1e-4, "r2 = {r2}");
        // 20 years / 11 = 1 test year per fold: 6 rows each.
        assert_eq!(report.pooled.n, 60);
    }

    #[test]
    fn same_seed_same_report() {
        let mut config = ExperimentConfig::new(ModelKind::Gbdt, TargetKind::Pop, SplitKind::Topic);
        config.n_splits = 3;
        config.fit.gbdt.rounds = 20;
        config.fit.gbdt.min_samples_leaf = 5;
        let t = persistent_table();
        let a = run_experiment::<f64>(&t, &config).unwrap();
        let b = run_experiment::<f64>(&t, &config).unwrap();
        assert_eq!(a, b);
        let mut csv_a = Vec::new();
        write_reports_csv(&[a], &mut csv_a).unwrap();
        let text = String::from_utf8(csv_a).unwrap();
        assert!(text.starts_with("model,target,split,fold,r2,mae,medae,rmse,binary_acc,baseline_acc,n\n"));
        assert_eq!(text.lines().count(), 1 + 3 + 1);
        assert!(text.lines().last().unwrap().starts_with("gbdt,pop,topic,pooled,"));
    }

    #[test]
    fn text_table_is_aligned() {
        let mut config = ExperimentConfig::new(ModelKind::Baseline, TargetKind::Pop, SplitKind::Temporal);
        config.n_splits = 5;
        let r = run_experiment::<f64>(&persistent_table(), &config).unwrap();
        let text = format_pooled_table(&[r]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].len(), lines[1].len());
    }
}
