//! Model-ready observations.
//!
//! One [`FeatureRow`] per (topic, base year `t`): lagged popularity, review
//! and research composition, patent activity, lifecycle ages and optional
//! name embeddings, all computed from corpus data in years `<= t`. Targets
//! sit at `t + horizon`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusStore, TopicRecord, MODERN_ERA_START, POPULARITY_SCALE};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

pub const MIN_HORIZON: u32 = 1;
pub const MAX_HORIZON: u32 = 6;
pub const DEFAULT_HORIZON: u32 = 5;

/// Time-series and lifecycle features, in schema order.
pub const BASE_FEATURES: [&str; 27] = [
    "pop_lag0",
    "pop_lag1",
    "pop_lag2",
    "pop_lag3",
    "pop_lag4",
    "pop_lag5",
    "pop_window_mean_5_10",
    "pct_diff",
    "lag5_pct_new",
    "y_raw",
    "review_pop",
    "research_pop",
    "research_review_ratio",
    "review_research_diff",
    "abs_publications",
    "us_fraction",
    "patent_yearly_total",
    "patent_fraction",
    "patent_lag1",
    "patent_lag2",
    "patent_lag3",
    "patent_lag4",
    "patent_lag5",
    "year_num",
    "years_since_first_occurrence",
    "years_since_first_valid",
    "valid_gap",
];

pub const EMBEDDING_PREFIX: &str = "embed_";

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("horizon must be in [{MIN_HORIZON},{MAX_HORIZON}], got {0}")]
    Horizon(u32),
    #[error("embedding features requested but the corpus has no embedding table")]
    NoEmbeddings,
    #[error("unknown topic `{0}`")]
    UnknownTopic(String),
    #[error("topic `{topic}` has insufficient history for a base year of {year}")]
    InsufficientHistory { topic: String, year: i32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// Popularity at `t + h`.
    Pop,
    /// Percent change of popularity from `t` to `t + h`.
    Pct,
}

impl TargetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetKind::Pop => "pop",
            TargetKind::Pct => "pct",
        }
    }
}

impl std::fmt::Display for TargetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TargetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pop" => Ok(TargetKind::Pop),
            "pct" => Ok(TargetKind::Pct),
            other => Err(format!("unknown target `{other}` (expected pop or pct)")),
        }
    }
}

/// Ordered feature names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    names: Vec<String>,
    embedding_dim: usize,
}

impl FeatureSchema {
    /// The base features followed by `embedding_dim` embedding components.
    pub fn standard(embedding_dim: usize) -> Self {
        let mut names: Vec<String> = BASE_FEATURES.iter().map(|s| s.to_string()).collect();
        names.extend((0..embedding_dim).map(|i| format!("{EMBEDDING_PREFIX}{i}")));
        Self {
            names,
            embedding_dim,
        }
    }

    /// A schema over an arbitrary set of names.
    ///
    /// # Panics
    /// If the names are not unique.
    pub fn custom(names: Vec<String>) -> Self {
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len(), "feature names must be unique");
        let embedding_dim = names
            .iter()
            .filter(|n| n.starts_with(EMBEDDING_PREFIX))
            .count();
        Self {
            names,
            embedding_dim,
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn embedding_dim(&self) -> usize {
        self.embedding_dim
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// One (topic, base year) observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub topic_id: String,
    pub base_year: i32,
    pub horizon: u32,
    /// Aligned with the table's schema; `None` marks a missing value.
    pub features: Vec<Option<f64>>,
    pub target_pop: f64,
    pub target_pct: Option<f64>,
}

impl FeatureRow {
    pub fn target(&self, kind: TargetKind) -> Option<f64> {
        match kind {
            TargetKind::Pop => Some(self.target_pop),
            TargetKind::Pct => self.target_pct,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub schema: FeatureSchema,
    pub horizon: u32,
    /// Sorted by topic id, then base year.
    pub rows: Vec<FeatureRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureOptions {
    pub horizon: u32,
    pub embeddings: bool,
    /// Earliest base year to emit.
    pub from_year: i32,
    /// Latest base year to emit, on top of the `last_year - horizon` limit.
    pub to_year: Option<i32>,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            embeddings: false,
            from_year: MODERN_ERA_START,
            to_year: None,
        }
    }
}

impl FeatureOptions {
    pub fn with_horizon(horizon: u32) -> Self {
        Self {
            horizon,
            ..Self::default()
        }
    }
}

/// `100 * (current - past) / past`, or `None` when `past` is zero.
pub fn pct_change(current: f64, past: f64) -> Option<f64> {
    (past != 0.0).then(|| 100.0 * (current - past) / past)
}

fn check_horizon(horizon: u32) -> Result<(), FeatureError> {
    if (MIN_HORIZON..=MAX_HORIZON).contains(&horizon) {
        Ok(())
    } else {
        Err(FeatureError::Horizon(horizon))
    }
}

/// Builds the training table for one horizon.
///
/// Topics without a training start year are skipped. A row is emitted for
/// every base year from the topic's start year (and `from_year`) up to the
/// corpus' last year minus the horizon.
pub fn build_feature_rows(
    store: &CorpusStore,
    options: &FeatureOptions,
) -> Result<FeatureTable, FeatureError> {
    check_horizon(options.horizon)?;
    if options.embeddings && store.embeddings().is_none() {
        return Err(FeatureError::NoEmbeddings);
    }
    let dim = if options.embeddings {
        store.embedding_dim()
    } else {
        0
    };
    let schema = FeatureSchema::standard(dim);
    let h = options.horizon as i32;
    let Some(last_year) = store.last_year() else {
        return Ok(FeatureTable {
            schema,
            horizon: options.horizon,
            rows: Vec::new(),
        });
    };
    let mut to_year = last_year - h;
    if let Some(cap) = options.to_year {
        to_year = to_year.min(cap);
    }

    let topics: Vec<&TopicRecord> = store.topics().collect();
    let mut rows: Vec<FeatureRow> = topics
        .par_iter()
        .flat_map_iter(|topic| {
            let start = match topic.meta.training_start_year {
                Some(s) => s.max(options.from_year),
                None => {
                    log::info!(
                        "topic `{}` excluded: no training start year",
                        topic.meta.topic_id
                    );
                    i32::MAX
                }
            };
            let schema = &schema;
            (start..=to_year).map(move |t| {
                let id = &topic.meta.topic_id;
                let target_pop = store.popularity(id, t + h);
                FeatureRow {
                    topic_id: id.clone(),
                    base_year: t,
                    horizon: options.horizon,
                    features: compute_features(store, topic, t, schema.embedding_dim()),
                    target_pop,
                    target_pct: pct_change(target_pop, store.popularity(id, t)),
                }
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        a.topic_id
            .cmp(&b.topic_id)
            .then(a.base_year.cmp(&b.base_year))
    });
    Ok(FeatureTable {
        schema,
        horizon: options.horizon,
        rows,
    })
}

/// Features for one topic at `base_year`, for inference. The topic must be
/// past its training start year.
pub fn feature_vector(
    store: &CorpusStore,
    topic_id: &str,
    base_year: i32,
    schema: &FeatureSchema,
) -> Result<Vec<Option<f64>>, FeatureError> {
    let topic = store
        .topic(topic_id)
        .ok_or_else(|| FeatureError::UnknownTopic(topic_id.to_string()))?;
    match topic.meta.training_start_year {
        Some(start) if start <= base_year => {}
        _ => {
            return Err(FeatureError::InsufficientHistory {
                topic: topic_id.to_string(),
                year: base_year,
            })
        }
    }
    let standard = FeatureSchema::standard(schema.embedding_dim());
    let full = compute_features(store, topic, base_year, schema.embedding_dim());
    Ok(schema
        .names()
        .iter()
        .map(|name| standard.index_of(name).and_then(|i| full[i]))
        .collect())
}

fn compute_features(
    store: &CorpusStore,
    topic: &TopicRecord,
    t: i32,
    embedding_dim: usize,
) -> Vec<Option<f64>> {
    let id = topic.meta.topic_id.as_str();
    let pop = |y: i32| store.popularity(id, y);
    let patents = |y: i32| store.patents(id, y) as f64;
    let global = store.global(t);
    let review = store.review_popularity(id, t);
    let research = store.research_popularity(id, t);
    let meta = &topic.meta;
    // Lifecycle dates are only usable once they have happened.
    let first_occurrence = meta.first_occurrence_year.filter(|&y| y <= t);
    let first_valid = meta.first_valid_year.filter(|&y| y <= t);

    let mut f = Vec::with_capacity(BASE_FEATURES.len() + embedding_dim);
    f.extend((0..=5).map(|lag| Some(pop(t - lag))));
    f.push(Some((t - 10..=t - 5).map(pop).sum::<f64>() / 6.0));
    f.push(pct_change(pop(t), pop(t - 1)));
    f.push(pct_change(pop(t), pop(t - 5)));
    f.push(Some(pop(t)));
    f.push(Some(review));
    f.push(Some(research));
    f.push((review != 0.0).then(|| research / review));
    f.push(Some(review - research));
    f.push(Some(match global {
        Some(g) => pop(t) * g.medline_total as f64 / POPULARITY_SCALE,
        None => 0.0,
    }));
    f.push(global.map(|g| g.us_publication_fraction));
    f.push(Some(patents(t)));
    f.push(
        global
            .filter(|g| g.patents_total > 0)
            .map(|g| patents(t) / g.patents_total as f64),
    );
    f.extend((1..=5).map(|lag| Some(patents(t - lag))));
    f.push(Some(f64::from(t - MODERN_ERA_START)));
    f.push(first_occurrence.map(|y| f64::from(t - y)));
    f.push(first_valid.map(|y| f64::from(t - y)));
    f.push(first_occurrence
        .zip(first_valid)
        .map(|(o, v)| f64::from(v - o)));
    debug_assert_eq!(f.len(), BASE_FEATURES.len());

    if embedding_dim > 0 {
        match store.embeddings().and_then(|e| e.get(id)) {
            Some(v) => f.extend(v.iter().map(|&x| Some(x))),
            None => f.extend(std::iter::repeat_n(None, embedding_dim)),
        }
    }
    f
}

impl FeatureTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.schema.index_of(name)?;
        Some(self.rows.iter().map(|r| r.features[i]).collect())
    }

    pub fn targets(&self, kind: TargetKind) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.target(kind)).collect()
    }

    pub fn topic_ids(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.topic_id.as_str()).collect()
    }

    /// Rows at the given indices, in that order.
    pub fn select(&self, indices: &[usize]) -> FeatureTable {
        FeatureTable {
            schema: self.schema.clone(),
            horizon: self.horizon,
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Keeps rows whose target of `kind` is defined.
    pub fn with_defined_target(&self, kind: TargetKind) -> FeatureTable {
        FeatureTable {
            schema: self.schema.clone(),
            horizon: self.horizon,
            rows: self
                .rows
                .iter()
                .filter(|r| r.target(kind).is_some())
                .cloned()
                .collect(),
        }
    }

    /// Drops the embedding columns.
    pub fn without_embeddings(&self) -> FeatureTable {
        if self.schema.embedding_dim() == 0 {
            return self.clone();
        }
        let keep: Vec<usize> = (0..self.schema.len())
            .filter(|&j| !self.schema.names()[j].starts_with(EMBEDDING_PREFIX))
            .collect();
        FeatureTable {
            schema: FeatureSchema::custom(keep.iter().map(|&j| self.schema.names()[j].clone()).collect()),
            horizon: self.horizon,
            rows: self
                .rows
                .iter()
                .map(|r| FeatureRow {
                    features: keep.iter().map(|&j| r.features[j]).collect(),
                    ..r.clone()
                })
                .collect(),
        }
    }

    /// Dense matrix in schema order with missing values as NaN.
    pub fn to_matrix<T: Scalar>(&self) -> Matrix<T> {
        Matrix::from_fn(self.rows.len(), self.schema.len(), |i, j| {
            self.rows[i].features[j].map_or_else(T::nan, T::of)
        })
    }

    /// `topic,base_year,<schema...>,target_pop,target_pct`; missing values
    /// are empty fields.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["topic".to_string(), "base_year".to_string()];
        header.extend(self.schema.names().iter().cloned());
        header.push("target_pop".into());
        header.push("target_pct".into());
        w.write_record(&header)?;
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for row in &self.rows {
            let mut rec = Vec::with_capacity(header.len());
            rec.push(row.topic_id.clone());
            rec.push(row.base_year.to_string());
            rec.extend(row.features.iter().map(|&v| fmt(v)));
            rec.push(row.target_pop.to_string());
            rec.push(fmt(row.target_pct));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusBuilder, GlobalYearStats};

    const TOTAL: u64 = 100_000;

    /// Publications equal popularity because every year has 100,000 total.
    fn store_from(series: &[(&str, Vec<(i32, u64, u64)>)], years: std::ops::RangeInclusive<i32>) -> CorpusStore {
        let mut b = CorpusBuilder::new();
        for y in years {
            b.add_global(GlobalYearStats {
                year: y,
                medline_total: TOTAL,
                us_publication_fraction: 0.4,
                patents_total: 1000,
            })
            .unwrap();
        }
        for (topic, rows) in series {
            for &(y, n, r) in rows {
                b.add_count(topic, y, n, r).unwrap();
            }
        }
        b.build().unwrap()
    }

    fn value(table: &FeatureTable, row: &FeatureRow, name: &str) -> Option<f64> {
        row.features[table.schema.index_of(name).unwrap()]
    }

    #[test]
    fn pct_change_examples() {
        assert_eq!(pct_change(150.0, 100.0), Some(50.0));
        assert_eq!(pct_change(100.0, 100.0), Some(0.0));
        assert_eq!(pct_change(30.0, 0.0), None);
    }

    #[test]
    fn constant_series_has_zero_changes() {
        let rows = (1979..=2019).map(|y| (y, 100, 10)).collect();
        let store = store_from(&[("flat", rows)], 1979..=2019);
        let table = build_feature_rows(&store, &FeatureOptions::with_horizon(5)).unwrap();
        assert!(!table.is_empty());
        for row in &table.rows {
            assert_eq!(row.target_pop, 100.0);
            assert_eq!(row.target_pct, Some(0.0));
            assert_eq!(value(&table, row, "pct_diff"), Some(0.0));
            if row.base_year >= 1984 {
                assert_eq!(value(&table, row, "lag5_pct_new"), Some(0.0));
            }
        }
    }

    #[test]
    fn linear_ramp_at_2000() {
        let rows = (1979..=2019).map(|y| (y, (y - 1978) as u64, 0)).collect();
        let store = store_from(&[("ramp", rows)], 1979..=2019);
        let table = build_feature_rows(&store, &FeatureOptions::with_horizon(5)).unwrap();
        let row = table.rows.iter().find(|r| r.base_year == 2000).unwrap();
        assert_eq!(value(&table, row, "pop_lag0"), Some(22.0));
        assert_eq!(value(&table, row, "pop_lag5"), Some(17.0));
        assert_eq!(row.target_pop, 27.0);
        let lag5 = value(&table, row, "lag5_pct_new").unwrap();
        assert!((lag5 - 100.0 * 5.0 / 17.0).abs() < 1e-12);
        assert!((lag5 - 29.41).abs() < 0.01);
        // window [1990, 1995] holds 12..=17
        assert_eq!(value(&table, row, "pop_window_mean_5_10"), Some(14.5));
        assert_eq!(value(&table, row, "year_num"), Some(21.0));
    }

    #[test]
    fn late_topic_yields_no_rows() {
        let rows = (2015..=2019).map(|y| (y, 5, 1)).collect();
        let store = store_from(&[("late", rows)], 2015..=2019);
        let table = build_feature_rows(&store, &FeatureOptions::with_horizon(5)).unwrap();
        assert!(table.is_empty());
    }

    #[test]
    fn horizon_bounds() {
        let store = store_from(&[], 2000..=2001);
        for h in [0, 7] {
            assert_eq!(
                build_feature_rows(&store, &FeatureOptions::with_horizon(h)),
                Err(FeatureError::Horizon(h))
            );
        }
    }

    #[test]
    fn ratio_and_patent_fraction_are_missing_on_zero_denominators() {
        let rows = (1979..=2010).map(|y| (y, 50, if y == 2000 { 0 } else { 5 })).collect();
        let store = store_from(&[("t", rows)], 1979..=2010);
        let table = build_feature_rows(&store, &FeatureOptions::with_horizon(1)).unwrap();
        let row = table.rows.iter().find(|r| r.base_year == 2000).unwrap();
        assert_eq!(value(&table, row, "research_review_ratio"), None);
        assert_eq!(value(&table, row, "review_research_diff"), Some(-50.0));
        let row = table.rows.iter().find(|r| r.base_year == 2001).unwrap();
        assert_eq!(value(&table, row, "research_review_ratio"), Some(9.0));
        assert_eq!(value(&table, row, "review_research_diff"), Some(5.0 - 45.0));
        assert_eq!(value(&table, row, "abs_publications"), Some(50.0));
        assert_eq!(value(&table, row, "patent_fraction"), Some(0.0));
    }

    #[test]
    fn lifecycle_features_do_not_look_ahead() {
        // Training starts in 1985 but the first valid year is 1986, so the
        // 1985 row must not see it.
        let mut rows: Vec<(i32, u64, u64)> = vec![(1960, 3, 0), (1979, 4, 0)];
        rows.extend((1982..=2000).map(|y| (y, 4, 0)));
        let store = store_from(&[("sparse", rows)], 1960..=2000);
        let meta = &store.topic("sparse").unwrap().meta;
        assert_eq!(meta.first_occurrence_year, Some(1960));
        assert_eq!(meta.training_start_year, Some(1985));
        assert_eq!(meta.first_valid_year, Some(1986));
        let table = build_feature_rows(&store, &FeatureOptions::with_horizon(1)).unwrap();
        let first = &table.rows[0];
        assert_eq!(first.base_year, 1985);
        assert_eq!(value(&table, first, "years_since_first_occurrence"), Some(25.0));
        assert_eq!(value(&table, first, "years_since_first_valid"), None);
        assert_eq!(value(&table, first, "valid_gap"), None);
        let second = &table.rows[1];
        assert_eq!(value(&table, second, "years_since_first_valid"), Some(0.0));
        assert_eq!(value(&table, second, "valid_gap"), Some(26.0));
    }

    #[test]
    fn embedding_columns_follow_base_features() {
        let rows: Vec<(i32, u64, u64)> = (1979..=2000).map(|y| (y, 5, 1)).collect();
        let mut b = CorpusBuilder::new();
        for y in 1979..=2000 {
            b.add_global(GlobalYearStats {
                year: y,
                medline_total: TOTAL,
                us_publication_fraction: 0.4,
                patents_total: 0,
            })
            .unwrap();
        }
        for (y, n, r) in rows {
            b.add_count("a", y, n, r).unwrap();
            b.add_count("b", y, n, r).unwrap();
        }
        b.set_embeddings(crate::corpus::EmbeddingTable {
            dim: 3,
            vectors: [("a".to_string(), vec![1.0, 2.0, 3.0])].into(),
        });
        let store = b.build().unwrap();
        let opts = FeatureOptions {
            embeddings: true,
            ..FeatureOptions::with_horizon(2)
        };
        let table = build_feature_rows(&store, &opts).unwrap();
        assert_eq!(table.schema.len(), BASE_FEATURES.len() + 3);
        let a = table.rows.iter().find(|r| r.topic_id == "a").unwrap();
        let b = table.rows.iter().find(|r| r.topic_id == "b").unwrap();
        assert_eq!(&a.features[27..], &[Some(1.0), Some(2.0), Some(3.0)]);
        assert_eq!(&b.features[27..], &[None, None, None]);
        assert_eq!(value(&table, a, "patent_fraction"), None);

        let plain = build_feature_rows(&store, &FeatureOptions::with_horizon(2)).unwrap();
        assert_eq!(plain.schema.len(), BASE_FEATURES.len());
        assert_eq!(table.without_embeddings(), plain);
    }

    #[test]
    fn csv_export_uses_empty_fields_for_missing() {
        let rows = (1979..=1990).map(|y| (y, 5, 0)).collect();
        let store = store_from(&[("x", rows)], 1979..=1990);
        let table = build_feature_rows(&store, &FeatureOptions::with_horizon(1)).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("topic,base_year,pop_lag0,"));
        assert!(header.ends_with(",valid_gap,target_pop,target_pct"));
        let first = lines.next().unwrap();
        // research_review_ratio is missing (no reviews)
        let ratio_col = 2 + table.schema.index_of("research_review_ratio").unwrap();
        assert_eq!(first.split(',').nth(ratio_col), Some(""));
        assert_eq!(text.lines().count(), table.len() + 1);
    }
}
