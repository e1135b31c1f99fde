//! Topic publication corpus.
//!
//! Raw yearly publication counts are normalized into *popularity*: the share
//! of all indexed publications that year, scaled to "per 100,000". The store
//! also carries global yearly statistics, patent counts, topic lifecycle
//! dates and optional precomputed topic-name embeddings.

mod ingest;
mod lifecycle;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ingest::{ingest, CorpusPaths};
pub use lifecycle::{
    first_occurrence_year, first_valid_year, training_start_year, LifecycleDates, WindowConvention,
    YearCounts,
};

/// Popularity is expressed per this many indexed publications.
pub const POPULARITY_SCALE: f64 = 100_000.0;
/// Earliest year accepted in any input file.
pub const MIN_YEAR: i32 = 1946;
/// Latest year accepted in any input file.
pub const MAX_YEAR: i32 = 2035;
/// First year of the modern training era.
pub const MODERN_ERA_START: i32 = 1979;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{file}:{line}: column `{column}`: {message}")]
    Malformed {
        file: String,
        line: u64,
        column: String,
        message: String,
    },
    #[error("{file}:{line}: duplicate record for topic `{topic}` in {year}")]
    DuplicateRecord {
        file: String,
        line: u64,
        topic: String,
        year: i32,
    },
    #[error("{file}:{line}: review_publications ({review}) exceeds publications ({total}) for `{topic}` in {year}")]
    ReviewExceedsTotal {
        file: String,
        line: u64,
        topic: String,
        year: i32,
        review: u64,
        total: u64,
    },
    #[error("missing denominator: topic `{topic}` has a record for {year} but global statistics have no row for that year")]
    MissingDenominator { topic: String, year: i32 },
    #[error("missing denominator: medline_total is 0 in {year}, referenced by topic `{topic}`")]
    ZeroDenominator { topic: String, year: i32 },
    #[error("popularity is undefined for a zero publication total")]
    ZeroTotal,
    #[error("{file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: {source}")]
    Csv {
        file: String,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

/// Canonical join key for a topic name: lowercased, trimmed, with internal
/// whitespace runs collapsed to one space.
pub fn canonical_topic_id(name: &str) -> String {
    name.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// `100000 * count / total`.
pub fn popularity(count: u64, total: u64) -> Result<f64> {
    if total == 0 {
        return Err(CorpusError::ZeroTotal);
    }
    Ok(POPULARITY_SCALE * count as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearlyTopicCount {
    pub topic_id: String,
    pub year: i32,
    pub publications: u64,
    pub review_publications: u64,
    pub patent_count: u64,
}

impl YearlyTopicCount {
    pub fn research_publications(&self) -> u64 {
        self.publications - self.review_publications
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalYearStats {
    pub year: i32,
    pub medline_total: u64,
    pub us_publication_fraction: f64,
    pub patents_total: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicMeta {
    pub topic_id: String,
    pub display_name: String,
    pub domain_tag: Option<String>,
    pub first_occurrence_year: Option<i32>,
    pub first_valid_year: Option<i32>,
    pub training_start_year: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopularityPoint {
    pub topic_id: String,
    pub year: i32,
    pub popularity: f64,
    pub review_popularity: f64,
    pub research_popularity: f64,
}

/// Precomputed topic-name embeddings, one fixed-width vector per topic.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn get(&self, topic_id: &str) -> Option<&[f64]> {
        self.vectors.get(topic_id).map(Vec::as_slice)
    }
}

/// Everything known about one topic.
#[derive(Debug, Clone)]
pub struct TopicRecord {
    pub meta: TopicMeta,
    pub counts: BTreeMap<i32, YearlyTopicCount>,
    pub points: BTreeMap<i32, PopularityPoint>,
    /// Patent counts by year, including years with no publication record.
    pub patents: BTreeMap<i32, u64>,
    pub has_embedding: bool,
}

impl TopicRecord {
    pub fn publication_series(&self) -> YearCounts {
        self.counts
            .iter()
            .map(|(&y, c)| (y, c.publications))
            .collect()
    }

    /// Last year with an observed publication record.
    pub fn last_observed_year(&self) -> Option<i32> {
        self.counts.keys().next_back().copied()
    }
}

/// Validated, immutable corpus.
///
/// Years without a record for a topic read as zero publications.
#[derive(Debug, Clone)]
pub struct CorpusStore {
    topics: BTreeMap<String, TopicRecord>,
    global: BTreeMap<i32, GlobalYearStats>,
    embeddings: Option<EmbeddingTable>,
    convention: WindowConvention,
}

impl CorpusStore {
    pub fn topic(&self, topic_id: &str) -> Option<&TopicRecord> {
        self.topics.get(topic_id)
    }

    /// Looks a topic up by any spelling that canonicalizes to its id.
    pub fn resolve(&self, name: &str) -> Option<&TopicRecord> {
        self.topics.get(&canonical_topic_id(name))
    }

    pub fn topics(&self) -> impl Iterator<Item = &TopicRecord> {
        self.topics.values()
    }

    pub fn topic_ids(&self) -> impl Iterator<Item = &str> {
        self.topics.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    pub fn global(&self, year: i32) -> Option<&GlobalYearStats> {
        self.global.get(&year)
    }

    pub fn global_stats(&self) -> impl Iterator<Item = &GlobalYearStats> {
        self.global.values()
    }

    pub fn embeddings(&self) -> Option<&EmbeddingTable> {
        self.embeddings.as_ref()
    }

    pub fn embedding_dim(&self) -> usize {
        self.embeddings.as_ref().map_or(0, |e| e.dim)
    }

    pub fn window_convention(&self) -> WindowConvention {
        self.convention
    }

    /// Topics that have no row in the embedding table.
    pub fn topics_missing_embeddings(&self) -> Vec<&str> {
        self.topics
            .values()
            .filter(|t| !t.has_embedding)
            .map(|t| t.meta.topic_id.as_str())
            .collect()
    }

    pub fn popularity(&self, topic_id: &str, year: i32) -> f64 {
        self.point(topic_id, year).map_or(0.0, |p| p.popularity)
    }

    pub fn review_popularity(&self, topic_id: &str, year: i32) -> f64 {
        self.point(topic_id, year).map_or(0.0, |p| p.review_popularity)
    }

    pub fn research_popularity(&self, topic_id: &str, year: i32) -> f64 {
        self.point(topic_id, year)
            .map_or(0.0, |p| p.research_popularity)
    }

    pub fn publications(&self, topic_id: &str, year: i32) -> u64 {
        self.topics
            .get(topic_id)
            .and_then(|t| t.counts.get(&year))
            .map_or(0, |c| c.publications)
    }

    pub fn patents(&self, topic_id: &str, year: i32) -> u64 {
        self.topics
            .get(topic_id)
            .and_then(|t| t.patents.get(&year))
            .copied()
            .unwrap_or(0)
    }

    pub fn point(&self, topic_id: &str, year: i32) -> Option<&PopularityPoint> {
        self.topics.get(topic_id)?.points.get(&year)
    }

    /// Latest year with any topic record.
    pub fn last_year(&self) -> Option<i32> {
        self.topics
            .values()
            .filter_map(TopicRecord::last_observed_year)
            .max()
    }

    /// Mean popularity across the topics that have a record in each year.
    pub fn mean_popularity_by_year(&self) -> BTreeMap<i32, f64> {
        let mut sums: BTreeMap<i32, (f64, usize)> = BTreeMap::new();
        for topic in self.topics.values() {
            for (&year, point) in &topic.points {
                let entry = sums.entry(year).or_default();
                entry.0 += point.popularity;
                entry.1 += 1;
            }
        }
        sums.into_iter()
            .map(|(year, (sum, n))| (year, sum / n as f64))
            .collect()
    }

    /// Writes `topic_counts.csv` in canonical form: topic ids, sorted by
    /// topic then year.
    pub fn write_counts_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["topic", "year", "publications", "review_publications"])?;
        for topic in self.topics.values() {
            for c in topic.counts.values() {
                w.write_record([
                    c.topic_id.clone(),
                    c.year.to_string(),
                    c.publications.to_string(),
                    c.review_publications.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_global_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "year",
            "medline_total",
            "us_publication_fraction",
            "patents_total",
        ])?;
        for g in self.global.values() {
            w.write_record([
                g.year.to_string(),
                g.medline_total.to_string(),
                g.us_publication_fraction.to_string(),
                g.patents_total.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_patents_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["topic", "year", "patent_count"])?;
        for topic in self.topics.values() {
            for (year, n) in &topic.patents {
                w.write_record([topic.meta.topic_id.clone(), year.to_string(), n.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_embeddings_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let Some(table) = &self.embeddings else {
            return Ok(());
        };
        let mut header = vec!["topic".to_string()];
        header.extend((0..table.dim).map(|i| format!("e{i}")));
        w.write_record(&header)?;
        for (topic, v) in &table.vectors {
            let mut rec = vec![topic.clone()];
            rec.extend(v.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes every popularity point as CSV.
    pub fn write_popularity_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "topic",
            "year",
            "popularity",
            "review_popularity",
            "research_popularity",
            "patent_count",
        ])?;
        for topic in self.topics.values() {
            for p in topic.points.values() {
                w.write_record([
                    p.topic_id.clone(),
                    p.year.to_string(),
                    p.popularity.to_string(),
                    p.review_popularity.to_string(),
                    p.research_popularity.to_string(),
                    self.patents(&p.topic_id, p.year).to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the four canonical input files into `dir`.
    pub fn export_dir(&self, dir: &Path) -> Result<()> {
        let io = |file: &str, e: std::io::Error| CorpusError::Io {
            file: file.to_string(),
            source: e,
        };
        std::fs::create_dir_all(dir).map_err(|e| io(&dir.display().to_string(), e))?;
        let open = |name: &str| {
            let path = dir.join(name);
            std::fs::File::create(&path).map_err(|e| io(&path.display().to_string(), e))
        };
        let csv_err = |file: &str, e: csv::Error| CorpusError::Csv {
            file: file.to_string(),
            source: e,
        };
        self.write_counts_csv(open(ingest::COUNTS_FILE)?)
            .map_err(|e| csv_err(ingest::COUNTS_FILE, e))?;
        self.write_global_csv(open(ingest::GLOBAL_FILE)?)
            .map_err(|e| csv_err(ingest::GLOBAL_FILE, e))?;
        self.write_patents_csv(open(ingest::PATENTS_FILE)?)
            .map_err(|e| csv_err(ingest::PATENTS_FILE, e))?;
        if self.embeddings.is_some() {
            self.write_embeddings_csv(open(ingest::EMBEDDINGS_FILE)?)
                .map_err(|e| csv_err(ingest::EMBEDDINGS_FILE, e))?;
        }
        Ok(())
    }
}

/// Assembles a [`CorpusStore`] from in-memory records.
///
/// Row-level checks (duplicates, review counts) run as rows are added;
/// cross-file checks run in [`CorpusBuilder::build`].
#[derive(Debug, Default)]
pub struct CorpusBuilder {
    counts: BTreeMap<String, BTreeMap<i32, YearlyTopicCount>>,
    display_names: BTreeMap<String, String>,
    domain_tags: BTreeMap<String, String>,
    patents: BTreeMap<String, BTreeMap<i32, u64>>,
    global: BTreeMap<i32, GlobalYearStats>,
    embeddings: Option<EmbeddingTable>,
    convention: WindowConvention,
}

/// Where a row came from, for error messages.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RowOrigin<'a> {
    pub file: &'a str,
    pub line: u64,
}

impl RowOrigin<'_> {
    pub(crate) fn malformed(&self, column: &str, message: String) -> CorpusError {
        CorpusError::Malformed {
            file: self.file.to_string(),
            line: self.line,
            column: column.to_string(),
            message,
        }
    }
}

fn check_year(origin: RowOrigin<'_>, year: i32) -> Result<()> {
    if (MIN_YEAR..=MAX_YEAR).contains(&year) {
        Ok(())
    } else {
        Err(origin.malformed(
            "year",
            format!("{year} is outside [{MIN_YEAR}, {MAX_YEAR}]"),
        ))
    }
}

const BUILDER_ORIGIN: RowOrigin<'static> = RowOrigin {
    file: "<builder>",
    line: 0,
};

impl CorpusBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn window_convention(mut self, convention: WindowConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn add_count(
        &mut self,
        topic: &str,
        year: i32,
        publications: u64,
        review_publications: u64,
    ) -> Result<()> {
        self.add_count_at(BUILDER_ORIGIN, topic, year, publications, review_publications)
    }

    pub(crate) fn add_count_at(
        &mut self,
        origin: RowOrigin<'_>,
        topic: &str,
        year: i32,
        publications: u64,
        review_publications: u64,
    ) -> Result<()> {
        let topic_id = canonical_topic_id(topic);
        check_year(origin, year)?;
        if topic_id.is_empty() {
            return Err(origin.malformed("topic", "empty topic name".into()));
        }
        if review_publications > publications {
            return Err(CorpusError::ReviewExceedsTotal {
                file: origin.file.to_string(),
                line: origin.line,
                topic: topic_id,
                year,
                review: review_publications,
                total: publications,
            });
        }
        let series = self.counts.entry(topic_id.clone()).or_default();
        if series.contains_key(&year) {
            return Err(CorpusError::DuplicateRecord {
                file: origin.file.to_string(),
                line: origin.line,
                topic: topic_id,
                year,
            });
        }
        series.insert(
            year,
            YearlyTopicCount {
                topic_id: topic_id.clone(),
                year,
                publications,
                review_publications,
                patent_count: 0,
            },
        );
        self.display_names
            .entry(topic_id)
            .or_insert_with(|| topic.split_whitespace().collect::<Vec<_>>().join(" "));
        Ok(())
    }

    pub fn add_global(&mut self, stats: GlobalYearStats) -> Result<()> {
        self.add_global_at(BUILDER_ORIGIN, stats)
    }

    pub(crate) fn add_global_at(&mut self, origin: RowOrigin<'_>, stats: GlobalYearStats) -> Result<()> {
        check_year(origin, stats.year)?;
        if !(0.0..=1.0).contains(&stats.us_publication_fraction) {
            return Err(origin.malformed(
                "us_publication_fraction",
                format!("{} is outside [0, 1]", stats.us_publication_fraction),
            ));
        }
        if self.global.contains_key(&stats.year) {
            return Err(origin.malformed("year", format!("duplicate global row for {}", stats.year)));
        }
        self.global.insert(stats.year, stats);
        Ok(())
    }

    pub fn add_patents(&mut self, topic: &str, year: i32, count: u64) -> Result<()> {
        self.add_patents_at(BUILDER_ORIGIN, topic, year, count)
    }

    pub(crate) fn add_patents_at(
        &mut self,
        origin: RowOrigin<'_>,
        topic: &str,
        year: i32,
        count: u64,
    ) -> Result<()> {
        let topic_id = canonical_topic_id(topic);
        check_year(origin, year)?;
        let series = self.patents.entry(topic_id.clone()).or_default();
        if series.insert(year, count).is_some() {
            return Err(CorpusError::DuplicateRecord {
                file: origin.file.to_string(),
                line: origin.line,
                topic: topic_id,
                year,
            });
        }
        Ok(())
    }

    pub fn set_domain_tag(&mut self, topic: &str, tag: &str) {
        self.domain_tags
            .insert(canonical_topic_id(topic), tag.to_string());
    }

    pub fn set_embeddings(&mut self, table: EmbeddingTable) {
        self.embeddings = Some(table);
    }

    pub fn build(self) -> Result<CorpusStore> {
        let CorpusBuilder {
            counts,
            mut display_names,
            mut domain_tags,
            mut patents,
            global,
            embeddings,
            convention,
        } = self;

        let known: BTreeSet<&String> = counts.keys().collect();
        for topic in patents.keys().filter(|t| !known.contains(t)) {
            log::warn!("patent rows for `{topic}` ignored: topic has no publication counts");
        }
        patents.retain(|t, _| known.contains(t));

        let mut topics = BTreeMap::new();
        for (topic_id, mut series) in counts {
            let topic_patents = patents.remove(&topic_id).unwrap_or_default();
            let mut points = BTreeMap::new();
            for (&year, count) in series.iter_mut() {
                let stats = global.get(&year).ok_or_else(|| CorpusError::MissingDenominator {
                    topic: topic_id.clone(),
                    year,
                })?;
                if stats.medline_total == 0 {
                    return Err(CorpusError::ZeroDenominator {
                        topic: topic_id.clone(),
                        year,
                    });
                }
                count.patent_count = topic_patents.get(&year).copied().unwrap_or(0);
                let total = stats.medline_total;
                points.insert(
                    year,
                    PopularityPoint {
                        topic_id: topic_id.clone(),
                        year,
                        popularity: popularity(count.publications, total)?,
                        review_popularity: popularity(count.review_publications, total)?,
                        research_popularity: popularity(count.research_publications(), total)?,
                    },
                );
            }
            let pubs: YearCounts = series.iter().map(|(&y, c)| (y, c.publications)).collect();
            let dates = LifecycleDates::compute(&pubs, convention);
            let has_embedding = embeddings
                .as_ref()
                .is_some_and(|e| e.vectors.contains_key(&topic_id));
            if embeddings.is_some() && !has_embedding {
                log::warn!("topic `{topic_id}` has no embedding vector");
            }
            let meta = TopicMeta {
                display_name: display_names.remove(&topic_id).unwrap_or_else(|| topic_id.clone()),
                domain_tag: domain_tags.remove(&topic_id),
                topic_id: topic_id.clone(),
                first_occurrence_year: dates.first_occurrence,
                first_valid_year: dates.first_valid,
                training_start_year: dates.training_start,
            };
            topics.insert(
                topic_id,
                TopicRecord {
                    meta,
                    counts: series,
                    points,
                    patents: topic_patents,
                    has_embedding,
                },
            );
        }
        Ok(CorpusStore {
            topics,
            global,
            embeddings,
            convention,
        })
    }
}
