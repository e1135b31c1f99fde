//! Seeded synthetic corpora with known structure.
//!
//! [`leading_indicator_corpus`] draws topics whose popularity follows an
//! AR(1) process around a topic mean plus a term proportional to the topic's
//! patent count two years earlier. Patents arrive in slow waves. Some topics
//! are sent into a decline at a chosen year; three years before it their
//! review share jumps, so reviews announce the decline.
//!
//! [`persistent_corpus`] holds every topic's popularity constant.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusBuilder, CorpusError, CorpusStore, EmbeddingTable, GlobalYearStats, POPULARITY_SCALE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub topics: usize,
    pub first_year: i32,
    pub last_year: i32,
    pub seed: u64,
    /// Width of the random topic embeddings; 0 for none.
    pub embedding_dim: usize,
    /// AR(1) coefficient of the latent popularity.
    pub phi: f64,
    /// Popularity added per patent filed two years earlier.
    pub patent_effect: f64,
    /// Share of topics that decline.
    pub decline_share: f64,
    /// Review share before a decline, against a normal share of about 0.08.
    pub excess_review_share: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            topics: 50,
            first_year: 1975,
            last_year: 2019,
            seed: 42,
            embedding_dim: 0,
            phi: 0.8,
            patent_effect: 1.0,
            decline_share: 0.4,
            excess_review_share: 0.35,
        }
    }
}

/// What the generator did, for checking models against it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTruth {
    /// First year of the decline, for declining topics.
    pub decline_start: BTreeMap<String, i32>,
    /// Popularity by topic and year, before rounding to counts.
    pub popularity: BTreeMap<String, BTreeMap<i32, f64>>,
}

pub const PATENT_LEAD_YEARS: i32 = 2;
pub const REVIEW_LEAD_YEARS: i32 = 3;

fn medline_total(year: i32, first: i32, last: i32) -> u64 {
    let span = f64::from((last - first).max(1));
    (274_000.0 + 500_000.0 * f64::from(year - first) / span).round() as u64
}

fn topic_name(i: usize) -> String {
    format!("topic_{i:03}")
}

/// Patent wave: linear rise, plateau, linear fall.
fn wave(t: i32, start: i32, amplitude: f64) -> f64 {
    let d = f64::from(t - start);
    if d < 0.0 {
        0.0
    } else if d < 6.0 {
        amplitude * d / 6.0
    } else if d < 10.0 {
        amplitude
    } else if d < 16.0 {
        amplitude * (16.0 - d) / 6.0
    } else {
        0.0
    }
}

pub fn leading_indicator_corpus(config: &SyntheticConfig) -> Result<(CorpusStore, SyntheticTruth), CorpusError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let (first, last) = (config.first_year, config.last_year);
    let mut builder = CorpusBuilder::new();
    let mut truth = SyntheticTruth {
        decline_start: BTreeMap::new(),
        popularity: BTreeMap::new(),
    };
    let mut patent_totals: BTreeMap<i32, u64> = BTreeMap::new();

    for i in 0..config.topics {
        let name = topic_name(i);
        let mean = rng.random_range(40.0..160.0);
        let noise = 0.08 * mean;
        let base_patents = rng.random_range(0.0..5.0);
        let waves: Vec<(i32, f64)> = (0..rng.random_range(1..=2))
            .map(|_| (rng.random_range(first - 5..last - 5), rng.random_range(20.0..80.0)))
            .collect();
        let decline = rng
            .random_bool(config.decline_share)
            .then(|| rng.random_range(first + 15..=last - 5));
        if let Some(d) = decline {
            truth.decline_start.insert(name.clone(), d);
        }

        let patents = |t: i32| -> f64 { base_patents + waves.iter().map(|&(s, a)| wave(t, s, a)).sum::<f64>() };
        let mut latent = mean;
        let mut series = BTreeMap::new();
        for t in first..=last {
            latent = mean + config.phi * (latent - mean) + noise * unit.sample(&mut rng);
            let mut pop = latent + config.patent_effect * patents(t - PATENT_LEAD_YEARS);
            if let Some(d) = decline {
                if t >= d {
                    pop *= (-0.3 * f64::from(t - d + 1)).exp().max(0.15);
                }
            }
            let pop = pop.max(1.0);
            series.insert(t, pop);

            let total = medline_total(t, first, last);
            let publications = (pop * total as f64 / POPULARITY_SCALE).round().max(1.0) as u64;
            let in_review_window = decline.is_some_and(|d| (d - REVIEW_LEAD_YEARS..=d + 1).contains(&t));
            let share = if in_review_window {
                config.excess_review_share
            } else {
                0.08 + 0.02 * rng.random_range(-1.0..1.0)
            };
            let reviews = (publications as f64 * share).round() as u64;
            builder.add_count(&name, t, publications, reviews.min(publications))?;

            let filed = (patents(t) + 2.0 * unit.sample(&mut rng)).round().max(0.0) as u64;
            builder.add_patents(&name, t, filed)?;
            *patent_totals.entry(t).or_default() += filed;
        }
        truth.popularity.insert(name, series);
    }

    for t in first..=last {
        let progress = f64::from(t - first) / f64::from((last - first).max(1));
        builder.add_global(GlobalYearStats {
            year: t,
            medline_total: medline_total(t, first, last),
            us_publication_fraction: 0.45 - 0.15 * progress,
            patents_total: 10 * patent_totals.get(&t).copied().unwrap_or(0) + 1000,
        })?;
    }

    if config.embedding_dim > 0 {
        let vectors = (0..config.topics)
            .map(|i| {
                let v = (0..config.embedding_dim).map(|_| unit.sample(&mut rng)).collect();
                (topic_name(i), v)
            })
            .collect();
        builder.set_embeddings(EmbeddingTable {
            dim: config.embedding_dim,
            vectors,
        });
    }
    Ok((builder.build()?, truth))
}

/// Every topic keeps the same popularity every year.
pub fn persistent_corpus(topics: usize, first_year: i32, last_year: i32, seed: u64) -> Result<CorpusStore, CorpusError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut builder = CorpusBuilder::new();
    for t in first_year..=last_year {
        builder.add_global(GlobalYearStats {
            year: t,
            medline_total: 500_000,
            us_publication_fraction: 0.4,
            patents_total: 10_000,
        })?;
    }
    for i in 0..topics {
        let publications = rng.random_range(50..2000u64);
        let reviews = publications / 10;
        for t in first_year..=last_year {
            builder.add_count(&topic_name(i), t, publications, reviews)?;
        }
    }
    builder.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::correlation::{pooled_correlation, Indicator};

    #[test]
    fn shape_and_determinism() {
        let config = SyntheticConfig::default();
        let (a, truth) = leading_indicator_corpus(&config).unwrap();
        let (b, _) = leading_indicator_corpus(&config).unwrap();
        assert_eq!(a.len(), 50);
        assert_eq!(a.last_year(), Some(2019));
        assert_eq!(a.global_stats().count(), 45);
        let mut out_a = Vec::new();
        let mut out_b = Vec::new();
        a.write_counts_csv(&mut out_a).unwrap();
        b.write_counts_csv(&mut out_b).unwrap();
        assert_eq!(out_a, out_b);
        assert!(!truth.decline_start.is_empty());
    }

    #[test]
    fn popularity_follows_the_generator() {
        let (store, truth) = leading_indicator_corpus(&SyntheticConfig::default()).unwrap();
        for (topic, series) in &truth.popularity {
            for (&year, &pop) in series {
                // Rounding to whole publications moves popularity by < 0.4.
                assert!((store.popularity(topic, year) - pop).abs() < 0.4, "{topic} {year}");
            }
        }
    }

    #[test]
    fn patents_lead_popularity() {
        let (store, _) = leading_indicator_corpus(&SyntheticConfig::default()).unwrap();
        let r = |lag| {
            pooled_correlation(&store, Indicator::Popularity, Indicator::Patents, lag, 1975..=2019)
                .unwrap()
                .r
        };
        assert!(r(PATENT_LEAD_YEARS) > r(0));
        assert!(r(PATENT_LEAD_YEARS) > 0.3);
    }

    #[test]
    fn reviews_rise_before_declines() {
        let (store, truth) = leading_indicator_corpus(&SyntheticConfig::default()).unwrap();
        for (topic, &d) in &truth.decline_start {
            let year = d - REVIEW_LEAD_YEARS;
            let share = store.review_popularity(topic, year) / store.popularity(topic, year);
            assert!(share > 0.3, "{topic} {year} {share}");
        }
    }

    #[test]
    fn persistent_corpus_is_flat() {
        let store = persistent_corpus(5, 1975, 2000, 1).unwrap();
        for topic in store.topic_ids() {
            assert_eq!(store.popularity(topic, 1980), store.popularity(topic, 1999));
        }
    }

    #[test]
    fn embeddings_are_optional() {
        let config = SyntheticConfig {
            embedding_dim: 4,
            topics: 3,
            ..SyntheticConfig::default()
        };
        let (store, _) = leading_indicator_corpus(&config).unwrap();
        assert_eq!(store.embedding_dim(), 4);
        assert!(store.topics_missing_embeddings().is_empty());
    }
}
