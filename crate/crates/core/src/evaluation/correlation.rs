//! Lagged Pearson correlation between yearly series.

use std::fmt;
use std::io::Write;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusStore;
use crate::scalar::Scalar;

/// Minimum number of overlapping points for a defined coefficient.
pub const MIN_OVERLAP: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub n_overlap: usize,
}

/// Pearson r over pairs skipping any pair with a NaN.
///
/// `None` with fewer than [`MIN_OVERLAP`] pairs or zero variance.
pub fn pearson<T: Scalar>(a: &[T], b: &[T]) -> Option<Correlation> {
    let pairs: Vec<(f64, f64)> = a
        .iter()
        .zip(b)
        .filter(|(x, y)| !x.is_nan() && !y.is_nan())
        .map(|(x, y)| (x.as_f64(), y.as_f64()))
        .collect();
    let n = pairs.len();
    if n < MIN_OVERLAP {
        return None;
    }
    let ma = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let mb = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for &(x, y) in &pairs {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    let constant = |i: usize| pairs.iter().all(|p| [p.0, p.1][i] == [pairs[0].0, pairs[0].1][i]);
    if saa <= 0.0 || sbb <= 0.0 || constant(0) || constant(1) {
        return None;
    }
    Some(Correlation {
        r: (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0),
        n_overlap: n,
    })
}

/// Correlation of `a(t)` with `b(t - lag)` for series indexed by the same
/// years. A positive lag pairs `a` with `b`'s past, so `b` leads.
pub fn pearson_lagged<T: Scalar>(a: &[T], b: &[T], lag: i64) -> Option<Correlation> {
    let (mut xa, mut xb) = (Vec::new(), Vec::new());
    for t in 0..a.len() as i64 {
        let s = t - lag;
        if s >= 0 && s < b.len() as i64 {
            xa.push(a[t as usize]);
            xb.push(b[s as usize]);
        }
    }
    pearson(&xa, &xb)
}

/// A yearly per-topic series read from the corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    Popularity,
    Publications,
    ReviewPopularity,
    ResearchPopularity,
    Patents,
}

impl Indicator {
    pub fn as_str(self) -> &'static str {
        match self {
            Indicator::Popularity => "popularity",
            Indicator::Publications => "publications",
            Indicator::ReviewPopularity => "review_popularity",
            Indicator::ResearchPopularity => "research_popularity",
            Indicator::Patents => "patents",
        }
    }

    pub fn value(self, store: &CorpusStore, topic: &str, year: i32) -> f64 {
        match self {
            Indicator::Popularity => store.popularity(topic, year),
            Indicator::Publications => store.publications(topic, year) as f64,
            Indicator::ReviewPopularity => store.review_popularity(topic, year),
            Indicator::ResearchPopularity => store.research_popularity(topic, year),
            Indicator::Patents => store.patents(topic, year) as f64,
        }
    }

    pub fn series(self, store: &CorpusStore, topic: &str, years: RangeInclusive<i32>) -> Vec<f64> {
        years.map(|y| self.value(store, topic, y)).collect()
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Indicator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Indicator::Popularity,
            Indicator::Publications,
            Indicator::ReviewPopularity,
            Indicator::ResearchPopularity,
            Indicator::Patents,
        ]
        .into_iter()
        .find(|i| i.as_str() == s)
        .ok_or_else(|| format!("unknown indicator `{s}`"))
    }
}

/// Correlation of a topic's `target` series with `indicator` over a range of lags.
///
/// Profile lags count the indicator's offset: `-k` pairs `target(t)` with
/// `indicator(t - k)`, i.e. the indicator leads by `k` years, and `+k` pairs it
/// with `indicator(t + k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationProfile {
    pub topic_id: String,
    pub target: Indicator,
    pub indicator: Indicator,
    pub lags: Vec<i32>,
    pub values: Vec<Option<Correlation>>,
}

impl CorrelationProfile {
    pub fn r_at(&self, lag: i32) -> Option<f64> {
        let i = self.lags.iter().position(|&l| l == lag)?;
        self.values[i].map(|c| c.r)
    }
}

pub fn correlation_profile(
    store: &CorpusStore,
    topic: &str,
    target: Indicator,
    indicator: Indicator,
    lags: &[i32],
    years: RangeInclusive<i32>,
) -> CorrelationProfile {
    let a = target.series(store, topic, years.clone());
    let b = indicator.series(store, topic, years);
    CorrelationProfile {
        topic_id: topic.to_string(),
        target,
        indicator,
        lags: lags.to_vec(),
        values: lags.iter().map(|&l| pearson_lagged(&a, &b, -i64::from(l))).collect(),
    }
}

/// Pearson r over all (topic, year) pairs `(target(t), indicator(t - lag))`
/// with both `t` and `t - lag` inside `years`.
pub fn pooled_correlation(
    store: &CorpusStore,
    target: Indicator,
    indicator: Indicator,
    lag: i32,
    years: RangeInclusive<i32>,
) -> Option<Correlation> {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for topic in store.topic_ids() {
        for t in years.clone() {
            if years.contains(&(t - lag)) {
                a.push(target.value(store, topic, t));
                b.push(indicator.value(store, topic, t - lag));
            }
        }
    }
    pearson(&a, &b)
}

/// `topic,indicator,lag,r,n_overlap`; undefined coefficients are empty.
pub fn write_profiles_csv<W: Write>(profiles: &[CorrelationProfile], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["topic", "indicator", "lag", "r", "n_overlap"])?;
    for p in profiles {
        for (lag, value) in p.lags.iter().zip(&p.values) {
            let (r, n) = match value {
                Some(c) => (c.r.to_string(), c.n_overlap.to_string()),
                None => (String::new(), "0".to_string()),
            };
            w.write_record([p.topic_id.clone(), p.indicator.to_string(), lag.to_string(), r, n])?;
        }
    }
    w.flush()?;
    Ok(())
}
