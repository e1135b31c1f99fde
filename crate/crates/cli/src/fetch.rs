//! Yearly patent counts from a PatentsView-style search API.
//!
//! One request per year. A year's count is the response's `total_hits`
//! when present, otherwise the number of returned patents dated in that
//! year. Requests are spaced at least [`MIN_INTERVAL`] apart and retried
//! [`RETRIES`] times.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::thread;
use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::json;
use thiserror::Error;
use trendcast::corpus::canonical_topic_id;

pub const DEFAULT_ENDPOINT: &str = "https://search.patentsview.org/api/v1/patent/";
pub const MIN_INTERVAL: Duration = Duration::from_secs(1);
pub const RETRIES: usize = 3;

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("year {year}: request failed after {attempts} attempts (last status {})", status.map_or_else(|| "none".to_string(), |s| s.to_string()))]
    Http {
        year: i32,
        attempts: usize,
        status: Option<u16>,
        message: String,
    },
    #[error("year {year}: unreadable response: {message}")]
    Parse { year: i32, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: std::path::PathBuf,
        #[source]
        source: csv::Error,
    },
}

#[derive(Debug, Deserialize)]
struct Page {
    #[serde(default)]
    patents: Option<Vec<PatentRecord>>,
    #[serde(default)]
    total_hits: Option<u64>,
}

#[derive(Debug, Deserialize)]
struct PatentRecord {
    #[serde(default)]
    patent_date: Option<String>,
}

fn year_count(page: &Page, year: i32) -> u64 {
    if let Some(total) = page.total_hits {
        return total;
    }
    let prefix = format!("{year}-");
    page.patents
        .iter()
        .flatten()
        .filter(|p| p.patent_date.as_deref().is_some_and(|d| d.starts_with(&prefix)))
        .count() as u64
}

fn year_query(query: &str, year: i32) -> String {
    json!({"_and": [
        {"_text_any": {"patent_abstract": query}},
        {"_gte": {"patent_date": format!("{year}-01-01")}},
        {"_lte": {"patent_date": format!("{year}-12-31")}},
    ]})
    .to_string()
}

pub struct PatentClient {
    agent: ureq::Agent,
    endpoint: String,
    api_key: Option<String>,
    last_request: Option<Instant>,
}

impl PatentClient {
    pub fn new(endpoint: &str, api_key: Option<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .new_agent();
        Self {
            agent,
            endpoint: endpoint.to_string(),
            api_key,
            last_request: None,
        }
    }

    fn wait_turn(&mut self) {
        if let Some(last) = self.last_request {
            let elapsed = last.elapsed();
            if elapsed < MIN_INTERVAL {
                thread::sleep(MIN_INTERVAL - elapsed);
            }
        }
        self.last_request = Some(Instant::now());
    }

    fn attempt(&mut self, query: &str, year: i32) -> Result<String, (Option<u16>, String)> {
        self.wait_turn();
        let mut request = self
            .agent
            .get(&self.endpoint)
            .query("q", year_query(query, year))
            .query("f", r#"["patent_id","patent_date"]"#)
            .query("o", r#"{"size":1000}"#);
        if let Some(key) = &self.api_key {
            request = request.header("X-Api-Key", key);
        }
        let mut response = request.call().map_err(|e| (None, e.to_string()))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| (Some(status), e.to_string()))?;
        if (200..300).contains(&status) {
            Ok(body)
        } else {
            Err((Some(status), body))
        }
    }

    /// Patent count for one year.
    pub fn count(&mut self, query: &str, year: i32) -> Result<u64, FetchError> {
        let mut last = (None, String::new());
        for attempt in 0..=RETRIES {
            match self.attempt(query, year) {
                Ok(body) => {
                    let page: Page = serde_json::from_str(&body).map_err(|e| FetchError::Parse {
                        year,
                        message: e.to_string(),
                    })?;
                    return Ok(year_count(&page, year));
                }
                Err(failure) => {
                    log::warn!("year {year}, attempt {}: {:?} {}", attempt + 1, failure.0, failure.1);
                    last = failure;
                }
            }
        }
        Err(FetchError::Http {
            year,
            attempts: RETRIES + 1,
            status: last.0,
            message: last.1,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FetchSummary {
    pub fetched: usize,
    pub skipped: usize,
}

/// Years already recorded for `topic_id` in an existing patents file.
fn existing_years(path: &Path, topic_id: &str) -> Result<BTreeSet<i32>, FetchError> {
    let csv_err = |source| FetchError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut years = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        if record.get(0).map(canonical_topic_id).as_deref() == Some(topic_id) {
            if let Some(year) = record.get(1).and_then(|y| y.trim().parse().ok()) {
                years.insert(year);
            }
        }
    }
    Ok(years)
}

/// Appends one `topic,year,patent_count` row per missing year in
/// `from..=to`, flushing after each so an interrupted run can resume.
pub fn fetch_into(
    client: &mut PatentClient,
    query: &str,
    topic: &str,
    from: i32,
    to: i32,
    out: &Path,
) -> Result<FetchSummary, FetchError> {
    let io = |source| FetchError::Io {
        path: out.to_path_buf(),
        source,
    };
    let topic_id = canonical_topic_id(topic);
    let exists = out.exists();
    let done = if exists {
        existing_years(out, &topic_id)?
    } else {
        BTreeSet::new()
    };
    let mut file: File = OpenOptions::new().create(true).append(true).open(out).map_err(io)?;
    if !exists {
        writeln!(file, "topic,year,patent_count").map_err(io)?;
    }
    let mut summary = FetchSummary { fetched: 0, skipped: 0 };
    for year in from..=to {
        if done.contains(&year) {
            summary.skipped += 1;
            continue;
        }
        let count = client.count(query, year)?;
        let mut row = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        row.write_record([topic, &year.to_string(), &count.to_string()])
            .map_err(|source| FetchError::Csv {
                path: out.to_path_buf(),
                source,
            })?;
        file.write_all(&row.into_inner().expect("in-memory writer")).map_err(io)?;
        file.flush().map_err(io)?;
        summary.fetched += 1;
    }
    Ok(summary)
}
