use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{
    CorpusBuilder, CorpusError, CorpusStore, EmbeddingTable, GlobalYearStats, Result, RowOrigin,
    WindowConvention,
};

pub(crate) const COUNTS_FILE: &str = "topic_counts.csv";
pub(crate) const GLOBAL_FILE: &str = "global_stats.csv";
pub(crate) const PATENTS_FILE: &str = "patents.csv";
pub(crate) const EMBEDDINGS_FILE: &str = "embeddings.csv";

const COUNTS_HEADER: [&str; 4] = ["topic", "year", "publications", "review_publications"];
const GLOBAL_HEADER: [&str; 4] = [
    "year",
    "medline_total",
    "us_publication_fraction",
    "patents_total",
];
const PATENTS_HEADER: [&str; 3] = ["topic", "year", "patent_count"];

/// Locations of the corpus input files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusPaths {
    pub counts: PathBuf,
    pub global: PathBuf,
    pub patents: PathBuf,
    pub embeddings: Option<PathBuf>,
}

impl CorpusPaths {
    /// Standard file names inside one directory; `embeddings.csv` is picked
    /// up only if present.
    pub fn in_dir(dir: &Path) -> Self {
        let embeddings = dir.join(EMBEDDINGS_FILE);
        Self {
            counts: dir.join(COUNTS_FILE),
            global: dir.join(GLOBAL_FILE),
            patents: dir.join(PATENTS_FILE),
            embeddings: embeddings.exists().then_some(embeddings),
        }
    }
}

/// Reads and validates the corpus files.
pub fn ingest(paths: &CorpusPaths, convention: WindowConvention) -> Result<CorpusStore> {
    let mut builder = CorpusBuilder::new().window_convention(convention);

    read_rows(&paths.global, &GLOBAL_HEADER, |origin, row| {
        let year = row.parse(origin, 1)?;
        let medline_total = row.parse(origin, 2)?;
        let us_publication_fraction: f64 = row.parse(origin, 3)?;
        let patents_total = row.parse(origin, 4)?;
        builder.add_global_at(
            origin,
            GlobalYearStats {
                year,
                medline_total,
                us_publication_fraction,
                patents_total,
            },
        )
    })?;

    read_rows(&paths.counts, &COUNTS_HEADER, |origin, row| {
        let topic = row.text(origin, 1)?;
        let year = row.parse(origin, 2)?;
        let publications = row.parse(origin, 3)?;
        let review = row.parse(origin, 4)?;
        builder.add_count_at(origin, topic, year, publications, review)
    })?;

    read_rows(&paths.patents, &PATENTS_HEADER, |origin, row| {
        let topic = row.text(origin, 1)?;
        let year = row.parse(origin, 2)?;
        let count = row.parse(origin, 3)?;
        builder.add_patents_at(origin, topic, year, count)
    })?;

    if let Some(path) = &paths.embeddings {
        builder.set_embeddings(read_embeddings(path)?);
    }

    builder.build()
}

/// One parsed CSV row with its header, for column-aware errors.
struct Row<'a> {
    header: &'a [String],
    record: &'a csv::StringRecord,
}

impl Row<'_> {
    /// `column` is 1-based.
    fn text(&self, origin: RowOrigin<'_>, column: usize) -> Result<&str> {
        let value = self.record.get(column - 1).unwrap_or("").trim();
        if value.is_empty() {
            return Err(origin.malformed(self.name(column), "empty field".into()));
        }
        Ok(value)
    }

    fn parse<T: FromStr>(&self, origin: RowOrigin<'_>, column: usize) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.text(origin, column)?;
        raw.parse().map_err(|e: T::Err| {
            origin.malformed(self.name(column), format!("cannot parse `{raw}`: {e}"))
        })
    }

    fn name(&self, column: usize) -> &str {
        self.header.get(column - 1).map_or("?", String::as_str)
    }
}

fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CorpusError::Io {
        file: path.display().to_string(),
        source: e,
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file))
}

fn read_header(path: &Path, reader: &mut csv::Reader<File>) -> Result<Vec<String>> {
    let file = path.display().to_string();
    let header = reader.headers().map_err(|e| CorpusError::Csv {
        file: file.clone(),
        source: e,
    })?;
    Ok(header.iter().map(|h| h.trim().to_string()).collect())
}

fn read_rows<F>(path: &Path, expected: &[&str], mut on_row: F) -> Result<()>
where
    F: FnMut(RowOrigin<'_>, &Row<'_>) -> Result<()>,
{
    let file = path.display().to_string();
    let mut reader = open_reader(path)?;
    let header = read_header(path, &mut reader)?;
    for (i, want) in expected.iter().enumerate() {
        if header.get(i).map(String::as_str) != Some(*want) {
            return Err(CorpusError::Malformed {
                file,
                line: 1,
                column: header.get(i).cloned().unwrap_or_default(),
                message: format!("expected header `{}`", expected.join(",")),
            });
        }
    }
    if header.len() != expected.len() {
        return Err(CorpusError::Malformed {
            file,
            line: 1,
            column: header.last().cloned().unwrap_or_default(),
            message: format!("expected header `{}`", expected.join(",")),
        });
    }

    let mut record = csv::StringRecord::new();
    loop {
        let more = reader.read_record(&mut record).map_err(|e| CorpusError::Csv {
            file: file.clone(),
            source: e,
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        let origin = RowOrigin { file: &file, line };
        if record.len() != expected.len() {
            return Err(origin.malformed(
                header.get(record.len().min(header.len().saturating_sub(1))).map_or("?", |s| s),
                format!("expected {} fields, found {}", expected.len(), record.len()),
            ));
        }
        on_row(origin, &Row { header: &header, record: &record })?;
    }
    Ok(())
}

fn read_embeddings(path: &Path) -> Result<EmbeddingTable> {
    let file = path.display().to_string();
    let mut reader = open_reader(path)?;
    let header = read_header(path, &mut reader)?;
    if header.first().map(String::as_str) != Some("topic") || header.len() < 2 {
        return Err(CorpusError::Malformed {
            file,
            line: 1,
            column: header.first().cloned().unwrap_or_default(),
            message: "expected header `topic,e0,e1,...`".into(),
        });
    }
    for (i, name) in header.iter().enumerate().skip(1) {
        if *name != format!("e{}", i - 1) {
            return Err(CorpusError::Malformed {
                file,
                line: 1,
                column: name.clone(),
                message: format!("expected `e{}`", i - 1),
            });
        }
    }
    let dim = header.len() - 1;
    let mut vectors = BTreeMap::new();
    let mut record = csv::StringRecord::new();
    while reader.read_record(&mut record).map_err(|e| CorpusError::Csv {
        file: file.clone(),
        source: e,
    })? {
        let line = record.position().map_or(0, |p| p.line());
        let origin = RowOrigin { file: &file, line };
        if record.len() != dim + 1 {
            return Err(origin.malformed(
                "topic",
                format!("expected {} fields, found {}", dim + 1, record.len()),
            ));
        }
        let row = Row { header: &header, record: &record };
        let topic = super::canonical_topic_id(row.text(origin, 1)?);
        let mut v = Vec::with_capacity(dim);
        for col in 2..=dim + 1 {
            let x: f64 = row.parse(origin, col)?;
            if !x.is_finite() {
                return Err(origin.malformed(row.name(col), format!("non-finite value {x}")));
            }
            v.push(x);
        }
        if vectors.insert(topic.clone(), v).is_some() {
            return Err(CorpusError::DuplicateRecord {
                file: file.clone(),
                line,
                topic,
                year: 0,
            });
        }
    }
    Ok(EmbeddingTable { dim, vectors })
}
