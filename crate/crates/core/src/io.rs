//! Sample CSV and versioned JSON documents.
//!
//! Samples are CSV with header `x0,...,x{d-1},y`. Rule, class and oracle
//! documents are the JSON form of the corresponding type plus an optional
//! `schema_version` field (currently 1).

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LabeledSample;

pub const SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// `T` with a `schema_version` field alongside its own fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Document<T> {
    pub fn new(body: T) -> Self {
        Document {
            schema_version: SCHEMA_VERSION,
            body,
        }
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn parse_document<T: DeserializeOwned>(text: &str, context: &str) -> Result<T> {
    let doc: Document<T> = serde_json::from_str(text).map_err(|source| Error::Json {
        context: context.to_string(),
        source,
    })?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::InvalidArgument(format!(
            "{context}: unsupported schema_version {}, expected {SCHEMA_VERSION}",
            doc.schema_version
        )));
    }
    Ok(doc.body)
}

pub fn read_document<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse_document(&read_text(path)?, &path.display().to_string())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn parse_sample_csv(text: &str, context: &str) -> Result<LabeledSample> {
    let csv_err = |source| Error::Csv {
        context: context.to_string(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_err)?.clone();
    let d = header.len().saturating_sub(1);
    let expected: Vec<String> = (0..d).map(|k| format!("x{k}")).chain(["y".to_string()]).collect();
    if d == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::InvalidSample(format!(
            "{context}: header must be x0,...,x{{d-1}},y, got {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let values = record
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidSample(format!("{context}: row {}: {e}", line + 1)))?;
        features.extend_from_slice(&values[..d]);
        labels.push(values[d]);
    }
    LabeledSample::from_flat(d, features, labels)
}

pub fn read_sample_csv(path: &Path) -> Result<LabeledSample> {
    parse_sample_csv(&read_text(path)?, &path.display().to_string())
}

/// CSV text of a sample, 17 significant digits per value.
pub fn sample_to_csv(sample: &LabeledSample) -> String {
    let mut out: String = (0..sample.dim()).map(|k| format!("x{k},")).collect();
    out.push_str("y\n");
    for i in 0..sample.len() {
        for v in sample.x(i) {
            out.push_str(&format!("{v:.16e},"));
        }
        out.push_str(&format!("{:.16e}\n", sample.y(i)));
    }
    out
}
