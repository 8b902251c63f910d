//! Versioned delimited-text tables.
//!
//! Every table starts with a `# format-version=N` comment line followed by a
//! header row.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub const TABLE_FORMAT_VERSION: u32 = 1;

fn version_line() -> String {
    format!("# format-version={TABLE_FORMAT_VERSION}\n")
}

/// Serializes rows into CSV text, including the version line.
pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::format("<memory>", e.to_string()))?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| Error::format("<memory>", e.to_string()))?)
        .expect("csv output is utf-8");
    Ok(version_line() + &body)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let text = csv_string(rows)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Appends rows to a table, writing the version line and header first when
/// the file does not exist yet.
pub fn append_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let fresh = !path.exists();
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    if fresh {
        file.write_all(version_line().as_bytes()).map_err(|e| Error::io(path, e))?;
    }
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for r in rows {
        w.serialize(r).map_err(|e| Error::format(path, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Checks the leading `# format-version=` line.
pub fn check_version(path: &Path) -> Result<()> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut first = String::new();
    BufReader::new(file)
        .read_line(&mut first)
        .map_err(|e| Error::io(path, e))?;
    let v = first
        .trim()
        .strip_prefix("# format-version=")
        .ok_or_else(|| Error::format(path, "missing format-version line"))?;
    if v != TABLE_FORMAT_VERSION.to_string() {
        return Err(Error::format(path, format!("unsupported format version {v}")));
    }
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    check_version(path)?;
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::format(path, e.to_string()))?;
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| Error::format(path, format!("row {}: {e}", i + 1))))
        .collect()
}
