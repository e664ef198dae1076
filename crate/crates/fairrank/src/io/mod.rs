//! File formats: corpus, queries, group definitions, runs, query sequences,
//! and evaluation reports.
//!
//! All loaders attach path and line numbers to their errors. Non-fatal
//! observations (odd but legal input) come back as [`LoadWarning`]s instead
//! of being printed, so callers decide where they go. All writers go through
//! [`atomic_write`]: content is staged in a temporary file and renamed into
//! place, so a crashed or concurrent invocation never leaves a half-written
//! file behind.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub mod corpus;
pub mod groups;
pub mod queries;
pub mod report;
pub mod runs;
pub mod sequences;
pub mod validate;

pub use corpus::load_corpus;
pub use groups::{group_from_thresholds, hindex_groups, load_groups, load_index_table, write_groups};
pub use queries::load_queries;
pub use report::{write_report_csv, write_report_json, ReportRow};
pub use runs::{load_run, write_run};
pub use sequences::{load_sequences, write_sequences};
pub use validate::{validate_run, ValidationReport, Violation};

/// JSON ids may arrive as strings or numbers; both become opaque strings.
#[derive(Debug, serde::Deserialize)]
#[serde(untagged)]
pub(crate) enum IdValue {
    Text(String),
    Number(u64),
}

impl IdValue {
    pub(crate) fn into_string(self) -> String {
        match self {
            IdValue::Text(s) => s,
            IdValue::Number(n) => n.to_string(),
        }
    }
}

/// Parses a `<sequence id>.<query number>` pair.
pub(crate) fn parse_q_num(text: &str) -> Option<(u64, u64)> {
    fn digits(s: &str) -> Option<u64> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        s.parse().ok()
    }
    let (seq, num) = text.split_once('.')?;
    Some((digits(seq)?, digits(num)?))
}

/// Something worth telling the user about a file that still loaded fine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadWarning {
    pub path: PathBuf,
    pub line: Option<u64>,
    pub message: String,
}

impl std::fmt::Display for LoadWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.path.display(), line, self.message),
            None => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

/// Opens a text file for line-oriented reading, transparently decompressing
/// gzip. Detection is by magic bytes, not file extension.
pub fn open_text(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let head = reader.fill_buf().map_err(|e| Error::io(path, e))?;
    if head.len() >= 2 && head[..2] == GZIP_MAGIC {
        let decoder = flate2::bufread::GzDecoder::new(reader);
        Ok(Box::new(BufReader::new(decoder)))
    } else {
        Ok(Box::new(reader))
    }
}

/// Iterates non-blank lines of a text file with 1-based line numbers.
pub(crate) fn for_each_line(
    path: &Path,
    mut f: impl FnMut(u64, &str) -> Result<()>,
) -> Result<()> {
    let reader = open_text(path)?;
    for (index, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        f(index as u64 + 1, &line)?;
    }
    Ok(())
}

/// Writes a file atomically: the content is produced into a temporary file
/// in the destination directory, flushed, and renamed over the target.
pub fn atomic_write(
    path: &Path,
    write: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut temp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir),
        None => tempfile::NamedTempFile::new_in("."),
    }
    .map_err(|e| Error::io(path, e))?;
    write(temp.as_file_mut())?;
    temp.as_file_mut()
        .flush()
        .map_err(|e| Error::io(path, e))?;
    temp.persist(path)
        .map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Reads all of a file into a string (plain or gzip).
pub fn read_to_string(path: &Path) -> Result<String> {
    let mut out = String::new();
    open_text(path)?
        .read_to_string(&mut out)
        .map_err(|e| Error::io(path, e))?;
    Ok(out)
}
