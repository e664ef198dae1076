//! Group-definition files and index-based group construction.
//!
//! A group file maps author ids to group ids, either as CSV with the header
//! `author_id,group_id` or as JSON-lines objects with the same keys; the
//! format is sniffed from the content. Repeated consistent rows are fine;
//! conflicting rows are an error naming the author and both lines.
//!
//! Groups can also be derived from a per-author scalar index (h-index or
//! similar) by threshold bucketing; [`hindex_groups`] hard-codes the
//! evaluation buckets h<5, 5≤h<15, 15≤h<30, h≥30.

use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{AuthorId, GroupAssignment, GroupId};

#[derive(Debug, Deserialize)]
struct RawRow {
    author_id: String,
    group_id: String,
}

/// Loads a group assignment from CSV or JSON-lines.
pub fn load_groups(path: &Path) -> Result<GroupAssignment> {
    let content = crate::io::read_to_string(path)?;
    let rows = if content.trim_start().starts_with('{') {
        jsonl_rows(path, &content)?
    } else {
        csv_rows(path, &content)?
    };

    let mut first_seen: HashMap<AuthorId, (GroupId, u64)> = HashMap::new();
    let mut builder = GroupAssignment::builder();
    for (line, raw) in rows {
        let fail = |e: Error| Error::malformed(path, line, e.to_string());
        let author = AuthorId::new(raw.author_id).map_err(fail)?;
        let group = GroupId::new(raw.group_id).map_err(fail)?;
        match first_seen.get(&author) {
            Some((existing, first_line)) if *existing != group => {
                return Err(Error::ConflictingGroupRow {
                    path: path.to_path_buf(),
                    author,
                    existing: existing.clone(),
                    new: group,
                    first_line: *first_line,
                    line,
                });
            }
            Some(_) => {}
            None => {
                first_seen.insert(author.clone(), (group.clone(), line));
                builder
                    .assign(author, group)
                    .expect("conflicts handled above");
            }
        }
    }
    builder.build()
}

fn jsonl_rows(path: &Path, content: &str) -> Result<Vec<(u64, RawRow)>> {
    let mut rows = Vec::new();
    for (index, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = index as u64 + 1;
        let raw: RawRow = serde_json::from_str(line)
            .map_err(|e| Error::malformed(path, line_no, e.to_string()))?;
        rows.push((line_no, raw));
    }
    Ok(rows)
}

fn csv_rows(path: &Path, content: &str) -> Result<Vec<(u64, RawRow)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(content.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::malformed(path, 1, e.to_string()))?
        .clone();
    if headers.iter().ne(["author_id", "group_id"]) {
        return Err(Error::malformed(
            path,
            1,
            format!(
                "expected header author_id,group_id, found {}",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, csv::Position::line);
            Error::malformed(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, csv::Position::line);
        rows.push((
            line,
            RawRow {
                author_id: record.get(0).unwrap_or("").to_string(),
                group_id: record.get(1).unwrap_or("").to_string(),
            },
        ));
    }
    Ok(rows)
}

/// Writes a group assignment as canonical CSV, authors sorted.
pub fn write_groups(path: &Path, groups: &GroupAssignment) -> Result<()> {
    crate::io::atomic_write(path, |w| {
        let mut writer = csv::Writer::from_writer(w);
        writer
            .write_record(["author_id", "group_id"])
            .map_err(|e| Error::malformed(path, 0, e.to_string()))?;
        for (author, group) in groups.iter() {
            writer
                .write_record([author.as_str(), group.as_str()])
                .map_err(|e| Error::malformed(path, 0, e.to_string()))?;
        }
        writer
            .flush()
            .map_err(|e| Error::io(path, e))?;
        Ok(())
    })
}

/// Loads a per-author integer index table: CSV whose first column is
/// `author_id` and whose second column holds the index value. Repeated
/// consistent rows are deduplicated; conflicting values are an error.
pub fn load_index_table(path: &Path) -> Result<Vec<(AuthorId, i64)>> {
    let content = crate::io::read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(content.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::malformed(path, 1, e.to_string()))?
        .clone();
    if headers.len() != 2 || headers.get(0) != Some("author_id") {
        return Err(Error::malformed(
            path,
            1,
            "expected a two-column CSV with first column author_id",
        ));
    }
    let mut seen: HashMap<AuthorId, (i64, u64)> = HashMap::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, csv::Position::line);
            Error::malformed(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, csv::Position::line);
        let author = AuthorId::new(record.get(0).unwrap_or(""))
            .map_err(|e| Error::malformed(path, line, e.to_string()))?;
        let value: i64 = record
            .get(1)
            .unwrap_or("")
            .parse()
            .map_err(|e| Error::malformed(path, line, format!("index value: {e}")))?;
        match seen.get(&author) {
            Some((existing, first_line)) if *existing != value => {
                return Err(Error::malformed(
                    path,
                    line,
                    format!(
                        "conflicting values for author {author}: {existing} (line {first_line}) vs {value}"
                    ),
                ));
            }
            Some(_) => {}
            None => {
                seen.insert(author.clone(), (value, line));
                rows.push((author, value));
            }
        }
    }
    Ok(rows)
}

fn bucket_labels(prefix: &str, thresholds: &[i64]) -> Vec<String> {
    let mut labels = Vec::with_capacity(thresholds.len() + 1);
    labels.push(format!("{prefix}<{}", thresholds[0]));
    for pair in thresholds.windows(2) {
        labels.push(format!("{}≤{prefix}<{}", pair[0], pair[1]));
    }
    labels.push(format!("{prefix}≥{}", thresholds[thresholds.len() - 1]));
    labels
}

/// Buckets authors into groups by thresholding a non-negative integer index.
///
/// `thresholds` must be non-empty and strictly increasing; they produce
/// len+1 groups labeled `<t1`, `t1≤x<t2`, …, `≥tk` with `prefix` naming the
/// index. Every bucket is declared in the universe even when empty.
pub fn group_from_thresholds(
    values: impl IntoIterator<Item = (AuthorId, i64)>,
    prefix: &str,
    thresholds: &[i64],
) -> Result<GroupAssignment> {
    if thresholds.is_empty() || thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidThresholds);
    }
    let labels: Vec<GroupId> = bucket_labels(prefix, thresholds)
        .into_iter()
        .map(GroupId::new)
        .collect::<Result<_>>()?;

    let mut builder = GroupAssignment::builder();
    for label in &labels {
        builder.declare_group(label.clone());
    }
    for (author, value) in values {
        if value < 0 {
            return Err(Error::NegativeIndexValue { author, value });
        }
        let bucket = thresholds.partition_point(|t| *t <= value);
        builder.assign(author, labels[bucket].clone())?;
    }
    builder.build()
}

/// The track's evaluation grouping: h<5, 5≤h<15, 15≤h<30, h≥30.
pub fn hindex_groups(
    values: impl IntoIterator<Item = (AuthorId, i64)>,
) -> Result<GroupAssignment> {
    group_from_thresholds(values, "h", &[5, 15, 30])
}
