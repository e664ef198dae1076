//! Run files: the rankings a system produced, as JSON-lines.
//!
//! Each line is `{"q_num":"<sequence id>.<number>","qid":...,"ranking":
//! [...]}` with the keys in exactly that order. Query numbers are 1-based
//! and must increase strictly within a sequence; a file may carry several
//! sequences. Gaps in the numbering load with a warning (the protocol does
//! not forbid them); duplicates are an error. Writing and loading round-trip
//! byte-identically on canonical files.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{IdValue, LoadWarning};
use crate::model::{DocumentId, QueryId, Ranking, RankingSequence, SequenceEntry};

#[derive(Debug, Deserialize)]
struct RawRecord {
    q_num: String,
    qid: IdValue,
    ranking: Vec<IdValue>,
}

#[derive(Debug, Serialize)]
struct CanonicalRecord<'a> {
    q_num: String,
    qid: &'a str,
    ranking: Vec<&'a str>,
}

/// Loads a run file into one [`RankingSequence`] per sequence id, sorted by
/// sequence id. Non-contiguous numbering is reported as a warning.
pub fn load_run(path: &Path) -> Result<(Vec<RankingSequence>, Vec<LoadWarning>)> {
    let mut entries: BTreeMap<u64, Vec<SequenceEntry>> = BTreeMap::new();
    let mut seen: HashMap<(u64, u64), u64> = HashMap::new();

    crate::io::for_each_line(path, |line_no, line| {
        let raw: RawRecord = serde_json::from_str(line)
            .map_err(|e| Error::malformed(path, line_no, e.to_string()))?;
        let fail = |e: Error| Error::malformed(path, line_no, e.to_string());

        let (sequence, number) = crate::io::parse_q_num(&raw.q_num).ok_or_else(|| {
            Error::malformed(
                path,
                line_no,
                format!(
                    "q_num must be \"<sequence id>.<query number>\" with both parts non-negative integers, got \"{}\"",
                    raw.q_num
                ),
            )
        })?;
        if number == 0 {
            return Err(Error::malformed(
                path,
                line_no,
                "query numbers are 1-based; 0 is not a valid position",
            ));
        }
        if let Some(first) = seen.get(&(sequence, number)) {
            return Err(Error::DuplicateRunEntry {
                path: path.to_path_buf(),
                q_num: raw.q_num,
                first_line: *first,
                line: line_no,
            });
        }

        let qid = QueryId::new(raw.qid.into_string()).map_err(fail)?;
        let order = raw
            .ranking
            .into_iter()
            .map(|d| DocumentId::new(d.into_string()))
            .collect::<Result<Vec<_>>>()
            .map_err(fail)?;

        let sequence_entries = entries.entry(sequence).or_default();
        if let Some(last) = sequence_entries.last() {
            if number < last.number {
                return Err(Error::malformed(
                    path,
                    line_no,
                    format!(
                        "query numbers must increase within sequence {sequence}: {} then {number}",
                        last.number
                    ),
                ));
            }
        }
        seen.insert((sequence, number), line_no);
        sequence_entries.push(SequenceEntry {
            number,
            ranking: Ranking::new(qid, order),
        });
        Ok(())
    })?;

    let mut warnings = Vec::new();
    let mut sequences = Vec::with_capacity(entries.len());
    for (sequence_id, seq_entries) in entries {
        let sequence = RankingSequence::new(sequence_id, seq_entries)?;
        if !sequence.is_contiguous() {
            warnings.push(LoadWarning {
                path: path.to_path_buf(),
                line: None,
                message: format!(
                    "sequence {sequence_id}: query numbers are not contiguous from 1"
                ),
            });
        }
        sequences.push(sequence);
    }
    Ok((sequences, warnings))
}

/// Writes sequences in the canonical run format (atomic).
pub fn write_run(path: &Path, sequences: &[RankingSequence]) -> Result<()> {
    crate::io::atomic_write(path, |w| {
        for sequence in sequences {
            for entry in sequence.entries() {
                let record = CanonicalRecord {
                    q_num: format!("{}.{}", sequence.sequence_id(), entry.number),
                    qid: entry.qid().as_str(),
                    ranking: entry.ranking.order().iter().map(DocumentId::as_str).collect(),
                };
                let json = serde_json::to_string(&record)
                    .map_err(|e| Error::malformed(path, 0, e.to_string()))?;
                writeln!(w, "{json}").map_err(|e| Error::io(path, e))?;
            }
        }
        Ok(())
    })
}
