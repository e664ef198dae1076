//! Query-sequence files: CSV with columns `q_num,qid`, where `q_num` follows
//! the run-file convention `<sequence id>.<position>`. A leading `#` comment
//! records the generator identity and seed so a sequence file is
//! self-describing.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::QueryId;
use crate::seqgen::{QuerySequence, GENERATOR_ID};

/// Writes sequences as canonical CSV with generator metadata (atomic).
pub fn write_sequences(path: &Path, sequences: &[QuerySequence], seed: u64) -> Result<()> {
    crate::io::atomic_write(path, |w| {
        writeln!(w, "# generator={GENERATOR_ID} seed={seed}").map_err(|e| Error::io(path, e))?;
        let mut writer = csv::Writer::from_writer(w);
        writer
            .write_record(["q_num", "qid"])
            .map_err(|e| Error::malformed(path, 0, e.to_string()))?;
        for sequence in sequences {
            for (index, qid) in sequence.qids.iter().enumerate() {
                writer
                    .write_record([
                        format!("{}.{}", sequence.sequence_id, index + 1).as_str(),
                        qid.as_str(),
                    ])
                    .map_err(|e| Error::malformed(path, 0, e.to_string()))?;
            }
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    })
}

/// Loads a sequence file. Positions within each sequence must be exactly
/// 1..=n in order; sequences are returned sorted by id.
pub fn load_sequences(path: &Path) -> Result<Vec<QuerySequence>> {
    let content = crate::io::read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(content.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::malformed(path, 1, e.to_string()))?
        .clone();
    if headers.iter().ne(["q_num", "qid"]) {
        return Err(Error::malformed(
            path,
            1,
            format!(
                "expected header q_num,qid, found {}",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut sequences: std::collections::BTreeMap<u64, Vec<QueryId>> =
        std::collections::BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, csv::Position::line);
            Error::malformed(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, csv::Position::line);
        let q_num = record.get(0).unwrap_or("");
        let (sequence_id, number) = crate::io::parse_q_num(q_num).ok_or_else(|| {
            Error::malformed(path, line, format!("invalid q_num \"{q_num}\""))
        })?;
        let qid = QueryId::new(record.get(1).unwrap_or(""))
            .map_err(|e| Error::malformed(path, line, e.to_string()))?;
        let qids = sequences.entry(sequence_id).or_default();
        if number != qids.len() as u64 + 1 {
            return Err(Error::malformed(
                path,
                line,
                format!(
                    "sequence {sequence_id}: expected position {}, got {number}",
                    qids.len() + 1
                ),
            ));
        }
        qids.push(qid);
    }

    Ok(sequences
        .into_iter()
        .map(|(sequence_id, qids)| QuerySequence { sequence_id, qids })
        .collect())
}
