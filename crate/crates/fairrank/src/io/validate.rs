//! Run admissibility checking.
//!
//! Violations are data, not errors: the checker walks the whole run and
//! reports everything it finds. A run is admissible when the list is empty.
//! When the expected query sequence is supplied, the run must answer exactly
//! the queries the sequence asked, in their numbered positions; omissions
//! can be tolerated explicitly (`allow_partial`) for truncated runs.

use std::collections::HashMap;
use std::fmt;

use crate::model::{QuerySet, RankingSequence};
use crate::seqgen::QuerySequence;

/// One admissibility problem, pinned to a sequence position when one exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub sequence: u64,
    pub number: Option<u64>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.number {
            Some(number) => write!(f, "{}.{}: {}", self.sequence, number, self.message),
            None => write!(f, "sequence {}: {}", self.sequence, self.message),
        }
    }
}

/// Outcome of [`validate_run`].
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }
}

/// Checks every entry of a run: the query must be known, the ranking must be
/// a non-empty permutation of that query's pool. With `expected`, positions
/// must also line up with the query sequence: every expected position must
/// be answered with the expected query (omissions allowed when
/// `allow_partial`), and the run must not contain positions the sequence
/// never asked.
pub fn validate_run(
    sequences: &[RankingSequence],
    queries: &QuerySet,
    expected: Option<&[QuerySequence]>,
    allow_partial: bool,
) -> ValidationReport {
    let mut violations = Vec::new();

    for sequence in sequences {
        for entry in sequence.entries() {
            let at = |message: String| Violation {
                sequence: sequence.sequence_id(),
                number: Some(entry.number),
                message,
            };
            if entry.ranking.is_empty() {
                violations.push(at("ranking is empty".to_string()));
                continue;
            }
            match queries.get(entry.qid()) {
                None => violations.push(at(format!("unknown query {}", entry.qid()))),
                Some(request) => {
                    let check = entry.ranking.check_permutation(request);
                    if !check.is_permutation() {
                        let mut parts = Vec::new();
                        for doc in &check.duplicated {
                            parts.push(format!("{doc} ranked more than once"));
                        }
                        for doc in &check.missing {
                            parts.push(format!("{doc} missing from the ranking"));
                        }
                        for doc in &check.extraneous {
                            parts.push(format!("{doc} is not in the pool"));
                        }
                        violations.push(at(format!(
                            "not a permutation of the pool of {}: {}",
                            entry.qid(),
                            parts.join("; ")
                        )));
                    }
                }
            }
        }
    }

    if let Some(expected) = expected {
        let by_id: HashMap<u64, &RankingSequence> = sequences
            .iter()
            .map(|s| (s.sequence_id(), s))
            .collect();
        let mut expected_ids: HashMap<u64, usize> = HashMap::new();
        for exp in expected {
            expected_ids.insert(exp.sequence_id, exp.qids.len());
            let entries: HashMap<u64, &crate::model::SequenceEntry> = by_id
                .get(&exp.sequence_id)
                .map(|s| s.entries().iter().map(|e| (e.number, e)).collect())
                .unwrap_or_default();
            for (index, expected_qid) in exp.qids.iter().enumerate() {
                let number = index as u64 + 1;
                match entries.get(&number) {
                    None if allow_partial => {}
                    None => violations.push(Violation {
                        sequence: exp.sequence_id,
                        number: Some(number),
                        message: format!("no ranking for expected query {expected_qid}"),
                    }),
                    Some(entry) if entry.qid() != expected_qid => {
                        violations.push(Violation {
                            sequence: exp.sequence_id,
                            number: Some(number),
                            message: format!(
                                "ranks {} but the sequence asks {expected_qid}",
                                entry.qid()
                            ),
                        });
                    }
                    Some(_) => {}
                }
            }
        }
        for sequence in sequences {
            match expected_ids.get(&sequence.sequence_id()) {
                None => violations.push(Violation {
                    sequence: sequence.sequence_id(),
                    number: None,
                    message: "sequence not present in the expected sequence file".to_string(),
                }),
                Some(len) => {
                    for entry in sequence.entries() {
                        if entry.number > *len as u64 {
                            violations.push(Violation {
                                sequence: sequence.sequence_id(),
                                number: Some(entry.number),
                                message: format!(
                                    "position beyond the expected sequence length {len}"
                                ),
                            });
                        }
                    }
                }
            }
        }
    }

    ValidationReport { violations }
}
