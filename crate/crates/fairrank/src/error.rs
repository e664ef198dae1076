//! Crate-wide error type.

use std::path::PathBuf;

use crate::model::{AuthorId, DocumentId, GroupId, QueryId};

/// Convenience alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    // ---- domain invariants ----
    #[error("{kind} identifier must be a non-empty string")]
    EmptyIdentifier { kind: &'static str },

    #[error("document {doc} lists author {author} more than once")]
    DuplicateAuthor { doc: DocumentId, author: AuthorId },

    #[error("document {id} inserted twice")]
    DuplicateDocument { id: DocumentId },

    #[error("query {qid} has an empty reranking pool")]
    EmptyPool { qid: QueryId },

    #[error("query {qid}: relevance given for {doc}, which is not in the pool")]
    RelevanceOutsidePool { qid: QueryId, doc: DocumentId },

    #[error("relevance must be 0 or 1, got {value}")]
    RelevanceNotBinary { value: f64 },

    #[error("query {qid}: frequency must be a finite non-negative number, got {value}")]
    InvalidFrequency { qid: QueryId, value: f64 },

    #[error("continuation probability gamma must satisfy 0 <= gamma < 1, got {0}")]
    InvalidGamma(f64),

    #[error("stop coefficient must lie in [0, 1], got {0}")]
    InvalidStopCoefficient(f64),

    #[error("lambda must lie in [0, 1], got {0}")]
    InvalidLambda(f64),

    #[error("document {doc}: scores must be finite and predicted relevance in [0, 1], got {value}")]
    InvalidScore { doc: DocumentId, value: f64 },

    #[error("ranking for query {qid} is not a permutation of the pool: {detail}")]
    NotPermutation { qid: QueryId, detail: String },

    #[error("sequence {sequence}: entry numbers must be strictly increasing (saw {number})")]
    NonMonotonicSequence { sequence: u64, number: u64 },

    #[error("sequence {sequence} is empty")]
    EmptySequence { sequence: u64 },

    #[error("author {author} assigned to both group {existing} and group {new}")]
    ConflictingGroup {
        author: AuthorId,
        existing: GroupId,
        new: GroupId,
    },

    #[error("group assignment has an empty group universe")]
    EmptyGroupUniverse,

    #[error("duplicate query id {qid}")]
    DuplicateQuery { qid: QueryId },

    #[error("author {author}: index value must be non-negative, got {value}")]
    NegativeIndexValue { author: AuthorId, value: i64 },

    #[error("bucket thresholds must be strictly increasing and non-empty")]
    InvalidThresholds,

    // ---- metrics / evaluation protocol ----
    #[error("no metadata for document {doc}")]
    MissingDocument { doc: DocumentId },

    #[error("query {qid}: no relevance label for document {doc}")]
    MissingRelevance { qid: QueryId, doc: DocumentId },

    #[error("ranking is for query {found}, expected {expected}")]
    QidMismatch { expected: QueryId, found: QueryId },

    #[error("sequence {sequence} position {number}: unknown query id {qid}")]
    UnknownQuery {
        sequence: u64,
        number: u64,
        qid: QueryId,
    },

    #[error("sequence {sequence} position {number}: {source}")]
    InvalidEntry {
        sequence: u64,
        number: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate totals: {what} sums to zero ({context})")]
    DegenerateTotals { what: &'static str, context: String },

    #[error("exposure and relevance shares cover different group universes")]
    GroupUniverseMismatch,

    // ---- sequence generation ----
    #[error("no query has a positive frequency; cannot sample a sequence")]
    NoPositiveFrequency,

    #[error("sequence length must be at least 1")]
    ZeroSequenceLength,

    // ---- file I/O ----
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Malformed {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{}: duplicate document id {id} (lines {first_line} and {line})", path.display())]
    DuplicateDocumentId {
        path: PathBuf,
        id: DocumentId,
        first_line: u64,
        line: u64,
    },

    #[error("{}:{line}: q_num {q_num} already seen at line {first_line}", path.display())]
    DuplicateRunEntry {
        path: PathBuf,
        q_num: String,
        first_line: u64,
        line: u64,
    },

    #[error("{}: conflicting group for author {author}: {existing} (line {first_line}) vs {new} (line {line})", path.display())]
    ConflictingGroupRow {
        path: PathBuf,
        author: AuthorId,
        existing: GroupId,
        new: GroupId,
        first_line: u64,
        line: u64,
    },
}

/// Coarse failure categories, stable across the CLI (exit codes) and the
/// C ABI (status codes).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    /// A parameter outside its documented domain.
    Usage,
    /// A file that could not be read or parsed.
    DataFormat,
    /// Well-formed input that violates a semantic rule.
    Validation,
    /// Metrics undefined on the given data.
    Degenerate,
}

impl Error {
    /// Classifies this error for exit-code or status-code mapping.
    /// Wrapped entry errors classify as their cause.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidGamma(_)
            | Error::InvalidStopCoefficient(_)
            | Error::InvalidLambda(_)
            | Error::ZeroSequenceLength => ErrorClass::Usage,

            Error::Io { .. }
            | Error::Malformed { .. }
            | Error::DuplicateDocumentId { .. }
            | Error::DuplicateRunEntry { .. }
            | Error::ConflictingGroupRow { .. }
            | Error::DuplicateQuery { .. }
            | Error::DuplicateAuthor { .. }
            | Error::DuplicateDocument { .. }
            | Error::RelevanceNotBinary { .. }
            | Error::InvalidFrequency { .. }
            | Error::EmptyIdentifier { .. }
            | Error::InvalidThresholds
            | Error::NegativeIndexValue { .. }
            | Error::NoPositiveFrequency
            | Error::EmptyPool { .. }
            | Error::RelevanceOutsidePool { .. }
            | Error::ConflictingGroup { .. }
            | Error::EmptyGroupUniverse => ErrorClass::DataFormat,

            Error::DegenerateTotals { .. } => ErrorClass::Degenerate,

            Error::InvalidEntry { source, .. } => source.class(),

            _ => ErrorClass::Validation,
        }
    }

    /// Wraps an error with the sequence position it occurred at.
    pub fn at_entry(self, sequence: u64, number: u64) -> Self {
        Error::InvalidEntry {
            sequence,
            number,
            source: Box::new(self),
        }
    }

    /// Attaches the file path to an I/O failure.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Builds a file-format error pinned to a line.
    pub fn malformed(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
