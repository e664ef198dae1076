//! Amortized fairness and utility evaluation for ranked retrieval, in the
//! setting of the TREC 2019 Fair Ranking track: systems rerank a candidate
//! pool of academic papers for every query in a long sequence, and are scored
//! on expected user utility together with how equitably exposure is allocated
//! across author groups relative to the groups' share of relevance.
//!
//! The crate provides:
//!
//! * a browsing model (geometric patience plus relevance-dependent stopping)
//!   and the amortized exposure, utility, and unfairness metrics built on it
//!   ([`metrics`]);
//! * readers and writers for the track's data formats: corpus, query pools,
//!   author-group files, run files, and evaluation reports ([`io`]);
//! * reproducible query-sequence generation ([`seqgen`]);
//! * baseline rerankers, including a deterministic utility maximizer and a
//!   greedy controller that trades utility against accumulated exposure debt
//!   ([`rerank`]).
//!
//! The `fairrank` binary wires these together; see the repository README for
//! the command-line surface.

pub mod error;
pub mod io;
pub mod metrics;
pub mod model;
pub mod rerank;
pub mod seqgen;

pub use error::{Error, ErrorClass, Result};
pub use model::{
    Amortization, AuthorId, Corpus, Document, DocumentId, EvalParams, EvalResult, GroupAssignment,
    GroupId, QueryId, QueryRequest, QuerySet, Ranking, RankingSequence, Relevance, SequenceEntry,
};
