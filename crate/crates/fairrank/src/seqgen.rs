//! Query-sequence generation.
//!
//! Evaluation sequences are long streams of query ids drawn i.i.d. with
//! replacement, with probability proportional to each query's normalized
//! frequency. Sampling uses ChaCha8, a portable counter-based generator, so
//! a (seed, sequence index) pair fully determines a sequence on every
//! platform; sequence `i` is drawn from stream `i` of the seeded generator,
//! which makes individual sequences reproducible in isolation and safe to
//! generate in parallel.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{QueryId, QuerySet};

/// Identifier string recorded in sequence-file metadata, so a sequence file
/// documents the exact sampling algorithm that produced it.
pub const GENERATOR_ID: &str = "chacha8/weighted-index/v1";

/// Number of sequences and per-sequence length used by the track.
pub const DEFAULT_NUM_SEQUENCES: u64 = 5;
pub const DEFAULT_LENGTH: usize = 25_000;

/// One generated sequence: `sequence_id` and the sampled query ids in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuerySequence {
    pub sequence_id: u64,
    pub qids: Vec<QueryId>,
}

/// Draws one sequence of `length` query ids.
///
/// Queries with zero frequency are never drawn. Errors if no query has
/// positive frequency or if `length` is zero. The draw depends only on
/// (queries, sequence_id, length, seed), never on which other sequences are
/// being generated alongside.
pub fn generate_sequence(
    queries: &QuerySet,
    sequence_id: u64,
    length: usize,
    seed: u64,
) -> Result<QuerySequence> {
    if length == 0 {
        return Err(Error::ZeroSequenceLength);
    }
    let qids: Vec<&QueryId> = queries.iter().map(|q| q.qid()).collect();
    let weights: Vec<f64> = queries.iter().map(|q| q.frequency()).collect();
    if weights.iter().all(|w| *w <= 0.0) {
        return Err(Error::NoPositiveFrequency);
    }
    let index = WeightedIndex::new(&weights).map_err(|_| Error::NoPositiveFrequency)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sequence_id);
    let sampled = index
        .sample_iter(&mut rng)
        .take(length)
        .map(|i| qids[i].clone())
        .collect();
    Ok(QuerySequence {
        sequence_id,
        qids: sampled,
    })
}

/// Draws sequences 0..num_sequences, each of `length` query ids.
pub fn generate_sequences(
    queries: &QuerySet,
    num_sequences: u64,
    length: usize,
    seed: u64,
) -> Result<Vec<QuerySequence>> {
    (0..num_sequences)
        .into_par_iter()
        .map(|sequence_id| generate_sequence(queries, sequence_id, length, seed))
        .collect()
}
