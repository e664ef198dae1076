//! Sequence-aware rerankers.
//!
//! A reranker plays the system's role in the evaluation protocol: for every
//! query in a sequence it receives the candidate pool and emits a permutation
//! of it. The rerankers only ever see *predicted* relevance (a lexical
//! overlap score at desk scale; participants used trained models); true
//! labels stay with the evaluator.
//!
//! Three strategies span the tradeoff:
//!
//! * [`rerank_random`]: uniform shuffle, the fairness-friendly floor.
//! * [`rerank_max_utility`]: descending predicted relevance, the utility
//!   ceiling, blind to groups.
//! * [`rerank_fairness_controller`]: greedy per-position construction that
//!   balances the marginal utility of a placement against the unfairness the
//!   placement would project onto the accumulated group exposure, weighted by
//!   a tradeoff parameter lambda. With lambda = 0 it reduces exactly to the
//!   max-utility ordering.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metrics::{stop_probability, KahanSum};
use crate::model::{
    Corpus, DocumentId, EvalParams, GroupAssignment, GroupId, QueryRequest, QuerySet, Ranking,
    RankingSequence,
};
use crate::seqgen::QuerySequence;

/// One candidate with its raw score and normalized predicted relevance.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredDocument {
    pub doc: DocumentId,
    pub score: f64,
    pub predicted_relevance: f64,
}

/// A query's candidate pool with predicted relevance per document.
#[derive(Clone, Debug)]
pub struct ScoredPool {
    qid: crate::model::QueryId,
    docs: Vec<ScoredDocument>,
}

impl ScoredPool {
    /// Scores must be finite and predicted relevance must lie in [0, 1].
    pub fn new(qid: crate::model::QueryId, docs: Vec<ScoredDocument>) -> Result<Self> {
        for sd in &docs {
            if !sd.score.is_finite()
                || !sd.predicted_relevance.is_finite()
                || !(0.0..=1.0).contains(&sd.predicted_relevance)
            {
                return Err(Error::InvalidScore {
                    doc: sd.doc.clone(),
                    value: if sd.score.is_finite() {
                        sd.predicted_relevance
                    } else {
                        sd.score
                    },
                });
            }
        }
        Ok(ScoredPool { qid, docs })
    }

    pub fn qid(&self) -> &crate::model::QueryId {
        &self.qid
    }

    pub fn docs(&self) -> &[ScoredDocument] {
        &self.docs
    }
}

fn tokens(text: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            out.insert(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.insert(current);
    }
    out
}

/// Scores every pool document by lexical overlap with the query: the raw
/// score is the number of distinct query tokens found in the document's
/// title or abstract, and predicted relevance is that count divided by the
/// number of distinct query tokens. Tokens are maximal alphanumeric runs,
/// lowercased. Deterministic; documents appear in pool order.
pub fn score_pool(request: &QueryRequest, corpus: &Corpus) -> Result<ScoredPool> {
    let query_tokens = tokens(request.text());
    let denominator = query_tokens.len() as f64;
    let mut docs = Vec::with_capacity(request.pool().len());
    for doc_id in request.pool() {
        let doc = corpus
            .get(doc_id)
            .ok_or_else(|| Error::MissingDocument { doc: doc_id.clone() })?;
        let mut doc_tokens = tokens(doc.title().unwrap_or(""));
        doc_tokens.extend(tokens(doc.abstract_text().unwrap_or("")));
        let overlap = query_tokens.intersection(&doc_tokens).count() as f64;
        let predicted = if denominator > 0.0 {
            overlap / denominator
        } else {
            0.0
        };
        docs.push(ScoredDocument {
            doc: doc_id.clone(),
            score: overlap,
            predicted_relevance: predicted,
        });
    }
    ScoredPool::new(request.qid().clone(), docs)
}

/// Uniformly random permutation of the pool. Deterministic given the RNG
/// state.
pub fn rerank_random<R: Rng>(request: &QueryRequest, rng: &mut R) -> Ranking {
    let mut order: Vec<DocumentId> = request.pool().iter().cloned().collect();
    order.shuffle(rng);
    Ranking::new(request.qid().clone(), order)
}

fn max_utility_order(docs: &[ScoredDocument]) -> Vec<&ScoredDocument> {
    let mut ordered: Vec<&ScoredDocument> = docs.iter().collect();
    ordered.sort_by(|a, b| {
        b.predicted_relevance
            .total_cmp(&a.predicted_relevance)
            .then_with(|| a.doc.cmp(&b.doc))
    });
    ordered
}

/// Descending predicted relevance; ties broken by ascending document id.
/// Under the browsing model this ordering maximizes expected utility with
/// respect to the predictions.
pub fn rerank_max_utility(scored: &ScoredPool) -> Ranking {
    let order = max_utility_order(scored.docs())
        .into_iter()
        .map(|sd| sd.doc.clone())
        .collect();
    Ranking::new(scored.qid().clone(), order)
}

/// The memory a reranker carries across a sequence: accumulated per-group
/// exposure and relevance (as projected from its own predictions), the
/// tradeoff weight, and the RNG used by stochastic strategies.
///
/// Totals change only in [`RerankerState::fold_emitted`], after a ranking has
/// been emitted.
#[derive(Clone, Debug)]
pub struct RerankerState {
    lambda: f64,
    rng: ChaCha8Rng,
    exposure: BTreeMap<GroupId, KahanSum>,
    relevance: BTreeMap<GroupId, KahanSum>,
}

impl RerankerState {
    /// `lambda` weighs fairness against utility, 0 = utility only, 1 =
    /// fairness only. The RNG is seeded from (seed, stream) so distinct
    /// sequences get independent, reproducible randomness.
    pub fn new(lambda: f64, seed: u64, stream: u64) -> Result<Self> {
        if !(lambda.is_finite() && (0.0..=1.0).contains(&lambda)) {
            return Err(Error::InvalidLambda(lambda));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Ok(RerankerState {
            lambda,
            rng,
            exposure: BTreeMap::new(),
            relevance: BTreeMap::new(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn totals(
        map: &BTreeMap<GroupId, KahanSum>,
        universe: &BTreeSet<GroupId>,
    ) -> BTreeMap<GroupId, f64> {
        universe
            .iter()
            .map(|g| (g.clone(), map.get(g).map_or(0.0, KahanSum::value)))
            .collect()
    }

    /// Accumulated group exposure, zero-filled over `universe`.
    pub fn group_exposure(&self, universe: &BTreeSet<GroupId>) -> BTreeMap<GroupId, f64> {
        Self::totals(&self.exposure, universe)
    }

    /// Accumulated group relevance, zero-filled over `universe`.
    pub fn group_relevance(&self, universe: &BTreeSet<GroupId>) -> BTreeMap<GroupId, f64> {
        Self::totals(&self.relevance, universe)
    }

    fn fold_emitted(
        &mut self,
        placements: &[(f64, &[GroupId])],
        pool_relevance: &BTreeMap<GroupId, f64>,
    ) {
        for (weight, membership) in placements {
            for g in *membership {
                self.exposure.entry(g.clone()).or_default().add(*weight);
            }
        }
        for (g, mass) in pool_relevance {
            self.relevance.entry(g.clone()).or_default().add(*mass);
        }
    }
}

/// l2 distance between projected exposure shares (with `weight` tentatively
/// added to each group in `membership`) and projected relevance shares.
/// Degenerate totals carry no signal and score 0.
fn projected_unfairness(
    exposure: &BTreeMap<GroupId, f64>,
    membership: &[GroupId],
    weight: f64,
    relevance: &BTreeMap<GroupId, f64>,
) -> f64 {
    let relevance_total: f64 = relevance.values().sum();
    if relevance_total <= 0.0 {
        return 0.0;
    }
    let exposure_total: f64 =
        exposure.values().sum::<f64>() + weight * membership.len() as f64;
    if exposure_total <= 0.0 {
        return 0.0;
    }
    let mut squares: Vec<f64> = exposure
        .iter()
        .map(|(g, e)| {
            let added = membership.iter().filter(|m| *m == g).count() as f64 * weight;
            let delta = (e + added) / exposure_total - relevance[g] / relevance_total;
            delta * delta
        })
        .collect();
    squares.sort_by(f64::total_cmp);
    squares.iter().sum::<f64>().sqrt()
}

/// Greedy fairness/utility controller.
///
/// Position by position it places the document minimizing
///
/// ```text
/// lambda * (unfairness of projected group shares if placed)
///   - (1 - lambda) * (examination weight * predicted stop probability)
/// ```
///
/// where projections extend the state's accumulated totals with this
/// ranking's placements so far plus the query's own predicted relevance
/// mass. Candidates are scanned in max-utility order and ties keep the
/// earliest, so lambda = 0 reproduces [`rerank_max_utility`] exactly. After
/// the ranking is complete its placements are folded into `state`.
pub fn rerank_fairness_controller(
    scored: &ScoredPool,
    state: &mut RerankerState,
    groups: &GroupAssignment,
    corpus: &Corpus,
    params: &EvalParams,
) -> Result<Ranking> {
    let candidates = max_utility_order(scored.docs());
    let memberships: Vec<Vec<GroupId>> = candidates
        .iter()
        .map(|sd| {
            let doc = corpus
                .get(&sd.doc)
                .ok_or_else(|| Error::MissingDocument { doc: sd.doc.clone() })?;
            Ok(doc
                .authors()
                .iter()
                .filter_map(|a| groups.group_of(a).cloned())
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut exposure = state.group_exposure(groups.universe());
    let mut relevance = state.group_relevance(groups.universe());
    for (sd, membership) in candidates.iter().zip(&memberships) {
        let stop = stop_probability(params.stop_coefficient(), sd.predicted_relevance);
        for g in membership {
            *relevance.get_mut(g).expect("universe covers assignments") += stop;
        }
    }
    let pool_relevance_added: BTreeMap<GroupId, f64> = {
        let before = state.group_relevance(groups.universe());
        relevance
            .iter()
            .map(|(g, v)| (g.clone(), v - before[g]))
            .collect()
    };

    let n = candidates.len();
    let mut placed = vec![false; n];
    let mut order: Vec<DocumentId> = Vec::with_capacity(n);
    let mut placements: Vec<(f64, &[GroupId])> = Vec::with_capacity(n);
    let mut weight = 1.0f64;
    for _ in 0..n {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            if placed[i] {
                continue;
            }
            let stop =
                stop_probability(params.stop_coefficient(), candidates[i].predicted_relevance);
            let utility_gain = weight * stop;
            let fairness_cost =
                projected_unfairness(&exposure, &memberships[i], weight, &relevance);
            let cost = state.lambda * fairness_cost - (1.0 - state.lambda) * utility_gain;
            if best.map_or(true, |(_, c)| cost < c) {
                best = Some((i, cost));
            }
        }
        let (i, _) = best.expect("pool is non-empty");
        placed[i] = true;
        for g in &memberships[i] {
            *exposure.get_mut(g).expect("universe covers assignments") += weight;
        }
        order.push(candidates[i].doc.clone());
        placements.push((weight, memberships[i].as_slice()));
        let stop = stop_probability(params.stop_coefficient(), candidates[i].predicted_relevance);
        weight *= params.gamma() * (1.0 - stop);
    }

    state.fold_emitted(&placements, &pool_relevance_added);
    Ok(Ranking::new(scored.qid().clone(), order))
}

/// Reranking strategy selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Random,
    MaxUtility,
    Controller,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strategy::Random => f.write_str("random"),
            Strategy::MaxUtility => f.write_str("maxutil"),
            Strategy::Controller => f.write_str("controller"),
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Strategy::Random),
            "maxutil" => Ok(Strategy::MaxUtility),
            "controller" => Ok(Strategy::Controller),
            other => Err(format!("unknown strategy '{other}'")),
        }
    }
}

/// Plays one strategy over a query sequence (the system side of the
/// evaluation protocol) and returns the emitted rankings, numbered 1..=n.
///
/// `groups` is required by the controller and ignored by the other
/// strategies. The RNG stream is the sequence id, so per-sequence output is
/// independent of which other sequences are processed.
#[allow(clippy::too_many_arguments)]
pub fn run_sequence(
    strategy: Strategy,
    sequence: &QuerySequence,
    queries: &QuerySet,
    corpus: &Corpus,
    groups: Option<&GroupAssignment>,
    params: &EvalParams,
    lambda: f64,
    seed: u64,
) -> Result<RankingSequence> {
    let mut state = RerankerState::new(lambda, seed, sequence.sequence_id)?;
    let mut rankings = Vec::with_capacity(sequence.qids.len());
    for (index, qid) in sequence.qids.iter().enumerate() {
        let request = queries.get(qid).ok_or_else(|| Error::UnknownQuery {
            sequence: sequence.sequence_id,
            number: index as u64 + 1,
            qid: qid.clone(),
        })?;
        let ranking = match strategy {
            Strategy::Random => rerank_random(request, state.rng()),
            Strategy::MaxUtility => {
                let scored = score_pool(request, corpus)?;
                rerank_max_utility(&scored)
            }
            Strategy::Controller => {
                let groups = groups.ok_or(Error::EmptyGroupUniverse)?;
                let scored = score_pool(request, corpus)?;
                rerank_fairness_controller(&scored, &mut state, groups, corpus, params)?
            }
        };
        rankings.push(ranking);
    }
    Ok(RankingSequence::contiguous(sequence.sequence_id, rankings))
}
