//! Browsing model and the amortized utility / unfairness metrics.
//!
//! The user model is a cascade: a reader scans a ranking top to bottom, at
//! rank i examines the document with probability gamma^(i-1) * prod_{j<i}
//! (1 - p(s|d_j)), and stops at a document with probability p(s|d) =
//! stop_coefficient * r_d. Exposure of a document is its examination weight;
//! exposure of an author is the sum over their documents. Utility of a
//! ranking is the expected stop mass, sum_i w_i * p(s|d_i).
//!
//! Fairness compares each group's share of accumulated exposure against its
//! share of accumulated relevance over a whole sequence of rankings. Authors
//! without a group assignment are excluded from both totals.
//!
//! Numerical policy: accumulators use compensated (Kahan-Neumaier) summation,
//! and sums over groups are performed in value-sorted order so results are
//! bit-identical under relabeling of groups.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{
    Amortization, AuthorId, Corpus, EvalParams, EvalResult, GroupAssignment, GroupId, QueryId,
    QueryRequest, QuerySet, Ranking, RankingSequence,
};

/// Kahan-Neumaier compensated sum. Exact enough that folding 10^5 rankings
/// stays within 1e-9 of the from-definition computation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for KahanSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

/// Probability that a document with relevance `relevance` satisfies the
/// reader and ends the session.
pub fn stop_probability(stop_coefficient: f64, relevance: f64) -> f64 {
    stop_coefficient * relevance
}

/// Examination weight of the document at 1-based `position`, given the stop
/// probabilities of every document ranked above it.
///
/// Computed from the definition (explicit power and product); the
/// accumulators use an equivalent incremental recurrence instead.
pub fn examination_weight(gamma: f64, position: usize, preceding_stop: &[f64]) -> f64 {
    assert!(position >= 1, "positions are 1-based");
    assert_eq!(
        preceding_stop.len(),
        position - 1,
        "need one stop probability per preceding rank"
    );
    let patience = gamma.powi(position as i32 - 1);
    let continuation: f64 = preceding_stop.iter().map(|p| 1.0 - p).product();
    patience * continuation
}

fn relevance_as_f64(request: &QueryRequest, doc: &crate::model::DocumentId) -> Result<f64> {
    Ok(request.relevance_of(doc)?.as_f64())
}

/// Per-author exposure generated by a single ranking.
pub fn ranking_exposure(
    params: &EvalParams,
    request: &QueryRequest,
    ranking: &Ranking,
    corpus: &Corpus,
) -> Result<BTreeMap<AuthorId, f64>> {
    ranking.validate_against(request)?;
    let mut exposure: BTreeMap<AuthorId, KahanSum> = BTreeMap::new();
    let mut weight = 1.0;
    for doc_id in ranking.order() {
        let doc = corpus
            .get(doc_id)
            .ok_or_else(|| Error::MissingDocument { doc: doc_id.clone() })?;
        for author in doc.authors() {
            exposure.entry(author.clone()).or_default().add(weight);
        }
        let stop = stop_probability(params.stop_coefficient(), relevance_as_f64(request, doc_id)?);
        weight *= params.gamma() * (1.0 - stop);
    }
    Ok(exposure.into_iter().map(|(a, s)| (a, s.value())).collect())
}

/// Per-author relevance mass of one query: for each author, the sum of stop
/// probabilities of their documents inside the query's pool. This is the
/// target each author's exposure is compared against.
pub fn author_relevance(
    params: &EvalParams,
    request: &QueryRequest,
    corpus: &Corpus,
) -> Result<BTreeMap<AuthorId, f64>> {
    let mut relevance: BTreeMap<AuthorId, KahanSum> = BTreeMap::new();
    for doc_id in request.pool() {
        let doc = corpus
            .get(doc_id)
            .ok_or_else(|| Error::MissingDocument { doc: doc_id.clone() })?;
        let stop = stop_probability(params.stop_coefficient(), relevance_as_f64(request, doc_id)?);
        for author in doc.authors() {
            relevance.entry(author.clone()).or_default().add(stop);
        }
    }
    Ok(relevance.into_iter().map(|(a, s)| (a, s.value())).collect())
}

/// Expected utility of a single ranking: the probability mass of stopping,
/// weighted by how far down the stop happens.
pub fn ranking_utility(
    params: &EvalParams,
    request: &QueryRequest,
    ranking: &Ranking,
) -> Result<f64> {
    ranking.validate_against(request)?;
    let mut utility = KahanSum::new();
    let mut weight = 1.0;
    for doc_id in ranking.order() {
        let stop = stop_probability(params.stop_coefficient(), relevance_as_f64(request, doc_id)?);
        utility.add(weight * stop);
        weight *= params.gamma() * (1.0 - stop);
    }
    Ok(utility.value())
}

/// Normalizes per-author masses into per-group shares.
///
/// Only authors with a group assignment contribute. Every group in the
/// universe appears in the output, including groups whose share is zero.
/// A non-positive overall total makes shares meaningless and is reported as
/// [`Error::DegenerateTotals`].
pub fn group_shares(
    values: &BTreeMap<AuthorId, f64>,
    groups: &GroupAssignment,
    what: &'static str,
    context: &str,
) -> Result<BTreeMap<GroupId, f64>> {
    let mut per_group: BTreeMap<GroupId, KahanSum> = groups
        .universe()
        .iter()
        .map(|g| (g.clone(), KahanSum::new()))
        .collect();
    let mut total = KahanSum::new();
    // `values` iterates in author order, so per-group sums are independent of
    // what the groups are called.
    for (author, value) in values {
        if let Some(group) = groups.group_of(author) {
            per_group
                .get_mut(group)
                .expect("universe contains every assigned group")
                .add(*value);
            total.add(*value);
        }
    }
    let total = total.value();
    if total <= 0.0 {
        return Err(Error::DegenerateTotals {
            what,
            context: context.to_string(),
        });
    }
    Ok(per_group
        .into_iter()
        .map(|(g, sum)| (g, sum.value() / total))
        .collect())
}

fn expect_same_universe(
    a: &BTreeMap<GroupId, f64>,
    b: &BTreeMap<GroupId, f64>,
) -> Result<()> {
    if a.len() != b.len() || !a.keys().eq(b.keys()) {
        return Err(Error::GroupUniverseMismatch);
    }
    Ok(())
}

/// Per-group difference between achieved exposure share and deserved
/// relevance share.
pub fn deviations(
    exposure_share: &BTreeMap<GroupId, f64>,
    relevance_share: &BTreeMap<GroupId, f64>,
) -> Result<BTreeMap<GroupId, f64>> {
    expect_same_universe(exposure_share, relevance_share)?;
    Ok(exposure_share
        .iter()
        .map(|(g, e)| (g.clone(), e - relevance_share[g]))
        .collect())
}

/// l2 norm of the per-group deviations.
///
/// Squared deviations are added in sorted order so the result is exactly the
/// same under any relabeling of the groups.
pub fn unfairness(
    exposure_share: &BTreeMap<GroupId, f64>,
    relevance_share: &BTreeMap<GroupId, f64>,
) -> Result<f64> {
    let deltas = deviations(exposure_share, relevance_share)?;
    let mut squares: Vec<f64> = deltas.values().map(|d| d * d).collect();
    squares.sort_by(f64::total_cmp);
    let mut sum = KahanSum::new();
    sum.extend(squares);
    Ok(sum.value().max(0.0).sqrt())
}

/// Streaming accumulator for amortized evaluation: folds rankings one at a
/// time, keeping per-author exposure and relevance masses plus the running
/// utility sum.
#[derive(Clone, Debug)]
pub struct ExposureAccumulator {
    params: EvalParams,
    exposure: BTreeMap<AuthorId, KahanSum>,
    relevance: BTreeMap<AuthorId, KahanSum>,
    utility: KahanSum,
    rankings: usize,
}

impl ExposureAccumulator {
    pub fn new(params: EvalParams) -> Self {
        ExposureAccumulator {
            params,
            exposure: BTreeMap::new(),
            relevance: BTreeMap::new(),
            utility: KahanSum::new(),
            rankings: 0,
        }
    }

    pub fn params(&self) -> &EvalParams {
        &self.params
    }

    pub fn rankings_folded(&self) -> usize {
        self.rankings
    }

    /// Mean per-ranking utility so far.
    pub fn mean_utility(&self) -> f64 {
        if self.rankings == 0 {
            0.0
        } else {
            self.utility.value() / self.rankings as f64
        }
    }

    /// Folds one ranking: validates it, adds its examination weights to the
    /// authors' exposure, its pool's stop masses to the authors' relevance,
    /// and its expected utility to the running sum.
    pub fn fold_ranking(
        &mut self,
        request: &QueryRequest,
        ranking: &Ranking,
        corpus: &Corpus,
    ) -> Result<()> {
        ranking.validate_against(request)?;
        // Resolve documents and labels before mutating, so a failed fold
        // leaves the accumulator unchanged.
        let mut resolved = Vec::with_capacity(ranking.len());
        for doc_id in ranking.order() {
            let doc = corpus
                .get(doc_id)
                .ok_or_else(|| Error::MissingDocument { doc: doc_id.clone() })?;
            let relevance = relevance_as_f64(request, doc_id)?;
            resolved.push((doc, relevance));
        }

        let mut weight = 1.0;
        for (doc, relevance) in &resolved {
            for author in doc.authors() {
                self.exposure.entry(author.clone()).or_default().add(weight);
            }
            let stop = stop_probability(self.params.stop_coefficient(), *relevance);
            self.utility.add(weight * stop);
            weight *= self.params.gamma() * (1.0 - stop);
        }
        // The ranking is a permutation of the pool, so this walks the pool.
        for (doc, relevance) in &resolved {
            let stop = stop_probability(self.params.stop_coefficient(), *relevance);
            for author in doc.authors() {
                self.relevance.entry(author.clone()).or_default().add(stop);
            }
        }
        self.rankings += 1;
        Ok(())
    }

    pub fn author_exposure(&self) -> BTreeMap<AuthorId, f64> {
        self.exposure
            .iter()
            .map(|(a, s)| (a.clone(), s.value()))
            .collect()
    }

    pub fn author_relevance(&self) -> BTreeMap<AuthorId, f64> {
        self.relevance
            .iter()
            .map(|(a, s)| (a.clone(), s.value()))
            .collect()
    }

    /// Closes the accumulator into a result: group shares of both masses,
    /// per-group deviations, their l2 norm, and mean utility.
    pub fn finish(&self, groups: &GroupAssignment, context: &str) -> Result<EvalResult> {
        let exposure_share =
            group_shares(&self.author_exposure(), groups, "exposure", context)?;
        let relevance_share =
            group_shares(&self.author_relevance(), groups, "relevance", context)?;
        let deviation = deviations(&exposure_share, &relevance_share)?;
        let unfairness = unfairness(&exposure_share, &relevance_share)?;
        Ok(EvalResult {
            exposure_share,
            relevance_share,
            deviation,
            unfairness,
            mean_utility: self.mean_utility(),
            rankings_evaluated: self.rankings,
        })
    }
}

/// Outcome of evaluating a run. Unfairness requires non-degenerate exposure
/// and relevance totals; utility never does, so a run over a sequence whose
/// pools carry no group mass still reports its utility.
#[derive(Clone, Debug)]
pub enum EvalOutcome {
    Defined(EvalResult),
    Undefined {
        mean_utility: f64,
        rankings_evaluated: usize,
        reason: String,
    },
}

impl EvalOutcome {
    pub fn is_defined(&self) -> bool {
        matches!(self, EvalOutcome::Defined(_))
    }

    pub fn result(&self) -> Option<&EvalResult> {
        match self {
            EvalOutcome::Defined(result) => Some(result),
            EvalOutcome::Undefined { .. } => None,
        }
    }

    pub fn mean_utility(&self) -> f64 {
        match self {
            EvalOutcome::Defined(result) => result.mean_utility,
            EvalOutcome::Undefined { mean_utility, .. } => *mean_utility,
        }
    }

    pub fn rankings_evaluated(&self) -> usize {
        match self {
            EvalOutcome::Defined(result) => result.rankings_evaluated,
            EvalOutcome::Undefined {
                rankings_evaluated, ..
            } => *rankings_evaluated,
        }
    }
}

/// Evaluates one ranking sequence. See [`evaluate_pooled`] for semantics.
pub fn evaluate_run(
    sequence: &RankingSequence,
    queries: &QuerySet,
    corpus: &Corpus,
    groups: &GroupAssignment,
    params: &EvalParams,
) -> Result<EvalOutcome> {
    evaluate_pooled(std::slice::from_ref(sequence), queries, corpus, groups, params)
}

/// Evaluates a run spanning one or more ranking sequences.
///
/// Micro amortization folds every ranking into a single accumulator and
/// scores the totals. Macro amortization partitions rankings by query,
/// scores each query's partition separately, and averages: the reported
/// unfairness is the unweighted mean of per-query unfairness values, and the
/// reported per-group shares and deviations are unweighted means of the
/// per-query ones (so in macro mode the l2 identity holds per query, not for
/// the aggregate). Mean utility is always the mean over all rankings.
///
/// A degenerate total (no exposure or relevance mass on any assigned author,
/// overall for micro or within one query's partition for macro) yields
/// [`EvalOutcome::Undefined`] carrying the still-well-defined utility.
pub fn evaluate_pooled(
    sequences: &[RankingSequence],
    queries: &QuerySet,
    corpus: &Corpus,
    groups: &GroupAssignment,
    params: &EvalParams,
) -> Result<EvalOutcome> {
    let total_entries: usize = sequences.iter().map(|s| s.len()).sum();
    if total_entries == 0 {
        return Err(Error::EmptySequence {
            sequence: sequences.first().map_or(0, |s| s.sequence_id()),
        });
    }

    match params.amortization() {
        Amortization::Micro => {
            let mut acc = ExposureAccumulator::new(*params);
            for sequence in sequences {
                for entry in sequence.entries() {
                    let request = lookup(queries, sequence.sequence_id(), entry)?;
                    acc.fold_ranking(request, &entry.ranking, corpus)
                        .map_err(|e| e.at_entry(sequence.sequence_id(), entry.number))?;
                }
            }
            finish_outcome(acc.finish(groups, "whole run"), &acc)
        }
        Amortization::Macro => {
            let mut partitions: BTreeMap<QueryId, ExposureAccumulator> = BTreeMap::new();
            let mut utility = KahanSum::new();
            let mut rankings = 0usize;
            for sequence in sequences {
                for entry in sequence.entries() {
                    let request = lookup(queries, sequence.sequence_id(), entry)?;
                    let acc = partitions
                        .entry(request.qid().clone())
                        .or_insert_with(|| ExposureAccumulator::new(*params));
                    acc.fold_ranking(request, &entry.ranking, corpus)
                        .map_err(|e| e.at_entry(sequence.sequence_id(), entry.number))?;
                    utility.add(ranking_utility(params, request, &entry.ranking)?);
                    rankings += 1;
                }
            }
            let mean_utility = utility.value() / rankings as f64;

            let mut exposure_share: BTreeMap<GroupId, KahanSum> = BTreeMap::new();
            let mut relevance_share: BTreeMap<GroupId, KahanSum> = BTreeMap::new();
            let mut unfairness_sum = KahanSum::new();
            let n = partitions.len() as f64;
            for (qid, acc) in &partitions {
                let context = format!("query {qid}");
                let per_query = match acc.finish(groups, &context) {
                    Ok(result) => result,
                    Err(Error::DegenerateTotals { what, context }) => {
                        return Ok(EvalOutcome::Undefined {
                            mean_utility,
                            rankings_evaluated: rankings,
                            reason: format!("no {what} mass on any grouped author ({context})"),
                        });
                    }
                    Err(other) => return Err(other),
                };
                for (g, v) in &per_query.exposure_share {
                    exposure_share.entry(g.clone()).or_default().add(*v);
                }
                for (g, v) in &per_query.relevance_share {
                    relevance_share.entry(g.clone()).or_default().add(*v);
                }
                unfairness_sum.add(per_query.unfairness);
            }
            let exposure_share: BTreeMap<GroupId, f64> = exposure_share
                .into_iter()
                .map(|(g, s)| (g, s.value() / n))
                .collect();
            let relevance_share: BTreeMap<GroupId, f64> = relevance_share
                .into_iter()
                .map(|(g, s)| (g, s.value() / n))
                .collect();
            let deviation = deviations(&exposure_share, &relevance_share)?;
            Ok(EvalOutcome::Defined(EvalResult {
                exposure_share,
                relevance_share,
                deviation,
                unfairness: unfairness_sum.value() / n,
                mean_utility,
                rankings_evaluated: rankings,
            }))
        }
    }
}

/// One point of a utility/unfairness tradeoff plot.
#[derive(Clone, Debug, PartialEq)]
pub struct TradeoffPoint {
    pub label: String,
    pub utility: f64,
    pub unfairness: f64,
}

/// Evaluates several labeled runs into plottable (utility, unfairness)
/// points, ordered by label. A run whose unfairness is undefined cannot be
/// plotted and is reported as a degenerate-total error.
pub fn tradeoff_points(
    runs: &[(String, Vec<RankingSequence>)],
    queries: &QuerySet,
    corpus: &Corpus,
    groups: &GroupAssignment,
    params: &EvalParams,
) -> Result<Vec<TradeoffPoint>> {
    let mut points = Vec::with_capacity(runs.len());
    for (label, sequences) in runs {
        match evaluate_pooled(sequences, queries, corpus, groups, params)? {
            EvalOutcome::Defined(result) => points.push(TradeoffPoint {
                label: label.clone(),
                utility: result.mean_utility,
                unfairness: result.unfairness,
            }),
            EvalOutcome::Undefined { reason, .. } => {
                return Err(Error::DegenerateTotals {
                    what: "unfairness",
                    context: format!("run {label}: {reason}"),
                });
            }
        }
    }
    points.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(points)
}

fn lookup<'q>(
    queries: &'q QuerySet,
    sequence_id: u64,
    entry: &crate::model::SequenceEntry,
) -> Result<&'q QueryRequest> {
    queries.get(entry.qid()).ok_or_else(|| Error::UnknownQuery {
        sequence: sequence_id,
        number: entry.number,
        qid: entry.qid().clone(),
    })
}

fn finish_outcome(
    finished: Result<EvalResult>,
    acc: &ExposureAccumulator,
) -> Result<EvalOutcome> {
    match finished {
        Ok(result) => Ok(EvalOutcome::Defined(result)),
        Err(Error::DegenerateTotals { what, context }) => Ok(EvalOutcome::Undefined {
            mean_utility: acc.mean_utility(),
            rankings_evaluated: acc.rankings_folded(),
            reason: format!("no {what} mass on any grouped author ({context})"),
        }),
        Err(other) => Err(other),
    }
}
