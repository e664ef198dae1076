//! Shared oracles and builders for the integration suites.
#![allow(dead_code)] // each test binary uses its own subset
//!
//! Everything here recomputes the browsing model from its definition:
//! examination weights via explicit powers and prefix products, plain f64
//! sums, no compensation, no incremental state. The library's incremental
//! accumulators are checked against this independent route.

use std::collections::{BTreeMap, HashMap};

use rand::prelude::*;

use fairrank::model::{
    AuthorId, Corpus, Document, DocumentId, GroupAssignment, GroupId, QueryId, QueryRequest,
    QuerySet, Ranking, Relevance,
};

pub fn did(id: &str) -> DocumentId {
    DocumentId::new(id).unwrap()
}

pub fn aid(id: &str) -> AuthorId {
    AuthorId::new(id).unwrap()
}

pub fn qid(id: &str) -> QueryId {
    QueryId::new(id).unwrap()
}

pub fn gid(id: &str) -> GroupId {
    GroupId::new(id).unwrap()
}

/// Monte-Carlo run of the cascade browsing model over one ranking.
///
/// Per trial the user examines rank 1; at an examined document with true
/// relevance r they stop with probability `stop_coef * r`, otherwise they
/// continue to the next rank with probability `gamma`.
pub struct CascadeSim {
    /// Fraction of trials in which each position was examined.
    pub examination: Vec<f64>,
    /// Fraction of trials that ended in a stop: the empirical utility.
    pub stop_rate: f64,
}

pub fn simulate_cascade(
    gamma: f64,
    stop_coef: f64,
    relevance: &[f64],
    trials: u64,
    rng: &mut impl Rng,
) -> CascadeSim {
    let mut examined = vec![0u64; relevance.len()];
    let mut stops = 0u64;
    for _ in 0..trials {
        for (i, &rel) in relevance.iter().enumerate() {
            examined[i] += 1;
            if rng.gen_bool(stop_coef * rel) {
                stops += 1;
                break;
            }
            if !rng.gen_bool(gamma) {
                break;
            }
        }
    }
    CascadeSim {
        examination: examined.iter().map(|&n| n as f64 / trials as f64).collect(),
        stop_rate: stops as f64 / trials as f64,
    }
}

/// Examination weight of 1-based `position` straight from the definition:
/// gamma^(position-1) times the product of continuation probabilities of
/// every earlier document, recomputed from scratch.
pub fn definition_weight(gamma: f64, stop_coef: f64, relevance: &[f64], position: usize) -> f64 {
    let mut product = 1.0;
    for &rel in &relevance[..position - 1] {
        product *= 1.0 - stop_coef * rel;
    }
    gamma.powi(position as i32 - 1) * product
}

/// Expected utility of one ranking from the definition: the sum over
/// positions of examination weight times stop probability.
pub fn definition_utility(gamma: f64, stop_coef: f64, relevance: &[f64]) -> f64 {
    (1..=relevance.len())
        .map(|i| definition_weight(gamma, stop_coef, relevance, i) * stop_coef * relevance[i - 1])
        .sum()
}

/// Micro-amortized evaluation computed directly from the definitions.
pub struct BruteForce {
    pub mean_utility: f64,
    pub exposure_share: BTreeMap<GroupId, f64>,
    pub relevance_share: BTreeMap<GroupId, f64>,
    pub unfairness: f64,
}

pub fn brute_force_micro(
    rankings: &[Ranking],
    queries: &QuerySet,
    corpus: &Corpus,
    groups: &GroupAssignment,
    gamma: f64,
    stop_coef: f64,
) -> BruteForce {
    let mut exposure: HashMap<AuthorId, f64> = HashMap::new();
    let mut relevance_mass: HashMap<AuthorId, f64> = HashMap::new();
    let mut utility_total = 0.0;

    for ranking in rankings {
        let request = queries.get(ranking.qid()).expect("known query");
        let labels: Vec<f64> = ranking
            .order()
            .iter()
            .map(|d| request.relevance_of(d).unwrap().as_f64())
            .collect();
        utility_total += definition_utility(gamma, stop_coef, &labels);
        for (i, doc_id) in ranking.order().iter().enumerate() {
            let w = definition_weight(gamma, stop_coef, &labels, i + 1);
            for a in corpus.get(doc_id).expect("known document").authors() {
                *exposure.entry(a.clone()).or_insert(0.0) += w;
            }
        }
        for doc_id in request.pool() {
            let mass = stop_coef * request.relevance_of(doc_id).unwrap().as_f64();
            for a in corpus.get(doc_id).expect("known document").authors() {
                *relevance_mass.entry(a.clone()).or_insert(0.0) += mass;
            }
        }
    }

    let share = |values: &HashMap<AuthorId, f64>| -> BTreeMap<GroupId, f64> {
        let mut by_group: BTreeMap<GroupId, f64> =
            groups.universe().iter().map(|g| (g.clone(), 0.0)).collect();
        let mut total = 0.0;
        for (author, value) in values {
            if let Some(group) = groups.group_of(author) {
                *by_group.get_mut(group).unwrap() += value;
                total += value;
            }
        }
        for v in by_group.values_mut() {
            *v /= total;
        }
        by_group
    };
    let exposure_share = share(&exposure);
    let relevance_share = share(&relevance_mass);
    let unfairness = exposure_share
        .iter()
        .map(|(g, d)| (d - relevance_share[g]).powi(2))
        .sum::<f64>()
        .sqrt();

    BruteForce {
        mean_utility: utility_total / rankings.len() as f64,
        exposure_share,
        relevance_share,
        unfairness,
    }
}

/// Maximum expected utility over every permutation of a pool, measured with
/// the predicted relevance the reranker sees, by exhaustive enumeration.
pub fn exhaustive_max_utility(predicted: &[f64], gamma: f64, stop_coef: f64) -> f64 {
    use itertools::Itertools;
    let n = predicted.len();
    (0..n)
        .permutations(n)
        .map(|perm| {
            let ordered: Vec<f64> = perm.iter().map(|&k| predicted[k]).collect();
            definition_utility(gamma, stop_coef, &ordered)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// A randomly generated workload small enough for brute-force checking.
pub struct Synthetic {
    pub corpus: Corpus,
    pub queries: QuerySet,
    pub groups: GroupAssignment,
}

/// `n_docs` documents over `n_authors` authors (one or two authors each),
/// `n_queries` queries with pools of 2..=`pool_max` docs and random binary
/// labels (at least one relevant doc per query), authors split round-robin
/// into `n_groups` groups.
pub fn synthetic(
    seed: u64,
    n_docs: usize,
    n_authors: usize,
    n_queries: usize,
    pool_max: usize,
    n_groups: usize,
) -> Synthetic {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let authors: Vec<AuthorId> = (0..n_authors).map(|i| aid(&format!("a{i}"))).collect();

    let mut documents = Vec::with_capacity(n_docs);
    for i in 0..n_docs {
        let mut who = vec![authors[rng.gen_range(0..n_authors)].clone()];
        if rng.gen_bool(0.3) {
            let second = authors[rng.gen_range(0..n_authors)].clone();
            if second != who[0] {
                who.push(second);
            }
        }
        documents.push(
            Document::new(did(&format!("d{i}")), who, Some(format!("title {i}")), None).unwrap(),
        );
    }
    let corpus = Corpus::from_documents(documents).unwrap();

    let mut requests = Vec::with_capacity(n_queries);
    for i in 0..n_queries {
        let size = rng.gen_range(2..=pool_max.min(n_docs));
        let mut ids: Vec<usize> = (0..n_docs).collect();
        ids.shuffle(&mut rng);
        let pool: Vec<DocumentId> = ids[..size].iter().map(|k| did(&format!("d{k}"))).collect();
        let mut labels: HashMap<DocumentId, Relevance> = pool
            .iter()
            .map(|d| (d.clone(), Relevance::new(rng.gen_range(0..=1)).unwrap()))
            .collect();
        let forced = pool[rng.gen_range(0..size)].clone();
        labels.insert(forced, Relevance::RELEVANT);
        requests.push(
            QueryRequest::new(
                qid(&format!("q{i}")),
                format!("query {i}"),
                1.0 + i as f64,
                pool.into_iter().collect(),
                Some(labels),
            )
            .unwrap(),
        );
    }
    let queries = QuerySet::from_requests(requests).unwrap();

    let mut builder = GroupAssignment::builder();
    for (i, author) in authors.iter().enumerate() {
        builder
            .assign(author.clone(), gid(&format!("g{}", i % n_groups)))
            .unwrap();
    }
    let groups = builder.build().unwrap();

    Synthetic {
        corpus,
        queries,
        groups,
    }
}

/// Uniformly shuffled ranking of a query's pool.
pub fn random_ranking(request: &QueryRequest, rng: &mut impl Rng) -> Ranking {
    let mut order: Vec<DocumentId> = request.pool().iter().cloned().collect();
    order.shuffle(rng);
    Ranking::new(request.qid().clone(), order)
}
