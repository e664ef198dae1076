//! Domain types shared by every other module.
//!
//! All types here are immutable after construction and cheap to share across
//! threads. Constructors validate their invariants and return [`Error`] on
//! violation; once a value exists it is well-formed.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $kind:literal) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(String);

        impl $name {
            /// Creates the identifier, rejecting empty strings.
            pub fn new(value: impl Into<String>) -> Result<Self> {
                let value = value.into();
                if value.is_empty() {
                    return Err(Error::EmptyIdentifier { kind: $kind });
                }
                Ok(Self(value))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl TryFrom<String> for $name {
            type Error = Error;

            fn try_from(value: String) -> Result<Self> {
                Self::new(value)
            }
        }

        impl From<$name> for String {
            fn from(id: $name) -> String {
                id.0
            }
        }
    };
}

id_type!(
    /// Opaque document identifier. Never parsed for structure.
    DocumentId,
    "document"
);
id_type!(
    /// Opaque author identifier.
    AuthorId,
    "author"
);
id_type!(
    /// Opaque query identifier.
    QueryId,
    "query"
);
id_type!(
    /// Opaque group identifier.
    GroupId,
    "group"
);

/// Binary relevance label stored as an integer so the stop-probability
/// transform generalizes to graded relevance later.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Relevance(u8);

impl Relevance {
    pub const NOT_RELEVANT: Relevance = Relevance(0);
    pub const RELEVANT: Relevance = Relevance(1);

    /// Validates that the grade is binary.
    pub fn new(grade: u8) -> Result<Self> {
        if grade > 1 {
            return Err(Error::RelevanceNotBinary {
                value: f64::from(grade),
            });
        }
        Ok(Relevance(grade))
    }

    pub fn grade(self) -> u8 {
        self.0
    }

    pub fn is_relevant(self) -> bool {
        self.0 == 1
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }
}

/// One paper: identity, its authors in listed order, and optional text fields.
#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    id: DocumentId,
    authors: Vec<AuthorId>,
    title: Option<String>,
    abstract_text: Option<String>,
}

impl Document {
    /// An empty author list is legal (unannotated papers exist); a duplicate
    /// author within one document is not.
    pub fn new(
        id: DocumentId,
        authors: Vec<AuthorId>,
        title: Option<String>,
        abstract_text: Option<String>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for author in &authors {
            if !seen.insert(author) {
                return Err(Error::DuplicateAuthor {
                    doc: id,
                    author: author.clone(),
                });
            }
        }
        Ok(Document {
            id,
            authors,
            title,
            abstract_text,
        })
    }

    pub fn id(&self) -> &DocumentId {
        &self.id
    }

    pub fn authors(&self) -> &[AuthorId] {
        &self.authors
    }

    pub fn title(&self) -> Option<&str> {
        self.title.as_deref()
    }

    pub fn abstract_text(&self) -> Option<&str> {
        self.abstract_text.as_deref()
    }
}

/// Document metadata lookup keyed by id.
#[derive(Clone, Debug, Default)]
pub struct Corpus {
    docs: HashMap<DocumentId, Document>,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a document; a second document with the same id is rejected.
    pub fn insert(&mut self, doc: Document) -> Result<()> {
        if self.docs.contains_key(doc.id()) {
            return Err(Error::DuplicateDocument {
                id: doc.id().clone(),
            });
        }
        self.docs.insert(doc.id().clone(), doc);
        Ok(())
    }

    pub fn from_documents(docs: impl IntoIterator<Item = Document>) -> Result<Self> {
        let mut corpus = Corpus::new();
        for doc in docs {
            corpus.insert(doc)?;
        }
        Ok(corpus)
    }

    pub fn get(&self, id: &DocumentId) -> Option<&Document> {
        self.docs.get(id)
    }

    pub fn contains(&self, id: &DocumentId) -> bool {
        self.docs.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Document> {
        self.docs.values()
    }
}

/// A query with its unordered candidate pool and, for training-style data,
/// binary relevance labels for every pool document.
#[derive(Clone, Debug)]
pub struct QueryRequest {
    qid: QueryId,
    text: String,
    frequency: f64,
    pool: BTreeSet<DocumentId>,
    relevance: Option<HashMap<DocumentId, Relevance>>,
}

impl QueryRequest {
    /// When a relevance map is given, every pool document must be covered;
    /// labels for documents outside the pool are rejected.
    pub fn new(
        qid: QueryId,
        text: impl Into<String>,
        frequency: f64,
        pool: BTreeSet<DocumentId>,
        relevance: Option<HashMap<DocumentId, Relevance>>,
    ) -> Result<Self> {
        if pool.is_empty() {
            return Err(Error::EmptyPool { qid });
        }
        if !(frequency.is_finite() && frequency >= 0.0) {
            return Err(Error::InvalidFrequency {
                qid,
                value: frequency,
            });
        }
        let relevance = match relevance {
            None => None,
            Some(mut map) => {
                if let Some(doc) = map.keys().find(|doc| !pool.contains(*doc)) {
                    return Err(Error::RelevanceOutsidePool {
                        qid,
                        doc: doc.clone(),
                    });
                }
                // Documents without an explicit label are not relevant.
                for doc in &pool {
                    map.entry(doc.clone()).or_insert(Relevance::NOT_RELEVANT);
                }
                Some(map)
            }
        };
        Ok(QueryRequest {
            qid,
            text: text.into(),
            frequency,
            pool,
            relevance,
        })
    }

    pub fn qid(&self) -> &QueryId {
        &self.qid
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn pool(&self) -> &BTreeSet<DocumentId> {
        &self.pool
    }

    pub fn has_relevance(&self) -> bool {
        self.relevance.is_some()
    }

    /// Label for one pool document. `Err` when this request carries no
    /// relevance data or the document is outside the pool.
    pub fn relevance_of(&self, doc: &DocumentId) -> Result<Relevance> {
        self.relevance
            .as_ref()
            .and_then(|map| map.get(doc).copied())
            .ok_or_else(|| Error::MissingRelevance {
                qid: self.qid.clone(),
                doc: doc.clone(),
            })
    }
}

/// Query requests keyed by id. Load order is preserved for iteration.
#[derive(Clone, Debug, Default)]
pub struct QuerySet {
    by_id: HashMap<QueryId, QueryRequest>,
    order: Vec<QueryId>,
}

impl QuerySet {
    pub fn from_requests(requests: impl IntoIterator<Item = QueryRequest>) -> Result<Self> {
        let mut set = QuerySet::default();
        for request in requests {
            if set.by_id.contains_key(request.qid()) {
                return Err(Error::DuplicateQuery {
                    qid: request.qid().clone(),
                });
            }
            set.order.push(request.qid().clone());
            set.by_id.insert(request.qid().clone(), request);
        }
        Ok(set)
    }

    pub fn get(&self, qid: &QueryId) -> Option<&QueryRequest> {
        self.by_id.get(qid)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &QueryRequest> {
        self.order.iter().map(|qid| &self.by_id[qid])
    }
}

/// Differences between a ranking and the pool it claims to permute.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PermutationCheck {
    /// Documents ranked more than once.
    pub duplicated: Vec<DocumentId>,
    /// Pool documents absent from the ranking.
    pub missing: Vec<DocumentId>,
    /// Ranked documents that are not in the pool.
    pub extraneous: Vec<DocumentId>,
}

impl PermutationCheck {
    pub fn is_permutation(&self) -> bool {
        self.duplicated.is_empty() && self.missing.is_empty() && self.extraneous.is_empty()
    }

    fn describe(&self) -> String {
        let mut parts = Vec::new();
        if let Some(doc) = self.duplicated.first() {
            parts.push(format!("{} duplicated (e.g. {doc})", self.duplicated.len()));
        }
        if let Some(doc) = self.missing.first() {
            parts.push(format!("{} missing (e.g. {doc})", self.missing.len()));
        }
        if let Some(doc) = self.extraneous.first() {
            parts.push(format!("{} extraneous (e.g. {doc})", self.extraneous.len()));
        }
        parts.join(", ")
    }
}

/// One system output: a permutation of a query's pool.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranking {
    qid: QueryId,
    order: Vec<DocumentId>,
}

impl Ranking {
    pub fn new(qid: QueryId, order: Vec<DocumentId>) -> Self {
        Ranking { qid, order }
    }

    pub fn qid(&self) -> &QueryId {
        &self.qid
    }

    pub fn order(&self) -> &[DocumentId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Compares this ranking against the pool it should permute.
    pub fn check_permutation(&self, request: &QueryRequest) -> PermutationCheck {
        let mut check = PermutationCheck::default();
        let mut seen = BTreeSet::new();
        for doc in &self.order {
            if !seen.insert(doc.clone()) && !check.duplicated.contains(doc) {
                check.duplicated.push(doc.clone());
            }
            if !request.pool().contains(doc) && !check.extraneous.contains(doc) {
                check.extraneous.push(doc.clone());
            }
        }
        for doc in request.pool() {
            if !seen.contains(doc) {
                check.missing.push(doc.clone());
            }
        }
        check
    }

    /// Validates that the ranking answers `request` with an exact permutation
    /// of its pool.
    pub fn validate_against(&self, request: &QueryRequest) -> Result<()> {
        if self.qid != *request.qid() {
            return Err(Error::QidMismatch {
                expected: request.qid().clone(),
                found: self.qid.clone(),
            });
        }
        let check = self.check_permutation(request);
        if !check.is_permutation() {
            return Err(Error::NotPermutation {
                qid: self.qid.clone(),
                detail: check.describe(),
            });
        }
        Ok(())
    }
}

/// A numbered ranking inside a sequence. Numbers are 1-based.
#[derive(Clone, Debug)]
pub struct SequenceEntry {
    pub number: u64,
    pub ranking: Ranking,
}

impl SequenceEntry {
    pub fn qid(&self) -> &QueryId {
        self.ranking.qid()
    }
}

/// The ordered rankings a system produced over one query sequence; everything
/// the amortized metrics fold over.
#[derive(Clone, Debug)]
pub struct RankingSequence {
    sequence_id: u64,
    entries: Vec<SequenceEntry>,
}

impl RankingSequence {
    /// Entry numbers must be strictly increasing. Gaps are tolerated here
    /// (run files may legitimately skip numbers); loaders surface them as
    /// warnings and [`Self::is_contiguous`] reports them.
    pub fn new(sequence_id: u64, entries: Vec<SequenceEntry>) -> Result<Self> {
        let mut last = 0u64;
        for entry in &entries {
            if entry.number <= last {
                return Err(Error::NonMonotonicSequence {
                    sequence: sequence_id,
                    number: entry.number,
                });
            }
            last = entry.number;
        }
        Ok(RankingSequence {
            sequence_id,
            entries,
        })
    }

    /// Builds a sequence numbered 1..=n, the shape generators emit.
    pub fn contiguous(sequence_id: u64, rankings: Vec<Ranking>) -> Self {
        let entries = rankings
            .into_iter()
            .enumerate()
            .map(|(i, ranking)| SequenceEntry {
                number: i as u64 + 1,
                ranking,
            })
            .collect();
        RankingSequence {
            sequence_id,
            entries,
        }
    }

    pub fn sequence_id(&self) -> u64 {
        self.sequence_id
    }

    pub fn entries(&self) -> &[SequenceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_contiguous(&self) -> bool {
        self.entries
            .iter()
            .enumerate()
            .all(|(i, entry)| entry.number == i as u64 + 1)
    }
}

/// Total map author -> group, plus the set of groups under evaluation.
#[derive(Clone, Debug)]
pub struct GroupAssignment {
    assignment: BTreeMap<AuthorId, GroupId>,
    universe: BTreeSet<GroupId>,
}

impl GroupAssignment {
    pub fn builder() -> GroupAssignmentBuilder {
        GroupAssignmentBuilder::default()
    }

    pub fn group_of(&self, author: &AuthorId) -> Option<&GroupId> {
        self.assignment.get(author)
    }

    pub fn universe(&self) -> &BTreeSet<GroupId> {
        &self.universe
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AuthorId, &GroupId)> {
        self.assignment.iter()
    }

    /// Returns a copy in which every author from `authors` that has no group
    /// is assigned to `unknown`. Used by the `--unknown-as-group` switch;
    /// by default unassigned authors are excluded from group totals.
    pub fn with_unknown_group<'a>(
        &self,
        authors: impl IntoIterator<Item = &'a AuthorId>,
        unknown: GroupId,
    ) -> GroupAssignment {
        let mut assignment = self.assignment.clone();
        for author in authors {
            assignment
                .entry(author.clone())
                .or_insert_with(|| unknown.clone());
        }
        let mut universe = self.universe.clone();
        universe.insert(unknown);
        GroupAssignment {
            assignment,
            universe,
        }
    }
}

/// Builder enforcing the one-group-per-author rule.
#[derive(Debug, Default)]
pub struct GroupAssignmentBuilder {
    assignment: BTreeMap<AuthorId, GroupId>,
    declared: BTreeSet<GroupId>,
}

impl GroupAssignmentBuilder {
    /// Assigns an author to a group. Re-assigning the same group is a no-op;
    /// a different group is an error.
    pub fn assign(&mut self, author: AuthorId, group: GroupId) -> Result<()> {
        match self.assignment.get(&author) {
            Some(existing) if *existing != group => Err(Error::ConflictingGroup {
                author,
                existing: existing.clone(),
                new: group,
            }),
            Some(_) => Ok(()),
            None => {
                self.declared.insert(group.clone());
                self.assignment.insert(author, group);
                Ok(())
            }
        }
    }

    /// Adds a group to the universe even if no author belongs to it.
    pub fn declare_group(&mut self, group: GroupId) {
        self.declared.insert(group);
    }

    pub fn build(self) -> Result<GroupAssignment> {
        if self.declared.is_empty() {
            return Err(Error::EmptyGroupUniverse);
        }
        Ok(GroupAssignment {
            assignment: self.assignment,
            universe: self.declared,
        })
    }
}

/// Amortization mode: fold the whole sequence into one accumulator (micro) or
/// evaluate each distinct query's partition separately and average (macro).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Amortization {
    Micro,
    Macro,
}

impl fmt::Display for Amortization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Amortization::Micro => f.write_str("micro"),
            Amortization::Macro => f.write_str("macro"),
        }
    }
}

impl std::str::FromStr for Amortization {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "micro" => Ok(Amortization::Micro),
            "macro" => Ok(Amortization::Macro),
            other => Err(format!("unknown amortization mode '{other}'")),
        }
    }
}

/// Browsing-model and aggregation parameters.
///
/// Defaults match the track's evaluation setting: gamma = 0.5 and a linear
/// stop probability p(s|d) = 0.7 * r_d, micro-amortized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalParams {
    gamma: f64,
    stop_coefficient: f64,
    amortization: Amortization,
}

impl EvalParams {
    pub const DEFAULT_GAMMA: f64 = 0.5;
    pub const DEFAULT_STOP_COEFFICIENT: f64 = 0.7;

    pub fn new(gamma: f64, stop_coefficient: f64, amortization: Amortization) -> Result<Self> {
        if !(gamma.is_finite() && (0.0..1.0).contains(&gamma)) {
            return Err(Error::InvalidGamma(gamma));
        }
        if !(stop_coefficient.is_finite() && (0.0..=1.0).contains(&stop_coefficient)) {
            return Err(Error::InvalidStopCoefficient(stop_coefficient));
        }
        Ok(EvalParams {
            gamma,
            stop_coefficient,
            amortization,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn stop_coefficient(&self) -> f64 {
        self.stop_coefficient
    }

    pub fn amortization(&self) -> Amortization {
        self.amortization
    }

    pub fn with_amortization(mut self, amortization: Amortization) -> Self {
        self.amortization = amortization;
        self
    }
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            gamma: Self::DEFAULT_GAMMA,
            stop_coefficient: Self::DEFAULT_STOP_COEFFICIENT,
            amortization: Amortization::Micro,
        }
    }
}

/// Evaluation output: per-group exposure and relevance shares, per-group
/// deviations, their l2 norm, and mean utility over the sequence.
#[derive(Clone, Debug, Serialize)]
pub struct EvalResult {
    pub exposure_share: BTreeMap<GroupId, f64>,
    pub relevance_share: BTreeMap<GroupId, f64>,
    pub deviation: BTreeMap<GroupId, f64>,
    pub unfairness: f64,
    pub mean_utility: f64,
    pub rankings_evaluated: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn did(s: &str) -> DocumentId {
        DocumentId::new(s).unwrap()
    }

    fn aid(s: &str) -> AuthorId {
        AuthorId::new(s).unwrap()
    }

    fn qid(s: &str) -> QueryId {
        QueryId::new(s).unwrap()
    }

    fn gid(s: &str) -> GroupId {
        GroupId::new(s).unwrap()
    }

    fn request(docs: &[&str]) -> QueryRequest {
        QueryRequest::new(
            qid("q1"),
            "test",
            1.0,
            docs.iter().map(|d| did(d)).collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn identifiers_reject_empty() {
        assert!(DocumentId::new("").is_err());
        assert!(AuthorId::new("").is_err());
        assert!(QueryId::new("").is_err());
        assert!(GroupId::new("").is_err());
        assert_eq!(did("s2:abc").as_str(), "s2:abc");
    }

    #[test]
    fn relevance_is_binary() {
        assert!(Relevance::new(0).is_ok());
        assert!(Relevance::new(1).is_ok());
        assert!(Relevance::new(2).is_err());
        assert!(Relevance::RELEVANT.is_relevant());
        assert_eq!(Relevance::NOT_RELEVANT.as_f64(), 0.0);
    }

    #[test]
    fn document_rejects_duplicate_author() {
        let err = Document::new(did("d1"), vec![aid("a1"), aid("a1")], None, None);
        assert!(matches!(err, Err(Error::DuplicateAuthor { .. })));
        // empty author list is fine
        assert!(Document::new(did("d1"), vec![], None, None).is_ok());
    }

    #[test]
    fn query_request_validates_pool_and_relevance() {
        assert!(matches!(
            QueryRequest::new(qid("q1"), "t", 1.0, BTreeSet::new(), None),
            Err(Error::EmptyPool { .. })
        ));
        assert!(matches!(
            QueryRequest::new(qid("q1"), "t", -0.5, [did("d1")].into(), None),
            Err(Error::InvalidFrequency { .. })
        ));
        let outside = HashMap::from([(did("d9"), Relevance::RELEVANT)]);
        assert!(matches!(
            QueryRequest::new(qid("q1"), "t", 1.0, [did("d1")].into(), Some(outside)),
            Err(Error::RelevanceOutsidePool { .. })
        ));
        // missing labels are materialized as not-relevant
        let partial = HashMap::from([(did("d1"), Relevance::RELEVANT)]);
        let req = QueryRequest::new(
            qid("q1"),
            "t",
            1.0,
            [did("d1"), did("d2")].into(),
            Some(partial),
        )
        .unwrap();
        assert_eq!(req.relevance_of(&did("d2")).unwrap(), Relevance::NOT_RELEVANT);
    }

    #[test]
    fn ranking_permutation_check() {
        let req = request(&["d1", "d2", "d3"]);

        let ok = Ranking::new(qid("q1"), vec![did("d2"), did("d3"), did("d1")]);
        assert!(ok.validate_against(&req).is_ok());

        let dup = Ranking::new(qid("q1"), vec![did("d1"), did("d1"), did("d2")]);
        let check = dup.check_permutation(&req);
        assert_eq!(check.duplicated, vec![did("d1")]);
        assert_eq!(check.missing, vec![did("d3")]);
        assert!(dup.validate_against(&req).is_err());

        let missing = Ranking::new(qid("q1"), vec![did("d1"), did("d2")]);
        assert!(!missing.check_permutation(&req).is_permutation());

        let extraneous = Ranking::new(
            qid("q1"),
            vec![did("d1"), did("d2"), did("d3"), did("d4")],
        );
        let check = extraneous.check_permutation(&req);
        assert_eq!(check.extraneous, vec![did("d4")]);

        let wrong_qid = Ranking::new(qid("q2"), vec![did("d1"), did("d2"), did("d3")]);
        assert!(matches!(
            wrong_qid.validate_against(&req),
            Err(Error::QidMismatch { .. })
        ));
    }

    #[test]
    fn sequence_numbers_strictly_increase() {
        let entry = |n: u64| SequenceEntry {
            number: n,
            ranking: Ranking::new(qid("q1"), vec![did("d1")]),
        };
        assert!(RankingSequence::new(0, vec![entry(1), entry(2)]).is_ok());
        assert!(RankingSequence::new(0, vec![entry(1), entry(1)]).is_err());
        assert!(RankingSequence::new(0, vec![entry(2), entry(1)]).is_err());

        // gaps load, but are not contiguous
        let gappy = RankingSequence::new(0, vec![entry(1), entry(3)]).unwrap();
        assert!(!gappy.is_contiguous());
        let seq = RankingSequence::contiguous(
            4,
            vec![Ranking::new(qid("q1"), vec![did("d1")])],
        );
        assert!(seq.is_contiguous());
        assert_eq!(seq.sequence_id(), 4);
    }

    #[test]
    fn group_assignment_rejects_conflicts() {
        let mut builder = GroupAssignment::builder();
        builder.assign(aid("a1"), gid("g1")).unwrap();
        // same group again: silently deduplicated
        builder.assign(aid("a1"), gid("g1")).unwrap();
        let err = builder.assign(aid("a1"), gid("g2"));
        assert!(matches!(err, Err(Error::ConflictingGroup { .. })));
        builder.declare_group(gid("g3"));
        let groups = builder.build().unwrap();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups.universe().len(), 2);
        assert_eq!(groups.group_of(&aid("a1")), Some(&gid("g1")));
    }

    #[test]
    fn group_assignment_requires_universe() {
        assert!(matches!(
            GroupAssignment::builder().build(),
            Err(Error::EmptyGroupUniverse)
        ));
    }

    #[test]
    fn unknown_group_extension() {
        let mut builder = GroupAssignment::builder();
        builder.assign(aid("a1"), gid("g1")).unwrap();
        let groups = builder.build().unwrap();
        let authors = [aid("a1"), aid("a2")];
        let extended = groups.with_unknown_group(authors.iter(), gid("unknown"));
        assert_eq!(extended.group_of(&aid("a2")), Some(&gid("unknown")));
        assert_eq!(extended.group_of(&aid("a1")), Some(&gid("g1")));
        assert_eq!(extended.universe().len(), 2);
    }

    #[test]
    fn eval_params_ranges() {
        assert!(EvalParams::new(1.0, 0.7, Amortization::Micro).is_err());
        assert!(EvalParams::new(-0.1, 0.7, Amortization::Micro).is_err());
        assert!(EvalParams::new(0.5, 1.1, Amortization::Micro).is_err());
        assert!(EvalParams::new(0.5, -0.1, Amortization::Micro).is_err());
        assert!(EvalParams::new(0.0, 0.0, Amortization::Micro).is_ok());
        assert!(EvalParams::new(0.999, 1.0, Amortization::Macro).is_ok());

        let params = EvalParams::default();
        assert_eq!(params.gamma(), 0.5);
        assert_eq!(params.stop_coefficient(), 0.7);
        assert_eq!(params.amortization(), Amortization::Micro);
    }

    #[test]
    fn query_set_rejects_duplicates() {
        let req = request(&["d1"]);
        assert!(matches!(
            QuerySet::from_requests([req.clone(), req]),
            Err(Error::DuplicateQuery { .. })
        ));
    }
}
