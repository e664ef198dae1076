//! C ABI over the fairrank evaluation toolkit.
//!
//! Callers hold opaque handles (`FrWorkload`, `FrReport`) created and
//! destroyed by paired `_load`/`_free` functions. Every fallible call
//! returns an [`FrStatus`]; on anything other than `Ok` a human-readable
//! message is available from [`fr_last_error`] until the next failing call
//! on the same thread. Strings crossing the boundary are NUL-terminated
//! UTF-8; pointers returned by getters borrow from their handle and die
//! with it. Panics never unwind across the boundary: they are caught and
//! reported as [`FrStatus::Panic`].
//!
//! Safety contract, shared by every function here: pointer arguments must
//! be null or valid for the access the signature implies, handle pointers
//! must come from this library and not already be freed, and C strings
//! must be NUL-terminated. Null handles are rejected (status calls) or
//! answered with a zero value (count and getter calls); anything else the
//! caller gets wrong is undefined behavior, as usual at a C boundary.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use libc::c_char;

use fairrank::error::ErrorClass;
use fairrank::io;
use fairrank::metrics::{evaluate_pooled, EvalOutcome};
use fairrank::model::{Amortization, Corpus, EvalParams, GroupAssignment, GroupId, QuerySet};
use fairrank::rerank::{run_sequence, Strategy};
use fairrank::seqgen::{generate_sequences, QuerySequence};
use fairrank::Error;

/// Status code returned by every fallible function. The numeric values
/// match the command-line tool's exit codes where the categories overlap.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrStatus {
    /// The call succeeded.
    Ok = 0,
    /// A pointer was null, a string was not UTF-8, or a parameter was
    /// outside its documented domain.
    InvalidArgument = 1,
    /// A file could not be read or parsed.
    DataFormat = 2,
    /// Well-formed input violated a semantic rule.
    Validation = 3,
    /// The requested metric is undefined on the given data.
    Degenerate = 4,
    /// An internal panic was caught at the boundary.
    Panic = 5,
}

/// Reranking strategy selector for [`fr_rerank`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrStrategy {
    /// Shuffle each pool uniformly.
    Random = 0,
    /// Order by predicted relevance, best first.
    MaxUtility = 1,
    /// Trade predicted utility against accumulated group exposure.
    Controller = 2,
}

/// Evaluation inputs loaded once and shared across calls: the query set,
/// the document corpus, and the author-to-group assignment.
pub struct FrWorkload {
    queries: QuerySet,
    corpus: Corpus,
    groups: GroupAssignment,
    warnings: Vec<CString>,
}

/// Result of evaluating one run file. Group-level getters return data only
/// while [`fr_report_is_defined`] is true.
pub struct FrReport {
    mean_utility: f64,
    rankings: u64,
    unfairness: Option<f64>,
    undefined_reason: Option<CString>,
    group_names: Vec<CString>,
    group_stats: Vec<[f64; 3]>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<Vec<u8>>) {
    let text = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained a NUL byte").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

fn fail(err: &Error) -> FrStatus {
    set_error(err.to_string());
    match err.class() {
        ErrorClass::Usage => FrStatus::InvalidArgument,
        ErrorClass::DataFormat => FrStatus::DataFormat,
        ErrorClass::Validation => FrStatus::Validation,
        ErrorClass::Degenerate => FrStatus::Degenerate,
    }
}

fn guard(body: impl FnOnce() -> FrStatus) -> FrStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic caught at the C boundary");
            FrStatus::Panic
        }
    }
}

unsafe fn required_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, FrStatus> {
    if ptr.is_null() {
        set_error(format!("{what} must not be null"));
        return Err(FrStatus::InvalidArgument);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(text) => Ok(text),
        Err(_) => {
            set_error(format!("{what} is not valid UTF-8"));
            Err(FrStatus::InvalidArgument)
        }
    }
}

unsafe fn optional_str<'a>(ptr: *const c_char, what: &str) -> Result<Option<&'a str>, FrStatus> {
    if ptr.is_null() {
        return Ok(None);
    }
    required_str(ptr, what).map(Some)
}

unsafe fn workload_ref<'a>(ptr: *const FrWorkload) -> Result<&'a FrWorkload, FrStatus> {
    if ptr.is_null() {
        set_error("workload must not be null");
        return Err(FrStatus::InvalidArgument);
    }
    Ok(&*ptr)
}

unsafe fn report_ref<'a>(ptr: *const FrReport) -> Result<&'a FrReport, FrStatus> {
    if ptr.is_null() {
        set_error("report must not be null");
        return Err(FrStatus::InvalidArgument);
    }
    Ok(&*ptr)
}

fn params_for(gamma: f64, stop_coefficient: f64, amortization: Amortization) -> Result<EvalParams, FrStatus> {
    EvalParams::new(gamma, stop_coefficient, amortization).map_err(|err| fail(&err))
}

/// Message from the most recent failing call on this thread. Never null;
/// empty before the first failure. Valid until the next failing call on
/// the same thread.
#[no_mangle]
pub extern "C" fn fr_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string, e.g. "0.1.0".
#[no_mangle]
pub extern "C" fn fr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Loads queries, corpus, and group assignment from their files. On success
/// writes a handle to `out`; free it with [`fr_workload_free`]. When
/// `unknown_group` is non-null, corpus authors missing from the group file
/// are assigned to a group of that name instead of staying unassigned.
/// Non-fatal corpus irregularities are kept as warnings on the handle.
#[no_mangle]
pub unsafe extern "C" fn fr_workload_load(
    queries_path: *const c_char,
    corpus_path: *const c_char,
    groups_path: *const c_char,
    unknown_group: *const c_char,
    out: *mut *mut FrWorkload,
) -> FrStatus {
    guard(|| {
        if out.is_null() {
            set_error("out must not be null");
            return FrStatus::InvalidArgument;
        }
        *out = ptr::null_mut();
        let queries_path = match required_str(queries_path, "queries_path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let corpus_path = match required_str(corpus_path, "corpus_path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let groups_path = match required_str(groups_path, "groups_path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let unknown_group = match optional_str(unknown_group, "unknown_group") {
            Ok(s) => s,
            Err(status) => return status,
        };

        let queries = match io::load_queries(Path::new(queries_path)) {
            Ok(queries) => queries,
            Err(err) => return fail(&err),
        };
        let (corpus, load_warnings) = match io::load_corpus(Path::new(corpus_path)) {
            Ok(pair) => pair,
            Err(err) => return fail(&err),
        };
        let mut groups = match io::load_groups(Path::new(groups_path)) {
            Ok(groups) => groups,
            Err(err) => return fail(&err),
        };
        if let Some(name) = unknown_group {
            let unknown = match GroupId::new(name) {
                Ok(id) => id,
                Err(err) => return fail(&err),
            };
            let authors: BTreeSet<_> = corpus
                .iter()
                .flat_map(|doc| doc.authors().iter().cloned())
                .collect();
            groups = groups.with_unknown_group(authors.iter(), unknown);
        }

        let warnings = load_warnings
            .into_iter()
            .map(|w| CString::new(w.to_string()).unwrap_or_default())
            .collect();
        let handle = Box::new(FrWorkload {
            queries,
            corpus,
            groups,
            warnings,
        });
        *out = Box::into_raw(handle);
        FrStatus::Ok
    })
}

/// Number of warnings collected while loading the workload.
#[no_mangle]
pub unsafe extern "C" fn fr_workload_warning_count(workload: *const FrWorkload) -> usize {
    if workload.is_null() {
        return 0;
    }
    (&*workload).warnings.len()
}

/// Warning text by index, or null when out of range. Borrowed from the
/// workload handle.
#[no_mangle]
pub unsafe extern "C" fn fr_workload_warning(
    workload: *const FrWorkload,
    index: usize,
) -> *const c_char {
    if workload.is_null() {
        return ptr::null();
    }
    match (&*workload).warnings.get(index) {
        Some(text) => text.as_ptr(),
        None => ptr::null(),
    }
}

/// Frees a workload handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fr_workload_free(workload: *mut FrWorkload) {
    if !workload.is_null() {
        drop(Box::from_raw(workload));
    }
}

/// Evaluates the run in `run_path` against the workload and writes a report
/// handle to `out`; free it with [`fr_report_free`]. `macro_amortized`
/// false pools all rankings into one accumulation, true averages per-query
/// evaluations instead. A run whose unfairness is undefined still succeeds:
/// the report carries the utility and [`fr_report_unfairness`] explains why
/// the rest is missing.
#[no_mangle]
pub unsafe extern "C" fn fr_evaluate_run(
    workload: *const FrWorkload,
    run_path: *const c_char,
    gamma: f64,
    stop_coefficient: f64,
    macro_amortized: bool,
    out: *mut *mut FrReport,
) -> FrStatus {
    guard(|| {
        if out.is_null() {
            set_error("out must not be null");
            return FrStatus::InvalidArgument;
        }
        *out = ptr::null_mut();
        let workload = match workload_ref(workload) {
            Ok(w) => w,
            Err(status) => return status,
        };
        let run_path = match required_str(run_path, "run_path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let amortization = if macro_amortized {
            Amortization::Macro
        } else {
            Amortization::Micro
        };
        let params = match params_for(gamma, stop_coefficient, amortization) {
            Ok(params) => params,
            Err(status) => return status,
        };

        let (sequences, _warnings) = match io::load_run(Path::new(run_path)) {
            Ok(pair) => pair,
            Err(err) => return fail(&err),
        };
        let outcome = match evaluate_pooled(
            &sequences,
            &workload.queries,
            &workload.corpus,
            &workload.groups,
            &params,
        ) {
            Ok(outcome) => outcome,
            Err(err) => return fail(&err),
        };

        let report = match outcome {
            EvalOutcome::Defined(result) => {
                let group_names = result
                    .deviation
                    .keys()
                    .map(|g| CString::new(g.to_string()).unwrap_or_default())
                    .collect();
                let group_stats = result
                    .deviation
                    .iter()
                    .map(|(g, dev)| [result.exposure_share[g], result.relevance_share[g], *dev])
                    .collect();
                FrReport {
                    mean_utility: result.mean_utility,
                    rankings: result.rankings_evaluated as u64,
                    unfairness: Some(result.unfairness),
                    undefined_reason: None,
                    group_names,
                    group_stats,
                }
            }
            EvalOutcome::Undefined {
                mean_utility,
                rankings_evaluated,
                reason,
            } => FrReport {
                mean_utility,
                rankings: rankings_evaluated as u64,
                unfairness: None,
                undefined_reason: Some(CString::new(reason).unwrap_or_default()),
                group_names: Vec::new(),
                group_stats: Vec::new(),
            },
        };
        *out = Box::into_raw(Box::new(report));
        FrStatus::Ok
    })
}

/// Mean utility per ranking. Defined even when unfairness is not.
#[no_mangle]
pub unsafe extern "C" fn fr_report_mean_utility(
    report: *const FrReport,
    out: *mut f64,
) -> FrStatus {
    guard(|| {
        let report = match report_ref(report) {
            Ok(r) => r,
            Err(status) => return status,
        };
        if out.is_null() {
            set_error("out must not be null");
            return FrStatus::InvalidArgument;
        }
        *out = report.mean_utility;
        FrStatus::Ok
    })
}

/// Number of rankings the report covers. Zero when `report` is null.
#[no_mangle]
pub unsafe extern "C" fn fr_report_rankings(report: *const FrReport) -> u64 {
    if report.is_null() {
        return 0;
    }
    (&*report).rankings
}

/// True when unfairness and the per-group breakdown are defined. False for
/// a null handle.
#[no_mangle]
pub unsafe extern "C" fn fr_report_is_defined(report: *const FrReport) -> bool {
    if report.is_null() {
        return false;
    }
    (&*report).unfairness.is_some()
}

/// Writes the unfairness score to `out`. Returns `Degenerate` when the run
/// left unfairness undefined; the reason is then in [`fr_last_error`].
#[no_mangle]
pub unsafe extern "C" fn fr_report_unfairness(report: *const FrReport, out: *mut f64) -> FrStatus {
    guard(|| {
        let report = match report_ref(report) {
            Ok(r) => r,
            Err(status) => return status,
        };
        if out.is_null() {
            set_error("out must not be null");
            return FrStatus::InvalidArgument;
        }
        match report.unfairness {
            Some(value) => {
                *out = value;
                FrStatus::Ok
            }
            None => {
                let reason = report
                    .undefined_reason
                    .as_deref()
                    .map(|r| r.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "unfairness is undefined".to_string());
                set_error(reason);
                FrStatus::Degenerate
            }
        }
    })
}

/// Number of author groups in the report; zero when unfairness is
/// undefined or `report` is null.
#[no_mangle]
pub unsafe extern "C" fn fr_report_group_count(report: *const FrReport) -> usize {
    if report.is_null() {
        return 0;
    }
    (&*report).group_names.len()
}

/// Group name by index, or null when out of range. Borrowed from the
/// report handle.
#[no_mangle]
pub unsafe extern "C" fn fr_report_group_name(
    report: *const FrReport,
    index: usize,
) -> *const c_char {
    if report.is_null() {
        return ptr::null();
    }
    match (&*report).group_names.get(index) {
        Some(name) => name.as_ptr(),
        None => ptr::null(),
    }
}

/// Per-group shares by index: exposure share, relevance share, and their
/// difference. Null out-pointers are skipped.
#[no_mangle]
pub unsafe extern "C" fn fr_report_group_stats(
    report: *const FrReport,
    index: usize,
    exposure_share: *mut f64,
    relevance_share: *mut f64,
    deviation: *mut f64,
) -> FrStatus {
    guard(|| {
        let report = match report_ref(report) {
            Ok(r) => r,
            Err(status) => return status,
        };
        let stats = match report.group_stats.get(index) {
            Some(stats) => stats,
            None => {
                set_error(format!(
                    "group index {index} out of range ({} groups)",
                    report.group_stats.len()
                ));
                return FrStatus::InvalidArgument;
            }
        };
        if !exposure_share.is_null() {
            *exposure_share = stats[0];
        }
        if !relevance_share.is_null() {
            *relevance_share = stats[1];
        }
        if !deviation.is_null() {
            *deviation = stats[2];
        }
        FrStatus::Ok
    })
}

/// Frees a report handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fr_report_free(report: *mut FrReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Checks that the run in `run_path` is admissible: every ranking must be a
/// permutation of its query's pool, and with `sequence_path` given, must
/// answer the queries that sequence asked, in order. `allow_partial`
/// forgives omitted positions. Returns `Ok` when admissible; otherwise
/// `Validation` with the violations listed in [`fr_last_error`].
#[no_mangle]
pub unsafe extern "C" fn fr_validate_run(
    workload: *const FrWorkload,
    run_path: *const c_char,
    sequence_path: *const c_char,
    allow_partial: bool,
) -> FrStatus {
    guard(|| {
        let workload = match workload_ref(workload) {
            Ok(w) => w,
            Err(status) => return status,
        };
        let run_path = match required_str(run_path, "run_path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let sequence_path = match optional_str(sequence_path, "sequence_path") {
            Ok(s) => s,
            Err(status) => return status,
        };

        let (sequences, _warnings) = match io::load_run(Path::new(run_path)) {
            Ok(pair) => pair,
            Err(err) => return fail(&err),
        };
        let expected = match sequence_path {
            Some(path) => match io::load_sequences(Path::new(path)) {
                Ok(expected) => Some(expected),
                Err(err) => return fail(&err),
            },
            None => None,
        };

        let report = io::validate_run(
            &sequences,
            &workload.queries,
            expected.as_deref(),
            allow_partial,
        );
        if report.is_admissible() {
            return FrStatus::Ok;
        }
        const SHOWN: usize = 8;
        let violations = report.violations();
        let mut message = violations
            .iter()
            .take(SHOWN)
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        if violations.len() > SHOWN {
            message.push_str(&format!("; and {} more", violations.len() - SHOWN));
        }
        set_error(message);
        FrStatus::Validation
    })
}

/// Reranks every pool with the chosen strategy and writes the run to
/// `out_path`. With `sequence_path` the run follows that query sequence and
/// accumulates state across impressions; without it each query is answered
/// once, in query-file order. `lambda` only matters for the controller
/// strategy: 0 ignores fairness, 1 ignores utility.
#[no_mangle]
pub unsafe extern "C" fn fr_rerank(
    workload: *const FrWorkload,
    strategy: FrStrategy,
    sequence_path: *const c_char,
    gamma: f64,
    stop_coefficient: f64,
    lambda: f64,
    seed: u64,
    out_path: *const c_char,
) -> FrStatus {
    guard(|| {
        let workload = match workload_ref(workload) {
            Ok(w) => w,
            Err(status) => return status,
        };
        let sequence_path = match optional_str(sequence_path, "sequence_path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let out_path = match required_str(out_path, "out_path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let strategy = match strategy {
            FrStrategy::Random => Strategy::Random,
            FrStrategy::MaxUtility => Strategy::MaxUtility,
            FrStrategy::Controller => Strategy::Controller,
        };
        let params = match params_for(gamma, stop_coefficient, Amortization::Micro) {
            Ok(params) => params,
            Err(status) => return status,
        };

        let sequences: Vec<QuerySequence> = match sequence_path {
            Some(path) => match io::load_sequences(Path::new(path)) {
                Ok(sequences) => sequences,
                Err(err) => return fail(&err),
            },
            None => vec![QuerySequence {
                sequence_id: 0,
                qids: workload.queries.iter().map(|q| q.qid().clone()).collect(),
            }],
        };

        let mut runs = Vec::with_capacity(sequences.len());
        for sequence in &sequences {
            let run = run_sequence(
                strategy,
                sequence,
                &workload.queries,
                &workload.corpus,
                Some(&workload.groups),
                &params,
                lambda,
                seed,
            );
            match run {
                Ok(run) => runs.push(run),
                Err(err) => return fail(&err),
            }
        }
        match io::write_run(Path::new(out_path), &runs) {
            Ok(()) => FrStatus::Ok,
            Err(err) => fail(&err),
        }
    })
}

/// Samples `num_sequences` query sequences of `length` draws each,
/// proportional to query frequency, and writes them to `out_path` in the
/// sequence CSV format. The same seed always produces the same file.
#[no_mangle]
pub unsafe extern "C" fn fr_generate_sequences(
    workload: *const FrWorkload,
    num_sequences: u64,
    length: usize,
    seed: u64,
    out_path: *const c_char,
) -> FrStatus {
    guard(|| {
        let workload = match workload_ref(workload) {
            Ok(w) => w,
            Err(status) => return status,
        };
        let out_path = match required_str(out_path, "out_path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let sequences = match generate_sequences(&workload.queries, num_sequences, length, seed) {
            Ok(sequences) => sequences,
            Err(err) => return fail(&err),
        };
        match io::write_sequences(Path::new(out_path), &sequences, seed) {
            Ok(()) => FrStatus::Ok,
            Err(err) => fail(&err),
        }
    })
}
