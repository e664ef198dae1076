//! End-to-end checks of the command-line interface against hand-written
//! fixtures. The expected utilities, shares, and unfairness values were
//! computed independently from the cascade-model definitions and are
//! frozen here; parsing is numeric (1e-12) so the assertions pin the math,
//! not one summation order.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

// Micro-amortized goldens for fixtures/run.jsonl.
const RUN_UTILITY: f64 = 0.6358333333333333;
const RUN_UNFAIRNESS: f64 = 0.2163649962012377;
const RUN_G1_EXPOSURE: f64 = 0.4184354154032747;
const RUN_G1_RELEVANCE: f64 = 0.5714285714285715;
const RUN_G1_DEVIATION: f64 = -0.15299315602529678;
// Macro-amortized goldens for the same run.
const RUN_MACRO_UNFAIRNESS: f64 = 0.06105659899227832;
const RUN_MACRO_G1_EXPOSURE: f64 = 0.2901597981497056;
const RUN_MACRO_G1_RELEVANCE: f64 = 0.33333333333333337;
// Micro goldens for fixtures/run2.jsonl.
const RUN2_UTILITY: f64 = 0.5774999999999999;
const RUN2_UNFAIRNESS: f64 = 0.26426250706018695;

const TOLERANCE: f64 = 1e-12;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn fairrank(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairrank"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn parse_report_csv(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("run,utility,unfairness,mode,group_def"),
        "unexpected header in {}",
        path.display()
    );
    lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn close(got: &str, want: f64) -> bool {
    (got.parse::<f64>().unwrap() - want).abs() < TOLERANCE
}

#[test]
fn evaluate_micro_matches_the_independent_goldens() {
    let dir = tempfile::tempdir().unwrap();
    let output = fairrank(
        &[
            "evaluate",
            "--run", fixture("run.jsonl").to_str().unwrap(),
            "--queries", fixture("queries.jsonl").to_str().unwrap(),
            "--corpus", fixture("corpus.jsonl").to_str().unwrap(),
            "--groups", fixture("groups.csv").to_str().unwrap(),
            "--out", "report",
        ],
        dir.path(),
    );
    assert!(output.status.success(), "{}", stderr_of(&output));

    let rows = parse_report_csv(&dir.path().join("report.csv"));
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row[0], "run");
    assert!(close(&row[1], RUN_UTILITY), "utility {}", row[1]);
    assert!(close(&row[2], RUN_UNFAIRNESS), "unfairness {}", row[2]);
    assert_eq!(row[3], "micro");
    assert_eq!(row[4], "groups");

    let json: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let entry = &json.as_array().unwrap()[0];
    assert_eq!(entry["run"], "run");
    assert_eq!(entry["mode"], "micro");
    assert_eq!(entry["group_def"], "groups");
    assert_eq!(entry["rankings_evaluated"], 3);
    assert!((entry["mean_utility"].as_f64().unwrap() - RUN_UTILITY).abs() < TOLERANCE);
    assert!((entry["unfairness"].as_f64().unwrap() - RUN_UNFAIRNESS).abs() < TOLERANCE);
    let g1 = &entry["groups"]["g1"];
    assert!((g1["exposure_share"].as_f64().unwrap() - RUN_G1_EXPOSURE).abs() < TOLERANCE);
    assert!((g1["relevance_share"].as_f64().unwrap() - RUN_G1_RELEVANCE).abs() < TOLERANCE);
    assert!((g1["deviation"].as_f64().unwrap() - RUN_G1_DEVIATION).abs() < TOLERANCE);
    let g2 = &entry["groups"]["g2"];
    assert!((g2["deviation"].as_f64().unwrap() + RUN_G1_DEVIATION).abs() < TOLERANCE);
}

#[test]
fn evaluate_macro_matches_the_independent_goldens() {
    let dir = tempfile::tempdir().unwrap();
    let output = fairrank(
        &[
            "evaluate",
            "--run", fixture("run.jsonl").to_str().unwrap(),
            "--queries", fixture("queries.jsonl").to_str().unwrap(),
            "--corpus", fixture("corpus.jsonl").to_str().unwrap(),
            "--groups", fixture("groups.csv").to_str().unwrap(),
            "--amortization", "macro",
            "--out", "report",
        ],
        dir.path(),
    );
    assert!(output.status.success(), "{}", stderr_of(&output));

    let rows = parse_report_csv(&dir.path().join("report.csv"));
    let row = &rows[0];
    assert!(close(&row[1], RUN_UTILITY), "utility {}", row[1]);
    assert!(close(&row[2], RUN_MACRO_UNFAIRNESS), "unfairness {}", row[2]);
    assert_eq!(row[3], "macro");

    let json: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let g1 = &json.as_array().unwrap()[0]["groups"]["g1"];
    assert!((g1["exposure_share"].as_f64().unwrap() - RUN_MACRO_G1_EXPOSURE).abs() < TOLERANCE);
    assert!((g1["relevance_share"].as_f64().unwrap() - RUN_MACRO_G1_RELEVANCE).abs() < TOLERANCE);
}

#[test]
fn evaluate_degenerate_run_reports_undefined_and_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let output = fairrank(
        &[
            "evaluate",
            "--run", fixture("degenerate.jsonl").to_str().unwrap(),
            "--queries", fixture("queries.jsonl").to_str().unwrap(),
            "--corpus", fixture("corpus.jsonl").to_str().unwrap(),
            "--groups", fixture("groups.csv").to_str().unwrap(),
            "--out", "report",
        ],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(4), "{}", stderr_of(&output));

    let rows = parse_report_csv(&dir.path().join("report.csv"));
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row[0], "degenerate");
    assert!(close(&row[1], 0.0), "utility {}", row[1]);
    assert_eq!(row[2], "undefined");

    let json: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let entry = &json.as_array().unwrap()[0];
    assert!(entry["unfairness"].is_null());
    assert!(entry["undefined_reason"].as_str().unwrap().contains("relevance"));
    assert!(entry.get("groups").is_none() || entry["groups"].is_null());
}

#[test]
fn tradeoff_places_runs_on_the_utility_unfairness_plane() {
    let dir = tempfile::tempdir().unwrap();
    let output = fairrank(
        &[
            "tradeoff",
            "--run", fixture("run.jsonl").to_str().unwrap(),
            "--run", fixture("run2.jsonl").to_str().unwrap(),
            "--queries", fixture("queries.jsonl").to_str().unwrap(),
            "--corpus", fixture("corpus.jsonl").to_str().unwrap(),
            "--groups", fixture("groups.csv").to_str().unwrap(),
            "--out", "tradeoff.csv",
        ],
        dir.path(),
    );
    assert!(output.status.success(), "{}", stderr_of(&output));

    let rows = parse_report_csv(&dir.path().join("tradeoff.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "run");
    assert!(close(&rows[0][1], RUN_UTILITY));
    assert!(close(&rows[0][2], RUN_UNFAIRNESS));
    assert_eq!(rows[1][0], "run2");
    assert!(close(&rows[1][1], RUN2_UTILITY));
    assert!(close(&rows[1][2], RUN2_UNFAIRNESS));
}

#[test]
fn validate_accepts_the_reference_run() {
    let dir = tempfile::tempdir().unwrap();
    let output = fairrank(
        &[
            "validate",
            "--run", fixture("run.jsonl").to_str().unwrap(),
            "--queries", fixture("queries.jsonl").to_str().unwrap(),
            "--sequence", fixture("sequence.csv").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(output.status.success(), "{}", stderr_of(&output));
    assert!(String::from_utf8_lossy(&output.stdout).contains("admissible"));
}

#[test]
fn validate_rejects_non_permutations() {
    let dir = tempfile::tempdir().unwrap();
    let output = fairrank(
        &[
            "validate",
            "--run", fixture("notperm.jsonl").to_str().unwrap(),
            "--queries", fixture("queries.jsonl").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(3));
    let stdout = String::from_utf8_lossy(&output.stdout).into_owned();
    assert!(stdout.contains("d1"), "should name the duplicated doc: {stdout}");
    assert!(stdout.contains("d3"), "should name the missing doc: {stdout}");
}

#[test]
fn validate_flags_wrong_query_against_the_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let output = fairrank(
        &[
            "validate",
            "--run", fixture("mismatch.jsonl").to_str().unwrap(),
            "--queries", fixture("queries.jsonl").to_str().unwrap(),
            "--sequence", fixture("sequence.csv").to_str().unwrap(),
            "--allow-partial",
        ],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn validate_allow_partial_forgives_prefix_runs() {
    let dir = tempfile::tempdir().unwrap();
    let strict = fairrank(
        &[
            "validate",
            "--run", fixture("run2.jsonl").to_str().unwrap(),
            "--queries", fixture("queries.jsonl").to_str().unwrap(),
            "--sequence", fixture("sequence.csv").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(strict.status.code(), Some(3), "missing answers must fail a strict check");

    let partial = fairrank(
        &[
            "validate",
            "--run", fixture("run2.jsonl").to_str().unwrap(),
            "--queries", fixture("queries.jsonl").to_str().unwrap(),
            "--sequence", fixture("sequence.csv").to_str().unwrap(),
            "--allow-partial",
        ],
        dir.path(),
    );
    assert!(partial.status.success(), "{}", stderr_of(&partial));
}

#[test]
fn malformed_run_file_exits_2_with_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let output = fairrank(
        &[
            "evaluate",
            "--run", fixture("badjson.jsonl").to_str().unwrap(),
            "--queries", fixture("queries.jsonl").to_str().unwrap(),
            "--corpus", fixture("corpus.jsonl").to_str().unwrap(),
            "--groups", fixture("groups.csv").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(2));
    let stderr = stderr_of(&output);
    assert!(stderr.contains("badjson.jsonl:1"), "{stderr}");
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad_gamma = fairrank(
        &[
            "evaluate",
            "--run", fixture("run.jsonl").to_str().unwrap(),
            "--queries", fixture("queries.jsonl").to_str().unwrap(),
            "--corpus", fixture("corpus.jsonl").to_str().unwrap(),
            "--groups", fixture("groups.csv").to_str().unwrap(),
            "--gamma", "1.5",
        ],
        dir.path(),
    );
    assert_eq!(bad_gamma.status.code(), Some(1), "{}", stderr_of(&bad_gamma));

    let unknown_flag = fairrank(&["evaluate", "--no-such-flag"], dir.path());
    assert_eq!(unknown_flag.status.code(), Some(1));

    let help = fairrank(&["--help"], dir.path());
    assert_eq!(help.status.code(), Some(0));

    let controller_without_groups = fairrank(
        &[
            "rerank",
            "--strategy", "controller",
            "--queries", fixture("queries.jsonl").to_str().unwrap(),
            "--corpus", fixture("corpus.jsonl").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(controller_without_groups.status.code(), Some(1));
    assert!(stderr_of(&controller_without_groups).contains("--groups"));
}

#[test]
fn gzipped_corpus_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    for (corpus, out) in [("corpus.jsonl", "plain"), ("corpus.jsonl.gz", "gz")] {
        let output = fairrank(
            &[
                "evaluate",
                "--run", fixture("run.jsonl").to_str().unwrap(),
                "--queries", fixture("queries.jsonl").to_str().unwrap(),
                "--corpus", fixture(corpus).to_str().unwrap(),
                "--groups", fixture("groups.csv").to_str().unwrap(),
                "--out", out,
            ],
            dir.path(),
        );
        assert!(output.status.success(), "{}", stderr_of(&output));
    }
    assert_eq!(
        std::fs::read(dir.path().join("plain.csv")).unwrap(),
        std::fs::read(dir.path().join("gz.csv")).unwrap()
    );
    assert_eq!(
        std::fs::read(dir.path().join("plain.json")).unwrap(),
        std::fs::read(dir.path().join("gz.json")).unwrap()
    );
}

#[test]
fn messy_author_metadata_warns_on_stderr_but_loads() {
    let dir = tempfile::tempdir().unwrap();
    let output = fairrank(
        &[
            "evaluate",
            "--run", fixture("run.jsonl").to_str().unwrap(),
            "--queries", fixture("queries.jsonl").to_str().unwrap(),
            "--corpus", fixture("corpus_messy.jsonl").to_str().unwrap(),
            "--groups", fixture("groups.csv").to_str().unwrap(),
            "--out", "report",
        ],
        dir.path(),
    );
    assert!(output.status.success(), "{}", stderr_of(&output));
    let stderr = stderr_of(&output);
    assert!(stderr.contains("warning:"), "{stderr}");
    // The extra document is outside every pool, so the numbers are untouched.
    let rows = parse_report_csv(&dir.path().join("report.csv"));
    assert!(close(&rows[0][1], RUN_UTILITY));
    assert!(close(&rows[0][2], RUN_UNFAIRNESS));
}

#[test]
fn seqgen_writes_the_documented_format() {
    let dir = tempfile::tempdir().unwrap();
    let output = fairrank(
        &[
            "seqgen",
            "--queries", fixture("queries.jsonl").to_str().unwrap(),
            "--sequences", "2",
            "--length", "5",
            "--seed", "9",
            "--out", "seq.csv",
        ],
        dir.path(),
    );
    assert!(output.status.success(), "{}", stderr_of(&output));

    let text = std::fs::read_to_string(dir.path().join("seq.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("# generator=chacha8/weighted-index/v1 seed=9")
    );
    assert_eq!(lines.next(), Some("q_num,qid"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    for (i, row) in rows.iter().enumerate() {
        let (q_num, qid) = row.split_once(',').unwrap();
        let expected = format!("{}.{}", i / 5, i % 5 + 1);
        assert_eq!(q_num, expected);
        assert!(["1", "2", "3"].contains(&qid), "unexpected qid {qid}");
    }
}

#[test]
fn rerank_without_sequence_answers_each_query_once() {
    let dir = tempfile::tempdir().unwrap();
    let output = fairrank(
        &[
            "rerank",
            "--strategy", "maxutil",
            "--queries", fixture("queries.jsonl").to_str().unwrap(),
            "--corpus", fixture("corpus.jsonl").to_str().unwrap(),
            "--out", "run_m.jsonl",
        ],
        dir.path(),
    );
    assert!(output.status.success(), "{}", stderr_of(&output));

    let text = std::fs::read_to_string(dir.path().join("run_m.jsonl")).unwrap();
    let records: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 3);
    assert_eq!(records[0]["q_num"], "0.1");
    assert_eq!(records[0]["qid"], "1");
    // Query "sparse retrieval": d1 and d3 each contain both terms (tie broken
    // by id), d2 contains neither.
    assert_eq!(records[0]["ranking"], serde_json::json!(["d1", "d3", "d2"]));
    assert_eq!(records[1]["q_num"], "0.2");
    assert_eq!(records[1]["qid"], "2");
    assert_eq!(records[2]["q_num"], "0.3");
    assert_eq!(records[2]["qid"], "3");
}

#[test]
fn group_index_builds_the_documented_buckets() {
    let dir = tempfile::tempdir().unwrap();
    let output = fairrank(
        &[
            "group-index",
            "--index", fixture("hindex.csv").to_str().unwrap(),
            "--out", "groups_h.csv",
        ],
        dir.path(),
    );
    assert!(output.status.success(), "{}", stderr_of(&output));

    let text = std::fs::read_to_string(dir.path().join("groups_h.csv")).unwrap();
    assert_eq!(
        text,
        "author_id,group_id\n\
         a1,h<5\n\
         a2,5≤h<15\n\
         a3,5≤h<15\n\
         a4,15≤h<30\n\
         a5,15≤h<30\n\
         a6,h≥30\n\
         a7,h<5\n"
    );
}
