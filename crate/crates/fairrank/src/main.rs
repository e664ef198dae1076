//! `fairrank`: evaluate, generate, rerank, and validate fair-ranking runs.
//!
//! Exit codes: 0 success, 1 usage, 2 data format, 3 validation,
//! 4 degenerate metric (unfairness undefined on the given data).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fairrank::error::{Error, ErrorClass};
use fairrank::io::{self, LoadWarning, ReportRow};
use fairrank::metrics::{evaluate_pooled, EvalOutcome};
use fairrank::model::{Amortization, Corpus, EvalParams, GroupAssignment, GroupId, QuerySet};
use fairrank::rerank::{run_sequence, Strategy};
use fairrank::seqgen::{self, QuerySequence};
use fairrank::Result;

#[derive(Parser)]
#[command(
    name = "fairrank",
    version,
    about = "Fairness-aware evaluation for reranking runs over query sequences",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score runs: mean utility and group-exposure unfairness, to CSV + JSON
    Evaluate(EvaluateArgs),
    /// Evaluate several runs into one utility/unfairness CSV for plotting
    Tradeoff(TradeoffArgs),
    /// Sample query sequences by normalized frequency
    Seqgen(SeqgenArgs),
    /// Produce a run file by reranking a query sequence
    Rerank(RerankArgs),
    /// Check a run for admissibility without scoring it
    Validate(ValidateArgs),
    /// Build a group file by bucketing a per-author index such as h-index
    GroupIndex(GroupIndexArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Continuation probability of the browsing model (track setting: 0.5)
    #[arg(long, default_value_t = EvalParams::DEFAULT_GAMMA)]
    gamma: f64,

    /// Stop-probability coefficient: p(stop) = coef * relevance (track setting: 0.7)
    #[arg(long = "stop-coef", default_value_t = EvalParams::DEFAULT_STOP_COEFFICIENT)]
    stop_coef: f64,
}

impl ModelArgs {
    fn params(&self, amortization: Amortization) -> Result<EvalParams> {
        EvalParams::new(self.gamma, self.stop_coef, amortization)
    }
}

#[derive(Args)]
struct DataArgs {
    /// Queries file (JSON-lines)
    #[arg(long)]
    queries: PathBuf,

    /// Corpus file (JSON-lines, optionally gzip-compressed)
    #[arg(long)]
    corpus: PathBuf,

    /// Group-definition file (CSV author_id,group_id or JSON-lines)
    #[arg(long)]
    groups: PathBuf,

    /// Treat authors absent from the group file as one extra group instead
    /// of excluding them from the totals
    #[arg(long = "unknown-as-group")]
    unknown_as_group: bool,

    /// Label recorded in the group_def report column (default: group file stem)
    #[arg(long = "group-def")]
    group_def: Option<String>,
}

impl DataArgs {
    fn load(&self) -> Result<(QuerySet, Corpus, GroupAssignment, String)> {
        let queries = io::load_queries(&self.queries)?;
        let (corpus, warnings) = io::load_corpus(&self.corpus)?;
        print_warnings(&warnings);
        let mut groups = io::load_groups(&self.groups)?;
        if self.unknown_as_group {
            let unknown = GroupId::new("unknown").expect("constant id");
            let authors: std::collections::BTreeSet<_> = corpus
                .iter()
                .flat_map(|doc| doc.authors().iter().cloned())
                .collect();
            groups = groups.with_unknown_group(authors.iter(), unknown);
        }
        let label = self
            .group_def
            .clone()
            .unwrap_or_else(|| file_stem(&self.groups));
        Ok((queries, corpus, groups, label))
    }
}

#[derive(Args)]
struct EvaluateArgs {
    /// Run files to score (repeatable)
    #[arg(long = "run", required = true, num_args = 1..)]
    runs: Vec<PathBuf>,

    #[command(flatten)]
    data: DataArgs,

    #[command(flatten)]
    model: ModelArgs,

    /// micro: one accumulator over the whole sequence; macro: unweighted
    /// mean over per-query evaluations
    #[arg(long, default_value = "micro", value_parser = parse_amortization)]
    amortization: Amortization,

    /// Base path for the reports; writes <out>.csv and <out>.json
    #[arg(long, default_value = "fairrank-report")]
    out: PathBuf,
}

#[derive(Args)]
struct TradeoffArgs {
    /// Run files to place on the tradeoff plane (repeatable)
    #[arg(long = "run", required = true, num_args = 1..)]
    runs: Vec<PathBuf>,

    #[command(flatten)]
    data: DataArgs,

    #[command(flatten)]
    model: ModelArgs,

    /// Amortization mode for all runs
    #[arg(long, default_value = "micro", value_parser = parse_amortization)]
    amortization: Amortization,

    /// Output CSV path
    #[arg(long, default_value = "tradeoff.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SeqgenArgs {
    /// Queries file (JSON-lines); sampling weights are the frequencies
    #[arg(long)]
    queries: PathBuf,

    /// Number of sequences (track shape: 5)
    #[arg(long, default_value_t = seqgen::DEFAULT_NUM_SEQUENCES)]
    sequences: u64,

    /// Queries per sequence (track shape: 25000)
    #[arg(long, default_value_t = seqgen::DEFAULT_LENGTH)]
    length: usize,

    /// RNG seed; the same seed always yields the same file
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output CSV path
    #[arg(long, default_value = "sequences.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct RerankArgs {
    /// random | maxutil | controller
    #[arg(long, value_parser = parse_strategy)]
    strategy: Strategy,

    /// Queries file (JSON-lines)
    #[arg(long)]
    queries: PathBuf,

    /// Corpus file (JSON-lines, optionally gzip-compressed)
    #[arg(long)]
    corpus: PathBuf,

    /// Group-definition file; required by the controller strategy
    #[arg(long)]
    groups: Option<PathBuf>,

    /// Query-sequence file to answer; without it, the queries file is
    /// answered once in order as sequence 0
    #[arg(long)]
    sequence: Option<PathBuf>,

    /// Fairness weight of the controller objective, 0 = utility only
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,

    /// RNG seed for stochastic strategies
    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[command(flatten)]
    model: ModelArgs,

    /// Output run file (JSON-lines)
    #[arg(long, default_value = "run.jsonl")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Run files to check (repeatable)
    #[arg(long = "run", required = true, num_args = 1..)]
    runs: Vec<PathBuf>,

    /// Queries file (JSON-lines)
    #[arg(long)]
    queries: PathBuf,

    /// Expected query-sequence file; positions and qids must match it
    #[arg(long)]
    sequence: Option<PathBuf>,

    /// Tolerate runs that answer only a prefix of the expected sequence
    #[arg(long = "allow-partial")]
    allow_partial: bool,
}

#[derive(Args)]
struct GroupIndexArgs {
    /// Per-author index table: CSV with columns author_id,<value>
    #[arg(long)]
    index: PathBuf,

    /// Bucket boundaries, strictly increasing (track h-index buckets: 5,15,30)
    #[arg(long, value_delimiter = ',', default_values_t = [5i64, 15, 30])]
    thresholds: Vec<i64>,

    /// Index name used in the group labels
    #[arg(long, default_value = "h")]
    prefix: String,

    /// Output group file (CSV)
    #[arg(long, default_value = "groups.csv")]
    out: PathBuf,
}

fn parse_amortization(s: &str) -> std::result::Result<Amortization, String> {
    s.parse()
}

fn parse_strategy(s: &str) -> std::result::Result<Strategy, String> {
    s.parse()
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn print_warnings(warnings: &[LoadWarning]) {
    for warning in warnings {
        eprintln!("warning: {warning}");
    }
}

fn load_runs(paths: &[PathBuf]) -> Result<Vec<(String, Vec<fairrank::RankingSequence>)>> {
    let mut runs = Vec::with_capacity(paths.len());
    for path in paths {
        let (sequences, warnings) = io::load_run(path)?;
        print_warnings(&warnings);
        runs.push((file_stem(path), sequences));
    }
    Ok(runs)
}

fn evaluate_rows(
    runs: &[(String, Vec<fairrank::RankingSequence>)],
    data: &DataArgs,
    params: &EvalParams,
) -> Result<Vec<ReportRow>> {
    let (queries, corpus, groups, label) = data.load()?;
    let mut rows = Vec::with_capacity(runs.len());
    for (name, sequences) in runs {
        let outcome = evaluate_pooled(sequences, &queries, &corpus, &groups, params)?;
        rows.push(ReportRow {
            run: name.clone(),
            outcome,
            mode: params.amortization(),
            group_def: label.clone(),
        });
    }
    rows.sort_by(|a, b| a.run.cmp(&b.run));
    Ok(rows)
}

fn print_rows(rows: &[ReportRow]) {
    for row in rows {
        match &row.outcome {
            EvalOutcome::Defined(result) => println!(
                "{}: utility={} unfairness={} ({}, {}, {} rankings)",
                row.run,
                result.mean_utility,
                result.unfairness,
                row.mode,
                row.group_def,
                result.rankings_evaluated
            ),
            EvalOutcome::Undefined {
                mean_utility,
                rankings_evaluated,
                reason,
            } => println!(
                "{}: utility={} unfairness=undefined ({}, {}, {} rankings): {}",
                row.run, mean_utility, row.mode, row.group_def, rankings_evaluated, reason
            ),
        }
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<ExitCode> {
    let params = args.model.params(args.amortization)?;
    let runs = load_runs(&args.runs)?;
    let rows = evaluate_rows(&runs, &args.data, &params)?;

    let csv_path = args.out.with_extension("csv");
    let json_path = args.out.with_extension("json");
    io::write_report_csv(&csv_path, &rows)?;
    io::write_report_json(&json_path, &rows)?;
    print_rows(&rows);
    println!("wrote {} and {}", csv_path.display(), json_path.display());

    if rows.iter().any(|r| !r.outcome.is_defined()) {
        eprintln!("error: unfairness is undefined for at least one run (see report)");
        return Ok(ExitCode::from(4));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_tradeoff(args: TradeoffArgs) -> Result<ExitCode> {
    let params = args.model.params(args.amortization)?;
    let runs = load_runs(&args.runs)?;
    let rows = evaluate_rows(&runs, &args.data, &params)?;
    io::write_report_csv(&args.out, &rows)?;
    print_rows(&rows);
    println!("wrote {}", args.out.display());
    if rows.iter().any(|r| !r.outcome.is_defined()) {
        eprintln!("error: unfairness is undefined for at least one run (see report)");
        return Ok(ExitCode::from(4));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_seqgen(args: SeqgenArgs) -> Result<ExitCode> {
    let queries = io::load_queries(&args.queries)?;
    let sequences = seqgen::generate_sequences(&queries, args.sequences, args.length, args.seed)?;
    io::write_sequences(&args.out, &sequences, args.seed)?;
    println!(
        "wrote {} ({} sequences x {} queries, seed {})",
        args.out.display(),
        args.sequences,
        args.length,
        args.seed
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_rerank(args: RerankArgs) -> Result<ExitCode> {
    let params = args.model.params(Amortization::Micro)?;
    let queries = io::load_queries(&args.queries)?;
    let (corpus, warnings) = io::load_corpus(&args.corpus)?;
    print_warnings(&warnings);
    if args.strategy == Strategy::Controller && args.groups.is_none() {
        eprintln!("error: --strategy controller requires --groups");
        return Ok(ExitCode::from(1));
    }
    let groups = args.groups.as_deref().map(io::load_groups).transpose()?;

    let sequences: Vec<QuerySequence> = match &args.sequence {
        Some(path) => io::load_sequences(path)?,
        None => vec![QuerySequence {
            sequence_id: 0,
            qids: queries.iter().map(|q| q.qid().clone()).collect(),
        }],
    };

    let mut runs = Vec::with_capacity(sequences.len());
    for sequence in &sequences {
        runs.push(run_sequence(
            args.strategy,
            sequence,
            &queries,
            &corpus,
            groups.as_ref(),
            &params,
            args.lambda,
            args.seed,
        )?);
    }
    io::write_run(&args.out, &runs)?;
    let total: usize = runs.iter().map(fairrank::RankingSequence::len).sum();
    println!(
        "wrote {} ({} rankings, strategy {})",
        args.out.display(),
        total,
        args.strategy
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(args: ValidateArgs) -> Result<ExitCode> {
    let queries = io::load_queries(&args.queries)?;
    let expected = args.sequence.as_deref().map(io::load_sequences).transpose()?;

    let mut admissible = true;
    for path in &args.runs {
        let (sequences, warnings) = io::load_run(path)?;
        print_warnings(&warnings);
        let report = io::validate_run(
            &sequences,
            &queries,
            expected.as_deref(),
            args.allow_partial,
        );
        let total: usize = sequences.iter().map(fairrank::RankingSequence::len).sum();
        if report.is_admissible() {
            println!("{}: admissible ({} rankings)", path.display(), total);
        } else {
            admissible = false;
            for violation in report.violations() {
                println!("{}: {}", path.display(), violation);
            }
            println!(
                "{}: {} violation(s)",
                path.display(),
                report.violations().len()
            );
        }
    }
    Ok(if admissible {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn cmd_group_index(args: GroupIndexArgs) -> Result<ExitCode> {
    let table = io::load_index_table(&args.index)?;
    let groups = io::group_from_thresholds(table, &args.prefix, &args.thresholds)?;
    io::write_groups(&args.out, &groups)?;
    println!(
        "wrote {} ({} authors, {} groups)",
        args.out.display(),
        groups.len(),
        groups.universe().len()
    );
    Ok(ExitCode::SUCCESS)
}

/// Maps every library error onto the documented exit-code taxonomy.
fn exit_code_for(err: &Error) -> u8 {
    match err.class() {
        ErrorClass::Usage => 1,
        ErrorClass::DataFormat => 2,
        ErrorClass::Validation => 3,
        ErrorClass::Degenerate => 4,
    }
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("FAIRRANK_THREADS") {
        match value.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring FAIRRANK_THREADS={value} (want a positive integer)"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    init_thread_pool();

    let result = match cli.command {
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Tradeoff(args) => cmd_tradeoff(args),
        Command::Seqgen(args) => cmd_seqgen(args),
        Command::Rerank(args) => cmd_rerank(args),
        Command::Validate(args) => cmd_validate(args),
        Command::GroupIndex(args) => cmd_group_index(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
