//! End-to-end pipeline runs on small planted corpora.

mod common;

use govgram_core::ig::StatementRecord;
use govgram_core::inference::{CountsSummary, INSUFFICIENT_N};
use govgram_core::io;
use govgram_core::report::{run_pipeline, sha256_hex, RunConfig, MANIFEST_FILE};
use govgram_core::taxonomy::LabeledRecord;
use govgram_core::{Execution, Feature};

fn small_config() -> RunConfig {
    RunConfig {
        b: 300,
        ..RunConfig::default()
    }
}

#[test]
fn outputs_match_manifest_checksums() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let planted = common::planted_corpus(24, 6, 5);
    planted.write_jsonl(&corpus);
    let out = dir.path().join("out");
    let m = run_pipeline(&small_config(), &corpus, &out, Execution::default()).unwrap();

    let expected = [
        "action_shares.csv",
        "bootstrap_estimates.csv",
        "deontic_shares.csv",
        "labeled.jsonl",
        "metrics.csv",
        "report.md",
        "role_shares.csv",
        "sentences.jsonl",
        "share_deltas_actions.csv",
        "share_deltas_deontics.csv",
        "share_deltas_deontics_binary.csv",
        "share_deltas_roles.csv",
        "statements.jsonl",
        "summary_counts.csv",
        "summary_entropy.csv",
        "violin_actions.csv",
        "violin_deontics.csv",
        "violin_deontics_binary.csv",
        "violin_roles.csv",
    ];
    let files: Vec<&str> = m.outputs.iter().map(|o| o.file.as_str()).collect();
    assert_eq!(files, expected);
    for o in &m.outputs {
        let bytes = std::fs::read(out.join(&o.file)).unwrap();
        assert_eq!(sha256_hex(&bytes), o.sha256, "{}", o.file);
    }
    assert_eq!(sha256_hex(&std::fs::read(&corpus).unwrap()), m.corpus_sha256);
    assert!(out.join(MANIFEST_FILE).exists());

    let c = &m.counts;
    assert_eq!(
        (c.corpus_records, c.paired, c.across_day_pairs, c.repos_analyzed),
        (24, 24, 18, 24)
    );
    assert_eq!(c.snapshots, 48);
    assert_eq!(c.metric_rows, 24 * Feature::ALL.len());
    assert_eq!(m.role_coverage, 1.0);

    // Clause-0 statements match sentences one to one.
    let statements: Vec<StatementRecord> = io::read_jsonl(&out.join("statements.jsonl")).unwrap();
    assert_eq!(statements.len(), c.statements);
    assert_eq!(
        statements
            .iter()
            .filter(|s| s.statement.sentence_ref.clause == 0)
            .count(),
        c.sentences
    );
    let labeled: Vec<LabeledRecord> = io::read_jsonl(&out.join("labeled.jsonl")).unwrap();
    assert_eq!(labeled.len(), c.statements);
    // The pair's across-day flag is carried through every stage record.
    for l in &labeled {
        let repo = planted
            .repos
            .iter()
            .find(|r| r.repo_id == l.labeled.statement.sentence_ref.repo_id)
            .unwrap();
        assert_eq!(l.across_day, repo.across_day);
    }
}

#[test]
fn tiny_corpus_reports_insufficient_n() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    common::planted_corpus(1, 0, 9).write_jsonl(&corpus);
    let out = dir.path().join("out");
    run_pipeline(&small_config(), &corpus, &out, Execution::Sequential).unwrap();
    let rows: Vec<CountsSummary> = io::read_csv(&out.join("summary_counts.csv")).unwrap();
    assert_eq!(rows.len(), Feature::ALL.len());
    assert!(rows.iter().all(|r| r.n == 1 && r.delta_k_ci == INSUFFICIENT_N));
}

#[test]
fn seed_changes_intervals_but_not_point_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    common::planted_corpus(30, 0, 3).write_jsonl(&corpus);
    let read = |seed: u64| {
        let out = dir.path().join(format!("out{seed}"));
        let cfg = RunConfig { seed, ..small_config() };
        run_pipeline(&cfg, &corpus, &out, Execution::default()).unwrap();
        io::read_csv::<CountsSummary>(&out.join("summary_counts.csv")).unwrap()
    };
    let (a, b) = (read(1), read(2));
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.delta_k_mean, y.delta_k_mean);
        assert_eq!(x.n, y.n);
    }
    assert!(a.iter().zip(&b).any(|(x, y)| x.delta_k_ci != y.delta_k_ci));
}

#[test]
fn bad_corpus_line_names_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    std::fs::write(&corpus, "{\"repo_id\": 3}\n").unwrap();
    let err = run_pipeline(&small_config(), &corpus, &dir.path().join("out"), Execution::Sequential).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("read-corpus"), "{msg}");
}
