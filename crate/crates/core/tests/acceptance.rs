//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the verdict lines always reach the
//! console. Every tolerance is a named constant below; exits non-zero when
//! any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use govgram_core::ig::{Parser, SentenceRef, Snapshot};
use govgram_core::inference::{
    bootstrap_mean, BootstrapConfig, CountsSummary, EntropySummary, COUNTS_HEADER, ENTROPY_HEADER,
};
use govgram_core::io;
use govgram_core::metrics::{count_k, entropy, jsd, rarefied_delta_k, CategoryDistribution, Feature, RepoMetrics};
use govgram_core::report::Manifest;
use govgram_core::report::{run_pipeline, RunConfig, MANIFEST_FILE, SHARE_DELTA_HEADER};
use govgram_core::rng;
use govgram_core::taxonomy::{Category, Lexicons, RoleCategory};
use govgram_core::Execution;
use rand::Rng;

// ── AC1: metric oracles ──────────────────────────────────────────────
/// Agreement with the brute-force formulas, in bits.
const ORACLE_TOL_BITS: f64 = 1e-9;
const ORACLE_DISTRIBUTIONS: usize = 1_000;
const ORACLE_MAX_CATEGORIES: usize = 20;
const ORACLE_BUDGET: Duration = Duration::from_secs(5);

// ── AC2: rarefaction oracle ──────────────────────────────────────────
const RAREFY_MAX_STATEMENTS: usize = 12;
const RAREFY_DRAWS: usize = 2_000;
const RAREFY_TOL: f64 = 0.05;
const RAREFY_FIXTURES: usize = 100;

// ── AC3: bootstrap calibration ───────────────────────────────────────
const CALIB_TRIALS: usize = 1_000;
const CALIB_REPOS: usize = 200;
const CALIB_B: usize = 2_000;
const CALIB_COVERAGE: (f64, f64) = (0.93, 0.97);

// ── AC4: parser golden test ──────────────────────────────────────────
const GOLDEN_ACTION_AGREEMENT: f64 = 0.80;
const GOLDEN_SENTENCES: usize = 50;

// ── AC5: planted truth ───────────────────────────────────────────────
const PLANTED_REPOS: usize = 250;
const PLANTED_WITHIN_DAY: usize = 100;
const PLANTED_B: usize = 10_000;
const PLANTED_BUDGET: Duration = Duration::from_secs(120);

// ── AC6–AC7: screens and determinism ─────────────────────────────────
const SCREEN_MIN_LABELED: u64 = 5;
const SCREEN_TAU: u64 = 2;
const SCREEN_B: usize = 500;
const DETERMINISM_REPOS: usize = 60;
const DETERMINISM_B: usize = 1_000;
#[cfg_attr(not(feature = "parallel"), allow(dead_code))]
const DETERMINISM_THREADS: [usize; 3] = [1, 3, 8];

// ── AC8: output shape ────────────────────────────────────────────────
const SHARE_SUM_TOL_PP: f64 = 1e-6;
const ROLE_CATEGORIES: usize = 20;

const FIXTURE_SEED: u64 = 11;

struct Verdict {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(id: &'static str, pass: bool, detail: String) -> Verdict {
    Verdict { id, pass, detail }
}

fn workdir() -> tempfile::TempDir {
    tempfile::tempdir().expect("temporary directory")
}

fn run(cfg: &RunConfig, corpus: &Path, out: &Path, exec: Execution) -> Manifest {
    run_pipeline(cfg, corpus, out, exec).expect("pipeline run")
}

fn parse_ci(cell: &str) -> Option<(f64, f64)> {
    let inner = cell.strip_prefix('[')?.strip_suffix(']')?;
    let (lo, hi) = inner.split_once(',')?;
    Some((lo.trim().parse().ok()?, hi.trim().parse().ok()?))
}

fn header(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).expect("csv");
    r.headers().expect("header").iter().map(str::to_string).collect()
}

// ── AC1 ──────────────────────────────────────────────────────────────

fn brute_entropy(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let n = n as f64;
    // log2 N − (1/N) Σ c log2 c: the same entropy, arranged differently.
    n.log2()
        - counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| c as f64 * (c as f64).log2())
            .sum::<f64>()
            / n
}

fn brute_jsd(p: &[u64], q: &[u64]) -> f64 {
    // H(M) − (H(P) + H(Q)) / 2 on aligned category vectors.
    let np: u64 = p.iter().sum();
    let nq: u64 = q.iter().sum();
    let h = |v: &[f64]| -v.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>();
    let pp: Vec<f64> = p.iter().map(|&c| c as f64 / np as f64).collect();
    let qq: Vec<f64> = q.iter().map(|&c| c as f64 / nq as f64).collect();
    let m: Vec<f64> = pp.iter().zip(&qq).map(|(a, b)| 0.5 * (a + b)).collect();
    h(&m) - 0.5 * (h(&pp) + h(&qq))
}

fn random_counts(r: &mut impl Rng, k: usize) -> Vec<u64> {
    loop {
        let v: Vec<u64> = (0..k)
            .map(|_| if r.gen_bool(0.25) { 0 } else { r.gen_range(1..60) })
            .collect();
        if v.iter().any(|&c| c > 0) {
            return v;
        }
    }
}

fn dist(counts: &[u64]) -> CategoryDistribution {
    CategoryDistribution::from_counts(counts.iter().enumerate().map(|(i, &c)| (format!("c{i:02}"), c)))
}

fn ac1_metric_oracles() -> Verdict {
    let start = Instant::now();
    let mut r = rng::stream(FIXTURE_SEED, 1);
    let mut worst = 0.0f64;
    let mut k_mismatch = 0;
    for _ in 0..ORACLE_DISTRIBUTIONS {
        let k = r.gen_range(1..=ORACLE_MAX_CATEGORIES);
        let p = random_counts(&mut r, k);
        let q = random_counts(&mut r, k);
        let (dp, dq) = (dist(&p), dist(&q));
        worst = worst.max((entropy(&dp).unwrap() - brute_entropy(&p)).abs());
        worst = worst.max((jsd(&dp, &dq).unwrap() - brute_jsd(&p, &q)).abs());
        for tau in 1..=3 {
            let brute = p.iter().filter(|&&c| c >= tau).count();
            k_mismatch += usize::from(count_k(&dp, tau) != brute);
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "AC1",
        worst <= ORACLE_TOL_BITS && k_mismatch == 0 && elapsed < ORACLE_BUDGET,
        format!(
            "{ORACLE_DISTRIBUTIONS} distributions: max |Δ| {worst:.2e} bits (tol {ORACLE_TOL_BITS:e}), \
             {k_mismatch} K mismatches, {elapsed:.2?} (budget {ORACLE_BUDGET:?})"
        ),
    )
}

// ── AC2 ──────────────────────────────────────────────────────────────

/// Exact E[K] of a without-replacement sample of size `n`, by enumerating
/// every subset.
fn exact_expected_k(labels: &[u8], n: usize, tau: u64) -> f64 {
    let len = labels.len();
    let mut total = 0u64;
    let mut subsets = 0u64;
    for mask in 0u32..(1 << len) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let mut counts = [0u64; 256];
        for (i, &l) in labels.iter().enumerate() {
            if mask & (1 << i) != 0 {
                counts[l as usize] += 1;
            }
        }
        total += counts.iter().filter(|&&c| c >= tau).count() as u64;
        subsets += 1;
    }
    total as f64 / subsets as f64
}

fn ac2_rarefaction_oracle(exec: Execution) -> Verdict {
    let mut r = rng::stream(FIXTURE_SEED, 2);
    let mut worst = 0.0f64;
    let mut identical_nonzero = 0;
    for f in 0..RAREFY_FIXTURES {
        let cats = r.gen_range(1..=5u8);
        let side = |r: &mut rng::StreamRng| -> Vec<u8> {
            let n = r.gen_range(2..=RAREFY_MAX_STATEMENTS);
            (0..n).map(|_| b'a' + r.gen_range(0..cats)).collect()
        };
        let a = side(&mut r);
        let b = side(&mut r);
        let n = a.len().min(b.len());
        let exact = exact_expected_k(&b, n, SCREEN_TAU) - exact_expected_k(&a, n, SCREEN_TAU);
        let est = rarefied_delta_k(&a, &b, RAREFY_DRAWS, 100, SCREEN_TAU, f as u64, exec).unwrap();
        worst = worst.max((est - exact).abs());
        let same = rarefied_delta_k(&a, &a, RAREFY_DRAWS, 100, SCREEN_TAU, f as u64, exec).unwrap();
        identical_nonzero += usize::from(same != 0.0);
    }
    verdict(
        "AC2",
        worst <= RAREFY_TOL && identical_nonzero == 0,
        format!(
            "{RAREFY_FIXTURES} fixtures (≤{RAREFY_MAX_STATEMENTS} statements, R={RAREFY_DRAWS}): \
             max |est − exact| {worst:.4} (tol {RAREFY_TOL}); {identical_nonzero} identical pairs ≠ 0"
        ),
    )
}

// ── AC3 ──────────────────────────────────────────────────────────────

/// A ΔK-like discrete distribution with known mean 0.5.
fn draw_delta(r: &mut impl Rng) -> f64 {
    match r.gen_range(0..20) {
        0..=1 => -1.0,
        2..=10 => 0.0,
        11..=16 => 1.0,
        _ => 2.0,
    }
}
const CALIB_TRUTH: f64 = 0.5;

fn ac3_bootstrap_calibration(exec: Execution) -> Verdict {
    let mut covered = 0;
    for t in 0..CALIB_TRIALS {
        let mut r = rng::stream(rng::derive_seed(FIXTURE_SEED, "calibration"), t as u64);
        let values: Vec<f64> = (0..CALIB_REPOS).map(|_| draw_delta(&mut r)).collect();
        let cfg = BootstrapConfig {
            replicates: CALIB_B,
            alpha: 0.05,
            seed: t as u64,
        };
        covered += usize::from(
            bootstrap_mean("calibration", &values, &cfg, exec)
                .unwrap()
                .contains(CALIB_TRUTH),
        );
    }
    let coverage = covered as f64 / CALIB_TRIALS as f64;
    let cfg = BootstrapConfig {
        replicates: CALIB_B,
        alpha: 0.05,
        seed: 1,
    };
    let c = bootstrap_mean("constant", &[0.3; CALIB_REPOS], &cfg, exec).unwrap();
    let constant_ok = c.ci_low == 0.3 && c.ci_high == 0.3 && c.mean == 0.3;
    verdict(
        "AC3",
        (CALIB_COVERAGE.0..=CALIB_COVERAGE.1).contains(&coverage) && constant_ok,
        format!(
            "coverage {coverage:.3} over {CALIB_TRIALS} corpora × {CALIB_REPOS} repos, B={CALIB_B} \
             (band {:?}); constant input → [{}, {}]",
            CALIB_COVERAGE, c.ci_low, c.ci_high
        ),
    )
}

// ── AC4 ──────────────────────────────────────────────────────────────

fn ac4_parser_golden() -> Verdict {
    let parser = Parser::new(&Lexicons::builtin());
    let sref = |i| SentenceRef {
        repo_id: "golden".into(),
        snapshot: Snapshot::Initial,
        sentence: i,
        clause: 0,
    };
    let s = parser.parse_statement("The technical committee must ratify the development roadmap", sref(0));
    let worked = s.role.as_deref() == Some("technical committee")
        && s.action.as_deref() == Some("ratify")
        && s.object.as_deref() == Some("roadmap")
        && s.deontic
            .as_ref()
            .is_some_and(|d| d.surface == "must" && d.strength.id() == "obligatory");

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/golden_statements.tsv");
    let src = std::fs::read_to_string(path).expect("golden fixture");
    let rows: Vec<(String, Option<String>)> = src
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            let action = f.get(3).map(|s| s.trim().to_lowercase()).filter(|s| !s.is_empty());
            (f[1].to_string(), action)
        })
        .collect();
    let hits = rows
        .iter()
        .enumerate()
        .filter(|(i, (sentence, want))| parser.parse_statement(sentence, sref(*i)).action == *want)
        .count();
    let agreement = hits as f64 / rows.len() as f64;
    verdict(
        "AC4",
        worked && rows.len() == GOLDEN_SENTENCES && agreement >= GOLDEN_ACTION_AGREEMENT,
        format!(
            "worked example {}; action agreement {hits}/{} = {agreement:.2} (bar {GOLDEN_ACTION_AGREEMENT})",
            if worked { "ok" } else { "WRONG" },
            rows.len()
        ),
    )
}

// ── AC5 ──────────────────────────────────────────────────────────────

struct PlantedRun {
    _dir: tempfile::TempDir,
    out: PathBuf,
    corpus: common::PlantedCorpus,
    elapsed: Duration,
}

fn planted_run(exec: Execution) -> PlantedRun {
    let dir = workdir();
    let corpus = common::planted_corpus(PLANTED_REPOS, PLANTED_WITHIN_DAY, FIXTURE_SEED);
    let path = dir.path().join("corpus.jsonl");
    corpus.write_jsonl(&path);
    let out = dir.path().join("out");
    let cfg = RunConfig {
        b: PLANTED_B,
        ..RunConfig::default()
    };
    let start = Instant::now();
    run(&cfg, &path, &out, exec);
    PlantedRun {
        _dir: dir,
        out,
        corpus,
        elapsed: start.elapsed(),
    }
}

fn summary_row<T: serde::de::DeserializeOwned>(path: &Path, pick: impl Fn(&T) -> bool) -> T {
    io::read_csv::<T>(path)
        .expect("summary")
        .into_iter()
        .find(pick)
        .expect("feature row")
}

fn ac5_planted_truth(p: &PlantedRun) -> Verdict {
    let counts: CountsSummary = summary_row(&p.out.join("summary_counts.csv"), |r: &CountsSummary| {
        r.feature == Feature::Actions
    });
    let ent: EntropySummary = summary_row(&p.out.join("summary_entropy.csv"), |r: &EntropySummary| {
        r.feature == Feature::Roles
    });
    let k_ci = parse_ci(&counts.delta_k_ci);
    let h_ci = parse_ci(&ent.delta_h_ci);
    let inside = |ci: Option<(f64, f64)>, x: f64| ci.is_some_and(|(lo, hi)| lo <= x && x <= hi);
    let ok_k = inside(k_ci, common::PLANTED_DELTA_K_ACTIONS);
    let ok_h = inside(h_ci, common::PLANTED_DELTA_H_ROLES);
    verdict(
        "AC5",
        ok_k && ok_h && p.elapsed < PLANTED_BUDGET,
        format!(
            "actions ΔK {:.4} {} ∋ {}: {}; roles ΔH {:.4} {} ∋ {}: {}; realized plants {:.4}/{:.4}; \
             {PLANTED_REPOS} repos at B={PLANTED_B} in {:.2?} (budget {PLANTED_BUDGET:?})",
            counts.delta_k_mean.unwrap_or(f64::NAN),
            counts.delta_k_ci,
            common::PLANTED_DELTA_K_ACTIONS,
            ok_k,
            ent.delta_h_mean.unwrap_or(f64::NAN),
            ent.delta_h_ci,
            common::PLANTED_DELTA_H_ROLES,
            ok_h,
            p.corpus.realized_delta_k_actions(),
            p.corpus.realized_delta_h_roles(),
            p.elapsed
        ),
    )
}

// ── AC6 ──────────────────────────────────────────────────────────────

fn ac6_screens(p: &PlantedRun, exec: Execution) -> Verdict {
    let metrics: Vec<RepoMetrics> = io::read_csv(&p.out.join("metrics.csv")).expect("metrics.csv");
    let by_key: BTreeMap<(&str, Feature), &RepoMetrics> =
        metrics.iter().map(|m| ((m.repo_id.as_str(), m.feature), m)).collect();
    let mut problems = Vec::new();

    // H/JSD screen: fewer than five labeled statements on either side.
    for m in &metrics {
        let eligible = m.n_initial >= SCREEN_MIN_LABELED && m.n_latest >= SCREEN_MIN_LABELED;
        if eligible != m.eligible_h || eligible != (m.delta_h.is_some() && m.jsd.is_some()) {
            problems.push(format!("{} {}: H screen", m.repo_id, m.feature));
        }
    }
    let n_eligible_roles = metrics
        .iter()
        .filter(|m| m.feature == Feature::Roles && m.eligible_h)
        .count();
    let ent: EntropySummary = summary_row(&p.out.join("summary_entropy.csv"), |r: &EntropySummary| {
        r.feature == Feature::Roles
    });
    let planted_eligible = p.corpus.repos.iter().filter(|r| r.delta_h_roles.is_some()).count();
    if ent.n != n_eligible_roles || ent.n != planted_eligible {
        problems.push(format!(
            "roles entropy n {} vs eligible rows {n_eligible_roles} vs planted {planted_eligible}",
            ent.n
        ));
    }

    // τ = 2 against the planted histograms.
    for repo in &p.corpus.repos {
        let planted_k = |s: &[common::PlantedSentence]| {
            let mut h: BTreeMap<_, u64> = BTreeMap::new();
            for x in s.iter().filter_map(|x| x.action) {
                *h.entry(x).or_default() += 1;
            }
            h.values().filter(|&&c| c >= SCREEN_TAU).count()
        };
        match by_key.get(&(repo.repo_id.as_str(), Feature::Actions)) {
            Some(m) if m.k_initial == planted_k(&repo.initial) && m.k_latest == planted_k(&repo.latest) => {}
            _ => problems.push(format!("{}: K at τ={SCREEN_TAU}", repo.repo_id)),
        }
    }

    // --across-day-only: n becomes the across-day pair count.
    let dir = workdir();
    let corpus = dir.path().join("corpus.jsonl");
    p.corpus.write_jsonl(&corpus);
    let cfg = RunConfig {
        b: SCREEN_B,
        across_day_only: true,
        ..RunConfig::default()
    };
    let out = dir.path().join("out");
    let m = run(&cfg, &corpus, &out, exec);
    let across = p.corpus.across_day_count();
    let counts: Vec<CountsSummary> = io::read_csv(&out.join("summary_counts.csv")).expect("summary");
    if m.counts.repos_analyzed != across || m.counts.across_day_pairs != across {
        problems.push(format!("across-day repos {} vs {across}", m.counts.repos_analyzed));
    }
    if counts.iter().any(|c| c.n != across) {
        problems.push(format!(
            "across-day summary n {:?} vs {across}",
            counts.iter().map(|c| c.n).collect::<Vec<_>>()
        ));
    }
    verdict(
        "AC6",
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "H screen (<{SCREEN_MIN_LABELED}) on {} rows, roles n={n_eligible_roles}; K at τ={SCREEN_TAU} on \
                 {PLANTED_REPOS} repos; across-day-only n={across} of {PLANTED_REPOS}",
                metrics.len()
            )
        } else {
            format!("{} problems, first: {}", problems.len(), problems[0])
        },
    )
}

// ── AC7 ──────────────────────────────────────────────────────────────

const DETERMINISM_FILES: [&str; 4] = [
    "metrics.csv",
    "summary_counts.csv",
    "summary_entropy.csv",
    MANIFEST_FILE,
];

fn snapshot_outputs(cfg: &RunConfig, corpus: &Path, exec: Execution) -> Vec<Vec<u8>> {
    let dir = workdir();
    let out = dir.path().join("out");
    run(cfg, corpus, &out, exec);
    DETERMINISM_FILES
        .iter()
        .map(|f| std::fs::read(out.join(f)).expect("output"))
        .collect()
}

fn ac7_determinism() -> Verdict {
    let dir = workdir();
    let corpus_path = dir.path().join("corpus.jsonl");
    common::planted_corpus(DETERMINISM_REPOS, 20, FIXTURE_SEED + 1).write_jsonl(&corpus_path);
    // The manifest records the corpus path-independent checksum only, so
    // runs in different output directories are comparable byte for byte.
    let cfg = RunConfig {
        b: DETERMINISM_B,
        ..RunConfig::default()
    };
    let reference = snapshot_outputs(&cfg, &corpus_path, Execution::Sequential);
    #[cfg_attr(not(feature = "parallel"), allow(unused_mut, clippy::useless_vec))]
    let mut runs = vec![(
        "sequential (repeat)".to_string(),
        snapshot_outputs(&cfg, &corpus_path, Execution::Sequential),
    )];
    #[cfg(feature = "parallel")]
    for threads in DETERMINISM_THREADS {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        let outputs = pool.install(|| snapshot_outputs(&cfg, &corpus_path, Execution::Parallel));
        runs.push((format!("parallel×{threads}"), outputs));
    }
    let differing: Vec<String> = runs
        .iter()
        .flat_map(|(name, outs)| {
            outs.iter()
                .zip(&reference)
                .zip(DETERMINISM_FILES)
                .filter(|((a, b), _)| a != b)
                .map(move |(_, f)| format!("{name}:{f}"))
        })
        .collect();
    let labels: Vec<&str> = runs.iter().map(|(n, _)| n.as_str()).collect();
    verdict(
        "AC7",
        differing.is_empty(),
        format!(
            "{} vs sequential over {DETERMINISM_FILES:?}: {}",
            labels.join(", "),
            if differing.is_empty() {
                "byte-identical".to_string()
            } else {
                format!("differ {differing:?}")
            }
        ),
    )
}

// ── AC8 ──────────────────────────────────────────────────────────────

fn ac8_output_shape(p: &PlantedRun) -> Verdict {
    let mut problems = Vec::new();
    let expect_counts = [
        "feature",
        "n",
        "initial_K",
        "latest_K",
        "delta_K_mean",
        "delta_K_ci",
        "rarefied_delta_K_mean",
        "rarefied_delta_K_ci",
    ];
    let expect_entropy = [
        "feature",
        "n",
        "initial_H",
        "latest_H",
        "delta_H_mean",
        "delta_H_ci",
        "jsd_mean",
        "jsd_ci",
    ];
    if header(&p.out.join("summary_counts.csv")) != expect_counts || COUNTS_HEADER != expect_counts {
        problems.push("summary_counts.csv columns".to_string());
    }
    if header(&p.out.join("summary_entropy.csv")) != expect_entropy || ENTROPY_HEADER != expect_entropy {
        problems.push("summary_entropy.csv columns".to_string());
    }
    let path = p.out.join("share_deltas_roles.csv");
    if header(&path) != SHARE_DELTA_HEADER {
        problems.push("share_deltas_roles.csv columns".to_string());
    }
    let mut reader = csv::Reader::from_path(&path).expect("share deltas");
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.expect("row")).collect();
    let categories: Vec<&str> = rows.iter().map(|r| &r[0]).collect();
    let expected: Vec<&str> = RoleCategory::ALL.iter().map(|c| c.id()).collect();
    if categories != expected || rows.len() != ROLE_CATEGORIES {
        problems.push(format!("role rows {categories:?}"));
    }
    let sum: f64 = rows.iter().map(|r| r[3].parse::<f64>().expect("delta_pp")).sum();
    let cis_ok = rows.iter().all(|r| {
        let (lo, d, hi): (f64, f64, f64) = (r[4].parse().unwrap(), r[3].parse().unwrap(), r[5].parse().unwrap());
        lo <= d + 1e-9 && d <= hi + 1e-9
    });
    if sum.abs() > SHARE_SUM_TOL_PP {
        problems.push(format!("Δpp sum {sum:e}"));
    }
    if !cis_ok {
        problems.push("a role CI does not bracket its Δpp".to_string());
    }
    verdict(
        "AC8",
        problems.is_empty(),
        format!(
            "summary columns exact; {} role rows; Σ Δpp = {sum:.2e} (tol {SHARE_SUM_TOL_PP:e}){}",
            rows.len(),
            if problems.is_empty() {
                String::new()
            } else {
                format!("; problems: {problems:?}")
            }
        ),
    )
}

fn main() {
    let exec = Execution::default();
    let mut verdicts = vec![
        ac1_metric_oracles(),
        ac2_rarefaction_oracle(exec),
        ac3_bootstrap_calibration(exec),
        ac4_parser_golden(),
    ];
    let planted = planted_run(exec);
    verdicts.push(ac5_planted_truth(&planted));
    verdicts.push(ac6_screens(&planted, exec));
    verdicts.push(ac7_determinism());
    verdicts.push(ac8_output_shape(&planted));

    let mut failed = 0;
    for v in &verdicts {
        println!("{} {} — {}", v.id, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed (execution: {exec:?})",
        verdicts.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
