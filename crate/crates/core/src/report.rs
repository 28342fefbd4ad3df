//! Pipeline orchestration, summary tables, figure data and the run manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ig::{parse_snapshot, Parser, StatementRecord};
use crate::inference::{
    share_deltas, share_pairs, summarize_feature, BootstrapConfig, BootstrapResult, FeatureSummary, ShareDelta,
    COUNTS_HEADER, ENTROPY_HEADER,
};
use crate::ingest::{CorpusRecord, PairStatus};
use crate::io;
use crate::metrics::{
    compute_corpus_metrics, group_by_repo, Feature, MetricsConfig, RepoMetrics, RepoSnapshots, METRICS_HEADER,
};
use crate::normalize::{normalize_record, SnapshotSentences};
use crate::taxonomy::{label_record, LabeledRecord, Lexicons, RoleCoverage};

/// Run settings. Defaults are the published constants (B = 10 000, τ = 2,
/// cap 100, five labeled statements per snapshot).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(rename = "B", alias = "b")]
    pub b: usize,
    pub alpha: f64,
    pub tau: u64,
    pub rarefaction_draws: usize,
    pub rarefaction_cap: usize,
    pub across_day_only: bool,
    pub lexicon_dir: Option<PathBuf>,
    pub min_labeled: u64,
    pub normalize_entropy: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 17,
            b: 10_000,
            alpha: 0.05,
            tau: 2,
            rarefaction_draws: 200,
            rarefaction_cap: 100,
            across_day_only: false,
            lexicon_dir: None,
            min_labeled: 5,
            normalize_entropy: false,
        }
    }
}

impl RunConfig {
    /// Parses a flat `key = value` file. A relative `lexicon_dir` resolves
    /// against the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = toml::from_str(&src).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(dir) = &cfg.lexicon_dir {
            if dir.is_relative() {
                cfg.lexicon_dir = Some(path.parent().unwrap_or(Path::new(".")).join(dir));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("B", self.b as u64),
            ("tau", self.tau),
            ("rarefaction_draws", self.rarefaction_draws as u64),
            ("rarefaction_cap", self.rarefaction_cap as u64),
            ("min_labeled", self.min_labeled),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("`{name}` must be positive")));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("`alpha` = {} outside (0, 1)", self.alpha)));
        }
        Ok(())
    }

    pub fn metrics_config(&self) -> MetricsConfig {
        MetricsConfig {
            tau: self.tau,
            min_labeled: self.min_labeled,
            rarefaction_draws: self.rarefaction_draws,
            rarefaction_cap: self.rarefaction_cap,
            seed: self.seed,
            normalize_entropy: self.normalize_entropy,
        }
    }

    pub fn bootstrap_config(&self) -> BootstrapConfig {
        BootstrapConfig {
            replicates: self.b,
            alpha: self.alpha,
            seed: self.seed,
        }
    }

    pub fn lexicons(&self) -> Result<Lexicons> {
        match &self.lexicon_dir {
            Some(d) => Lexicons::load_dir(d),
            None => Ok(Lexicons::builtin()),
        }
    }
}

// ---------------------------------------------------------------------------
// Stages

pub fn normalize_stage(records: &[CorpusRecord], lexicons: &Lexicons, exec: Execution) -> Vec<SnapshotSentences> {
    exec.map(records, |r| normalize_record(r, &lexicons.roles))
        .into_iter()
        .flatten()
        .collect()
}

pub fn parse_stage(snapshots: &[SnapshotSentences], lexicons: &Lexicons, exec: Execution) -> Vec<StatementRecord> {
    let parser = Parser::new(lexicons);
    exec.map(snapshots, |s| parse_snapshot(&parser, s))
        .into_iter()
        .flatten()
        .collect()
}

pub fn label_stage(statements: &[StatementRecord], lexicons: &Lexicons, exec: Execution) -> Vec<LabeledRecord> {
    exec.map(statements, |s| label_record(s.clone(), lexicons))
}

/// Summary rows and share changes for every feature.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceOutput {
    pub summaries: Vec<FeatureSummary>,
    pub shares: Vec<(Feature, Vec<ShareDelta>)>,
}

pub fn infer_stage(
    metrics: &[RepoMetrics],
    repos: &[RepoSnapshots],
    cfg: &BootstrapConfig,
    exec: Execution,
) -> Result<InferenceOutput> {
    let mut summaries = Vec::new();
    let mut shares = Vec::new();
    for f in Feature::ALL {
        summaries.push(summarize_feature(metrics, f, cfg, exec).map_err(|e| e.in_stage("infer", f.id()))?);
        let pairs = share_pairs(repos, f);
        shares.push((
            f,
            share_deltas(&pairs, f, cfg, exec).map_err(|e| e.in_stage("infer", f.id()))?,
        ));
    }
    Ok(InferenceOutput { summaries, shares })
}

#[derive(Debug, Serialize)]
struct ShareDeltaRow<'a> {
    category: &'a str,
    initial_pct: f64,
    latest_pct: f64,
    delta_pp: f64,
    ci_low: f64,
    ci_high: f64,
    n_repos: usize,
    #[serde(rename = "B")]
    b: usize,
    alpha: f64,
    seed: u64,
}

pub const SHARE_DELTA_HEADER: [&str; 10] = [
    "category",
    "initial_pct",
    "latest_pct",
    "delta_pp",
    "ci_low",
    "ci_high",
    "n_repos",
    "B",
    "alpha",
    "seed",
];

const ESTIMATES_HEADER: [&str; 8] = ["estimand", "n_repos", "mean", "ci_low", "ci_high", "B", "alpha", "seed"];

pub fn share_deltas_file(feature: Feature) -> String {
    format!("share_deltas_{}.csv", feature.id())
}

/// Writes `summary_counts.csv`, `summary_entropy.csv`,
/// `share_deltas_<feature>.csv` and `bootstrap_estimates.csv`.
pub fn write_inference(dir: &Path, out: &InferenceOutput) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let counts: Vec<_> = out.summaries.iter().map(|s| &s.counts).collect();
    let p = dir.join("summary_counts.csv");
    io::write_csv(&p, &COUNTS_HEADER, &counts)?;
    written.push(p);
    let entropy: Vec<_> = out.summaries.iter().map(|s| &s.entropy).collect();
    let p = dir.join("summary_entropy.csv");
    io::write_csv(&p, &ENTROPY_HEADER, &entropy)?;
    written.push(p);
    for (f, rows) in &out.shares {
        let rows: Vec<ShareDeltaRow> = rows
            .iter()
            .map(|d| ShareDeltaRow {
                category: &d.category,
                initial_pct: d.initial_share_pct,
                latest_pct: d.latest_share_pct,
                delta_pp: d.delta_pp,
                ci_low: d.ci.ci_low,
                ci_high: d.ci.ci_high,
                n_repos: d.ci.n_repos,
                b: d.ci.b,
                alpha: d.ci.alpha,
                seed: d.ci.seed,
            })
            .collect();
        let p = dir.join(share_deltas_file(*f));
        io::write_csv(&p, &SHARE_DELTA_HEADER, &rows)?;
        written.push(p);
    }
    let estimates: Vec<&BootstrapResult> = out
        .summaries
        .iter()
        .flat_map(|s| s.estimates.iter())
        .chain(out.shares.iter().flat_map(|(_, rows)| rows.iter().map(|d| &d.ci)))
        .collect();
    let p = dir.join("bootstrap_estimates.csv");
    io::write_csv(&p, &ESTIMATES_HEADER, &estimates)?;
    written.push(p);
    Ok(written)
}

#[derive(Debug, Serialize)]
struct ShareRow<'a> {
    category: &'a str,
    initial_pct: Option<f64>,
    latest_pct: Option<f64>,
}

const SHARES_HEADER: [&str; 3] = ["category", "initial_pct", "latest_pct"];

/// Pooled shares (percent of labeled mentions) per category. Header only
/// when nothing is labeled.
fn pooled_share_rows<'a>(
    categories: &[&'a str],
    initial: &BTreeMap<&str, u64>,
    latest: &BTreeMap<&str, u64>,
) -> Vec<ShareRow<'a>> {
    let ti: u64 = initial.values().sum();
    let tl: u64 = latest.values().sum();
    if ti == 0 && tl == 0 {
        return Vec::new();
    }
    let pct = |m: &BTreeMap<&str, u64>, t: u64, c: &str| {
        (t > 0).then(|| 100.0 * m.get(c).copied().unwrap_or(0) as f64 / t as f64)
    };
    categories
        .iter()
        .map(|c| ShareRow {
            category: c,
            initial_pct: pct(initial, ti, c),
            latest_pct: pct(latest, tl, c),
        })
        .collect()
}

fn pooled_counts(
    repos: &[RepoSnapshots],
    label: impl Fn(&crate::taxonomy::LabeledStatement) -> Option<&'static str>,
) -> (BTreeMap<&'static str, u64>, BTreeMap<&'static str, u64>) {
    let mut i = BTreeMap::new();
    let mut l = BTreeMap::new();
    for r in repos {
        for s in &r.initial {
            if let Some(c) = label(s) {
                *i.entry(c).or_insert(0) += 1;
            }
        }
        for s in &r.latest {
            if let Some(c) = label(s) {
                *l.entry(c).or_insert(0) += 1;
            }
        }
    }
    (i, l)
}

#[derive(Debug, Serialize)]
struct ViolinRow<'a> {
    repo_id: &'a str,
    snapshot: &'static str,
    #[serde(rename = "K")]
    k: usize,
}

/// Figure data: pooled `role_shares.csv`, `action_shares.csv`,
/// `deontic_shares.csv`, and `violin_<feature>.csv` with per-repository K.
///
/// `deontic_shares.csv` holds the three-way strength split (restricted to
/// may/can, should, must/shall/will) followed by the enabling/restricting
/// split; each block sums to 100 per column.
pub fn emit_figure_data(dir: &Path, repos: &[RepoSnapshots], metrics: &[RepoMetrics]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (file, feature) in [
        ("role_shares.csv", Feature::Roles),
        ("action_shares.csv", Feature::Actions),
    ] {
        let (i, l) = pooled_counts(repos, |s| feature.label(s));
        let p = dir.join(file);
        io::write_csv(&p, &SHARES_HEADER, &pooled_share_rows(&feature.categories(), &i, &l))?;
        written.push(p);
    }
    let (si, sl) = pooled_counts(repos, |s| {
        s.statement
            .deontic
            .as_ref()
            .filter(|d| d.modal().in_core_grouping())
            .map(|d| d.strength.id())
    });
    let (pi, pl) = pooled_counts(repos, |s| Feature::DeonticsBinary.label(s));
    let mut rows = pooled_share_rows(&Feature::Deontics.categories(), &si, &sl);
    rows.extend(pooled_share_rows(&Feature::DeonticsBinary.categories(), &pi, &pl));
    let p = dir.join("deontic_shares.csv");
    io::write_csv(&p, &SHARES_HEADER, &rows)?;
    written.push(p);

    for f in Feature::ALL {
        let rows: Vec<ViolinRow> = metrics
            .iter()
            .filter(|m| m.feature == f)
            .flat_map(|m| {
                [
                    ViolinRow {
                        repo_id: &m.repo_id,
                        snapshot: "initial",
                        k: m.k_initial,
                    },
                    ViolinRow {
                        repo_id: &m.repo_id,
                        snapshot: "latest",
                        k: m.k_latest,
                    },
                ]
            })
            .collect();
        let p = dir.join(format!("violin_{}.csv", f.id()));
        io::write_csv(&p, &["repo_id", "snapshot", "K"], &rows)?;
        written.push(p);
    }
    Ok(written)
}

// ---------------------------------------------------------------------------
// Manifest and report

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChecksum {
    pub file: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn checksum_file(path: &Path) -> Result<FileChecksum> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(FileChecksum {
        file: path
            .file_name()
            .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned()),
        sha256: sha256_hex(&bytes),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub corpus_records: usize,
    pub paired: usize,
    pub single_snapshot: usize,
    pub no_valid_snapshot: usize,
    pub across_day_pairs: usize,
    pub snapshots: usize,
    pub sentences: usize,
    pub statements: usize,
    pub role_labeled: usize,
    pub action_labeled: usize,
    pub deontic_labeled: usize,
    pub repos_analyzed: usize,
    pub metric_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub config: RunConfig,
    pub corpus_sha256: String,
    pub lexicons: Vec<FileChecksum>,
    pub counts: StageCounts,
    pub role_coverage: f64,
    pub role_lexicon_coverage: f64,
    pub outputs: Vec<FileChecksum>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "–".to_string(), |x| format!("{x:.digits$}"))
}

fn render_report(manifest: &Manifest, inference: Option<&InferenceOutput>) -> String {
    let c = &manifest.counts;
    let mut s = String::new();
    let _ = writeln!(s, "# Governance change report\n");
    let _ = writeln!(
        s,
        "Corpus: {} repositories ({} paired, {} single-snapshot, {} without a valid snapshot); {} paired across days.\n",
        c.corpus_records, c.paired, c.single_snapshot, c.no_valid_snapshot, c.across_day_pairs
    );
    let _ = writeln!(
        s,
        "Parsed {} sentences from {} snapshots into {} statements: {} with a role category, {} with an action category, {} with a deontic. Role coverage {:.3} ({:.3} by direct lexicon hit).\n",
        c.sentences, c.snapshots, c.statements, c.role_labeled, c.action_labeled, c.deontic_labeled,
        manifest.role_coverage, manifest.role_lexicon_coverage
    );
    let cfg = &manifest.config;
    let _ = writeln!(
        s,
        "Settings: seed {}, B = {}, alpha = {}, tau = {}, rarefaction {} draws (cap {}), min labeled {}, across-day only: {}.\n",
        cfg.seed, cfg.b, cfg.alpha, cfg.tau, cfg.rarefaction_draws, cfg.rarefaction_cap, cfg.min_labeled, cfg.across_day_only
    );
    let Some(inf) = inference else {
        let _ = writeln!(s, "No paired repositories; no tables were produced.");
        return s;
    };
    let _ = writeln!(s, "## Category counts (K)\n");
    let _ = writeln!(
        s,
        "| Feature | n | Initial K | Latest K | Mean ΔK [CI] | Rarefied ΔK [CI] |"
    );
    let _ = writeln!(s, "|---|---|---|---|---|---|");
    for f in &inf.summaries {
        let r = &f.counts;
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} {} | {} {} |",
            r.feature,
            r.n,
            fmt_opt(r.initial_k, 2),
            fmt_opt(r.latest_k, 2),
            fmt_opt(r.delta_k_mean, 3),
            r.delta_k_ci,
            fmt_opt(r.rarefied_delta_k_mean, 3),
            r.rarefied_delta_k_ci
        );
    }
    let _ = writeln!(s, "\n## Entropy and divergence (bits)\n");
    let _ = writeln!(s, "| Feature | n | Initial H | Latest H | ΔH [CI] | JSD [CI] |");
    let _ = writeln!(s, "|---|---|---|---|---|---|");
    for f in &inf.summaries {
        let r = &f.entropy;
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} {} | {} {} |",
            r.feature,
            r.n,
            fmt_opt(r.initial_h, 3),
            fmt_opt(r.latest_h, 3),
            fmt_opt(r.delta_h_mean, 3),
            r.delta_h_ci,
            fmt_opt(r.jsd_mean, 3),
            r.jsd_ci
        );
    }
    for (f, rows) in &inf.shares {
        if rows.is_empty() || !matches!(f, Feature::Roles | Feature::Actions) {
            continue;
        }
        let _ = writeln!(s, "\n## Share change: {f}\n");
        let _ = writeln!(s, "| Category | Initial (%) | Latest (%) | Δshare (pp) [CI] |");
        let _ = writeln!(s, "|---|---|---|---|");
        for d in rows {
            let _ = writeln!(
                s,
                "| {} | {:.2} | {:.2} | {:+.2} [{:.2}, {:.2}] |",
                d.category, d.initial_share_pct, d.latest_share_pct, d.delta_pp, d.ci.ci_low, d.ci.ci_high
            );
        }
    }
    s
}

/// Runs normalize → parse → label → metrics → infer → emit on a corpus
/// file, writing every stage output plus `report.md` and `manifest.json`
/// into `out_dir`.
pub fn run_pipeline(config: &RunConfig, corpus: &Path, out_dir: &Path, exec: Execution) -> Result<Manifest> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let lexicons = config
        .lexicons()
        .map_err(|e| e.in_stage("load-lexicons", "lexicon_dir"))?;
    let corpus_bytes = std::fs::read(corpus).map_err(|e| Error::io(corpus, e))?;
    let records: Vec<CorpusRecord> =
        io::read_jsonl(corpus).map_err(|e| e.in_stage("read-corpus", corpus.display().to_string()))?;

    let mut counts = StageCounts {
        corpus_records: records.len(),
        ..StageCounts::default()
    };
    for r in &records {
        match r.status {
            PairStatus::Paired => counts.paired += 1,
            PairStatus::SingleSnapshot => counts.single_snapshot += 1,
            PairStatus::NoValidSnapshot => counts.no_valid_snapshot += 1,
        }
        if r.pair().is_some_and(|p| p.across_day) {
            counts.across_day_pairs += 1;
        }
    }

    let mut outputs = Vec::new();
    let snapshots = normalize_stage(&records, &lexicons, exec);
    counts.snapshots = snapshots.len();
    counts.sentences = snapshots.iter().map(|s| s.sentences.len()).sum();
    let p = out_dir.join("sentences.jsonl");
    io::write_jsonl(&p, &snapshots)?;
    outputs.push(p);

    let statements = parse_stage(&snapshots, &lexicons, exec);
    counts.statements = statements.len();
    let p = out_dir.join("statements.jsonl");
    io::write_jsonl(&p, &statements)?;
    outputs.push(p);

    let labeled = label_stage(&statements, &lexicons, exec);
    drop(statements);
    counts.role_labeled = labeled.iter().filter(|l| l.labeled.role_category.is_some()).count();
    counts.action_labeled = labeled.iter().filter(|l| l.labeled.action_category.is_some()).count();
    counts.deontic_labeled = labeled.iter().filter(|l| l.labeled.deontic_strength.is_some()).count();
    let p = out_dir.join("labeled.jsonl");
    io::write_jsonl(&p, &labeled)?;
    outputs.push(p);

    let plain: Vec<_> = labeled.iter().map(|l| l.labeled.clone()).collect();
    let coverage = RoleCoverage::measure(&plain, &lexicons.roles);
    drop(plain);

    let repos: Vec<RepoSnapshots> = group_by_repo(labeled)
        .into_iter()
        .filter(|r| !config.across_day_only || r.across_day)
        .collect();
    counts.repos_analyzed = repos.len();

    let mut inference = None;
    if !repos.is_empty() {
        let metrics = compute_corpus_metrics(&repos, &config.metrics_config(), false, exec)?;
        counts.metric_rows = metrics.len();
        let p = out_dir.join("metrics.csv");
        io::write_csv(&p, &METRICS_HEADER, &metrics)?;
        outputs.push(p);

        let inf = infer_stage(&metrics, &repos, &config.bootstrap_config(), exec)?;
        outputs.extend(write_inference(out_dir, &inf)?);
        outputs.extend(emit_figure_data(out_dir, &repos, &metrics)?);
        inference = Some(inf);
    }

    let lexicon_sums = Lexicons::sources(config.lexicon_dir.as_deref())?
        .into_iter()
        .map(|(file, bytes)| FileChecksum {
            file,
            sha256: sha256_hex(&bytes),
        })
        .collect();

    let mut manifest = Manifest {
        tool: format!("govgram {}", env!("CARGO_PKG_VERSION")),
        config: config.clone(),
        corpus_sha256: sha256_hex(&corpus_bytes),
        lexicons: lexicon_sums,
        counts,
        role_coverage: coverage.fraction(),
        role_lexicon_coverage: coverage.lexicon_fraction(),
        outputs: Vec::new(),
    };
    let p = out_dir.join("report.md");
    std::fs::write(&p, render_report(&manifest, inference.as_ref())).map_err(|e| Error::io(&p, e))?;
    outputs.push(p);

    let mut sums = outputs.iter().map(|p| checksum_file(p)).collect::<Result<Vec<_>>>()?;
    sums.sort_by(|a, b| a.file.cmp(&b.file));
    manifest.outputs = sums;
    let p = out_dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&p, json + "\n").map_err(|e| Error::io(&p, e))?;
    Ok(manifest)
}
