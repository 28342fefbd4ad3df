//! Per-repository distributional metrics over labeled statements: Shannon
//! entropy, Jensen–Shannon divergence, thresholded category counts and
//! rarefied count change.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ig::{Polarity, Snapshot, Strength};
use crate::rng;
use crate::taxonomy::{ActionCategory, Category, LabeledRecord, LabeledStatement, RoleCategory};

/// The statement component a distribution is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Roles,
    Actions,
    /// Deontic strength: permissive / advisory / obligatory.
    Deontics,
    /// Deontic polarity: enabling / restricting.
    DeonticsBinary,
}

impl Feature {
    pub const ALL: [Feature; 4] = [
        Feature::Roles,
        Feature::Actions,
        Feature::Deontics,
        Feature::DeonticsBinary,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Feature::Roles => "roles",
            Feature::Actions => "actions",
            Feature::Deontics => "deontics",
            Feature::DeonticsBinary => "deontics_binary",
        }
    }

    /// The closed category set, in table order.
    pub fn categories(self) -> Vec<&'static str> {
        match self {
            Feature::Roles => RoleCategory::ALL.iter().map(|c| c.id()).collect(),
            Feature::Actions => ActionCategory::ALL.iter().map(|c| c.id()).collect(),
            Feature::Deontics => Strength::ALL.iter().map(|c| c.id()).collect(),
            Feature::DeonticsBinary => Polarity::ALL.iter().map(|c| c.id()).collect(),
        }
    }

    /// The statement's category for this feature, if labeled.
    pub fn label(self, s: &LabeledStatement) -> Option<&'static str> {
        match self {
            Feature::Roles => s.role_category.map(|c| c.id()),
            Feature::Actions => s.action_category.map(|c| c.id()),
            Feature::Deontics => s.deontic_strength.map(|c| c.id()),
            Feature::DeonticsBinary => s.deontic_polarity.map(|c| c.id()),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Feature {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Feature::ALL
            .into_iter()
            .find(|f| f.id() == s.trim())
            .ok_or_else(|| format!("unknown feature `{s}`"))
    }
}

/// Counts and proportions over categories observed in one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryDistribution {
    pub counts: BTreeMap<String, u64>,
    pub n_labeled: u64,
    pub proportions: BTreeMap<String, f64>,
}

impl CategoryDistribution {
    pub fn from_counts<K: Into<String>>(counts: impl IntoIterator<Item = (K, u64)>) -> Self {
        let mut map = BTreeMap::new();
        for (k, c) in counts {
            if c > 0 {
                *map.entry(k.into()).or_insert(0) += c;
            }
        }
        let n_labeled = map.values().sum();
        let proportions = map
            .iter()
            .map(|(k, &c)| (k.clone(), c as f64 / n_labeled as f64))
            .collect();
        CategoryDistribution {
            counts: map,
            n_labeled,
            proportions,
        }
    }

    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a str>) -> Self {
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for l in labels {
            *counts.entry(l).or_insert(0) += 1;
        }
        Self::from_counts(counts)
    }

    pub fn of_feature(statements: &[LabeledStatement], feature: Feature) -> Self {
        Self::from_labels(statements.iter().filter_map(|s| feature.label(s)))
    }

    pub fn proportion(&self, category: &str) -> f64 {
        self.proportions.get(category).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> usize {
        self.counts.len()
    }
}

fn xlog2x(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits: `−Σ p log2 p`.
pub fn entropy(dist: &CategoryDistribution) -> Result<f64> {
    if dist.n_labeled == 0 {
        return Err(Error::UndefinedMetric("entropy of an empty distribution".into()));
    }
    let h: f64 = -dist.proportions.values().map(|&p| xlog2x(p)).sum::<f64>();
    Ok(h.max(0.0))
}

/// Entropy divided by `log2(support)`; 0 for a single-category support.
pub fn normalized_entropy(dist: &CategoryDistribution) -> Result<f64> {
    let h = entropy(dist)?;
    let k = dist.support();
    Ok(if k > 1 { h / (k as f64).log2() } else { 0.0 })
}

/// Jensen–Shannon divergence in bits over the union of category ids.
pub fn jsd(p: &CategoryDistribution, q: &CategoryDistribution) -> Result<f64> {
    if p.n_labeled == 0 || q.n_labeled == 0 {
        return Err(Error::UndefinedMetric("JSD with an empty distribution".into()));
    }
    let mut keys: Vec<&String> = p.proportions.keys().chain(q.proportions.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut total = 0.0;
    for k in keys {
        let a = p.proportion(k);
        let b = q.proportion(k);
        let m = 0.5 * (a + b);
        // Each side's term is symmetric in (a, b) by construction.
        let ta = if a > 0.0 { a * (a / m).log2() } else { 0.0 };
        let tb = if b > 0.0 { b * (b / m).log2() } else { 0.0 };
        total += 0.5 * (ta + tb);
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Number of categories with at least `tau` statements.
pub fn count_k(dist: &CategoryDistribution, tau: u64) -> usize {
    dist.counts.values().filter(|&&c| c >= tau).count()
}

fn k_of_sample(
    codes: &[u32],
    picks: impl Iterator<Item = usize>,
    n_cats: usize,
    tau: u64,
    buf: &mut Vec<u64>,
) -> usize {
    buf.clear();
    buf.resize(n_cats, 0);
    for i in picks {
        buf[codes[i] as usize] += 1;
    }
    buf.iter().filter(|&&c| c >= tau).count()
}

/// Rarefied ΔK: the mean over `draws` of K(latest sample) − K(initial
/// sample), each sample drawn without replacement at size
/// `min(N_initial, N_latest, cap)`.
///
/// Draw `t` uses the RNG stream `(seed, t)` for both sides (common random
/// numbers), so identical snapshots give exactly zero and results do not
/// depend on the execution mode.
pub fn rarefied_delta_k<T: Eq + Hash>(
    initial: &[T],
    latest: &[T],
    draws: usize,
    cap: usize,
    tau: u64,
    seed: u64,
    exec: Execution,
) -> Result<f64> {
    if initial.is_empty() || latest.is_empty() {
        return Err(Error::UndefinedMetric("rarefaction with an empty snapshot".into()));
    }
    if draws == 0 {
        return Err(Error::UndefinedMetric("rarefaction with zero draws".into()));
    }
    let mut ids: HashMap<&T, u32> = HashMap::new();
    let mut a = Vec::with_capacity(initial.len());
    let mut b = Vec::with_capacity(latest.len());
    for (src, dst) in [(initial, &mut a), (latest, &mut b)] {
        for x in src {
            let next = ids.len() as u32;
            dst.push(*ids.entry(x).or_insert(next));
        }
    }
    let n_cats = ids.len();
    let n = initial.len().min(latest.len()).min(cap.max(1));
    let diffs = exec.map_range(draws, |t| {
        let mut buf = Vec::with_capacity(n_cats);
        let mut r = rng::stream(seed, t as u64);
        let ia = index::sample(&mut r, a.len(), n);
        let ka = k_of_sample(&a, ia.into_iter(), n_cats, tau, &mut buf);
        let mut r = rng::stream(seed, t as u64);
        let ib = index::sample(&mut r, b.len(), n);
        let kb = k_of_sample(&b, ib.into_iter(), n_cats, tau, &mut buf);
        kb as f64 - ka as f64
    });
    Ok(diffs.iter().sum::<f64>() / draws as f64)
}

/// Thresholds and rarefaction settings for [`compute_repo_metrics`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsConfig {
    pub tau: u64,
    pub min_labeled: u64,
    pub rarefaction_draws: usize,
    pub rarefaction_cap: usize,
    pub seed: u64,
    pub normalize_entropy: bool,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            tau: 2,
            min_labeled: 5,
            rarefaction_draws: 200,
            rarefaction_cap: 100,
            seed: 17,
            normalize_entropy: false,
        }
    }
}

/// One row of `metrics.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepoMetrics {
    pub repo_id: String,
    pub feature: Feature,
    #[serde(rename = "H_initial")]
    pub h_initial: Option<f64>,
    #[serde(rename = "H_latest")]
    pub h_latest: Option<f64>,
    #[serde(rename = "delta_H")]
    pub delta_h: Option<f64>,
    #[serde(rename = "K_initial")]
    pub k_initial: usize,
    #[serde(rename = "K_latest")]
    pub k_latest: usize,
    #[serde(rename = "delta_K")]
    pub delta_k: i64,
    #[serde(rename = "rarefied_delta_K")]
    pub rarefied_delta_k: Option<f64>,
    pub jsd: Option<f64>,
    #[serde(rename = "eligible_H")]
    pub eligible_h: bool,
    #[serde(rename = "eligible_K")]
    pub eligible_k: bool,
    pub n_initial: u64,
    pub n_latest: u64,
}

pub const METRICS_HEADER: [&str; 14] = [
    "repo_id",
    "feature",
    "H_initial",
    "H_latest",
    "delta_H",
    "K_initial",
    "K_latest",
    "delta_K",
    "rarefied_delta_K",
    "jsd",
    "eligible_H",
    "eligible_K",
    "n_initial",
    "n_latest",
];

/// Both labeled snapshots of one repository.
#[derive(Debug, Clone, PartialEq)]
pub struct RepoSnapshots {
    pub repo_id: String,
    pub across_day: bool,
    pub initial: Vec<LabeledStatement>,
    pub latest: Vec<LabeledStatement>,
}

impl RepoSnapshots {
    pub fn distribution(&self, snapshot: Snapshot, feature: Feature) -> CategoryDistribution {
        let side = match snapshot {
            Snapshot::Initial => &self.initial,
            Snapshot::Latest => &self.latest,
        };
        CategoryDistribution::of_feature(side, feature)
    }
}

/// Groups labeled records by repository, sorted by repository id.
pub fn group_by_repo(records: Vec<LabeledRecord>) -> Vec<RepoSnapshots> {
    let mut map: BTreeMap<String, RepoSnapshots> = BTreeMap::new();
    for r in records {
        let id = r.labeled.statement.sentence_ref.repo_id.clone();
        let entry = map.entry(id.clone()).or_insert_with(|| RepoSnapshots {
            repo_id: id,
            across_day: r.across_day,
            initial: Vec::new(),
            latest: Vec::new(),
        });
        match r.labeled.statement.sentence_ref.snapshot {
            Snapshot::Initial => entry.initial.push(r.labeled),
            Snapshot::Latest => entry.latest.push(r.labeled),
        }
    }
    map.into_values().collect()
}

/// Metrics for one repository and feature.
///
/// Entropy, ΔH and JSD need `min_labeled` statements on both sides
/// (`eligible_H`); rarefied ΔK needs at least one labeled statement on each
/// side (`eligible_K`). K itself is always reported.
pub fn compute_repo_metrics(repo: &RepoSnapshots, feature: Feature, cfg: &MetricsConfig) -> Result<RepoMetrics> {
    let lab_i: Vec<&str> = repo.initial.iter().filter_map(|s| feature.label(s)).collect();
    let lab_l: Vec<&str> = repo.latest.iter().filter_map(|s| feature.label(s)).collect();
    let di = CategoryDistribution::from_labels(lab_i.iter().copied());
    let dl = CategoryDistribution::from_labels(lab_l.iter().copied());
    let k_initial = count_k(&di, cfg.tau);
    let k_latest = count_k(&dl, cfg.tau);

    let eligible_h = di.n_labeled >= cfg.min_labeled && dl.n_labeled >= cfg.min_labeled;
    let h = |d: &CategoryDistribution| {
        if cfg.normalize_entropy {
            normalized_entropy(d)
        } else {
            entropy(d)
        }
    };
    let (h_initial, h_latest, jsd_v) = if eligible_h {
        (Some(h(&di)?), Some(h(&dl)?), Some(jsd(&di, &dl)?))
    } else {
        (None, None, None)
    };
    let eligible_k = di.n_labeled > 0 && dl.n_labeled > 0;
    let rarefied = if eligible_k {
        let seed = rng::derive_seed(cfg.seed, &format!("{}\u{1f}{}", repo.repo_id, feature.id()));
        Some(rarefied_delta_k(
            &lab_i,
            &lab_l,
            cfg.rarefaction_draws,
            cfg.rarefaction_cap,
            cfg.tau,
            seed,
            Execution::Sequential,
        )?)
    } else {
        None
    };
    Ok(RepoMetrics {
        repo_id: repo.repo_id.clone(),
        feature,
        h_initial,
        h_latest,
        delta_h: h_initial.zip(h_latest).map(|(a, b)| b - a),
        k_initial,
        k_latest,
        delta_k: k_latest as i64 - k_initial as i64,
        rarefied_delta_k: rarefied,
        jsd: jsd_v,
        eligible_h,
        eligible_k,
        n_initial: di.n_labeled,
        n_latest: dl.n_labeled,
    })
}

/// Metrics for every repository × feature, repositories in id order.
/// Parallelism is across repositories; each repository's rarefaction stream
/// is keyed by `(seed, repo_id, feature)`.
pub fn compute_corpus_metrics(
    repos: &[RepoSnapshots],
    cfg: &MetricsConfig,
    across_day_only: bool,
    exec: Execution,
) -> Result<Vec<RepoMetrics>> {
    let selected: Vec<&RepoSnapshots> = repos.iter().filter(|r| !across_day_only || r.across_day).collect();
    let rows = exec.try_map(&selected, |r| {
        Feature::ALL
            .iter()
            .map(|&f| {
                compute_repo_metrics(r, f, cfg).map_err(|e| e.in_stage("metrics", format!("{} ({f})", r.repo_id)))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(rows.into_iter().flatten().collect())
}
