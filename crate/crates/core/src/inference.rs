//! Corpus-level estimates: equal-weight repository bootstrap with percentile
//! intervals, per-category share changes and the count/entropy summaries.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ig::Snapshot;
use crate::metrics::{CategoryDistribution, Feature, RepoMetrics, RepoSnapshots};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    /// Number of bootstrap replicates (B).
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            replicates: 10_000,
            alpha: 0.05,
            seed: 17,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Inference("B must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Inference(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub estimand: String,
    pub n_repos: usize,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    #[serde(rename = "B")]
    pub b: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl BootstrapResult {
    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

/// Mean of `values[idx]` computed as an offset from `pivot`, so a constant
/// sample yields the constant exactly.
fn shifted_mean(values: &[f64], pivot: f64, idx: impl Iterator<Item = usize>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for i in idx {
        sum += values[i] - pivot;
        n += 1;
    }
    pivot + sum / n as f64
}

/// Nearest-rank quantile of sorted data: the `ceil(p·B)`-th smallest value.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let b = sorted.len();
    let rank = ((p * b as f64) - 1e-9).ceil().clamp(1.0, b as f64) as usize;
    sorted[rank - 1]
}

/// Equal-weight mean with a percentile bootstrap interval.
///
/// Replicate `b` resamples `n` values with replacement from the RNG stream
/// `(seed, b)`; the interval is `[Q(α/2), Q(1−α/2)]` over replicate means
/// (nearest rank). Results do not depend on the execution mode.
pub fn bootstrap_mean(
    estimand: &str,
    values: &[f64],
    cfg: &BootstrapConfig,
    exec: Execution,
) -> Result<BootstrapResult> {
    cfg.validate()?;
    if values.is_empty() {
        return Err(Error::Inference(format!("`{estimand}`: no values to bootstrap")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Inference(format!("`{estimand}`: non-finite value")));
    }
    let n = values.len();
    let pivot = values[0];
    let mean = shifted_mean(values, pivot, 0..n);
    let mut reps = exec.map_range(cfg.replicates, |b| {
        let mut r = rng::stream(cfg.seed, b as u64);
        shifted_mean(values, pivot, (0..n).map(|_| r.gen_range(0..n)))
    });
    reps.sort_by(f64::total_cmp);
    Ok(BootstrapResult {
        estimand: estimand.to_string(),
        n_repos: n,
        mean,
        ci_low: nearest_rank(&reps, cfg.alpha / 2.0),
        ci_high: nearest_rank(&reps, 1.0 - cfg.alpha / 2.0),
        b: cfg.replicates,
        alpha: cfg.alpha,
        seed: cfg.seed,
    })
}

/// Bootstraps `(repo_id, value)` pairs after sorting by repository id, so
/// the result does not depend on input order.
pub fn bootstrap_by_repo(
    estimand: &str,
    values: &[(String, f64)],
    cfg: &BootstrapConfig,
    exec: Execution,
) -> Result<BootstrapResult> {
    let mut v: Vec<&(String, f64)> = values.iter().collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    let xs: Vec<f64> = v.into_iter().map(|(_, x)| *x).collect();
    bootstrap_mean(estimand, &xs, cfg, exec)
}

/// One repository's category proportions in both snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct SharePair {
    pub repo_id: String,
    pub initial: CategoryDistribution,
    pub latest: CategoryDistribution,
}

/// Repositories with labeled statements for `feature` in both snapshots,
/// sorted by id.
pub fn share_pairs(repos: &[RepoSnapshots], feature: Feature) -> Vec<SharePair> {
    let mut out: Vec<SharePair> = repos
        .iter()
        .map(|r| SharePair {
            repo_id: r.repo_id.clone(),
            initial: r.distribution(Snapshot::Initial, feature),
            latest: r.distribution(Snapshot::Latest, feature),
        })
        .filter(|p| p.initial.n_labeled > 0 && p.latest.n_labeled > 0)
        .collect();
    out.sort_by(|a, b| a.repo_id.cmp(&b.repo_id));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareDelta {
    pub feature: Feature,
    pub category: String,
    pub initial_share_pct: f64,
    pub latest_share_pct: f64,
    pub delta_pp: f64,
    pub ci: BootstrapResult,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Repository-paired mean change in a category's share, in percentage
/// points, with its bootstrap interval.
pub fn delta_share(
    pairs: &[SharePair],
    feature: Feature,
    category: &str,
    cfg: &BootstrapConfig,
    exec: Execution,
) -> Result<ShareDelta> {
    if !feature.categories().contains(&category) {
        return Err(Error::Inference(format!("`{category}` is not a {feature} category")));
    }
    let init: Vec<f64> = pairs.iter().map(|p| 100.0 * p.initial.proportion(category)).collect();
    let last: Vec<f64> = pairs.iter().map(|p| 100.0 * p.latest.proportion(category)).collect();
    let deltas: Vec<(String, f64)> = pairs
        .iter()
        .map(|p| {
            let d = 100.0 * (p.latest.proportion(category) - p.initial.proportion(category));
            (p.repo_id.clone(), d)
        })
        .collect();
    let ci = bootstrap_by_repo(&format!("delta_share:{feature}:{category}"), &deltas, cfg, exec)?;
    Ok(ShareDelta {
        feature,
        category: category.to_string(),
        initial_share_pct: mean(&init),
        latest_share_pct: mean(&last),
        delta_pp: ci.mean,
        ci,
    })
}

/// Share changes for every category of the feature, in table order. Empty
/// when no repository qualifies.
pub fn share_deltas(
    pairs: &[SharePair],
    feature: Feature,
    cfg: &BootstrapConfig,
    exec: Execution,
) -> Result<Vec<ShareDelta>> {
    if pairs.is_empty() {
        return Ok(Vec::new());
    }
    feature
        .categories()
        .into_iter()
        .map(|c| delta_share(pairs, feature, c, cfg, exec))
        .collect()
}

pub const INSUFFICIENT_N: &str = "insufficient-n";

/// One row of `summary_counts.csv`: richness per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsSummary {
    pub feature: Feature,
    pub n: usize,
    #[serde(rename = "initial_K")]
    pub initial_k: Option<f64>,
    #[serde(rename = "latest_K")]
    pub latest_k: Option<f64>,
    #[serde(rename = "delta_K_mean")]
    pub delta_k_mean: Option<f64>,
    #[serde(rename = "delta_K_ci")]
    pub delta_k_ci: String,
    #[serde(rename = "rarefied_delta_K_mean")]
    pub rarefied_delta_k_mean: Option<f64>,
    #[serde(rename = "rarefied_delta_K_ci")]
    pub rarefied_delta_k_ci: String,
}

pub const COUNTS_HEADER: [&str; 8] = [
    "feature",
    "n",
    "initial_K",
    "latest_K",
    "delta_K_mean",
    "delta_K_ci",
    "rarefied_delta_K_mean",
    "rarefied_delta_K_ci",
];

/// One row of `summary_entropy.csv`: entropy and divergence per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySummary {
    pub feature: Feature,
    pub n: usize,
    #[serde(rename = "initial_H")]
    pub initial_h: Option<f64>,
    #[serde(rename = "latest_H")]
    pub latest_h: Option<f64>,
    #[serde(rename = "delta_H_mean")]
    pub delta_h_mean: Option<f64>,
    #[serde(rename = "delta_H_ci")]
    pub delta_h_ci: String,
    pub jsd_mean: Option<f64>,
    pub jsd_ci: String,
}

pub const ENTROPY_HEADER: [&str; 8] = [
    "feature",
    "n",
    "initial_H",
    "latest_H",
    "delta_H_mean",
    "delta_H_ci",
    "jsd_mean",
    "jsd_ci",
];

/// Summary rows for one feature plus the underlying interval estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSummary {
    pub counts: CountsSummary,
    pub entropy: EntropySummary,
    pub estimates: Vec<BootstrapResult>,
}

pub fn format_ci(r: &BootstrapResult) -> String {
    format!("[{:.6}, {:.6}]", r.ci_low, r.ci_high)
}

fn column(rows: &[&RepoMetrics], f: impl Fn(&RepoMetrics) -> Option<f64>) -> Vec<(String, f64)> {
    rows.iter()
        .filter_map(|r| f(r).map(|v| (r.repo_id.clone(), v)))
        .collect()
}

/// Count and entropy summary rows for one feature. Repositories
/// ineligible for an estimand are dropped from it only. With fewer than two
/// eligible repositories the interval cells read `insufficient-n`.
pub fn summarize_feature(
    metrics: &[RepoMetrics],
    feature: Feature,
    cfg: &BootstrapConfig,
    exec: Execution,
) -> Result<FeatureSummary> {
    let rows: Vec<&RepoMetrics> = metrics.iter().filter(|m| m.feature == feature).collect();
    let k_rows: Vec<&RepoMetrics> = rows.iter().copied().filter(|m| m.eligible_k).collect();
    let h_rows: Vec<&RepoMetrics> = rows.iter().copied().filter(|m| m.eligible_h).collect();
    let mut estimates = Vec::new();

    let mut estimate = |name: &str, values: Vec<(String, f64)>| -> Result<(Option<f64>, String)> {
        match values.len() {
            0 => Ok((None, INSUFFICIENT_N.to_string())),
            1 => Ok((Some(values[0].1), INSUFFICIENT_N.to_string())),
            _ => {
                let r = bootstrap_by_repo(&format!("{name}:{feature}"), &values, cfg, exec)?;
                let out = (Some(r.mean), format_ci(&r));
                estimates.push(r);
                Ok(out)
            }
        }
    };
    let avg =
        |vals: Vec<(String, f64)>| (!vals.is_empty()).then(|| mean(&vals.iter().map(|v| v.1).collect::<Vec<_>>()));

    let (dk_mean, dk_ci) = estimate("delta_K", column(&k_rows, |m| Some(m.delta_k as f64)))?;
    let (rk_mean, rk_ci) = estimate("rarefied_delta_K", column(&k_rows, |m| m.rarefied_delta_k))?;
    let (dh_mean, dh_ci) = estimate("delta_H", column(&h_rows, |m| m.delta_h))?;
    let (js_mean, js_ci) = estimate("jsd", column(&h_rows, |m| m.jsd))?;

    Ok(FeatureSummary {
        counts: CountsSummary {
            feature,
            n: k_rows.len(),
            initial_k: avg(column(&k_rows, |m| Some(m.k_initial as f64))),
            latest_k: avg(column(&k_rows, |m| Some(m.k_latest as f64))),
            delta_k_mean: dk_mean,
            delta_k_ci: dk_ci,
            rarefied_delta_k_mean: rk_mean,
            rarefied_delta_k_ci: rk_ci,
        },
        entropy: EntropySummary {
            feature,
            n: h_rows.len(),
            initial_h: avg(column(&h_rows, |m| m.h_initial)),
            latest_h: avg(column(&h_rows, |m| m.h_latest)),
            delta_h_mean: dh_mean,
            delta_h_ci: dh_ci,
            jsd_mean: js_mean,
            jsd_ci: js_ci,
        },
        estimates,
    })
}
