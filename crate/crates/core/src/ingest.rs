//! Governance-file discovery, git history recovery and snapshot pairing.
//!
//! History is read through the `git` command-line client, so any local clone
//! (working tree or bare) that git itself can read is supported.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;

use chrono::{DateTime, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::normalize::is_valid_snapshot;

/// `name<TAB>regex` lines; names are the closed pattern identifiers.
pub const DEFAULT_PATTERNS: &str = "\
governance-md\t(?i)^governance([._-].*)?\\.md$
governance-markdown\t(?i)^governance([._-].*)?\\.markdown$
governance-rst\t(?i)^governance([._-].*)?\\.rst$
governance-txt\t(?i)^governance([._-].*)?\\.txt$
governance-bare\t(?i)^governance$
";

/// Root-level filename patterns that mark a governance document.
#[derive(Debug, Clone)]
pub struct GovernancePatterns {
    patterns: Vec<(String, Regex)>,
}

impl Default for GovernancePatterns {
    fn default() -> Self {
        Self::parse(DEFAULT_PATTERNS, "builtin").expect("built-in patterns compile")
    }
}

impl GovernancePatterns {
    pub fn parse(source: &str, origin: &str) -> Result<Self> {
        let mut patterns = Vec::new();
        for (i, line) in source.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, pat) = line
                .split_once('\t')
                .ok_or_else(|| Error::Config(format!("{origin}:{}: expected `name<TAB>regex`", i + 1)))?;
            let re = Regex::new(pat.trim()).map_err(|e| Error::Config(format!("{origin}:{}: {e}", i + 1)))?;
            patterns.push((name.trim().to_string(), re));
        }
        Ok(GovernancePatterns { patterns })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src, &path.display().to_string())
    }

    /// Name of the first pattern matching `filename`.
    pub fn matches(&self, filename: &str) -> Option<&str> {
        self.patterns
            .iter()
            .find(|(_, re)| re.is_match(filename))
            .map(|(name, _)| name.as_str())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.patterns.iter().map(|(n, _)| n.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GovernanceFileRef {
    pub repo_id: String,
    pub path: String,
    pub filename_pattern: String,
}

/// One post-commit version of a governance file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub commit: String,
    pub time: DateTime<Utc>,
    pub text: String,
    /// Non-empty after markup stripping with at least one sentence.
    pub valid: bool,
}

impl HistoryEntry {
    pub fn new(commit: impl Into<String>, time: DateTime<Utc>, text: impl Into<String>) -> Self {
        let text = text.into();
        HistoryEntry {
            commit: commit.into(),
            time,
            valid: is_valid_snapshot(&text),
            text,
        }
    }
}

fn git(repo: &Path, args: &[&str]) -> std::io::Result<std::process::Output> {
    Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(args)
        .env("GIT_CONFIG_NOSYSTEM", "1")
        .env("LC_ALL", "C")
        .output()
}

fn git_ok(repo: &Path, repo_id: &str, args: &[&str]) -> Result<Vec<u8>> {
    let out = git(repo, args).map_err(|e| Error::Ingest {
        repo: repo_id.to_string(),
        message: format!("cannot run git: {e}"),
    })?;
    if !out.status.success() {
        return Err(Error::Ingest {
            repo: repo_id.to_string(),
            message: String::from_utf8_lossy(&out.stderr).trim().to_string(),
        });
    }
    Ok(out.stdout)
}

fn has_head(repo: &Path) -> bool {
    git(repo, &["rev-parse", "--verify", "--quiet", "HEAD"]).is_ok_and(|o| o.status.success())
}

/// Lists root-level governance files, tracked at `HEAD` or present in the
/// working tree, deduplicated and sorted bytewise by path.
pub fn discover_governance_files(
    repo_root: &Path,
    repo_id: &str,
    patterns: &GovernancePatterns,
) -> Result<Vec<GovernanceFileRef>> {
    let bare = git_ok(repo_root, repo_id, &["rev-parse", "--is-bare-repository"])?;
    let bare = String::from_utf8_lossy(&bare).trim() == "true";
    let mut names = BTreeSet::new();
    if has_head(repo_root) {
        let listing = git_ok(repo_root, repo_id, &["ls-tree", "--name-only", "HEAD"])?;
        names.extend(String::from_utf8_lossy(&listing).lines().map(str::to_string));
    }
    if !bare {
        let dir = std::fs::read_dir(repo_root).map_err(|e| Error::Ingest {
            repo: repo_id.to_string(),
            message: e.to_string(),
        })?;
        for entry in dir.flatten() {
            if entry.file_type().is_ok_and(|t| t.is_file()) {
                names.insert(entry.file_name().to_string_lossy().into_owned());
            }
        }
    }
    Ok(names
        .into_iter()
        .filter_map(|name| {
            patterns.matches(&name).map(|p| GovernanceFileRef {
                repo_id: repo_id.to_string(),
                filename_pattern: p.to_string(),
                path: name,
            })
        })
        .collect())
}

/// Every commit that touched the file, oldest first, with the post-commit
/// content. Commits whose blob cannot be read (deletions, corrupt objects)
/// are skipped with a warning.
pub fn recover_history(repo_root: &Path, file: &GovernanceFileRef) -> Result<Vec<HistoryEntry>> {
    if !has_head(repo_root) {
        return Ok(Vec::new());
    }
    let log = git_ok(repo_root, &file.repo_id, &["log", "--format=%H %ct", "--", &file.path])?;
    let mut commits: Vec<(String, i64)> = String::from_utf8_lossy(&log)
        .lines()
        .filter_map(|l| {
            let (h, t) = l.split_once(' ')?;
            Some((h.to_string(), t.trim().parse().ok()?))
        })
        .collect();
    // git log is newest first; reverse, then a stable sort keeps topological
    // order among equal timestamps.
    commits.reverse();
    commits.sort_by_key(|(_, t)| *t);

    let mut out = Vec::with_capacity(commits.len());
    for (hash, secs) in commits {
        let spec = format!("{hash}:{}", file.path);
        let blob = match git(repo_root, &["show", &spec]) {
            Ok(o) if o.status.success() => o.stdout,
            _ => {
                log::warn!("{}: skipping {} (blob unreadable)", file.repo_id, spec);
                continue;
            }
        };
        let Some(time) = DateTime::from_timestamp(secs, 0) else {
            log::warn!("{}: skipping {hash} (bad timestamp {secs})", file.repo_id);
            continue;
        };
        out.push(HistoryEntry::new(hash, time, String::from_utf8_lossy(&blob)));
    }
    Ok(out)
}

/// Merges per-file histories into one history of composite views: at every
/// commit touching any file, the view is [`compose_view`] over the latest
/// version of each file as of that commit.
pub fn composite_history(histories: &[(String, Vec<HistoryEntry>)]) -> Vec<HistoryEntry> {
    // (time, commit) → the (file index, text) versions written by that commit.
    type Touches<'a> = Vec<(usize, &'a str)>;
    let mut order: BTreeMap<(DateTime<Utc>, String), Touches> = BTreeMap::new();
    for (fi, (_, hist)) in histories.iter().enumerate() {
        for e in hist {
            order
                .entry((e.time, e.commit.clone()))
                .or_default()
                .push((fi, e.text.as_str()));
        }
    }
    let mut current: Vec<Option<&str>> = vec![None; histories.len()];
    let mut out = Vec::with_capacity(order.len());
    for ((time, commit), updates) in order {
        for (fi, text) in updates {
            current[fi] = Some(text);
        }
        let files: Vec<(String, String)> = histories
            .iter()
            .zip(&current)
            .filter_map(|((path, _), t)| t.map(|t| (path.clone(), t.to_string())))
            .collect();
        out.push(HistoryEntry::new(commit, time, compose_view(&files)));
    }
    out
}

fn paragraph_break() -> &'static Regex {
    static RE: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\n[ \t\r]*\n").unwrap())
}

/// Concatenates same-commit files in bytewise path order, separated by a
/// blank line, dropping paragraphs that repeat an earlier one (whitespace
/// normalized). A single file is returned unchanged.
pub fn compose_view(files: &[(String, String)]) -> String {
    match files {
        [] => return String::new(),
        [(_, text)] => return text.clone(),
        _ => {}
    }
    let mut sorted: Vec<&(String, String)> = files.iter().collect();
    sorted.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
    let mut seen = BTreeSet::new();
    let mut paragraphs = Vec::new();
    for (_, text) in sorted {
        for p in paragraph_break().split(text) {
            let p = p.trim_matches(|c| c == '\n' || c == '\r');
            let key = p.split_whitespace().collect::<Vec<_>>().join(" ");
            if key.is_empty() || !seen.insert(key) {
                continue;
            }
            paragraphs.push(p);
        }
    }
    paragraphs.join("\n\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairStatus {
    Paired,
    SingleSnapshot,
    NoValidSnapshot,
}

impl PairStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PairStatus::Paired => "paired",
            PairStatus::SingleSnapshot => "single-snapshot",
            PairStatus::NoValidSnapshot => "no-valid-snapshot",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotVersion {
    pub commit: String,
    pub time: DateTime<Utc>,
    pub text: String,
}

/// A repository's earliest and latest valid governance snapshots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotPair {
    pub repo_id: String,
    pub initial: SnapshotVersion,
    pub latest: SnapshotVersion,
    /// Calendar-day difference between the UTC commit dates.
    pub gap_days: i64,
    pub across_day: bool,
    pub n_governance_commits: usize,
}

/// One corpus line: a pair, or an exclusion kept for descriptive counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub repo_id: String,
    pub status: PairStatus,
    pub initial: Option<SnapshotVersion>,
    pub latest: Option<SnapshotVersion>,
    pub gap_days: Option<i64>,
    pub across_day: Option<bool>,
    pub n_commits: usize,
}

impl CorpusRecord {
    pub fn pair(&self) -> Option<SnapshotPair> {
        if self.status != PairStatus::Paired {
            return None;
        }
        let initial = self.initial.clone()?;
        let latest = self.latest.clone()?;
        let gap_days = (latest.time.date_naive() - initial.time.date_naive()).num_days();
        Some(SnapshotPair {
            repo_id: self.repo_id.clone(),
            initial,
            latest,
            gap_days,
            across_day: gap_days > 0,
            n_governance_commits: self.n_commits,
        })
    }
}

impl From<SnapshotPair> for CorpusRecord {
    fn from(p: SnapshotPair) -> Self {
        CorpusRecord {
            repo_id: p.repo_id,
            status: PairStatus::Paired,
            initial: Some(p.initial),
            latest: Some(p.latest),
            gap_days: Some(p.gap_days),
            across_day: Some(p.across_day),
            n_commits: p.n_governance_commits,
        }
    }
}

/// Pairs the earliest and latest valid snapshots. Needs at least two
/// distinct commits among the valid entries; otherwise returns an exclusion.
pub fn pair_snapshots(repo_id: &str, history: &[HistoryEntry]) -> CorpusRecord {
    let valid: Vec<&HistoryEntry> = history.iter().filter(|e| e.valid).collect();
    let distinct: BTreeSet<&str> = valid.iter().map(|e| e.commit.as_str()).collect();
    let version = |e: &HistoryEntry| SnapshotVersion {
        commit: e.commit.clone(),
        time: e.time,
        text: e.text.clone(),
    };
    match (valid.first(), valid.last()) {
        (Some(first), Some(last)) if distinct.len() >= 2 => {
            let gap_days = (last.time.date_naive() - first.time.date_naive()).num_days();
            SnapshotPair {
                repo_id: repo_id.to_string(),
                initial: version(first),
                latest: version(last),
                gap_days,
                across_day: gap_days > 0,
                n_governance_commits: distinct.len(),
            }
            .into()
        }
        (Some(first), _) => CorpusRecord {
            repo_id: repo_id.to_string(),
            status: PairStatus::SingleSnapshot,
            initial: Some(version(first)),
            latest: None,
            gap_days: None,
            across_day: None,
            n_commits: distinct.len(),
        },
        _ => CorpusRecord {
            repo_id: repo_id.to_string(),
            status: PairStatus::NoValidSnapshot,
            initial: None,
            latest: None,
            gap_days: None,
            across_day: None,
            n_commits: 0,
        },
    }
}

/// Discovery, history and pairing for one repository.
pub fn ingest_repo(repo_root: &Path, repo_id: &str, patterns: &GovernancePatterns) -> Result<CorpusRecord> {
    let files = discover_governance_files(repo_root, repo_id, patterns)?;
    let mut histories = Vec::with_capacity(files.len());
    for f in &files {
        histories.push((f.path.clone(), recover_history(repo_root, f)?));
    }
    let history = match histories.len() {
        0 => Vec::new(),
        1 => histories.pop().map(|(_, h)| h).unwrap_or_default(),
        _ => composite_history(&histories),
    };
    Ok(pair_snapshots(repo_id, &history))
}

/// A repository to ingest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepoSpec {
    pub repo_id: String,
    pub path: PathBuf,
}

/// Reads a repository list: one `path` or `repo_id<TAB>path` per line, `#`
/// comments. Relative paths resolve against the list file's directory; a
/// bare path's id is its final component.
pub fn read_repo_list(path: &Path) -> Result<Vec<RepoSpec>> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for line in src.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, p) = match line.split_once('\t') {
            Some((id, p)) => (Some(id.trim().to_string()), p.trim()),
            None => (None, line),
        };
        let p = base.join(p);
        let repo_id = id.unwrap_or_else(|| {
            p.file_name()
                .map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
        });
        out.push(RepoSpec { repo_id, path: p });
    }
    Ok(out)
}

/// Ingests repositories independently; output order follows the input list.
pub fn ingest_corpus(repos: &[RepoSpec], patterns: &GovernancePatterns, exec: Execution) -> Result<Vec<CorpusRecord>> {
    exec.try_map(repos, |r| ingest_repo(&r.path, &r.repo_id, patterns))
}
