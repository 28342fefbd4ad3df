//! Planted-truth corpus generator shared by the integration and acceptance
//! tests.
//!
//! Each repository gets an initial and a latest governance document written
//! from sentence templates whose role, action and deontic labels are known.
//! Role counts are drawn from a few entropy "types" and action categories
//! from a base set plus an optional gained category, so the corpus-level
//! ΔH (roles) and ΔK (actions) are fixed by construction.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Duration, TimeZone, Utc};
use govgram_core::ingest::{CorpusRecord, SnapshotPair, SnapshotVersion};
use govgram_core::io;
use govgram_core::rng;
use govgram_core::taxonomy::{ActionCategory, Category, RoleCategory};
use rand::seq::SliceRandom;
use rand::Rng;

pub const PLANTED_DELTA_K_ACTIONS: f64 = 0.6;
pub const PLANTED_DELTA_H_ROLES: f64 = 0.09;

/// Subject phrase per role category.
pub fn role_surface(c: RoleCategory) -> &'static str {
    use RoleCategory::*;
    match c {
        AllProject => "All contributors",
        Contributors => "Contributors",
        Maintainers => "Maintainers",
        AllCommunity => "Community members",
        CoreTeam => "The core team",
        TechnicalCommittee => "The technical committee",
        Subcommittee => "Working groups",
        TheProject => "The project",
        Ecosystem => "Downstream projects",
        Oversight => "The board",
        MeetingMakers => "Facilitators",
        Steering => "The steering committee",
        Misc => "Moderators",
        Outside => "Sponsors",
        Candidate => "Candidates",
        ProjectLead => "The project lead",
        Reviewers => "Reviewers",
        Chairs => "The chair",
        RespectedMembers => "Emeritus members",
        Github => "The GitHub organization",
    }
}

/// Verbs (base form) per action category.
pub fn action_verbs(c: ActionCategory) -> &'static [&'static str] {
    use ActionCategory::*;
    match c {
        Aggregation => &["discuss", "negotiate", "debate"],
        Position => &["appoint", "elect", "nominate"],
        Information => &["document", "publish", "announce"],
        Choice => &["merge", "submit", "build"],
        Constitutive => &["include", "define", "describe"],
        Authority => &["approve", "amend", "veto"],
        Payoff => &["fund", "reimburse", "distribute"],
    }
}

/// Verbs outside the action lexicon, for role-only sentences.
pub const UNCATEGORIZED_VERBS: &[&str] = &["revisit", "polish", "translate"];
/// Non-agent subjects, for action-only sentences.
pub const NON_AGENT_SUBJECTS: &[&str] = &["This policy", "This document", "The process", "The repository"];
pub const OBJECTS: &[&str] = &[
    "the roadmap",
    "the budget",
    "the proposal",
    "the release notes",
    "the changes",
    "the policy",
    "the schedule",
    "the minutes",
];
pub const MODALS: &[&str] = &[
    "must", "may", "should", "can", "will", "shall", "must not", "cannot", "may not",
];

/// One generated sentence and its intended labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSentence {
    pub role: Option<RoleCategory>,
    pub action: Option<ActionCategory>,
    pub modal: &'static str,
    pub text: String,
}

pub fn render_sentence(
    role: Option<RoleCategory>,
    action: Option<ActionCategory>,
    modal: &'static str,
    rng: &mut impl Rng,
) -> PlantedSentence {
    let subject = match role {
        Some(r) => role_surface(r).to_string(),
        None => NON_AGENT_SUBJECTS.choose(rng).unwrap().to_string(),
    };
    let verb = match action {
        Some(a) => *action_verbs(a).choose(rng).unwrap(),
        None => *UNCATEGORIZED_VERBS.choose(rng).unwrap(),
    };
    let object = OBJECTS.choose(rng).unwrap();
    PlantedSentence {
        role,
        action,
        modal,
        text: format!("{subject} {modal} {verb} {object}."),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RoleType {
    Zero,
    Up,
    Down,
    SmallUp,
    Ineligible,
}

impl RoleType {
    fn counts(self, rng: &mut impl Rng) -> (Vec<usize>, Vec<usize>) {
        match self {
            RoleType::Zero => {
                let c = [vec![3, 3], vec![2, 2, 2], vec![4, 2, 2], vec![3, 3, 3]]
                    .choose(rng)
                    .unwrap()
                    .clone();
                (c.clone(), c)
            }
            RoleType::Up => (vec![3, 3], vec![3, 3, 3, 3]),
            RoleType::Down => (vec![3, 3, 3, 3], vec![3, 3]),
            RoleType::SmallUp => (vec![6, 2], vec![4, 4]),
            RoleType::Ineligible => (vec![2, 2], vec![3, 3]),
        }
    }
}

fn entropy_of(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            p * p.log2()
        })
        .sum::<f64>()
}

/// A generated repository with its intended per-repo quantities.
#[derive(Debug, Clone)]
pub struct PlantedRepo {
    pub repo_id: String,
    pub initial: Vec<PlantedSentence>,
    pub latest: Vec<PlantedSentence>,
    pub initial_doc: String,
    pub latest_doc: String,
    pub initial_time: DateTime<Utc>,
    pub latest_time: DateTime<Utc>,
    pub across_day: bool,
    pub delta_k_actions: i64,
    /// `Some` when both snapshots have at least five role-labeled sentences.
    pub delta_h_roles: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub repos: Vec<PlantedRepo>,
}

impl PlantedCorpus {
    pub fn records(&self) -> Vec<CorpusRecord> {
        self.repos
            .iter()
            .map(|r| {
                let gap_days = (r.latest_time.date_naive() - r.initial_time.date_naive()).num_days();
                SnapshotPair {
                    repo_id: r.repo_id.clone(),
                    initial: SnapshotVersion {
                        commit: format!("{:040x}", 2 * crate_hash(&r.repo_id)),
                        time: r.initial_time,
                        text: r.initial_doc.clone(),
                    },
                    latest: SnapshotVersion {
                        commit: format!("{:040x}", 2 * crate_hash(&r.repo_id) + 1),
                        time: r.latest_time,
                        text: r.latest_doc.clone(),
                    },
                    gap_days,
                    across_day: gap_days > 0,
                    n_governance_commits: 2,
                }
                .into()
            })
            .collect()
    }

    pub fn write_jsonl(&self, path: &Path) {
        io::write_jsonl(path, &self.records()).unwrap();
    }

    pub fn across_day_count(&self) -> usize {
        self.repos.iter().filter(|r| r.across_day).count()
    }

    /// Realized mean ΔK (actions) over all repositories.
    pub fn realized_delta_k_actions(&self) -> f64 {
        self.repos.iter().map(|r| r.delta_k_actions as f64).sum::<f64>() / self.repos.len() as f64
    }

    /// Realized mean ΔH (roles) over H-eligible repositories.
    pub fn realized_delta_h_roles(&self) -> f64 {
        let v: Vec<f64> = self.repos.iter().filter_map(|r| r.delta_h_roles).collect();
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn crate_hash(s: &str) -> u128 {
    rng::stable_hash(s) as u128
}

fn scaled(n: usize, per_250: usize) -> usize {
    ((n * per_250) as f64 / 250.0).round() as usize
}

fn expand<T: Copy>(counts: &[(T, usize)]) -> Vec<T> {
    counts.iter().flat_map(|&(x, k)| std::iter::repeat_n(x, k)).collect()
}

fn render_doc(repo_id: &str, sentences: &[PlantedSentence], rng: &mut impl Rng) -> String {
    let mut doc = String::new();
    doc.push_str("[![build](https://ci.example.org/badge.svg)](https://ci.example.org)\n\n");
    doc.push_str(&format!("# {repo_id} governance\n\n## Roles and duties\n\n"));
    let mut i = 0;
    let mut section = 0;
    while i < sentences.len() {
        let len = rng.gen_range(2..=4).min(sentences.len() - i);
        let block = &sentences[i..i + len];
        if rng.gen_bool(0.3) {
            for s in block {
                doc.push_str("- ");
                doc.push_str(&emphasize(&s.text, rng));
                doc.push('\n');
            }
        } else {
            let mut prev: Option<RoleCategory> = None;
            let mut prev_pronoun = false;
            let mut parts = Vec::new();
            for s in block {
                let text = match (s.role, prev) {
                    (Some(r), Some(p)) if r == p && !prev_pronoun && rng.gen_bool(0.5) => {
                        prev_pronoun = true;
                        format!("They{}", &s.text[role_surface(r).len()..])
                    }
                    _ => {
                        prev_pronoun = false;
                        emphasize(&s.text, rng)
                    }
                };
                prev = s.role;
                parts.push(text);
            }
            doc.push_str(&parts.join(" "));
            doc.push('\n');
        }
        doc.push('\n');
        i += len;
        if i < sentences.len() && rng.gen_bool(0.25) {
            section += 1;
            doc.push_str(&format!("## Section {section}\n\n"));
        }
    }
    doc
}

/// Wraps the first word in bold now and then.
fn emphasize(text: &str, rng: &mut impl Rng) -> String {
    if !rng.gen_bool(0.2) {
        return text.to_string();
    }
    match text.split_once(' ') {
        Some((first, rest)) => format!("**{first}** {rest}"),
        None => text.to_string(),
    }
}

fn build_snapshot(
    role_counts: &[(RoleCategory, usize)],
    action_counts: &[(ActionCategory, usize)],
    rng: &mut impl Rng,
) -> Vec<PlantedSentence> {
    let mut roles: Vec<Option<RoleCategory>> = expand(role_counts).into_iter().map(Some).collect();
    let mut actions: Vec<Option<ActionCategory>> = expand(action_counts).into_iter().map(Some).collect();
    roles.shuffle(rng);
    actions.shuffle(rng);
    let n = roles.len().max(actions.len());
    roles.resize(n, None);
    actions.resize(n, None);
    roles.shuffle(rng);
    // Keep each sentence labeled on at least one side.
    let mut pairs: Vec<(Option<RoleCategory>, Option<ActionCategory>)> = roles.into_iter().zip(actions).collect();
    for i in 0..pairs.len() {
        if pairs[i].0.is_none() && pairs[i].1.is_none() {
            if let Some(j) = (0..pairs.len()).find(|&j| pairs[j].0.is_some() && pairs[j].1.is_some()) {
                let a = pairs[j].1.take();
                pairs[i].1 = a;
            }
        }
    }
    pairs
        .into_iter()
        .map(|(r, a)| {
            let modal = MODALS[rng.gen_range(0..MODALS.len())];
            render_sentence(r, a, modal, rng)
        })
        .collect()
}

/// Generates `n` repositories. With `n = 250` the realized means are
/// ΔK(actions) = 0.6 exactly and ΔH(roles) ≈ 0.0899 (over the 240
/// H-eligible repositories); `within_day` repositories have both snapshots
/// on the same UTC date.
pub fn planted_corpus(n: usize, within_day: usize, seed: u64) -> PlantedCorpus {
    let mut r = rng::stream(seed, 0);
    let up = scaled(n, 29);
    let down = scaled(n, 8);
    let small_up = scaled(n, 3);
    let inel = scaled(n, 10);
    let zero = n - up - down - small_up - inel;
    let mut types = expand(&[
        (RoleType::Up, up),
        (RoleType::Down, down),
        (RoleType::SmallUp, small_up),
        (RoleType::Ineligible, inel),
        (RoleType::Zero, zero),
    ]);
    types.shuffle(&mut r);
    let gainers = (n as f64 * PLANTED_DELTA_K_ACTIONS).round() as usize;
    let mut gains = expand(&[(true, gainers), (false, n - gainers)]);
    gains.shuffle(&mut r);
    let mut same_day = expand(&[(true, within_day), (false, n - within_day)]);
    same_day.shuffle(&mut r);

    let base_time = Utc.with_ymd_and_hms(2014, 3, 26, 2, 0, 0).unwrap();
    let mut repos = Vec::with_capacity(n);
    for i in 0..n {
        let repo_id = format!("org{:03}/project{:03}", i % 37, i);
        let (ci, cl) = types[i].counts(&mut r);
        let mut role_cats = RoleCategory::ALL.to_vec();
        role_cats.shuffle(&mut r);
        let roles_i: Vec<(RoleCategory, usize)> = role_cats.iter().copied().zip(ci.iter().copied()).collect();
        let roles_l: Vec<(RoleCategory, usize)> = role_cats.iter().copied().zip(cl.iter().copied()).collect();

        let mut act_cats = ActionCategory::ALL.to_vec();
        act_cats.shuffle(&mut r);
        let k_base = r.gen_range(2..=4);
        let mut acts_i: Vec<(ActionCategory, usize)> =
            act_cats[..k_base].iter().map(|&c| (c, r.gen_range(2..=4))).collect();
        let mut acts_l: Vec<(ActionCategory, usize)> =
            act_cats[..k_base].iter().map(|&c| (c, r.gen_range(2..=4))).collect();
        let delta_k = if gains[i] {
            acts_l.push((act_cats[k_base], r.gen_range(2..=3)));
            1
        } else {
            0
        };
        // Singletons stay below the presence threshold.
        if r.gen_bool(0.3) {
            acts_i.push((act_cats[6], 1));
        }
        if r.gen_bool(0.3) {
            acts_l.push((act_cats[5], 1));
        }

        let initial = build_snapshot(&roles_i, &acts_i, &mut r);
        let latest = build_snapshot(&roles_l, &acts_l, &mut r);
        let initial_time = base_time + Duration::days(r.gen_range(0..1500));
        let latest_time = if same_day[i] {
            initial_time + Duration::hours(3)
        } else {
            initial_time + Duration::days(r.gen_range(1..2000))
        };
        let eligible = ci.iter().sum::<usize>() >= 5 && cl.iter().sum::<usize>() >= 5;
        let initial_doc = render_doc(&repo_id, &initial, &mut r);
        let latest_doc = render_doc(&repo_id, &latest, &mut r);
        repos.push(PlantedRepo {
            across_day: !same_day[i],
            delta_k_actions: delta_k,
            delta_h_roles: eligible.then(|| entropy_of(&cl) - entropy_of(&ci)),
            repo_id,
            initial,
            latest,
            initial_doc,
            latest_doc,
            initial_time,
            latest_time,
        });
    }
    PlantedCorpus { repos }
}

/// Per-category intended counts of one snapshot, for debugging.
pub fn role_histogram(sentences: &[PlantedSentence]) -> BTreeMap<RoleCategory, usize> {
    let mut m = BTreeMap::new();
    for s in sentences {
        if let Some(r) = s.role {
            *m.entry(r).or_insert(0) += 1;
        }
    }
    m
}
