//! Closed governance taxonomies and the lexicons that map surface text onto
//! them.
//!
//! Role categories follow the twenty-way role typology and action categories
//! follow the seven-way rule typology (aggregation, position, information,
//! choice, constitutive, authority, payoff). Lexicons are plain TSV files so
//! the manual normalization step stays auditable and versioned.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ig::{DeonticType, InstitutionalStatement, Polarity, StatementRecord, Strength};
use crate::text;

/// A member of a closed category set.
pub trait Category: Copy + Eq + Ord + fmt::Debug + FromStr<Err = String> + 'static {
    const ALL: &'static [Self];
    fn id(self) -> &'static str;
}

macro_rules! closed_set {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $id:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name { $($variant),+ }

        impl Category for $name {
            const ALL: &'static [Self] = &[$($name::$variant),+];
            fn id(self) -> &'static str {
                match self { $($name::$variant => $id),+ }
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($id => Ok($name::$variant),)+
                    other => Err(format!("unknown {} `{}`", stringify!($name), other)),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.id())
            }
        }
    };
}

closed_set! {
    /// The twenty role categories, in table order.
    RoleCategory {
        AllProject => "all_project",
        Contributors => "contributors",
        Maintainers => "maintainers",
        AllCommunity => "all_community",
        CoreTeam => "core_team",
        TechnicalCommittee => "technical_committee",
        Subcommittee => "subcommittee",
        TheProject => "the_project",
        Ecosystem => "ecosystem",
        Oversight => "oversight",
        MeetingMakers => "meeting_makers",
        Steering => "steering",
        Misc => "misc",
        Outside => "outside",
        Candidate => "candidate",
        ProjectLead => "project_lead",
        Reviewers => "reviewers",
        Chairs => "chairs",
        RespectedMembers => "respected_members",
        Github => "github",
    }
}

closed_set! {
    /// The seven action categories, in table order.
    ActionCategory {
        Aggregation => "aggregation",
        Position => "position",
        Information => "information",
        Choice => "choice",
        Constitutive => "constitutive",
        Authority => "authority",
        Payoff => "payoff",
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry<C> {
    pub surface: String,
    tokens: Vec<String>,
    pub category: C,
    /// `(keyword phrase, category)` overrides, checked in order.
    pub context: Vec<(String, C)>,
}

/// Surface phrase → category table with longest-match-first lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon<C> {
    entries: Vec<LexiconEntry<C>>,
    max_tokens: usize,
}

pub type RoleLexicon = Lexicon<RoleCategory>;
pub type ActionLexicon = Lexicon<ActionCategory>;

pub const DEFAULT_ROLE_LEXICON: &str = include_str!("../lexicons/roles.tsv");
pub const DEFAULT_ACTION_LEXICON: &str = include_str!("../lexicons/actions.tsv");
pub const ROLE_LEXICON_FILE: &str = "roles.tsv";
pub const ACTION_LEXICON_FILE: &str = "actions.tsv";

/// A lexicon match inside a piece of text, in byte offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LexiconMatch<C> {
    pub start: usize,
    pub end: usize,
    pub category: C,
}

impl<C: Category> Lexicon<C> {
    /// Parses the line format `surface<TAB>category[<TAB>keyword=category ...]`.
    pub fn parse(source: &str, origin: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in source.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Lexicon {
                path: origin.to_string(),
                line: i + 1,
                message,
            };
            let mut fields = line.split('\t');
            let surface = fields.next().unwrap_or("").trim().to_lowercase();
            let category = fields
                .next()
                .ok_or_else(|| err("missing category column".into()))?
                .parse::<C>()
                .map_err(err)?;
            let tokens = phrase_tokens(&surface);
            if tokens.is_empty() {
                return Err(err("empty surface".into()));
            }
            let mut context = Vec::new();
            for field in fields.flat_map(|f| f.split(' ').filter(|s| !s.is_empty())) {
                // Keywords may contain spaces when written as `as_a_group=...`.
                let (kw, cat) = field
                    .split_once('=')
                    .ok_or_else(|| err(format!("bad context cue `{field}`")))?;
                context.push((kw.replace('_', " ").to_lowercase(), cat.parse::<C>().map_err(err)?));
            }
            entries.push(LexiconEntry {
                surface,
                tokens,
                category,
                context,
            });
        }
        let max_tokens = entries.iter().map(|e| e.tokens.len()).max().unwrap_or(0);
        Ok(Lexicon { entries, max_tokens })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn entries(&self) -> &[LexiconEntry<C>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exact (case-insensitive, number-insensitive) lookup of a whole phrase.
    pub fn lookup(&self, phrase: &str) -> Option<&LexiconEntry<C>> {
        let toks = phrase_tokens(phrase);
        self.entries.iter().find(|e| e.tokens == toks)
    }

    /// All maximal matches in `text`, scanning left to right. At each position
    /// the longest entry wins; ties go to the earlier lexicon line.
    pub fn find_all(&self, text: &str) -> Vec<LexiconMatch<C>> {
        let words = text::words(text);
        let keys: Vec<String> = words.iter().map(|w| text::singular(&w.lower)).collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < words.len() {
            match self.longest_at(&keys, i) {
                Some((entry, n)) => {
                    out.push(LexiconMatch {
                        start: words[i].start,
                        end: words[i + n - 1].end,
                        category: entry.category,
                    });
                    i += n;
                }
                None => i += 1,
            }
        }
        out
    }

    /// The single longest match anywhere in `text` (by matched character
    /// length; ties go to the earlier lexicon line, then the earlier position).
    pub fn longest_match(&self, text: &str) -> Option<LexiconMatch<C>> {
        let words = text::words(text);
        let keys: Vec<String> = words.iter().map(|w| text::singular(&w.lower)).collect();
        let mut best: Option<(usize, usize, LexiconMatch<C>)> = None;
        for i in 0..words.len() {
            for (order, entry) in self.entries.iter().enumerate() {
                let n = entry.tokens.len();
                if i + n <= keys.len() && keys[i..i + n] == entry.tokens[..] {
                    let m = LexiconMatch {
                        start: words[i].start,
                        end: words[i + n - 1].end,
                        category: entry.category,
                    };
                    let len = entry.surface.chars().count();
                    let better = match &best {
                        None => true,
                        Some((blen, border, _)) => len > *blen || (len == *blen && order < *border),
                    };
                    if better {
                        best = Some((len, order, m));
                    }
                }
            }
        }
        best.map(|(_, _, m)| m)
    }

    fn longest_at(&self, keys: &[String], i: usize) -> Option<(&LexiconEntry<C>, usize)> {
        let max = self.max_tokens.min(keys.len() - i);
        for n in (1..=max).rev() {
            if let Some(e) = self.entries.iter().find(|e| e.tokens[..] == keys[i..i + n]) {
                return Some((e, n));
            }
        }
        None
    }
}

/// Lowercased, singularized word tokens of a lexicon phrase.
fn phrase_tokens(s: &str) -> Vec<String> {
    text::words(s).iter().map(|w| text::singular(&w.lower)).collect()
}

/// The role and action lexicons used for labeling.
#[derive(Debug, Clone)]
pub struct Lexicons {
    pub roles: RoleLexicon,
    pub actions: ActionLexicon,
}

impl Lexicons {
    pub fn builtin() -> Self {
        Lexicons {
            roles: Lexicon::parse(DEFAULT_ROLE_LEXICON, "builtin:roles.tsv").expect("built-in role lexicon parses"),
            actions: Lexicon::parse(DEFAULT_ACTION_LEXICON, "builtin:actions.tsv")
                .expect("built-in action lexicon parses"),
        }
    }

    /// Loads `roles.tsv` and `actions.tsv` from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        Ok(Lexicons {
            roles: Lexicon::load(&dir.join(ROLE_LEXICON_FILE))?,
            actions: Lexicon::load(&dir.join(ACTION_LEXICON_FILE))?,
        })
    }

    /// Raw lexicon sources, for checksumming.
    pub fn sources(dir: Option<&Path>) -> Result<Vec<(String, Vec<u8>)>> {
        match dir {
            None => Ok(vec![
                (ROLE_LEXICON_FILE.to_string(), DEFAULT_ROLE_LEXICON.as_bytes().to_vec()),
                (
                    ACTION_LEXICON_FILE.to_string(),
                    DEFAULT_ACTION_LEXICON.as_bytes().to_vec(),
                ),
            ]),
            Some(dir) => [ROLE_LEXICON_FILE, ACTION_LEXICON_FILE]
                .iter()
                .map(|name| {
                    let p = dir.join(name);
                    std::fs::read(&p)
                        .map(|b| (name.to_string(), b))
                        .map_err(|e| Error::io(p, e))
                })
                .collect(),
        }
    }
}

/// Maps a role phrase onto a role category.
///
/// The longest lexicon entry found in the phrase decides. A phrase with no
/// lexicon hit that still names an agent falls into `misc`; anything else is
/// unlabeled.
pub fn normalize_role(role_text: &str, lexicon: &RoleLexicon) -> Option<RoleCategory> {
    if let Some(m) = lexicon.longest_match(role_text) {
        return Some(m.category);
    }
    if text::is_agent_phrase(role_text) {
        Some(RoleCategory::Misc)
    } else {
        None
    }
}

/// Maps an action lemma onto an action category, letting context cues in the
/// lexicon entry override its default.
pub fn categorize_action(
    action_lemma: &str,
    sentence_context: &str,
    lexicon: &ActionLexicon,
) -> Option<ActionCategory> {
    let entry = lexicon.lookup(action_lemma)?;
    let ctx = sentence_context.to_lowercase();
    for (kw, cat) in &entry.context {
        if text::contains_phrase(&ctx, kw) {
            return Some(*cat);
        }
    }
    Some(entry.category)
}

pub fn deontic_binary(deontic: &DeonticType) -> Polarity {
    deontic.polarity
}

/// A statement plus its taxonomy assignments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledStatement {
    #[serde(flatten)]
    pub statement: InstitutionalStatement,
    pub role_category: Option<RoleCategory>,
    pub action_category: Option<ActionCategory>,
    pub deontic_strength: Option<Strength>,
    pub deontic_polarity: Option<Polarity>,
}

/// Labels one statement. `sentence_context` is the full sentence text, used
/// for action disambiguation.
pub fn label_statement(
    statement: InstitutionalStatement,
    sentence_context: &str,
    lexicons: &Lexicons,
) -> LabeledStatement {
    let role_category = statement
        .role
        .as_deref()
        .and_then(|r| normalize_role(r, &lexicons.roles));
    let action_category = statement
        .action
        .as_deref()
        .and_then(|a| categorize_action(a, sentence_context, &lexicons.actions));
    let deontic_strength = statement.deontic.as_ref().map(|d| d.strength);
    let deontic_polarity = statement.deontic.as_ref().map(deontic_binary);
    LabeledStatement {
        statement,
        role_category,
        action_category,
        deontic_strength,
        deontic_polarity,
    }
}

/// Share of role-bearing statements that received a category, and the share
/// that hit the lexicon directly (rather than the `misc` fallback).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoleCoverage {
    pub role_bearing: usize,
    pub categorized: usize,
    pub lexicon_hits: usize,
}

impl RoleCoverage {
    pub fn measure(labeled: &[LabeledStatement], lexicon: &RoleLexicon) -> Self {
        let mut cov = RoleCoverage {
            role_bearing: 0,
            categorized: 0,
            lexicon_hits: 0,
        };
        for s in labeled {
            if let Some(role) = &s.statement.role {
                cov.role_bearing += 1;
                if s.role_category.is_some() {
                    cov.categorized += 1;
                }
                if lexicon.longest_match(role).is_some() {
                    cov.lexicon_hits += 1;
                }
            }
        }
        cov
    }

    pub fn fraction(&self) -> f64 {
        if self.role_bearing == 0 {
            1.0
        } else {
            self.categorized as f64 / self.role_bearing as f64
        }
    }

    pub fn lexicon_fraction(&self) -> f64 {
        if self.role_bearing == 0 {
            1.0
        } else {
            self.lexicon_hits as f64 / self.role_bearing as f64
        }
    }
}

/// A labeled statement as written to the label stage output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRecord {
    #[serde(flatten)]
    pub labeled: LabeledStatement,
    pub sentence: String,
    #[serde(default)]
    pub across_day: bool,
}

pub fn label_record(record: StatementRecord, lexicons: &Lexicons) -> LabeledRecord {
    let labeled = label_statement(record.statement, &record.sentence, lexicons);
    LabeledRecord {
        labeled,
        sentence: record.sentence,
        across_day: record.across_day,
    }
}
