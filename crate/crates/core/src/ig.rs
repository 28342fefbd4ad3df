//! Institutional-statement parsing.
//!
//! Each sentence is read with a small pattern grammar,
//! `[subject NP] [modal [not]] [verb] [object NP]`, which yields the Role
//! (agentive subject), the Deontic (canonicalized modal), the Action (verb
//! lemma) and a best-effort Object. Every component carries a byte span into
//! the sentence text. Coordinated verb groups sharing one subject
//! ("maintainers review and merge patches") become separate clauses.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::normalize::SnapshotSentences;
use crate::taxonomy::{Lexicons, RoleLexicon, DEFAULT_ACTION_LEXICON};
use crate::text::{self, is_determiner, is_preposition};

/// Half-open byte range `(start, end)`.
pub type Span = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Snapshot {
    Initial,
    Latest,
}

impl Snapshot {
    pub const BOTH: [Snapshot; 2] = [Snapshot::Initial, Snapshot::Latest];

    pub fn as_str(self) -> &'static str {
        match self {
            Snapshot::Initial => "initial",
            Snapshot::Latest => "latest",
        }
    }
}

impl fmt::Display for Snapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strength {
    Permissive,
    Advisory,
    Obligatory,
}

impl Strength {
    pub const ALL: [Strength; 3] = [Strength::Permissive, Strength::Advisory, Strength::Obligatory];

    pub fn id(self) -> &'static str {
        match self {
            Strength::Permissive => "permissive",
            Strength::Advisory => "advisory",
            Strength::Obligatory => "obligatory",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Enabling,
    Restricting,
}

impl Polarity {
    pub const ALL: [Polarity; 2] = [Polarity::Enabling, Polarity::Restricting];

    pub fn id(self) -> &'static str {
        match self {
            Polarity::Enabling => "enabling",
            Polarity::Restricting => "restricting",
        }
    }
}

/// The closed modal set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modal {
    May,
    Can,
    Could,
    Should,
    Shall,
    Must,
    Will,
    Would,
}

impl Modal {
    fn parse(s: &str) -> Option<Modal> {
        Some(match s {
            "may" => Modal::May,
            "can" => Modal::Can,
            "could" => Modal::Could,
            "should" => Modal::Should,
            "shall" => Modal::Shall,
            "must" => Modal::Must,
            "will" => Modal::Will,
            "would" => Modal::Would,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Modal::May => "may",
            Modal::Can => "can",
            Modal::Could => "could",
            Modal::Should => "should",
            Modal::Shall => "shall",
            Modal::Must => "must",
            Modal::Will => "will",
            Modal::Would => "would",
        }
    }

    pub fn strength(self) -> Strength {
        match self {
            Modal::May | Modal::Can | Modal::Could => Strength::Permissive,
            Modal::Should | Modal::Would => Strength::Advisory,
            Modal::Must | Modal::Shall | Modal::Will => Strength::Obligatory,
        }
    }

    /// `could` and `would` are carried but sit outside the can/may,
    /// should, must/will grouping used for three-way deontic shares.
    pub fn in_core_grouping(self) -> bool {
        !matches!(self, Modal::Could | Modal::Would)
    }
}

/// A canonicalized deontic: closed-set surface with strength and polarity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeonticType {
    /// Canonical surface: the modal, followed by ` not` when negated
    /// (`cannot` for negated `can`).
    pub surface: String,
    pub strength: Strength,
    pub polarity: Polarity,
}

impl DeonticType {
    pub fn modal(&self) -> Modal {
        let head = self.surface.split(' ').next().unwrap_or("");
        if head == "cannot" {
            return Modal::Can;
        }
        Modal::parse(head).expect("surface built from closed modal set")
    }

    pub fn negated(&self) -> bool {
        self.polarity == Polarity::Restricting
    }
}

/// Splits contracted or fused negative modals: `can't` → (`can`, true).
fn split_negative_modal(surface: &str) -> (String, bool) {
    let s = surface.trim().to_lowercase().replace('’', "'");
    let fused = match s.as_str() {
        "cannot" | "can't" => Some("can"),
        "won't" => Some("will"),
        "shan't" => Some("shall"),
        "mustn't" => Some("must"),
        "shouldn't" => Some("should"),
        "couldn't" => Some("could"),
        "wouldn't" => Some("would"),
        "mayn't" => Some("may"),
        _ => None,
    };
    match fused {
        Some(m) => (m.to_string(), true),
        None => (s, false),
    }
}

/// Maps a modal surface (plus a separate negation flag) onto the closed
/// deontic set. Modals outside the set yield `None`.
pub fn canonicalize_deontic(modal_surface: &str, negated: bool) -> Option<DeonticType> {
    let (base, fused_neg) = split_negative_modal(modal_surface);
    let modal = Modal::parse(&base)?;
    let negated = negated || fused_neg;
    let surface = match (modal, negated) {
        (Modal::Can, true) => "cannot".to_string(),
        (m, true) => format!("{} not", m.as_str()),
        (m, false) => m.as_str().to_string(),
    };
    Some(DeonticType {
        surface,
        strength: modal.strength(),
        polarity: if negated {
            Polarity::Restricting
        } else {
            Polarity::Enabling
        },
    })
}

/// Identifies the sentence (and clause within it) a statement came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SentenceRef {
    pub repo_id: String,
    pub snapshot: Snapshot,
    pub sentence: usize,
    #[serde(default)]
    pub clause: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstitutionalStatement {
    pub sentence_ref: SentenceRef,
    pub role: Option<String>,
    pub role_span: Option<Span>,
    pub deontic: Option<DeonticType>,
    pub deontic_span: Option<Span>,
    /// Lemma of the governed verb.
    pub action: Option<String>,
    /// Span of the verb's surface form.
    pub action_span: Option<Span>,
    pub object: Option<String>,
    pub object_span: Option<Span>,
}

impl InstitutionalStatement {
    pub fn empty(sentence_ref: SentenceRef) -> Self {
        InstitutionalStatement {
            sentence_ref,
            role: None,
            role_span: None,
            deontic: None,
            deontic_span: None,
            action: None,
            action_span: None,
            object: None,
            object_span: None,
        }
    }

    fn from_clause(sentence_ref: SentenceRef, c: Clause) -> Self {
        InstitutionalStatement {
            sentence_ref,
            role: c.role.as_ref().map(|r| r.0.clone()),
            role_span: c.role.map(|r| r.1),
            deontic: c.deontic.as_ref().map(|d| d.0.clone()),
            deontic_span: c.deontic.map(|d| d.1),
            action: c.action.as_ref().map(|a| a.0.clone()),
            action_span: c.action.map(|a| a.1),
            object: c.object.as_ref().map(|o| o.0.clone()),
            object_span: c.object.map(|o| o.1),
        }
    }
}

// ---------------------------------------------------------------------------
// Lemmatization

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Form {
    Base,
    ThirdPerson,
    Past,
    Gerund,
}

const IRREGULAR: &[(&str, &str, Form)] = &[
    ("is", "be", Form::ThirdPerson),
    ("are", "be", Form::Base),
    ("am", "be", Form::Base),
    ("was", "be", Form::Past),
    ("were", "be", Form::Past),
    ("been", "be", Form::Past),
    ("being", "be", Form::Gerund),
    ("has", "have", Form::ThirdPerson),
    ("had", "have", Form::Past),
    ("does", "do", Form::ThirdPerson),
    ("did", "do", Form::Past),
    ("done", "do", Form::Past),
    ("held", "hold", Form::Past),
    ("chosen", "choose", Form::Past),
    ("chose", "choose", Form::Past),
    ("made", "make", Form::Past),
    ("taken", "take", Form::Past),
    ("took", "take", Form::Past),
    ("given", "give", Form::Past),
    ("gave", "give", Form::Past),
    ("written", "write", Form::Past),
    ("wrote", "write", Form::Past),
    ("led", "lead", Form::Past),
    ("met", "meet", Form::Past),
    ("sent", "send", Form::Past),
    ("paid", "pay", Form::Past),
    ("ran", "run", Form::Past),
    ("began", "begin", Form::Past),
    ("begun", "begin", Form::Past),
    ("became", "become", Form::Past),
    ("brought", "bring", Form::Past),
    ("built", "build", Form::Past),
    ("bought", "buy", Form::Past),
    ("kept", "keep", Form::Past),
    ("left", "leave", Form::Past),
    ("lost", "lose", Form::Past),
    ("found", "find", Form::Past),
    ("thought", "think", Form::Past),
    ("told", "tell", Form::Past),
    ("sold", "sell", Form::Past),
    ("saw", "see", Form::Past),
    ("seen", "see", Form::Past),
    ("knew", "know", Form::Past),
    ("known", "know", Form::Past),
    ("spoke", "speak", Form::Past),
    ("spoken", "speak", Form::Past),
    ("withdrew", "withdraw", Form::Past),
    ("withdrawn", "withdraw", Form::Past),
    ("oversaw", "oversee", Form::Past),
    ("overseen", "oversee", Form::Past),
    ("undertook", "undertake", Form::Past),
    ("undertaken", "undertake", Form::Past),
    ("won", "win", Form::Past),
    ("understood", "understand", Form::Past),
    ("spent", "spend", Form::Past),
    ("stood", "stand", Form::Past),
    ("got", "get", Form::Past),
    ("gotten", "get", Form::Past),
    ("went", "go", Form::Past),
    ("gone", "go", Form::Past),
    ("came", "come", Form::Past),
    ("forbade", "forbid", Form::Past),
    ("forbidden", "forbid", Form::Past),
    ("drew", "draw", Form::Past),
    ("drawn", "draw", Form::Past),
    ("struck", "strike", Form::Past),
    ("meant", "mean", Form::Past),
    ("felt", "feel", Form::Past),
    ("dealt", "deal", Form::Past),
    ("rose", "rise", Form::Past),
    ("risen", "rise", Form::Past),
    ("shown", "show", Form::Past),
    ("sought", "seek", Form::Past),
    ("taught", "teach", Form::Past),
    ("bore", "bear", Form::Past),
    ("borne", "bear", Form::Past),
];

/// Verbs the parser recognizes beyond the action lexicon.
const GENERAL_VERBS: &[&str] = &[
    "be",
    "have",
    "do",
    "need",
    "want",
    "go",
    "come",
    "know",
    "think",
    "look",
    "find",
    "tell",
    "feel",
    "seem",
    "call",
    "put",
    "let",
    "bring",
    "stand",
    "lose",
    "expect",
    "like",
    "prefer",
    "hope",
    "wish",
    "aim",
    "plan",
    "intend",
    "influence",
    "note",
    "consider",
    "learn",
    "show",
    "pass",
    "speak",
    "talk",
    "read",
    "understand",
    "happen",
    "remain",
    "depend",
    "rely",
    "expire",
    "last",
    "end",
    "begin",
    "proceed",
    "exceed",
    "succeed",
    "win",
    "buy",
    "sell",
    "forbid",
    "draw",
    "strike",
    "deal",
    "rise",
    "teach",
    "bear",
    "undertake",
    "allow",
    "emerge",
    "lack",
    "lapse",
    "occur",
    "tie",
    "fail",
    "qualify",
    "gain",
    "retain",
    "lose",
    "move",
    "facilitate",
    "mediate",
    "guide",
    "steer",
    "shape",
    "mentor",
    "sponsor",
    "represent",
    "advise",
    "recommend",
    "suggest",
    "volunteer",
    "care",
    "enjoy",
    "agree",
    "benefit",
    "affect",
    "impact",
    "involve",
    "address",
    "promote",
    "protect",
    "welcome",
    "thank",
    "owe",
    "hire",
    "fire",
    "ship",
    "land",
    "backport",
    "cherry-pick",
    "squash",
    "rebase",
    "pull",
    "clone",
    "install",
    "configure",
    "verify",
    "validate",
    "check",
    "evaluate",
    "assess",
    "measure",
    "rate",
    "rank",
    "score",
    "approve",
    "prioritize",
    "plan",
    "draft",
    "edit",
    "translate",
    "moderate",
    "enforce",
    "investigate",
    "mediate",
    "warn",
    "ban",
    "kick",
    "mute",
    "lock",
    "unlock",
    "pin",
    "unpin",
    "link",
    "mention",
    "ping",
    "contact",
    "reach",
    "attend",
    "speak",
    "present",
    "demo",
    "celebrate",
    "recognize",
    "acknowledge",
    "credit",
    "cite",
    "license",
    "relicense",
    "trademark",
    "own",
    "transfer",
    "donate",
    "license",
    "adopt",
    "abandon",
    "reject",
    "object",
    "dissent",
    "abstain",
    "tally",
    "count",
    "elect",
    "expire",
    "renew",
    "extend",
    "shorten",
    "limit",
    "restrict",
    "cap",
    "exclude",
    "include",
    "enable",
    "disable",
    "toggle",
    "notify",
];

fn verb_inventory() -> &'static HashSet<String> {
    static INV: OnceLock<HashSet<String>> = OnceLock::new();
    INV.get_or_init(|| {
        let mut set: HashSet<String> = GENERAL_VERBS.iter().map(|s| s.to_string()).collect();
        for line in DEFAULT_ACTION_LEXICON.lines() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(lemma) = line.split('\t').next() {
                set.insert(lemma.trim().to_lowercase());
            }
        }
        set
    })
}

fn action_lemmas() -> &'static HashSet<String> {
    static SET: OnceLock<HashSet<String>> = OnceLock::new();
    SET.get_or_init(|| {
        DEFAULT_ACTION_LEXICON
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .filter_map(|l| l.split('\t').next())
            .map(|l| l.trim().to_lowercase())
            .collect()
    })
}

fn irregular() -> &'static HashMap<&'static str, (&'static str, Form)> {
    static MAP: OnceLock<HashMap<&'static str, (&'static str, Form)>> = OnceLock::new();
    MAP.get_or_init(|| IRREGULAR.iter().map(|(s, l, f)| (*s, (*l, *f))).collect())
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn undouble(stem: &str) -> Option<String> {
    let cs: Vec<char> = stem.chars().collect();
    let n = cs.len();
    if n >= 3 && cs[n - 1] == cs[n - 2] && !is_vowel(cs[n - 1]) && !matches!(cs[n - 1], 'l' | 's' | 'z' | 'f') {
        Some(cs[..n - 1].iter().collect())
    } else {
        None
    }
}

/// Lemma and inflectional form. The bool says whether the lemma was
/// confirmed by the verb inventory.
fn analyze_verb(surface: &str) -> (String, Form, bool) {
    let w = surface.to_lowercase().replace('’', "'");
    if let Some((lemma, form)) = irregular().get(w.as_str()) {
        return (lemma.to_string(), *form, true);
    }
    let inv = verb_inventory();
    if inv.contains(&w) {
        return (w, Form::Base, true);
    }
    let n = w.len();
    let pick = |cands: Vec<String>, form: Form, fallback: String| -> (String, Form, bool) {
        for c in &cands {
            if inv.contains(c) {
                return (c.clone(), form, true);
            }
        }
        (fallback, form, false)
    };
    if n > 4 && (w.ends_with("ies") || w.ends_with("ied")) {
        let form = if w.ends_with("ies") {
            Form::ThirdPerson
        } else {
            Form::Past
        };
        let lemma = format!("{}y", &w[..n - 3]);
        let known = inv.contains(&lemma);
        return (lemma, form, known);
    }
    if n > 4 && w.ends_with("ed") {
        let stem = &w[..n - 2];
        let mut cands = vec![stem.to_string(), format!("{stem}e")];
        if let Some(u) = undouble(stem) {
            cands.insert(0, u);
        }
        let fallback = if let Some(u) = undouble(stem) {
            u
        } else if ["at", "ut", "iv", "ov", "ur", "iz", "us", "rg", "dg", "ag", "ok", "ir"]
            .iter()
            .any(|s| stem.ends_with(s))
        {
            format!("{stem}e")
        } else {
            stem.to_string()
        };
        return pick(cands, Form::Past, fallback);
    }
    if n > 5 && w.ends_with("ing") {
        let stem = &w[..n - 3];
        let mut cands = vec![stem.to_string(), format!("{stem}e")];
        if let Some(u) = undouble(stem) {
            cands.insert(0, u);
        }
        let fallback = undouble(stem).unwrap_or_else(|| stem.to_string());
        return pick(cands, Form::Gerund, fallback);
    }
    if n > 3 && w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is") {
        let cands = vec![w[..n - 1].to_string(), w[..n - 2].to_string()];
        let fallback = if ["sses", "xes", "zes", "ches", "shes", "oes"]
            .iter()
            .any(|s| w.ends_with(s))
        {
            w[..n - 2].to_string()
        } else {
            w[..n - 1].to_string()
        };
        return pick(cands, Form::ThirdPerson, fallback);
    }
    (w, Form::Base, false)
}

/// Reduces an inflected verb to its lemma. Irregular forms come from a
/// fixed table; unknown forms without a recognizable suffix are returned
/// unchanged (lowercased).
pub fn lemmatize_verb(surface: &str) -> String {
    analyze_verb(surface).0
}

// ---------------------------------------------------------------------------
// Tokens

#[derive(Debug, Clone)]
struct Tok {
    start: usize,
    end: usize,
    text: String,
    lower: String,
    word: bool,
}

fn token_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[\p{L}\p{N}]+(?:['’\-][\p{L}\p{N}]+)*|[^\s\p{L}\p{N}]").unwrap())
}

fn tokenize(s: &str) -> Vec<Tok> {
    token_re()
        .find_iter(s)
        .map(|m| {
            let text = m.as_str().to_string();
            let word = text.chars().next().is_some_and(|c| c.is_alphanumeric());
            Tok {
                start: m.start(),
                end: m.end(),
                lower: text.to_lowercase().replace('’', "'"),
                text,
                word,
            }
        })
        .collect()
}

const LEADING_SUBORDINATORS: &[&str] = &[
    "if",
    "when",
    "whenever",
    "unless",
    "once",
    "after",
    "before",
    "while",
    "where",
    "although",
    "though",
    "since",
    "until",
    "in",
    "for",
    "upon",
    "during",
    "to",
    "as",
    "because",
    "however",
    "otherwise",
    "additionally",
    "finally",
    "also",
    "then",
    "at",
    "with",
    "by",
    "from",
    "under",
    "following",
    "prior",
    "within",
    "on",
    "for",
    "should",
    "except",
    "besides",
    "moreover",
    "furthermore",
    "generally",
    "typically",
    "usually",
    "normally",
    "ideally",
    "initially",
];

const RELATIVIZERS: &[&str] = &["who", "which", "that", "whose", "whom", "where"];

const SKIPPABLE_ADVERBS: &[&str] = &[
    "also",
    "only",
    "always",
    "still",
    "then",
    "just",
    "each",
    "both",
    "all",
    "first",
    "immediately",
    "ever",
    "usually",
    "generally",
    "typically",
    "normally",
    "jointly",
    "collectively",
    "individually",
    "directly",
    "promptly",
    "together",
    "not",
    "never",
    "further",
    "either",
    "instead",
    "once",
    "again",
    "now",
];

const PARTICLES: &[&str] = &["up", "out", "down", "off", "back", "over", "away"];

/// Adjectives that follow `be` and introduce the real verb: "is
/// responsible for reviewing", "are able to vote", "is expected to".
const BE_COMPLEMENTS: &[&str] = &[
    "responsible",
    "able",
    "required",
    "expected",
    "encouraged",
    "allowed",
    "permitted",
    "entitled",
    "obliged",
    "obligated",
    "empowered",
    "authorized",
    "eligible",
    "welcome",
    "free",
    "supposed",
    "invited",
    "asked",
    "tasked",
    "charged",
    "accountable",
    "going",
];

const SUBJECT_PRONOUNS: &[&str] = &["they", "he", "she", "it", "i", "this", "there", "that"];

fn is_modal_token(lower: &str) -> bool {
    let (base, _) = split_negative_modal(lower);
    Modal::parse(&base).is_some() || base == "might"
}

fn is_negation(lower: &str) -> bool {
    matches!(lower, "not" | "never")
}

fn is_adverb(t: &Tok) -> bool {
    if !t.word {
        return false;
    }
    if SKIPPABLE_ADVERBS.contains(&t.lower.as_str()) {
        return true;
    }
    t.lower.len() > 4 && t.lower.ends_with("ly") && !verb_inventory().contains(&t.lower)
}

fn looks_plural(lower: &str) -> bool {
    matches!(lower, "they" | "we" | "you" | "i" | "people" | "both")
        || (lower.len() > 3 && text::singular(lower) != lower)
}

// ---------------------------------------------------------------------------
// Clause parsing

#[derive(Debug, Clone, Default)]
struct Clause {
    role: Option<(String, Span)>,
    deontic: Option<(DeonticType, Span)>,
    action: Option<(String, Span)>,
    object: Option<(String, Span)>,
}

/// The verb group located in a clause.
struct VerbGroup {
    /// Index of the token that carries the action.
    verb: usize,
    form: Form,
    deontic: Option<(DeonticType, Span)>,
    /// `by`-phrase agent for passives.
    passive: bool,
}

/// Deterministic pattern-grammar parser. Holds the read-only role lexicon.
#[derive(Debug, Clone)]
pub struct Parser {
    roles: RoleLexicon,
}

impl Parser {
    pub fn new(lexicons: &Lexicons) -> Self {
        Parser {
            roles: lexicons.roles.clone(),
        }
    }

    pub fn with_roles(roles: RoleLexicon) -> Self {
        Parser { roles }
    }

    /// Parses one sentence into exactly one statement (its first clause).
    pub fn parse_statement(&self, sentence: &str, sentence_ref: SentenceRef) -> InstitutionalStatement {
        self.parse_sentence(sentence, sentence_ref)
            .into_iter()
            .next()
            .expect("parse_sentence yields at least one statement")
    }

    /// Parses one sentence into one statement per coordinated clause. Always
    /// returns at least one (possibly all-absent) statement; clause indices
    /// are consecutive from 0.
    pub fn parse_sentence(&self, sentence: &str, sentence_ref: SentenceRef) -> Vec<InstitutionalStatement> {
        let toks = tokenize(sentence);
        let clauses = self.parse_clauses(sentence, &toks);
        if clauses.is_empty() {
            return vec![InstitutionalStatement::empty(sentence_ref)];
        }
        clauses
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                let r = SentenceRef {
                    clause: i,
                    ..sentence_ref.clone()
                };
                InstitutionalStatement::from_clause(r, c)
            })
            .collect()
    }

    fn parse_clauses(&self, sentence: &str, toks: &[Tok]) -> Vec<Clause> {
        if !toks.iter().any(|t| t.word) {
            return Vec::new();
        }
        // `label: description` rows (tables converted to lists).
        if let Some(c) = toks.iter().take(7).position(|t| t.lower == ":") {
            let head = &toks[..c];
            if c > 0 && head.iter().all(|t| t.word && !is_modal_token(&t.lower)) {
                let mut clauses = self.parse_range(sentence, toks, c + 1);
                if let Some(first) = clauses.first_mut() {
                    if first.role.is_none() {
                        first.role = self.role_from(sentence, head, true);
                    }
                }
                if !clauses.is_empty() {
                    return clauses;
                }
            }
        }
        self.parse_range(sentence, toks, 0)
    }

    fn parse_range(&self, sentence: &str, toks: &[Tok], from: usize) -> Vec<Clause> {
        let start = main_clause_start(toks, from);
        let Some(group) = self.find_verb_group(toks, start) else {
            return Vec::new();
        };
        let subject_end = subject_end(toks, start, &group);
        let subject = &toks[start..subject_end];
        let mut first = Clause {
            deontic: group.deontic.clone(),
            ..Clause::default()
        };
        let sentence_initial = start == 0 || (start == from && from > 0);
        first.role = if group.passive {
            self.by_agent(sentence, toks, group.verb)
        } else {
            self.role_from(sentence, subject, sentence_initial)
        };
        let (lemma, _, _) = analyze_verb(&toks[group.verb].text);
        let vt = &toks[group.verb];
        first.action = Some((lemma, (vt.start, vt.end)));
        first.object = object_after(toks, group.verb);

        let mut clauses = vec![first];
        // Coordinated verb groups sharing the subject.
        let mut cursor = group.verb + 1;
        let first_form = group.form;
        while let Some(next) = next_coordinated_verb(toks, cursor, first_form) {
            let prev = clauses.last().expect("non-empty");
            let mut c = Clause {
                role: clauses[0].role.clone(),
                deontic: next.deontic.clone().or_else(|| prev.deontic.clone()),
                ..Clause::default()
            };
            let vt = &toks[next.verb];
            c.action = Some((analyze_verb(&vt.text).0, (vt.start, vt.end)));
            c.object = object_after(toks, next.verb);
            cursor = next.verb + 1;
            clauses.push(c);
        }
        clauses
    }

    fn find_verb_group(&self, toks: &[Tok], start: usize) -> Option<VerbGroup> {
        // Modal-headed verb group in the main clause.
        let modal_positions: Vec<usize> = (start..toks.len())
            .filter(|&i| toks[i].word && is_modal_token(&toks[i].lower))
            .filter(|&i| i == start || !is_determiner(&toks[i - 1].lower))
            .collect();
        let mut chosen = None;
        for (k, &m) in modal_positions.iter().enumerate() {
            let in_relative = m > start && RELATIVIZERS.contains(&toks[m - 1].lower.as_str());
            if in_relative && k + 1 < modal_positions.len() {
                continue;
            }
            chosen = Some(m);
            break;
        }
        // A finite verb before the modal means the modal belongs to a
        // subordinate clause ("Maintainers review what they can").
        let finite = self.finite_verb(toks, start);
        if let Some(m) = chosen {
            let finite_first = finite.is_some_and(|(v, _)| v < m && !in_subject_relative(toks, start, v));
            if !finite_first {
                return self.modal_group(toks, m);
            }
        }
        if let Some(g) = self.do_support(toks, start) {
            return Some(g);
        }
        if let Some((v, form)) = finite {
            return Some(self.resolve_auxiliary(toks, v, form, None));
        }
        // Imperative: the clause opens with a bare verb.
        let t = toks.get(start)?;
        let (_, form, known) = analyze_verb(&t.text);
        if t.word && known && form == Form::Base && !SUBJECT_PRONOUNS.contains(&t.lower.as_str()) {
            return Some(self.resolve_auxiliary(toks, start, Form::Base, None));
        }
        None
    }

    fn modal_group(&self, toks: &[Tok], m: usize) -> Option<VerbGroup> {
        let mt = &toks[m];
        let (base, fused_neg) = split_negative_modal(&mt.lower);
        let mut i = m + 1;
        let mut negated = fused_neg;
        let mut span_end = mt.end;
        while i < toks.len() && toks[i].word && is_adverb(&toks[i]) {
            if is_negation(&toks[i].lower) {
                negated = true;
                if i == m + 1 {
                    span_end = toks[i].end;
                }
            }
            i += 1;
        }
        let deontic = canonicalize_deontic(&base, negated).map(|d| (d, (mt.start, span_end)));
        // "will have to submit", "must need to"
        if i + 2 < toks.len()
            && matches!(toks[i].lower.as_str(), "have" | "need")
            && toks[i + 1].lower == "to"
            && toks[i + 2].word
        {
            i += 2;
        }
        let t = toks.get(i)?;
        if !t.word {
            return None;
        }
        Some(self.resolve_auxiliary(toks, i, Form::Base, deontic))
    }

    /// `do not merge`, `does not have`.
    fn do_support(&self, toks: &[Tok], start: usize) -> Option<VerbGroup> {
        for i in start..toks.len() {
            let l = toks[i].lower.as_str();
            if !toks[i].word || l == "," {
                break;
            }
            let (is_do, fused) = match l {
                "do" | "does" | "did" => (true, false),
                "don't" | "doesn't" | "didn't" => (true, true),
                _ => (false, false),
            };
            if is_do && i > start {
                let mut j = i + 1;
                if !fused && !toks.get(j).is_some_and(|t| is_negation(&t.lower)) {
                    continue;
                }
                while j < toks.len() && is_adverb(&toks[j]) {
                    j += 1;
                }
                let t = toks.get(j)?;
                if t.word {
                    return Some(self.resolve_auxiliary(toks, j, Form::Base, None));
                }
            }
        }
        None
    }

    /// Subject-verb agreement scan for the first finite verb.
    fn finite_verb(&self, toks: &[Tok], start: usize) -> Option<(usize, Form)> {
        let mut in_relative = false;
        for i in start + 1..toks.len() {
            let t = &toks[i];
            let p = &toks[i - 1];
            if !t.word {
                if t.lower == "," {
                    // Allow a comma only to close a relative clause.
                    if in_relative {
                        in_relative = false;
                        continue;
                    }
                    return None;
                }
                if t.lower == "(" || t.lower == ")" || t.lower == "'" || t.lower == "-" {
                    continue;
                }
                return None;
            }
            if RELATIVIZERS.contains(&p.lower.as_str()) {
                in_relative = true;
                continue;
            }
            if !p.word || is_determiner(&p.lower) || is_preposition(&p.lower) || p.lower == "to" {
                continue;
            }
            if is_modal_token(&t.lower) {
                return None;
            }
            let (_, form, known) = analyze_verb(&t.text);
            if !known {
                continue;
            }
            let agrees = match t.lower.as_str() {
                "is" | "are" | "was" | "were" | "has" | "have" | "had" => true,
                _ => match form {
                    Form::ThirdPerson => !looks_plural(&p.lower),
                    Form::Base => looks_plural(&p.lower),
                    Form::Past => !is_adverb(p),
                    Form::Gerund => false,
                },
            };
            if agrees && !in_relative {
                return Some((i, form));
            }
        }
        None
    }

    /// Steps through `be`/`have` auxiliaries and semi-modal complements to
    /// the verb that carries the action.
    fn resolve_auxiliary(&self, toks: &[Tok], v: usize, form: Form, deontic: Option<(DeonticType, Span)>) -> VerbGroup {
        let lemma = analyze_verb(&toks[v].text).0;
        let next_word = |from: usize| -> Option<usize> {
            let mut j = from;
            while j < toks.len() && is_adverb(&toks[j]) {
                j += 1;
            }
            (j < toks.len() && toks[j].word).then_some(j)
        };
        let group = |verb, passive| VerbGroup {
            verb,
            form,
            deontic: deontic.clone(),
            passive,
        };
        match lemma.as_str() {
            "be" => {
                let Some(j) = next_word(v + 1) else {
                    return group(v, false);
                };
                let jl = toks[j].lower.as_str();
                if BE_COMPLEMENTS.contains(&jl) {
                    // "responsible for triaging", "able to vote"
                    if let Some(k) = next_word(j + 1) {
                        let kl = toks[k].lower.as_str();
                        if (kl == "to" || kl == "for") && k + 1 < toks.len() {
                            if let Some(x) = next_word(k + 1) {
                                let (_, f, known) = analyze_verb(&toks[x].text);
                                if known && (f == Form::Base || f == Form::Gerund) {
                                    return group(x, false);
                                }
                            }
                        }
                    }
                }
                let (_, f, known) = analyze_verb(&toks[j].text);
                if f == Form::Past && (known || toks[j].lower.ends_with("ed")) {
                    return group(j, true);
                }
                group(v, false)
            }
            "have" | "need" => {
                if let Some(j) = next_word(v + 1) {
                    if toks[j].lower == "to" {
                        if let Some(k) = next_word(j + 1) {
                            return group(k, false);
                        }
                    }
                    let (_, f, known) = analyze_verb(&toks[j].text);
                    if lemma == "have" && f == Form::Past && known && toks[j].lower != "had" {
                        return group(j, false);
                    }
                }
                group(v, false)
            }
            _ => group(v, false),
        }
    }

    fn role_from(&self, sentence: &str, subject: &[Tok], sentence_initial: bool) -> Option<(String, Span)> {
        let words: Vec<&Tok> = subject.iter().filter(|t| t.word).collect();
        let skip = words
            .iter()
            .take_while(|t| matches!(t.lower.as_str(), "the" | "a" | "an"))
            .count();
        let content = &words[skip..];
        let first = content.first()?;
        let last = content.last()?;
        if content.len() == 1 && SUBJECT_PRONOUNS.contains(&first.lower.as_str()) {
            return None;
        }
        let (s, e) = (first.start, last.end);
        let phrase = &sentence[s..e];
        let agent = self.roles.longest_match(phrase).is_some() || {
            // The first word of a sentence is capitalized regardless.
            let probe = if sentence_initial && s == words[0].start {
                lowercase_first(phrase)
            } else {
                phrase.to_string()
            };
            text::is_agent_phrase(&probe)
        };
        agent.then(|| (phrase.to_string(), (s, e)))
    }

    fn by_agent(&self, sentence: &str, toks: &[Tok], verb: usize) -> Option<(String, Span)> {
        let by = (verb + 1..toks.len().min(verb + 4)).find(|&i| toks[i].lower == "by")?;
        let end = (by + 1..toks.len())
            .find(|&i| {
                !toks[i].word || is_preposition(&toks[i].lower) || text::CONJUNCTIONS.contains(&toks[i].lower.as_str())
            })
            .unwrap_or(toks.len());
        if end <= by + 1 {
            return None;
        }
        self.role_from(sentence, &toks[by + 1..end], false)
    }
}

fn lowercase_first(s: &str) -> String {
    let mut cs = s.chars();
    match cs.next() {
        Some(c) if c.is_uppercase() && !cs.clone().next().is_some_and(|d| d.is_uppercase()) => {
            c.to_lowercase().chain(cs).collect()
        }
        _ => s.to_string(),
    }
}

/// Skips a leading subordinate or adverbial phrase closed by a comma.
fn main_clause_start(toks: &[Tok], from: usize) -> usize {
    let Some(first) = toks.get(from) else {
        return from;
    };
    let opener = LEADING_SUBORDINATORS.contains(&first.lower.as_str())
        || (first.lower.ends_with("ly") && toks.get(from + 1).is_some_and(|t| t.lower == ","));
    if !opener {
        return from;
    }
    match (from..toks.len()).find(|&i| toks[i].lower == ",") {
        Some(c) if c + 1 < toks.len() => c + 1,
        _ => from,
    }
}

fn in_subject_relative(toks: &[Tok], start: usize, v: usize) -> bool {
    (start..v).any(|i| RELATIVIZERS.contains(&toks[i].lower.as_str()))
}

/// End of the subject NP: cut at a relativizer or comma before the verb group.
fn subject_end(toks: &[Tok], start: usize, group: &VerbGroup) -> usize {
    // The verb group begins at the modal / auxiliary, which precedes `verb`.
    let mut head_end = group.verb;
    for i in (start..group.verb).rev() {
        let l = toks[i].lower.as_str();
        let aux = is_modal_token(l)
            || is_adverb(&toks[i])
            || matches!(
                l,
                "be" | "is"
                    | "are"
                    | "was"
                    | "were"
                    | "been"
                    | "has"
                    | "have"
                    | "had"
                    | "do"
                    | "does"
                    | "did"
                    | "don't"
                    | "doesn't"
                    | "didn't"
                    | "to"
                    | "need"
            )
            || BE_COMPLEMENTS.contains(&l)
            || l == "for";
        if aux {
            head_end = i;
        } else {
            break;
        }
    }
    (start..head_end)
        .find(|&i| RELATIVIZERS.contains(&toks[i].lower.as_str()) && i > start || toks[i].lower == ",")
        .unwrap_or(head_end)
}

/// Head noun of the direct object following the verb at `v`.
fn object_after(toks: &[Tok], v: usize) -> Option<(String, Span)> {
    let mut i = v + 1;
    while i < toks.len() && toks[i].word && PARTICLES.contains(&toks[i].lower.as_str()) {
        i += 1;
    }
    while i < toks.len() && is_adverb(&toks[i]) && !matches!(toks[i].lower.as_str(), "all" | "each" | "both") {
        i += 1;
    }
    let stop = |t: &Tok| {
        !t.word
            || is_preposition(&t.lower)
            || t.lower == "to"
            || text::CONJUNCTIONS.contains(&t.lower.as_str())
            || RELATIVIZERS.contains(&t.lower.as_str())
            || is_modal_token(&t.lower)
            || (t.lower.ends_with("ly") && t.lower.len() > 4)
            || matches!(
                t.lower.as_str(),
                "if" | "when" | "unless" | "before" | "after" | "until" | "every" | "each"
            )
    };
    let mut last: Option<&Tok> = None;
    while i < toks.len() {
        let t = &toks[i];
        if stop(t) {
            // "the project's infrastructure" keeps the possessive inside the NP.
            if t.lower == "'" && last.is_some() {
                i += 1;
                continue;
            }
            break;
        }
        last = Some(t);
        i += 1;
    }
    let head = last?;
    if is_determiner(&head.lower) || text::QUANTIFIERS.contains(&head.lower.as_str()) {
        return None;
    }
    if SUBJECT_PRONOUNS.contains(&head.lower.as_str())
        || matches!(head.lower.as_str(), "them" | "us" | "him" | "her" | "themselves")
    {
        return None;
    }
    Some((head.text.clone(), (head.start, head.end)))
}

/// Finds `and|or|but [modal] verb` after `from`, where the verb matches the
/// first verb's form.
fn next_coordinated_verb(toks: &[Tok], from: usize, form: Form) -> Option<VerbGroup> {
    let mut i = from;
    while i < toks.len() {
        let t = &toks[i];
        if !t.word && t.lower != "," {
            return None;
        }
        if matches!(t.lower.as_str(), "and" | "or" | "but") {
            let mut j = i + 1;
            while j < toks.len() && is_adverb(&toks[j]) && !is_negation(&toks[j].lower) {
                j += 1;
            }
            let c = toks.get(j)?;
            if is_modal_token(&c.lower) {
                let mut k = j + 1;
                let (base, fused) = split_negative_modal(&c.lower);
                let mut neg = fused;
                let mut span_end = c.end;
                while k < toks.len() && is_adverb(&toks[k]) {
                    if is_negation(&toks[k].lower) {
                        neg = true;
                        if k == j + 1 {
                            span_end = toks[k].end;
                        }
                    }
                    k += 1;
                }
                let v = toks.get(k)?;
                if v.word && analyze_verb(&v.text).2 {
                    return Some(VerbGroup {
                        verb: k,
                        form: Form::Base,
                        deontic: canonicalize_deontic(&base, neg).map(|d| (d, (c.start, span_end))),
                        passive: false,
                    });
                }
                return None;
            }
            let (lemma, f, known) = analyze_verb(&c.text);
            if c.word && known && f == form && action_lemmas().contains(&lemma) {
                // A following determiner or object confirms a verb reading.
                let next = toks.get(j + 1);
                let verbish = next.is_none_or(|n| {
                    !n.word
                        || is_determiner(&n.lower)
                        || n.lower == "all"
                        || n.lower == "any"
                        || !looks_plural(&c.lower)
                });
                if verbish {
                    return Some(VerbGroup {
                        verb: j,
                        form: f,
                        deontic: None,
                        passive: false,
                    });
                }
            }
        }
        i += 1;
    }
    None
}

/// A statement as written to the parse stage output, carrying the sentence
/// text (needed for action disambiguation) and the pair's across-day flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementRecord {
    #[serde(flatten)]
    pub statement: InstitutionalStatement,
    pub sentence: String,
    #[serde(default)]
    pub across_day: bool,
}

/// Parses every sentence of a normalized snapshot. Each sentence yields at
/// least one record (clause 0), so clause-0 records match sentences one to
/// one.
pub fn parse_snapshot(parser: &Parser, snap: &SnapshotSentences) -> Vec<StatementRecord> {
    snap.sentences
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            let r = SentenceRef {
                repo_id: snap.repo_id.clone(),
                snapshot: snap.snapshot,
                sentence: i,
                clause: 0,
            };
            parser
                .parse_sentence(&s.text, r)
                .into_iter()
                .map(|statement| StatementRecord {
                    statement,
                    sentence: s.text.clone(),
                    across_day: snap.across_day,
                })
        })
        .collect()
}
