//! Small word-level helpers shared by the parser, the pronoun resolver and
//! the lexicons.

use std::sync::OnceLock;

use regex::Regex;

/// A word token with byte offsets into the text it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub lower: String,
}

fn word_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[\p{L}\p{N}]+(?:['’\-][\p{L}\p{N}]+)*").unwrap())
}

pub fn words(text: &str) -> Vec<Word> {
    word_re()
        .find_iter(text)
        .map(|m| Word {
            start: m.start(),
            end: m.end(),
            text: m.as_str().to_string(),
            lower: m.as_str().to_lowercase(),
        })
        .collect()
}

/// Crude noun singularization, good enough for lexicon matching.
pub fn singular(word: &str) -> String {
    let w = word.to_lowercase();
    match w.as_str() {
        "people" => return "person".into(),
        "children" => return "child".into(),
        "men" => return "man".into(),
        "women" => return "woman".into(),
        "bylaws" | "news" | "series" | "status" | "process" | "consensus" | "its" | "this" | "has" | "was" | "is"
        | "does" | "us" | "always" | "alias" => return w,
        _ => {}
    }
    if w.chars().count() <= 3 {
        return w;
    }
    if let Some(stem) = w.strip_suffix("ies") {
        if stem.chars().count() >= 2 {
            return format!("{stem}y");
        }
    }
    for suf in ["sses", "shes", "ches", "xes", "zes"] {
        if w.ends_with(suf) {
            return w[..w.len() - 2].to_string();
        }
    }
    if w.ends_with("ss") || w.ends_with("us") || w.ends_with("is") {
        return w;
    }
    match w.strip_suffix('s') {
        Some(stem) => stem.to_string(),
        None => w,
    }
}

/// Whether `phrase` occurs in `haystack` on word boundaries. Both are
/// expected to be lowercase.
pub fn contains_phrase(haystack: &str, phrase: &str) -> bool {
    let hay: Vec<String> = words(haystack).into_iter().map(|w| w.lower).collect();
    let needle: Vec<String> = words(phrase).into_iter().map(|w| w.lower).collect();
    if needle.is_empty() || needle.len() > hay.len() {
        return false;
    }
    hay.windows(needle.len()).any(|win| win == needle.as_slice())
}

pub const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "our", "its", "their", "his", "her", "your", "my", "such",
];

pub const QUANTIFIERS: &[&str] = &[
    "all", "any", "each", "every", "some", "no", "both", "other", "most", "many", "several", "at", "least", "one",
    "two", "three", "majority", "of",
];

pub const PREPOSITIONS: &[&str] = &[
    "of",
    "for",
    "in",
    "on",
    "at",
    "by",
    "with",
    "from",
    "to",
    "into",
    "onto",
    "about",
    "under",
    "over",
    "through",
    "during",
    "within",
    "without",
    "between",
    "among",
    "across",
    "after",
    "before",
    "upon",
    "via",
    "per",
    "as",
    "against",
    "towards",
    "toward",
    "regarding",
    "including",
    "except",
    "beyond",
    "behind",
    "outside",
    "inside",
];

pub const CONJUNCTIONS: &[&str] = &["and", "or", "but", "nor"];

/// Head nouns that always denote people or groups of people.
const AGENT_NOUNS: &[&str] = &[
    "person",
    "member",
    "team",
    "committee",
    "group",
    "board",
    "council",
    "individual",
    "anyone",
    "everyone",
    "someone",
    "anybody",
    "everybody",
    "somebody",
    "body",
    "panel",
    "community",
    "staff",
    "party",
    "organization",
    "organisation",
    "foundation",
    "company",
    "agent",
    "president",
    "resident",
    "student",
    "representative",
    "delegate",
    "officer",
    "chair",
    "chairperson",
    "lead",
    "head",
    "steward",
    "guardian",
    "admin",
    "maintainer",
    "we",
    "you",
    "they",
    "team-member",
    "collaborator",
    "volunteer",
    "employee",
    "nominee",
    "candidate",
    "sig",
    "wg",
    "tsc",
    "tc",
    "bdfl",
    "emeritus",
    "entity",
    "crew",
    "squad",
    "cabinet",
    "assembly",
    "faction",
    "jury",
    "quorum",
    "electorate",
    "owner",
    "peer",
    "expert",
    "trustee",
    "liaison",
    "secretary",
    "treasurer",
    "maintainership",
    "leadership",
];

/// Common nouns with agentive-looking endings that are not agents.
const NON_AGENT_SUFFIXED: &[&str] = &[
    "number",
    "order",
    "matter",
    "letter",
    "paper",
    "chapter",
    "other",
    "answer",
    "register",
    "power",
    "whether",
    "folder",
    "header",
    "footer",
    "container",
    "parameter",
    "server",
    "cluster",
    "filter",
    "layer",
    "trigger",
    "buffer",
    "water",
    "charter",
    "character",
    "quarter",
    "master",
    "after",
    "under",
    "over",
    "either",
    "neither",
    "rather",
    "later",
    "error",
    "factor",
    "door",
    "floor",
    "behavior",
    "behaviour",
    "color",
    "colour",
    "major",
    "minor",
    "mirror",
    "sector",
    "vector",
    "tensor",
    "indicator",
    "honor",
    "honour",
    "favor",
    "favour",
    "labor",
    "labour",
    "humor",
    "tutor-led",
    "monitor",
    "processor",
    "selector",
    "iterator",
    "generator",
    "validator",
    "descriptor",
    "constructor",
    "editor-config",
    "list",
    "checklist",
    "wishlist",
    "playlist",
    "allowlist",
    "blacklist",
    "whitelist",
    "denylist",
    "tracker",
    "linter",
    "formatter",
    "compiler",
    "parser",
    "handler",
    "wrapper",
    "manager-config",
    "counter",
    "timer",
    "computer",
    "browser",
    "cover",
    "corner",
    "border",
    "paper",
    "offer",
    "transfer",
    "prefer",
    "consider",
    "remember",
    "gather",
    "deliver",
];

pub fn is_determiner(lower: &str) -> bool {
    DETERMINERS.contains(&lower)
}

pub fn is_preposition(lower: &str) -> bool {
    PREPOSITIONS.contains(&lower)
}

/// Head word of a noun phrase: the last word before the first preposition.
pub fn head_word(phrase_words: &[Word]) -> Option<&Word> {
    let cut = phrase_words
        .iter()
        .position(|w| is_preposition(&w.lower))
        .unwrap_or(phrase_words.len());
    phrase_words[..cut].last()
}

fn has_agentive_suffix(noun_singular: &str) -> bool {
    if NON_AGENT_SUFFIXED.contains(&noun_singular) {
        return false;
    }
    let n = noun_singular.chars().count();
    (n > 3 && (noun_singular.ends_with("er") || noun_singular.ends_with("or")))
        || (n > 5 && noun_singular.ends_with("ist"))
        || (n > 4 && noun_singular.ends_with("ant") && !noun_singular.ends_with("tant"))
}

/// A token reads as a proper noun: an acronym (`TSC`) or a word with an
/// interior capital (`GitHub`). Plain capitalized words only count when they
/// are not the first word of the phrase.
pub fn is_proper_token(word: &Word, first_in_phrase: bool) -> bool {
    let mut chars = word.text.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    if !first.is_uppercase() {
        return false;
    }
    let rest: Vec<char> = chars.collect();
    let letters: Vec<char> = rest.iter().copied().filter(|c| c.is_alphabetic()).collect();
    if !letters.is_empty() && letters.iter().all(|c| c.is_uppercase()) {
        return true;
    }
    if rest.iter().any(|c| c.is_uppercase()) {
        return true;
    }
    !first_in_phrase && !is_determiner(&word.lower)
}

/// Whether a noun phrase names an agent: a person or collective head noun,
/// an agentive derivation (`-er`, `-or`, `-ist`, `-ant`), or a proper noun.
pub fn is_agent_phrase(phrase: &str) -> bool {
    let ws = words(phrase);
    let content: Vec<Word> = ws
        .iter()
        .skip_while(|w| is_determiner(&w.lower) || QUANTIFIERS.contains(&w.lower.as_str()))
        .cloned()
        .collect();
    let Some(head) = head_word(&content) else {
        return false;
    };
    let sing = singular(&head.lower);
    if AGENT_NOUNS.contains(&sing.as_str()) || AGENT_NOUNS.contains(&head.lower.as_str()) {
        return true;
    }
    if has_agentive_suffix(&sing) {
        return true;
    }
    let cut = content
        .iter()
        .position(|w| is_preposition(&w.lower))
        .unwrap_or(content.len());
    content[..cut]
        .iter()
        .enumerate()
        .any(|(i, w)| is_proper_token(w, i == 0))
}
