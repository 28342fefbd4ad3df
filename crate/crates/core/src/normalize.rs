//! Markup normalization, sentence segmentation and pronoun substitution.
//!
//! Normalized text is built piece by piece from the raw document. Every piece
//! is either copied verbatim from a raw byte range or inserted (block
//! separators, table cell joins, collapsed whitespace), and the offset map
//! records which. Replaying the map against the raw text reproduces the
//! normalized text byte for byte.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::ig::{Snapshot, Span};
use crate::ingest::CorpusRecord;
use crate::taxonomy::RoleLexicon;
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Prose,
    ListItem,
    Heading,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub kind: BlockKind,
    pub text: String,
    /// Location in [`NormalizedDoc::text`].
    pub span: Span,
}

impl Block {
    /// Markdown-ish rendering (`# heading`, `- item`, plain prose), with
    /// markup characters backslash-escaped so the text reads back verbatim.
    pub fn render(&self) -> String {
        let text = escape_markup(&self.text);
        match self.kind {
            BlockKind::Prose => text,
            BlockKind::ListItem => format!("- {text}"),
            BlockKind::Heading => format!("# {text}"),
        }
    }
}

/// Escapes inline markup characters everywhere, and any punctuation or
/// ordered-list marker that would open a block construct at line start.
fn escape_markup(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 8);
    let digits = text.bytes().take_while(u8::is_ascii_digit).count();
    for (i, c) in text.char_indices() {
        let inline = matches!(
            c,
            '\\' | '`' | '*' | '_' | '[' | ']' | '<' | '>' | '!' | '|' | '~' | '#'
        );
        let opens_block = (i == 0 && c.is_ascii_punctuation()) || (i == digits && digits > 0 && matches!(c, '.' | ')'));
        if inline || opens_block {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// One piece of normalized text and where it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffsetSegment {
    pub norm: Span,
    pub orig: Span,
    /// `None` when the piece is a verbatim copy of `raw[orig]`; otherwise the
    /// synthesized text that replaced `raw[orig]` (possibly an empty range).
    pub inserted: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PronounSubstitution {
    /// Location of the antecedent in the substituted sentence text.
    pub span: Span,
    pub pronoun: String,
    pub antecedent: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    /// Sentence text after pronoun substitution.
    pub text: String,
    pub block_index: usize,
    /// Location of the pre-substitution sentence in the normalized text.
    pub char_span: Span,
    pub pronoun_substitutions: Vec<PronounSubstitution>,
}

impl Sentence {
    /// Undoes pronoun substitutions, last first.
    pub fn original_text(&self) -> String {
        let mut s = self.text.clone();
        for sub in self.pronoun_substitutions.iter().rev() {
            s.replace_range(sub.span.0..sub.span.1, &sub.pronoun);
        }
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedDoc {
    /// Blocks joined by blank lines.
    pub text: String,
    pub blocks: Vec<Block>,
    pub sentences: Vec<Sentence>,
    pub section_count: usize,
    pub offset_map: Vec<OffsetSegment>,
}

impl NormalizedDoc {
    /// Rebuilds the normalized text from the raw document and the offset map.
    pub fn reconstruct(&self, raw: &str) -> String {
        let mut out = String::with_capacity(self.text.len());
        for seg in &self.offset_map {
            match &seg.inserted {
                None => out.push_str(&raw[seg.orig.0..seg.orig.1]),
                Some(s) => out.push_str(s),
            }
        }
        out
    }

    /// Raw-text span covered by a normalized span: from the first to the last
    /// copied byte it touches.
    pub fn original_span(&self, norm: Span) -> Option<Span> {
        let mut lo: Option<usize> = None;
        let mut hi = 0;
        for seg in &self.offset_map {
            if seg.inserted.is_some() || seg.norm.1 <= norm.0 || seg.norm.0 >= norm.1 {
                continue;
            }
            let a = norm.0.max(seg.norm.0) - seg.norm.0 + seg.orig.0;
            let b = norm.1.min(seg.norm.1) - seg.norm.0 + seg.orig.0;
            lo = Some(lo.map_or(a, |l: usize| l.min(a)));
            hi = hi.max(b);
        }
        lo.filter(|&l| hi > l).map(|l| (l, hi))
    }

    /// Canonical markup for the blocks; normalizing it again yields the same
    /// blocks and section count.
    pub fn render(&self) -> String {
        self.blocks.iter().map(Block::render).collect::<Vec<_>>().join("\n\n")
    }
}

// ---------------------------------------------------------------------------
// Block buffers

#[derive(Debug, Clone)]
struct Piece {
    range: Span,
    orig: Span,
    inserted: Option<String>,
}

#[derive(Debug, Clone, Default)]
struct BlockBuf {
    text: String,
    pieces: Vec<Piece>,
}

impl BlockBuf {
    fn ends_with_space(&self) -> bool {
        self.text.is_empty() || self.text.ends_with(' ')
    }

    fn push_raw_copy(&mut self, raw: &str, a: usize, b: usize) {
        if a >= b {
            return;
        }
        let start = self.text.len();
        self.text.push_str(&raw[a..b]);
        if let Some(last) = self.pieces.last_mut() {
            if last.inserted.is_none() && last.orig.1 == a && last.range.1 == start {
                last.orig.1 = b;
                last.range.1 = self.text.len();
                return;
            }
        }
        self.pieces.push(Piece {
            range: (start, self.text.len()),
            orig: (a, b),
            inserted: None,
        });
    }

    fn push_insert(&mut self, s: &str, orig: Span) {
        if s.is_empty() {
            return;
        }
        let start = self.text.len();
        self.text.push_str(s);
        self.pieces.push(Piece {
            range: (start, self.text.len()),
            orig,
            inserted: Some(s.to_string()),
        });
    }

    /// Copies `raw[a..b]`, collapsing whitespace runs to one space and
    /// dropping leading whitespace.
    fn push_text(&mut self, raw: &str, a: usize, b: usize) {
        let s = &raw[a..b];
        let mut run = a;
        let mut iter = s.char_indices().peekable();
        while let Some((off, c)) = iter.next() {
            if !c.is_whitespace() {
                continue;
            }
            let ws_start = a + off;
            let mut ws_end = ws_start + c.len_utf8();
            while let Some(&(o2, c2)) = iter.peek() {
                if !c2.is_whitespace() {
                    break;
                }
                ws_end = a + o2 + c2.len_utf8();
                iter.next();
            }
            self.push_raw_copy(raw, run, ws_start);
            if !self.ends_with_space() {
                if &raw[ws_start..ws_end] == " " {
                    self.push_raw_copy(raw, ws_start, ws_end);
                } else {
                    self.push_insert(" ", (ws_start, ws_end));
                }
            }
            run = ws_end;
        }
        self.push_raw_copy(raw, run, b);
    }

    /// Line join: a single space standing in for the line break at `orig`.
    fn push_space(&mut self, orig: Span) {
        if !self.ends_with_space() {
            self.push_insert(" ", orig);
        }
    }

    fn trim_end(&mut self) {
        while self.text.ends_with(' ') {
            let last = self.pieces.last_mut().expect("text implies pieces");
            if last.range.1 - last.range.0 == 1 {
                self.pieces.pop();
            } else {
                last.range.1 -= 1;
                if last.inserted.is_none() {
                    last.orig.1 -= 1;
                } else if let Some(s) = &mut last.inserted {
                    s.pop();
                }
            }
            self.text.pop();
        }
    }

    fn append(&mut self, other: BlockBuf) {
        let shift = self.text.len();
        self.text.push_str(&other.text);
        self.pieces.extend(other.pieces.into_iter().map(|mut p| {
            p.range = (p.range.0 + shift, p.range.1 + shift);
            p
        }));
    }
}

// ---------------------------------------------------------------------------
// Inline markup

fn html_tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(?:<!--.*?-->|</?[A-Za-z][A-Za-z0-9-]*(?:\s[^<>]*)?/?>)").unwrap())
}

fn autolink_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^<((?:https?|ftp)://[^>\s]+|[^@\s<>]+@[^@\s<>]+)>").unwrap())
}

fn rst_role_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^:[A-Za-z][\w.+-]*:`").unwrap())
}

/// Index just past the bracket that closes the one at `open`.
fn matching(s: &[u8], open: usize, l: u8, r: u8) -> Option<usize> {
    let mut depth = 0usize;
    let mut i = open;
    while i < s.len() {
        match s[i] {
            b'\\' => i += 1,
            c if c == l => depth += 1,
            c if c == r => {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
        i += 1;
    }
    None
}

/// `[text](url)` or `[text][ref]` starting at `open`: returns the text range
/// (relative) and the end of the construct.
fn link_at(s: &[u8], open: usize) -> Option<(Span, usize)> {
    let close = matching(s, open, b'[', b']')?;
    match s.get(close) {
        Some(b'(') => {
            let end = matching(s, close, b'(', b')')?;
            Some(((open + 1, close - 1), end))
        }
        Some(b'[') => {
            let end = matching(s, close, b'[', b']')?;
            Some(((open + 1, close - 1), end))
        }
        _ => None,
    }
}

fn is_flanking_delete(s: &str, start: usize, end: usize, ch: u8) -> bool {
    let prev = s[..start].chars().next_back();
    let next = s[end..].chars().next();
    let left = next.is_some_and(|c| !c.is_whitespace());
    let right = prev.is_some_and(|c| !c.is_whitespace());
    if ch == b'_' && prev.is_some_and(|c| c.is_alphanumeric()) && next.is_some_and(|c| c.is_alphanumeric()) {
        return false;
    }
    left || right
}

/// Strips inline markup from `raw[a..b]` into `buf`.
fn push_inline(raw: &str, a: usize, b: usize, buf: &mut BlockBuf) {
    let s = &raw[a..b];
    let bytes = s.as_bytes();
    let mut i = 0;
    let mut run = 0;
    macro_rules! flush {
        ($upto:expr) => {
            buf.push_text(raw, a + run, a + $upto);
        };
    }
    while i < bytes.len() {
        match bytes[i] {
            b'\\' if bytes.get(i + 1).is_some_and(|c| c.is_ascii_punctuation()) => {
                flush!(i);
                buf.push_text(raw, a + i + 1, a + i + 2);
                i += 2;
                run = i;
            }
            b'!' if bytes.get(i + 1) == Some(&b'[') => {
                if let Some((_, end)) = link_at(bytes, i + 1) {
                    flush!(i);
                    i = end;
                    run = i;
                } else {
                    i += 1;
                }
            }
            b'[' => {
                // Badge: a link whose text is an image.
                if bytes.get(i + 1) == Some(&b'!') && bytes.get(i + 2) == Some(&b'[') {
                    if let Some((_, end)) = link_at(bytes, i) {
                        flush!(i);
                        i = end;
                        run = i;
                        continue;
                    }
                }
                if let Some(((ta, tb), end)) = link_at(bytes, i) {
                    flush!(i);
                    push_inline(raw, a + ta, a + tb, buf);
                    i = end;
                    run = i;
                } else {
                    i += 1;
                }
            }
            b'`' => {
                let n = bytes[i..].iter().take_while(|&&c| c == b'`').count();
                let fence = &s[i..i + n];
                match s[i + n..].find(fence) {
                    Some(rel) if rel > 0 => {
                        flush!(i);
                        let inner_a = i + n;
                        let mut inner_b = inner_a + rel;
                        let mut end = inner_b + n;
                        // reST hyperlink: `text <url>`_
                        let underscores = bytes[end..].iter().take_while(|&&c| c == b'_').count();
                        if underscores > 0 {
                            end += underscores;
                            if let Some(lt) = s[inner_a..inner_b].rfind(" <") {
                                if s[inner_a..inner_b].ends_with('>') {
                                    inner_b = inner_a + lt;
                                }
                            }
                        }
                        buf.push_text(raw, a + inner_a, a + inner_b);
                        i = end;
                        run = i;
                    }
                    _ => i += n,
                }
            }
            c @ (b'*' | b'_') => {
                let n = bytes[i..].iter().take_while(|&&x| x == c).count();
                if n <= 3 && is_flanking_delete(s, i, i + n, c) {
                    flush!(i);
                    i += n;
                    run = i;
                } else {
                    i += n;
                }
            }
            b'<' => {
                if let Some(m) = autolink_re().captures(&s[i..]) {
                    flush!(i);
                    let inner = m.get(1).expect("group");
                    buf.push_text(raw, a + i + inner.start(), a + i + inner.end());
                    i += m.get(0).expect("match").end();
                    run = i;
                } else if let Some(m) = html_tag_re().find(&s[i..]) {
                    flush!(i);
                    i += m.end();
                    run = i;
                } else {
                    i += 1;
                }
            }
            b':' if rst_role_re().is_match(&s[i..]) => {
                let m = rst_role_re().find(&s[i..]).expect("matched");
                flush!(i);
                // Keep the backtick; the code-span rule handles it next.
                i += m.end() - 1;
                run = i;
            }
            _ => {
                i += s[i..].chars().next().map_or(1, char::len_utf8);
            }
        }
    }
    flush!(bytes.len());
}

// ---------------------------------------------------------------------------
// Block structure

struct Line<'a> {
    start: usize,
    end: usize,
    text: &'a str,
}

fn lines(raw: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    let mut pos = 0;
    for chunk in raw.split_inclusive('\n') {
        let content = chunk.trim_end_matches(['\n', '\r']);
        out.push(Line {
            start: pos,
            end: pos + content.len(),
            text: content,
        });
        pos += chunk.len();
    }
    out
}

fn re(cell: &'static OnceLock<Regex>, pat: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pat).unwrap())
}

fn atx_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    re(&RE, r"^ {0,3}(#{1,6})(?:[ \t]+|$)")
}

fn list_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    re(&RE, r"^\s*(?:[-*+]|\d{1,9}[.)])[ \t]+(?:\[[ xX]\][ \t]+)?")
}

fn table_sep_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    re(&RE, r"^\s*\|?\s*:?-{1,}:?\s*(?:\|\s*:?-{1,}:?\s*)*\|?\s*$")
}

fn hr_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    re(&RE, r"^\s{0,3}(?:(?:-[ \t]*){3,}|(?:\*[ \t]*){3,}|(?:_[ \t]*){3,})$")
}

fn link_def_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    re(&RE, r"^\s{0,3}\[[^\]]+\]:\s*\S+")
}

/// A line made of one repeated punctuation character (reST adornment or
/// setext underline).
fn adornment(t: &str) -> Option<char> {
    let t = t.trim_end();
    let c = t.chars().next()?;
    if !"=-~^*+#\"'`:._".contains(c) || t.chars().count() < 2 {
        return None;
    }
    t.chars().all(|x| x == c).then_some(c)
}

fn is_table_row(t: &str) -> bool {
    t.contains('|')
}

/// Cell byte ranges of a pipe-table row (absolute offsets).
fn table_cells(line: &Line<'_>) -> Vec<Span> {
    let t = line.text;
    let mut cells = Vec::new();
    let mut start = 0;
    let bytes = t.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 1,
            b'|' => {
                cells.push((start, i));
                start = i + 1;
            }
            _ => {}
        }
        i += 1;
    }
    cells.push((start, t.len()));
    // Outer pipes produce empty edge cells.
    if t.trim_start().starts_with('|') && cells.first().is_some_and(|c| t[c.0..c.1].trim().is_empty()) {
        cells.remove(0);
    }
    if t.trim_end().ends_with('|') && cells.last().is_some_and(|c| t[c.0..c.1].trim().is_empty()) {
        cells.pop();
    }
    cells
        .into_iter()
        .map(|(a, b)| (line.start + a, line.start + b))
        .collect()
}

struct Assembler<'a> {
    raw: &'a str,
    blocks: Vec<(BlockKind, BlockBuf)>,
    current: Option<(BlockKind, BlockBuf)>,
}

impl<'a> Assembler<'a> {
    fn flush(&mut self) {
        if let Some((kind, mut buf)) = self.current.take() {
            buf.trim_end();
            if !buf.text.is_empty() {
                self.blocks.push((kind, buf));
            }
        }
    }

    fn start(&mut self, kind: BlockKind) {
        self.flush();
        self.current = Some((kind, BlockBuf::default()));
    }

    fn inline(&mut self, a: usize, b: usize) {
        let raw = self.raw;
        let (_, buf) = self.current.as_mut().expect("block started");
        push_inline(raw, a, b, buf);
    }

    fn continue_line(&mut self, line_break: Span, a: usize, b: usize) {
        let raw = self.raw;
        let (_, buf) = self.current.as_mut().expect("block started");
        buf.push_space(line_break);
        push_inline(raw, a, b, buf);
    }

    fn single_line(&self) -> bool {
        matches!(&self.current, Some((BlockKind::Prose, b)) if !b.text.is_empty())
    }
}

/// Strips markup and splits the document into blocks. Headings are counted
/// and kept as heading blocks; sentences are left empty (see [`segment`]).
pub fn normalize_markup(raw: &str) -> NormalizedDoc {
    let ls = lines(raw);
    let mut asm = Assembler {
        raw,
        blocks: Vec::new(),
        current: None,
    };
    let mut i = 0;
    let mut fence: Option<String> = None;
    let mut prose_lines = 0usize;
    while i < ls.len() {
        let line = &ls[i];
        let t = line.text.trim();
        let lead = line.text.len() - line.text.trim_start().len();
        let content_start = line.start + lead;

        if let Some(f) = &fence {
            if t.starts_with(f.as_str()) {
                fence = None;
            }
            i += 1;
            continue;
        }
        if t.starts_with("```") || t.starts_with("~~~") {
            asm.flush();
            fence = Some(t[..3].to_string());
            i += 1;
            continue;
        }
        if t.starts_with("<!--") {
            asm.flush();
            while i < ls.len() && !ls[i].text.contains("-->") {
                i += 1;
            }
            i += 1;
            continue;
        }
        if t.is_empty() {
            asm.flush();
            prose_lines = 0;
            i += 1;
            continue;
        }
        // reST directives and comments, with their indented bodies.
        if t.starts_with("..") && (t.len() == 2 || t.as_bytes()[2] == b' ') {
            asm.flush();
            i += 1;
            while i < ls.len() && (ls[i].text.trim().is_empty() || ls[i].text.starts_with([' ', '\t'])) {
                if ls[i].text.trim().is_empty() && !ls.get(i + 1).is_some_and(|n| n.text.starts_with([' ', '\t'])) {
                    break;
                }
                i += 1;
            }
            continue;
        }
        if link_def_re().is_match(line.text) {
            asm.flush();
            i += 1;
            continue;
        }
        if let Some(m) = atx_re().captures(line.text) {
            let after = m.get(0).expect("match").end();
            let mut body = line.text[after..].trim_end();
            // Closing hashes.
            let stripped = body.trim_end_matches('#');
            if stripped.len() != body.len() && (stripped.is_empty() || stripped.ends_with([' ', '\t'])) {
                body = stripped.trim_end();
            }
            asm.start(BlockKind::Heading);
            asm.inline(line.start + after, line.start + after + body.len());
            asm.flush();
            prose_lines = 0;
            i += 1;
            continue;
        }
        // Pipe table: header, separator, rows.
        if is_table_row(t)
            && ls
                .get(i + 1)
                .is_some_and(|n| n.text.contains('|') && table_sep_re().is_match(n.text))
        {
            asm.flush();
            i += 2;
            while i < ls.len() && !ls[i].text.trim().is_empty() && is_table_row(ls[i].text) {
                let mut row = BlockBuf::default();
                for (ca, cb) in table_cells(&ls[i]) {
                    let mut cell = BlockBuf::default();
                    push_inline(raw, ca, cb, &mut cell);
                    cell.trim_end();
                    if cell.text.is_empty() {
                        continue;
                    }
                    if !row.text.is_empty() {
                        row.push_insert(": ", (ca, ca));
                    }
                    row.append(cell);
                }
                if !row.text.is_empty() {
                    asm.blocks.push((BlockKind::ListItem, row));
                }
                i += 1;
            }
            prose_lines = 0;
            continue;
        }
        // Underlined heading (setext / reST) closing a one-line paragraph.
        if let Some(c) = adornment(t) {
            if asm.single_line() && prose_lines == 1 {
                if let Some((kind, _)) = asm.current.as_mut() {
                    *kind = BlockKind::Heading;
                }
                asm.flush();
                prose_lines = 0;
                i += 1;
                continue;
            }
            // reST overline + title + underline.
            if let (Some(title), Some(under)) = (ls.get(i + 1), ls.get(i + 2)) {
                if !title.text.trim().is_empty() && adornment(under.text.trim()) == Some(c) && lead == 0 {
                    asm.start(BlockKind::Heading);
                    let tl = title.text.len() - title.text.trim_start().len();
                    asm.inline(title.start + tl, title.start + title.text.trim_end().len());
                    asm.flush();
                    prose_lines = 0;
                    i += 3;
                    continue;
                }
            }
        }
        if hr_re().is_match(line.text) {
            asm.flush();
            prose_lines = 0;
            i += 1;
            continue;
        }
        if let Some(m) = list_re().find(line.text) {
            asm.start(BlockKind::ListItem);
            asm.inline(line.start + m.end(), line.end);
            prose_lines = 0;
            i += 1;
            continue;
        }
        let (a, b) = if let Some(rest) = t.strip_prefix('>') {
            let skip = t.len() - rest.trim_start().len();
            (content_start + skip, content_start + t.len())
        } else {
            (content_start, content_start + t.len())
        };
        match &asm.current {
            Some(_) => {
                let prev_end = ls[i - 1].end;
                asm.continue_line((prev_end, a), a, b);
            }
            None => {
                asm.start(BlockKind::Prose);
                asm.inline(a, b);
            }
        }
        prose_lines += 1;
        i += 1;
    }
    asm.flush();
    assemble(asm.blocks)
}

fn assemble(blocks: Vec<(BlockKind, BlockBuf)>) -> NormalizedDoc {
    let mut doc = NormalizedDoc::default();
    for (kind, buf) in blocks {
        if !doc.text.is_empty() {
            let at = buf.pieces.first().map_or(0, |p| p.orig.0);
            let start = doc.text.len();
            doc.text.push_str("\n\n");
            doc.offset_map.push(OffsetSegment {
                norm: (start, doc.text.len()),
                orig: (at, at),
                inserted: Some("\n\n".into()),
            });
        }
        let shift = doc.text.len();
        doc.text.push_str(&buf.text);
        for p in buf.pieces {
            doc.offset_map.push(OffsetSegment {
                norm: (p.range.0 + shift, p.range.1 + shift),
                orig: p.orig,
                inserted: p.inserted,
            });
        }
        if kind == BlockKind::Heading {
            doc.section_count += 1;
        }
        doc.blocks.push(Block {
            kind,
            span: (shift, doc.text.len()),
            text: buf.text,
        });
    }
    doc
}

// ---------------------------------------------------------------------------
// Segmentation

const ABBREVIATIONS: &[&str] = &[
    "e.g.", "i.e.", "etc.", "vs.", "cf.", "al.", "approx.", "mr.", "mrs.", "ms.", "dr.", "prof.", "inc.", "ltd.",
    "jr.", "sr.", "no.", "fig.", "sec.", "st.", "viz.", "eg.", "ie.", "incl.", "e.t.c.", "resp.", "est.", "co.",
    "corp.", "dept.", "art.", "para.",
];

const CLOSERS: &[char] = &[')', '"', '\'', '”', '’', ']'];

/// Sentence spans (relative byte ranges) within one block's text.
fn split_sentences(t: &str) -> Vec<Span> {
    let mut out = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = t.char_indices().collect();
    let mut k = 0;
    while k < chars.len() {
        let (pos, c) = chars[k];
        if !matches!(c, '.' | '!' | '?') {
            k += 1;
            continue;
        }
        let mut j = k + 1;
        while j < chars.len() && CLOSERS.contains(&chars[j].1) {
            j += 1;
        }
        let end = chars.get(j).map_or(t.len(), |x| x.0);
        if j >= chars.len() {
            break;
        }
        if !chars[j].1.is_whitespace() {
            k += 1;
            continue;
        }
        let mut n = j;
        while n < chars.len() && chars[n].1.is_whitespace() {
            n += 1;
        }
        let Some(&(_, next)) = chars.get(n) else {
            break;
        };
        let next_ok = next.is_uppercase()
            || next.is_numeric()
            || (matches!(next, '"' | '\'' | '(' | '“' | '‘' | '[')
                && chars.get(n + 1).is_some_and(|x| x.1.is_uppercase()));
        if !next_ok {
            k += 1;
            continue;
        }
        if c == '.' {
            let word_start = t[..pos]
                .rfind(|ch: char| ch.is_whitespace() || ch == '(' || ch == '[')
                .map_or(0, |w| w + 1);
            let word = t[word_start..=pos].to_lowercase();
            let initial = word.len() == 2 && word.chars().next().is_some_and(|x| x.is_alphabetic());
            if ABBREVIATIONS.contains(&word.as_str()) || initial {
                k += 1;
                continue;
            }
        }
        out.push((start, end));
        start = chars[n].0;
        k = n;
    }
    if start < t.len() {
        out.push((start, t.len()));
    }
    out.into_iter()
        .filter_map(|(a, b)| {
            let s = &t[a..b];
            let lead = s.len() - s.trim_start().len();
            let trimmed = s.trim();
            (!trimmed.is_empty() && trimmed.chars().any(char::is_alphanumeric))
                .then(|| (a + lead, a + lead + trimmed.len()))
        })
        .collect()
}

/// Splits non-heading blocks into sentences. List items are single
/// sentences unless they contain internal sentence breaks.
pub fn segment(mut doc: NormalizedDoc) -> NormalizedDoc {
    let mut sentences = Vec::new();
    for (bi, block) in doc.blocks.iter().enumerate() {
        if block.kind == BlockKind::Heading {
            continue;
        }
        for (a, b) in split_sentences(&block.text) {
            sentences.push(Sentence {
                text: block.text[a..b].to_string(),
                block_index: bi,
                char_span: (block.span.0 + a, block.span.0 + b),
                pronoun_substitutions: Vec::new(),
            });
        }
    }
    doc.sentences = sentences;
    doc
}

// ---------------------------------------------------------------------------
// Pronoun substitution

const COPULAS: &[&str] = &["is", "was", "'s", "be", "seems", "appears", "becomes", "remains", "has"];
const PRONOUN_OPENERS: &[&str] = &[
    "if", "when", "once", "after", "before", "while", "unless", "until", "where", "whenever",
];

/// Subject pronoun positions: the first word, or the first word after an
/// opening subordinate clause closed by a comma.
fn subject_pronouns(s: &str) -> Vec<text::Word> {
    let ws = text::words(s);
    let mut out = Vec::new();
    let pronoun = |w: &text::Word| matches!(w.lower.as_str(), "they" | "he" | "she" | "it");
    if let Some(w) = ws.first() {
        if s[..w.start].trim().is_empty() && pronoun(w) {
            out.push(w.clone());
        }
        if PRONOUN_OPENERS.contains(&w.lower.as_str()) {
            if let Some(comma) = s.find(',') {
                if let Some(n) = ws.iter().find(|x| x.start > comma) {
                    if s[comma + 1..n.start].trim().is_empty() && pronoun(n) {
                        out.push(n.clone());
                    }
                }
            }
        }
    }
    // Drop expletive "it": "it is expected", "it's important", "it may be".
    out.retain(|w| {
        if w.lower != "it" {
            return true;
        }
        let rest = &s[w.end..];
        if rest.starts_with("'s") || rest.starts_with("’s") {
            return false;
        }
        let next: Vec<String> = text::words(rest).into_iter().take(2).map(|x| x.lower).collect();
        match next.first().map(String::as_str) {
            Some(n) if COPULAS.contains(&n) => false,
            Some("may" | "might" | "can" | "could" | "should" | "must" | "will" | "would")
                if next.get(1).map(String::as_str) == Some("be") =>
            {
                false
            }
            _ => true,
        }
    });
    out
}

fn is_singular_phrase(phrase: &str) -> bool {
    let ws = text::words(phrase);
    ws.last().is_none_or(|w| text::singular(&w.lower) == w.lower)
}

/// Nearest preceding role phrase compatible with `pronoun`, searching the
/// current sentence prefix, then up to `window` earlier sentences of the
/// same block.
fn find_antecedent(lexicon: &RoleLexicon, context: &[&str], prefix: &str, pronoun: &str) -> Option<String> {
    let wants_singular = matches!(pronoun, "he" | "she" | "it");
    let candidates = std::iter::once(prefix).chain(context.iter().rev().copied());
    for sent in candidates {
        for m in lexicon.find_all(sent).into_iter().rev() {
            let mut start = m.start;
            let phrase = &sent[m.start..m.end];
            if wants_singular && !is_singular_phrase(phrase) {
                continue;
            }
            // Keep a directly preceding "the".
            let before = sent[..m.start].trim_end();
            if before.to_lowercase().ends_with("the") {
                let the_start = before.len() - 3;
                if the_start == 0 || !before.as_bytes()[the_start - 1].is_ascii_alphanumeric() {
                    start = the_start;
                }
            }
            return Some(sent[start..m.end].to_string());
        }
    }
    None
}

fn match_case(antecedent: &str, pronoun_surface: &str) -> String {
    let cap = pronoun_surface.chars().next().is_some_and(char::is_uppercase);
    let mut chars = antecedent.chars();
    let Some(first) = chars.next() else {
        return String::new();
    };
    let rest: String = chars.collect();
    let proper = rest.chars().any(char::is_uppercase);
    if cap {
        first.to_uppercase().chain(rest.chars()).collect()
    } else if !proper {
        first.to_lowercase().chain(rest.chars()).collect()
    } else {
        antecedent.to_string()
    }
}

/// Backward search window, in sentences.
pub const PRONOUN_WINDOW: usize = 2;

/// Replaces third-person subject pronouns with the nearest preceding role
/// phrase in the same block (at most [`PRONOUN_WINDOW`] sentences back).
/// Unresolvable pronouns are left alone.
pub fn resolve_pronouns(mut doc: NormalizedDoc, lexicon: &RoleLexicon) -> NormalizedDoc {
    let originals: Vec<String> = doc.sentences.iter().map(|s| s.text.clone()).collect();
    for k in 0..doc.sentences.len() {
        let block = doc.sentences[k].block_index;
        let lo = k.saturating_sub(PRONOUN_WINDOW);
        let context: Vec<&str> = (lo..k)
            .filter(|&j| doc.sentences[j].block_index == block)
            .map(|j| originals[j].as_str())
            .collect();
        let src = &originals[k];
        let mut shift: isize = 0;
        let mut text = src.clone();
        let mut subs = Vec::new();
        for p in subject_pronouns(src) {
            let Some(ante) = find_antecedent(lexicon, &context, &src[..p.start], &p.lower) else {
                continue;
            };
            let replacement = match_case(&ante, &p.text);
            let a = (p.start as isize + shift) as usize;
            let b = (p.end as isize + shift) as usize;
            text.replace_range(a..b, &replacement);
            subs.push(PronounSubstitution {
                span: (a, a + replacement.len()),
                pronoun: p.text.clone(),
                antecedent: ante,
            });
            shift += replacement.len() as isize - (p.end - p.start) as isize;
        }
        doc.sentences[k].text = text;
        doc.sentences[k].pronoun_substitutions = subs;
    }
    doc
}

/// Full normalization: markup, segmentation, pronouns.
pub fn normalize_document(raw: &str, lexicon: &RoleLexicon) -> NormalizedDoc {
    resolve_pronouns(segment(normalize_markup(raw)), lexicon)
}

/// A snapshot is usable when markup stripping leaves at least one sentence.
pub fn is_valid_snapshot(raw: &str) -> bool {
    !segment(normalize_markup(raw)).sentences.is_empty()
}

/// Sentence as written to the normalize stage output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub text: String,
    pub block: usize,
    pub span: Span,
    pub substitutions: Vec<PronounSubstitution>,
}

/// One normalized snapshot: the normalize stage's JSON Lines record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotSentences {
    pub repo_id: String,
    pub snapshot: Snapshot,
    #[serde(default)]
    pub across_day: bool,
    pub section_count: usize,
    pub sentences: Vec<SentenceRecord>,
}

impl SnapshotSentences {
    pub fn from_doc(repo_id: &str, snapshot: Snapshot, across_day: bool, doc: NormalizedDoc) -> Self {
        SnapshotSentences {
            repo_id: repo_id.to_string(),
            snapshot,
            across_day,
            section_count: doc.section_count,
            sentences: doc
                .sentences
                .into_iter()
                .map(|s| SentenceRecord {
                    text: s.text,
                    block: s.block_index,
                    span: s.char_span,
                    substitutions: s.pronoun_substitutions,
                })
                .collect(),
        }
    }
}

/// Normalizes both snapshots of a paired corpus record; exclusions yield
/// nothing.
pub fn normalize_record(record: &CorpusRecord, lexicon: &RoleLexicon) -> Vec<SnapshotSentences> {
    let Some(pair) = record.pair() else {
        return Vec::new();
    };
    [
        (Snapshot::Initial, &pair.initial.text),
        (Snapshot::Latest, &pair.latest.text),
    ]
    .into_iter()
    .map(|(snap, text)| {
        SnapshotSentences::from_doc(&pair.repo_id, snap, pair.across_day, normalize_document(text, lexicon))
    })
    .collect()
}
