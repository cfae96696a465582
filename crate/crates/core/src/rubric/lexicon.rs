use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lexicon shipped with the crate.
pub const DEFAULT_LEXICON: &str = include_str!("../../assets/fallacies.tsv");

/// Longest stretch a gap marker may cover.
const MAX_GAP_CHARS: usize = 120;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FallacyKind {
    Bandwagon,
    AdHominem,
    FalseDilemma,
    HastyGeneralization,
    AppealToFear,
}

impl FallacyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FallacyKind::Bandwagon => "bandwagon",
            FallacyKind::AdHominem => "ad-hominem",
            FallacyKind::FalseDilemma => "false-dilemma",
            FallacyKind::HastyGeneralization => "hasty-generalization",
            FallacyKind::AppealToFear => "appeal-to-fear",
        }
    }
}

impl fmt::Display for FallacyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FallacyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bandwagon" => Ok(FallacyKind::Bandwagon),
            "ad-hominem" => Ok(FallacyKind::AdHominem),
            "false-dilemma" => Ok(FallacyKind::FalseDilemma),
            "hasty-generalization" => Ok(FallacyKind::HastyGeneralization),
            "appeal-to-fear" => Ok(FallacyKind::AppealToFear),
            other => Err(Error::invalid(format!("unknown fallacy kind {other:?}"))),
        }
    }
}

/// Half-open character range into the argument text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FallacyFlag {
    pub kind: FallacyKind,
    pub span: Span,
    /// Lexicon phrase that matched.
    pub phrase: String,
}

#[derive(Debug, Clone)]
struct Entry {
    phrase: String,
    segments: Vec<Vec<char>>,
    kind: FallacyKind,
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<Entry>,
}

impl Default for Lexicon {
    fn default() -> Self {
        DEFAULT_LEXICON.parse().expect("shipped lexicon parses")
    }
}

impl FromStr for Lexicon {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (phrase, kind) = line.split_once('\t').ok_or_else(|| {
                Error::invalid(format!("lexicon line {}: expected phrase<TAB>kind", n + 1))
            })?;
            let kind: FallacyKind = kind.trim().parse()?;
            let segments: Vec<Vec<char>> = phrase
                .replace('…', "...")
                .split("...")
                .map(|s| s.trim().chars().map(lower).collect::<Vec<char>>())
                .filter(|s| !s.is_empty())
                .collect();
            if segments.is_empty() {
                return Err(Error::invalid(format!("lexicon line {}: empty phrase", n + 1)));
            }
            entries.push(Entry {
                phrase: phrase.trim().to_string(),
                segments,
                kind,
            });
        }
        Ok(Lexicon { entries })
    }
}

fn lower(c: char) -> char {
    c.to_lowercase().next().unwrap_or(c)
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '\''
}

impl Lexicon {
    pub fn load(path: &Path) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct fallacy kinds covered by the lexicon.
    pub fn kinds(&self) -> Vec<FallacyKind> {
        let mut kinds: Vec<FallacyKind> = self.entries.iter().map(|e| e.kind).collect();
        kinds.sort();
        kinds.dedup();
        kinds
    }

    /// Case-insensitive scan for every lexicon phrase.
    pub fn flag(&self, argument: &str) -> Result<Vec<FallacyFlag>> {
        if argument.trim().is_empty() {
            return Err(Error::invalid("argument is empty"));
        }
        let text: Vec<char> = argument.chars().map(lower).collect();
        let mut flags = Vec::new();
        for entry in &self.entries {
            let mut from = 0;
            while let Some(span) = match_entry(&text, &entry.segments, from) {
                flags.push(FallacyFlag {
                    kind: entry.kind,
                    span,
                    phrase: entry.phrase.clone(),
                });
                from = span.end;
            }
        }
        flags.sort_by(|a, b| a.span.cmp(&b.span).then(a.kind.cmp(&b.kind)));
        Ok(flags)
    }
}

fn find_segment(text: &[char], seg: &[char], from: usize, limit: usize) -> Option<usize> {
    let last = limit.min(text.len()).checked_sub(seg.len())?;
    (from..=last).find(|&i| {
        text[i..i + seg.len()] == *seg
            && (i == 0 || !is_word(text[i - 1]) || !is_word(seg[0]))
            && (i + seg.len() == text.len()
                || !is_word(text[i + seg.len()])
                || !is_word(seg[seg.len() - 1]))
    })
}

fn match_entry(text: &[char], segments: &[Vec<char>], from: usize) -> Option<Span> {
    let mut start_at = from;
    loop {
        let start = find_segment(text, &segments[0], start_at, text.len())?;
        let mut end = start + segments[0].len();
        let mut ok = true;
        for seg in &segments[1..] {
            // Gaps stay inside one sentence.
            let stop = text[end..]
                .iter()
                .position(|c| matches!(c, '.' | '!' | '?'))
                .map_or(text.len(), |p| end + p);
            let limit = stop.min(end + MAX_GAP_CHARS + seg.len());
            match find_segment(text, seg, end, limit) {
                Some(i) => end = i + seg.len(),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Some(Span { start, end });
        }
        start_at = start + 1;
    }
}
