//! Prompt templates with `{name}` slots.
//!
//! A template file starts with a header line `#! <name> v<version>`; the rest
//! is the body. `{{` and `}}` produce literal braces.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Text(String),
    Slot(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    name: String,
    version: u32,
    pieces: Vec<Piece>,
}

impl Template {
    pub fn parse(source: &str) -> Result<Self> {
        let (header, body) = source
            .split_once('\n')
            .ok_or_else(|| Error::invalid("template has no header line"))?;
        let header = header
            .strip_prefix("#!")
            .ok_or_else(|| Error::invalid("template header must start with #!"))?;
        let mut parts = header.split_whitespace();
        let name = parts
            .next()
            .ok_or_else(|| Error::invalid("template header missing name"))?
            .to_string();
        let version = parts
            .next()
            .and_then(|v| v.strip_prefix('v'))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::invalid(format!("template {name}: bad version in header")))?;
        Ok(Template {
            pieces: parse_body(body)?,
            name,
            version,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn slots(&self) -> impl Iterator<Item = &str> {
        self.pieces.iter().filter_map(|p| match p {
            Piece::Slot(s) => Some(s.as_str()),
            Piece::Text(_) => None,
        })
    }

    /// Fills every slot; a slot without a value is an error. Extra values are
    /// ignored.
    pub fn render(&self, values: &BTreeMap<String, String>) -> Result<String> {
        let mut out = String::new();
        for piece in &self.pieces {
            match piece {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot(s) => out.push_str(values.get(s).ok_or_else(|| {
                    Error::invalid(format!("template {}: no value for slot {{{s}}}", self.name))
                })?),
            }
        }
        Ok(out)
    }
}

fn parse_body(body: &str) -> Result<Vec<Piece>> {
    let mut pieces = Vec::new();
    let mut text = String::new();
    let mut chars = body.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '{' if chars.peek() == Some(&'{') => {
                chars.next();
                text.push('{');
            }
            '}' if chars.peek() == Some(&'}') => {
                chars.next();
                text.push('}');
            }
            '{' => {
                let mut name = String::new();
                loop {
                    match chars.next() {
                        Some('}') => break,
                        Some(ch) if ch.is_ascii_lowercase() || ch == '_' => name.push(ch),
                        Some(ch) => {
                            return Err(Error::invalid(format!("bad character {ch:?} in slot name")))
                        }
                        None => return Err(Error::invalid("unterminated slot")),
                    }
                }
                if name.is_empty() {
                    return Err(Error::invalid("empty slot name"));
                }
                if !text.is_empty() {
                    pieces.push(Piece::Text(std::mem::take(&mut text)));
                }
                pieces.push(Piece::Slot(name));
            }
            '}' => return Err(Error::invalid("unmatched '}' in template")),
            _ => text.push(c),
        }
    }
    if !text.is_empty() {
        pieces.push(Piece::Text(text));
    }
    Ok(pieces)
}

/// Fills a slot-only pattern that has no header line.
pub(crate) fn fill(pattern: &str, values: &BTreeMap<String, String>) -> Result<String> {
    let pieces = parse_body(pattern)?;
    let mut out = String::new();
    for piece in pieces {
        match piece {
            Piece::Text(t) => out.push_str(&t),
            Piece::Slot(s) => out.push_str(
                values
                    .get(&s)
                    .ok_or_else(|| Error::invalid(format!("no value for slot {{{s}}}")))?,
            ),
        }
    }
    Ok(out)
}

/// The prompt templates shipped with the crate.
#[derive(Debug, Clone)]
pub struct Templates {
    pub opponent: Template,
    pub evaluate: Template,
    pub topics: Template,
    pub suggest: Template,
    pub feedback: Template,
    pub selfplay: Template,
}

impl Default for Templates {
    fn default() -> Self {
        let load = |src: &str| Template::parse(src).expect("shipped template parses");
        Templates {
            opponent: load(include_str!("../../assets/templates/opponent.txt")),
            evaluate: load(include_str!("../../assets/templates/evaluate.txt")),
            topics: load(include_str!("../../assets/templates/topics.txt")),
            suggest: load(include_str!("../../assets/templates/suggest.txt")),
            feedback: load(include_str!("../../assets/templates/feedback.txt")),
            selfplay: load(include_str!("../../assets/templates/selfplay.txt")),
        }
    }
}
