use crate::error::{Error, Result};

pub const DEFAULT_TOPICS: &str = include_str!("../../assets/topics.tsv");

/// Category used for topics that are not in the bank.
pub const GENERAL_CATEGORY: &str = "general";

#[derive(Debug, Clone)]
pub struct TopicBank {
    entries: Vec<(String, String)>,
}

impl Default for TopicBank {
    fn default() -> Self {
        TopicBank::parse(DEFAULT_TOPICS).expect("shipped topic bank parses")
    }
}

impl TopicBank {
    /// Parses `category<TAB>motion` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (cat, topic) = line
                .split_once('\t')
                .ok_or_else(|| Error::invalid(format!("topic bank line {}: expected category<TAB>motion", n + 1)))?;
            entries.push((cat.trim().to_string(), topic.trim().to_string()));
        }
        if entries.is_empty() {
            return Err(Error::invalid("topic bank is empty"));
        }
        Ok(TopicBank { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn topic(&self, index: usize) -> &str {
        &self.entries[index % self.entries.len()].1
    }

    /// Category of a bank topic, or [`GENERAL_CATEGORY`] for anything else.
    pub fn category_of(&self, topic: &str) -> &str {
        self.entries
            .iter()
            .find(|(_, t)| t.eq_ignore_ascii_case(topic.trim()))
            .map(|(c, _)| c.as_str())
            .unwrap_or(GENERAL_CATEGORY)
    }

    pub fn categories(&self) -> Vec<&str> {
        let mut cats: Vec<&str> = self.entries.iter().map(|(c, _)| c.as_str()).collect();
        cats.sort();
        cats.dedup();
        cats
    }
}
