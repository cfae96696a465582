//! Averages, winners and the printed score summary.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    User,
    Ai,
    Draw,
}

impl Winner {
    pub fn as_str(&self) -> &'static str {
        match self {
            Winner::User => "user",
            Winner::Ai => "ai",
            Winner::Draw => "draw",
        }
    }

    /// Side with the larger average at two decimals.
    pub fn from_averages(avg_user: f64, avg_ai: f64) -> Winner {
        let (u, a) = (to_cents(avg_user), to_cents(avg_ai));
        match a.cmp(&u) {
            std::cmp::Ordering::Greater => Winner::Ai,
            std::cmp::Ordering::Less => Winner::User,
            std::cmp::Ordering::Equal => Winner::Draw,
        }
    }
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Winner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "user" => Ok(Winner::User),
            "ai" => Ok(Winner::Ai),
            "draw" => Ok(Winner::Draw),
            other => Err(Error::invalid(format!("unknown winner {other:?}"))),
        }
    }
}

fn to_cents(x: f64) -> i64 {
    (x * 100.0).round() as i64
}

/// Rounds to two decimals.
pub fn round2(x: f64) -> f64 {
    to_cents(x) as f64 / 100.0
}

/// Mean of `values` at two decimals; 0 for an empty slice.
pub fn mean2(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    round2(values.iter().sum::<f64>() / values.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebateResult {
    pub winner: Winner,
    pub avg_user: f64,
    pub avg_ai: f64,
    /// (user overall, ai overall) per round.
    pub per_round: Vec<(f64, f64)>,
}

impl DebateResult {
    pub fn from_rounds(per_round: Vec<(f64, f64)>) -> Self {
        let users: Vec<f64> = per_round.iter().map(|r| r.0).collect();
        let ais: Vec<f64> = per_round.iter().map(|r| r.1).collect();
        let (avg_user, avg_ai) = (mean2(&users), mean2(&ais));
        DebateResult {
            winner: Winner::from_averages(avg_user, avg_ai),
            avg_user,
            avg_ai,
            per_round,
        }
    }
}

/// Mean scores over a series, printed as two labelled lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub avg_ai: f64,
    pub avg_user: f64,
    pub winner: Winner,
}

impl ScoreSummary {
    pub fn from_series(user: &[f64], ai: &[f64]) -> Result<Self> {
        if user.len() != ai.len() {
            return Err(Error::invalid("score series differ in length"));
        }
        let (avg_user, avg_ai) = (mean2(user), mean2(ai));
        Ok(ScoreSummary {
            avg_ai,
            avg_user,
            winner: Winner::from_averages(avg_user, avg_ai),
        })
    }
}

impl fmt::Display for ScoreSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Average AI Score: {:.2}", self.avg_ai)?;
        write!(f, "Average User Score: {:.2}", self.avg_user)
    }
}
