//! Debate state shared by the engine, the predictor, the gateway and the store.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{Strategy, StrategyHint};
use crate::rubric::EvaluationScores;
use crate::search::Move;

pub const MIN_ROUNDS: u32 = 1;
pub const MAX_ROUNDS: u32 = 7;
pub const DEFAULT_ROUNDS: u32 = 3;
pub const MAX_ARGUMENT_CHARS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    For,
    Against,
}

impl Position {
    pub fn opposite(self) -> Self {
        match self {
            Position::For => Position::Against,
            Position::Against => Position::For,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Position::For => "for",
            Position::Against => "against",
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "for" => Ok(Position::For),
            "against" => Ok(Position::Against),
            other => Err(Error::invalid(format!(
                "position must be \"for\" or \"against\", got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    User,
    Ai,
}

impl Side {
    pub fn other(self) -> Self {
        match self {
            Side::User => Side::Ai,
            Side::Ai => Side::User,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::User => "user",
            Side::Ai => "ai",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    AwaitingUser,
    Processing,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub side: Side,
    pub argument: String,
    pub scores: EvaluationScores,
    /// Set on a user entry recorded because the turn timed out.
    #[serde(default)]
    pub forfeit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebateState {
    pub debate_id: String,
    pub topic: String,
    pub user_position: Position,
    pub ai_position: Position,
    pub rounds_total: u32,
    pub current_round: u32,
    pub transcript: Vec<TranscriptEntry>,
    pub cumulative_user: f64,
    pub cumulative_ai: f64,
    pub phase: Phase,
    /// Unix time in milliseconds.
    pub turn_deadline: i64,
    pub ga_population_key: String,
    pub last_hint: Option<StrategyHint>,
    pub last_prediction: Option<Move>,
    /// Strategy that produced `last_hint`.
    pub active_strategy: Option<Strategy>,
    pub subject: String,
}

impl DebateState {
    pub fn is_finished(&self) -> bool {
        self.phase == Phase::Finished
    }

    /// Arguments made by one side, in order.
    pub fn arguments_of(&self, side: Side) -> impl Iterator<Item = &str> {
        self.transcript
            .iter()
            .filter(move |e| e.side == side)
            .map(|e| e.argument.as_str())
    }

    pub fn last_argument_of(&self, side: Side) -> Option<&str> {
        self.transcript
            .iter()
            .rev()
            .find(|e| e.side == side)
            .map(|e| e.argument.as_str())
    }

    /// (user overall, ai overall) for every completed round.
    pub fn round_scores(&self) -> Vec<(f64, f64)> {
        self.transcript
            .chunks_exact(2)
            .map(|pair| (pair[0].scores.overall, pair[1].scores.overall))
            .collect()
    }

    pub fn completed_rounds(&self) -> u32 {
        (self.transcript.len() / 2) as u32
    }

    /// Recomputes both running totals from the transcript.
    pub fn recompute_totals(&mut self) {
        let (mut user, mut ai) = (0.0, 0.0);
        for e in &self.transcript {
            match e.side {
                Side::User => user += e.scores.overall,
                Side::Ai => ai += e.scores.overall,
            }
        }
        self.cumulative_user = user;
        self.cumulative_ai = ai;
    }

    /// Checks the structural invariants of the round history.
    pub fn check_history(&self) -> Result<()> {
        for (i, e) in self.transcript.iter().enumerate() {
            let expected = if i % 2 == 0 { Side::User } else { Side::Ai };
            if e.side != expected {
                return Err(Error::state(format!(
                    "transcript entry {i} is a {} entry, expected {expected}",
                    e.side
                )));
            }
            if e.argument.is_empty() && !(e.forfeit && e.side == Side::User) {
                return Err(Error::state(format!(
                    "transcript entry {i} has scores but no argument"
                )));
            }
        }
        if self.completed_rounds() > self.rounds_total {
            return Err(Error::state("more rounds recorded than the debate allows"));
        }
        Ok(())
    }
}
