//! Adversarial move prediction.
//!
//! A debate is abstracted as a two-player zero-sum game. The AI maximizes and
//! the user minimizes a position value in [-1, 1]. Moves are drawn from a
//! closed taxonomy of eight tactics, each with a fixed effect on the score
//! margin. [`minimax_search`] and [`mcts_search`] work over anything that
//! implements [`GameTree`], so the same code searches real debate positions
//! and hand-built fixture trees.

mod mcts;
mod minimax;
mod predict;
mod state;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mcts::{mcts_search, mcts_search_with_stats, MctsStats};
pub use minimax::{minimax_search, minimax_search_traced, minimax_search_with, write_trace, TraceEntry};
pub use predict::{adjust_depth, predict_and_counter, Prediction};
pub use state::{
    apply_move, build_game_state, evaluate_state, generate_moves, tactic_strength, topic_coverage,
    GameState,
};

/// Rhetorical tactic, in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tactic {
    Rebut,
    Counterexample,
    CiteEvidence,
    Reframe,
    ConcedeAndPivot,
    EmotionalAppeal,
    AppealToAuthority,
    SummarizeAndClose,
}

impl Tactic {
    pub const ALL: [Tactic; 8] = [
        Tactic::Rebut,
        Tactic::Counterexample,
        Tactic::CiteEvidence,
        Tactic::Reframe,
        Tactic::ConcedeAndPivot,
        Tactic::EmotionalAppeal,
        Tactic::AppealToAuthority,
        Tactic::SummarizeAndClose,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Tactic::Rebut => "rebut",
            Tactic::Counterexample => "counterexample",
            Tactic::CiteEvidence => "cite-evidence",
            Tactic::Reframe => "reframe",
            Tactic::ConcedeAndPivot => "concede-and-pivot",
            Tactic::EmotionalAppeal => "emotional-appeal",
            Tactic::AppealToAuthority => "appeal-to-authority",
            Tactic::SummarizeAndClose => "summarize-and-close",
        }
    }

    /// Score-margin swing in the mover's favour at full strength.
    pub fn margin_effect(&self) -> f64 {
        match self {
            Tactic::Rebut => 1.0,
            Tactic::Counterexample => 0.9,
            Tactic::CiteEvidence => 0.8,
            Tactic::Reframe => 0.6,
            Tactic::ConcedeAndPivot => -0.2,
            Tactic::EmotionalAppeal => 0.7,
            Tactic::AppealToAuthority => 0.5,
            Tactic::SummarizeAndClose => 0.4,
        }
    }

    /// Topic-coverage swing in the mover's favour at full strength.
    pub fn coverage_effect(&self) -> f64 {
        match self {
            Tactic::Rebut | Tactic::EmotionalAppeal => 0.0,
            Tactic::Counterexample | Tactic::ConcedeAndPivot | Tactic::AppealToAuthority => 0.05,
            Tactic::CiteEvidence | Tactic::SummarizeAndClose => 0.1,
            Tactic::Reframe => 0.15,
        }
    }

    /// (base strength, sensitivity to the mover's standing).
    ///
    /// Negative sensitivity means the tactic gets stronger when the mover is
    /// behind.
    pub(crate) fn strength_profile(&self) -> (f64, f64) {
        match self {
            Tactic::Rebut => (0.6, -0.2),
            Tactic::Counterexample => (0.55, -0.15),
            Tactic::CiteEvidence => (0.7, 0.0),
            Tactic::Reframe => (0.5, -0.1),
            Tactic::ConcedeAndPivot => (0.4, -0.25),
            Tactic::EmotionalAppeal => (0.6, -0.1),
            Tactic::AppealToAuthority => (0.5, 0.05),
            Tactic::SummarizeAndClose => (0.45, 0.3),
        }
    }

    /// Keywords used to label free-text argument sketches.
    pub fn cues(&self) -> &'static [&'static str] {
        match self {
            Tactic::Rebut => &["wrong", "incorrect", "fails", "flawed", "rebut", "not true"],
            Tactic::Counterexample => &["counterexample", "for example", "for instance", "consider the case"],
            Tactic::CiteEvidence => &["study", "data", "evidence", "percent", "%", "research", "statistics"],
            Tactic::Reframe => &["reframe", "the real question", "instead", "bigger picture", "look at it"],
            Tactic::ConcedeAndPivot => &["granted", "admittedly", "i concede", "while it is true", "fair point"],
            Tactic::EmotionalAppeal => &["imagine", "families", "children", "suffer", "feel", "hope", "fear"],
            Tactic::AppealToAuthority => &["expert", "scientists", "according to", "professor", "organization"],
            Tactic::SummarizeAndClose => &["in summary", "to conclude", "in conclusion", "overall", "ultimately"],
        }
    }

    /// Tactic whose cues best match `text`; first in declaration order on ties,
    /// `Rebut` when nothing matches.
    pub fn nearest(text: &str) -> Tactic {
        let lower = text.to_lowercase();
        let mut best = (Tactic::Rebut, 0usize);
        for t in Tactic::ALL {
            let hits = t.cues().iter().filter(|c| lower.contains(*c)).count();
            if hits > best.1 {
                best = (t, hits);
            }
        }
        best.0
    }
}

impl fmt::Display for Tactic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tactic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Tactic::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown tactic {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub tactic: Tactic,
    pub strength_estimate: f64,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tactic.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Minimax,
    Mcts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub depth: u32,
    pub branching: usize,
    pub algorithm: Algorithm,
    pub mcts_iterations: u32,
    pub exploration_constant: f64,
    pub time_budget_ms: i64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            depth: 2,
            branching: 4,
            algorithm: Algorithm::Minimax,
            mcts_iterations: 200,
            exploration_constant: 1.414,
            time_budget_ms: 5000,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.branching == 0 {
            return Err(Error::invalid("branching must be at least 1"));
        }
        if self.algorithm == Algorithm::Mcts && self.mcts_iterations == 0 {
            return Err(Error::invalid("mcts_iterations must be at least 1"));
        }
        if !(self.exploration_constant >= 0.0 && self.exploration_constant.is_finite()) {
            return Err(Error::invalid("exploration_constant must be a non-negative real"));
        }
        Ok(())
    }
}

/// A two-player zero-sum game the searches can walk.
///
/// Values are always from the maximizer's point of view.
pub trait GameTree: Clone {
    type Move: Clone + fmt::Display;

    fn is_terminal(&self) -> bool;

    /// True when the side to move maximizes.
    fn maximizing(&self) -> bool;

    /// Up to `limit` candidate moves in a fixed order.
    fn moves(&self, limit: usize) -> Vec<Self::Move>;

    fn play(&self, mv: &Self::Move) -> Self;

    fn evaluate(&self) -> f64;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tactic_names_round_trip() {
        for t in Tactic::ALL {
            assert_eq!(t.as_str().parse::<Tactic>().unwrap(), t);
            assert_eq!(serde_json::to_string(&t).unwrap(), format!("\"{}\"", t.as_str()));
        }
        assert!("bluff".parse::<Tactic>().is_err());
    }

    #[test]
    fn nearest_tactic_labels() {
        assert_eq!(Tactic::nearest("A 2023 study shows the data"), Tactic::CiteEvidence);
        assert_eq!(Tactic::nearest("Imagine the families who suffer"), Tactic::EmotionalAppeal);
        assert_eq!(Tactic::nearest("zzz"), Tactic::Rebut);
    }
}
