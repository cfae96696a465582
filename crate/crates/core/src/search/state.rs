use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{GameTree, Move, Tactic};
use crate::debate::{DebateState, Side};
use crate::error::{Error, Result};

const MARGIN_WEIGHT: f64 = 0.6;
const COVERAGE_WEIGHT: f64 = 0.25;
const MOMENTUM_WEIGHT: f64 = 0.15;

/// Abstract debate position used by the searches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    /// Cumulative AI score minus cumulative user score.
    pub score_margin: f64,
    pub rounds_played: u32,
    pub rounds_total: u32,
    /// AI topic coverage minus user topic coverage, in [-1, 1].
    pub coverage_margin: f64,
    /// Last completed round's margin divided by 10, in [-1, 1].
    pub momentum: f64,
    pub side_to_move: Side,
    pub applied_moves: Vec<Move>,
    /// Margin when the current round opened.
    #[serde(default)]
    pub round_start_margin: f64,
}

impl GameState {
    pub fn new(rounds_total: u32) -> Self {
        GameState {
            score_margin: 0.0,
            rounds_played: 0,
            rounds_total,
            coverage_margin: 0.0,
            momentum: 0.0,
            side_to_move: Side::User,
            applied_moves: Vec::new(),
            round_start_margin: 0.0,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.rounds_played >= self.rounds_total
    }

    fn margin_bound(&self) -> f64 {
        10.0 * f64::from(self.rounds_total.max(1))
    }
}

fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

const STOPWORDS: &[&str] = &[
    "about", "above", "after", "again", "against", "also", "been", "being", "between", "both",
    "could", "does", "doing", "down", "during", "each", "from", "further", "have", "having",
    "here", "into", "itself", "just", "more", "most", "much", "must", "only", "other", "over",
    "same", "should", "some", "such", "than", "that", "their", "them", "then", "there", "these",
    "they", "this", "those", "through", "under", "until", "very", "were", "what", "when",
    "where", "which", "while", "will", "with", "would", "your",
];

/// Content words of a topic: lowercase, at least four characters, no stopwords.
pub(crate) fn topic_facets(topic: &str) -> BTreeSet<String> {
    words(topic)
        .filter(|w| w.chars().count() >= 4 && !STOPWORDS.contains(&w.as_str()))
        .collect()
}

/// Fraction of the topic's facets that appear in `arguments`.
pub fn topic_coverage<'a>(topic: &str, arguments: impl IntoIterator<Item = &'a str>) -> f64 {
    let facets = topic_facets(topic);
    if facets.is_empty() {
        return 0.0;
    }
    let mut seen = BTreeSet::new();
    for arg in arguments {
        for w in words(arg) {
            if facets.contains(&w) {
                seen.insert(w);
            }
        }
    }
    seen.len() as f64 / facets.len() as f64
}

/// Abstracts a debate transcript into a [`GameState`].
///
/// Only completed rounds feed the margin and momentum.
pub fn build_game_state(debate: &DebateState) -> Result<GameState> {
    debate.check_history()?;
    let rounds = debate.round_scores();
    let margin: f64 = rounds.iter().map(|(u, a)| a - u).sum();
    let momentum = rounds
        .last()
        .map(|(u, a)| ((a - u) / 10.0).clamp(-1.0, 1.0))
        .unwrap_or(0.0);
    let coverage = topic_coverage(&debate.topic, debate.arguments_of(Side::Ai))
        - topic_coverage(&debate.topic, debate.arguments_of(Side::User));
    let side_to_move = if debate.transcript.len().is_multiple_of(2) {
        Side::User
    } else {
        Side::Ai
    };
    Ok(GameState {
        score_margin: margin,
        rounds_played: rounds.len() as u32,
        rounds_total: debate.rounds_total,
        coverage_margin: coverage.clamp(-1.0, 1.0),
        momentum,
        side_to_move,
        applied_moves: Vec::new(),
        round_start_margin: margin,
    })
}

/// Position value in [-1, 1]; positive favours the AI.
pub fn evaluate_state(state: &GameState) -> f64 {
    let per_round = state.score_margin / (10.0 * f64::from(state.rounds_played.max(1)));
    (MARGIN_WEIGHT * per_round
        + COVERAGE_WEIGHT * state.coverage_margin
        + MOMENTUM_WEIGHT * state.momentum)
        .clamp(-1.0, 1.0)
}

/// Heuristic strength of `tactic` for the side to move, in [0, 1].
pub fn tactic_strength(state: &GameState, tactic: Tactic) -> f64 {
    let standing = match state.side_to_move {
        Side::Ai => evaluate_state(state),
        Side::User => -evaluate_state(state),
    };
    let (base, sensitivity) = tactic.strength_profile();
    (base + sensitivity * standing).clamp(0.0, 1.0)
}

/// The first `k` tactics in declaration order, with heuristic strengths.
pub fn generate_moves(state: &GameState, k: usize) -> Result<Vec<Move>> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if state.is_terminal() {
        return Err(Error::state("no moves in a terminal state"));
    }
    Ok(candidate_moves(state, k))
}

fn candidate_moves(state: &GameState, k: usize) -> Vec<Move> {
    Tactic::ALL
        .iter()
        .take(k)
        .map(|&tactic| Move {
            tactic,
            strength_estimate: tactic_strength(state, tactic),
        })
        .collect()
}

/// Plays `mv` for the side to move.
///
/// The user opens each round; the AI's reply closes it.
pub fn apply_move(state: &GameState, mv: &Move) -> Result<GameState> {
    if state.is_terminal() {
        return Err(Error::state(format!(
            "all {} rounds already played",
            state.rounds_total
        )));
    }
    if !(0.0..=1.0).contains(&mv.strength_estimate) {
        return Err(Error::invalid(format!(
            "strength_estimate {} outside [0, 1]",
            mv.strength_estimate
        )));
    }
    Ok(play_unchecked(state, mv))
}

fn play_unchecked(state: &GameState, mv: &Move) -> GameState {
    let mut next = state.clone();
    let sign = match state.side_to_move {
        Side::Ai => 1.0,
        Side::User => -1.0,
    };
    let bound = next.margin_bound();
    next.score_margin = (next.score_margin
        + sign * mv.tactic.margin_effect() * mv.strength_estimate)
        .clamp(-bound, bound);
    next.coverage_margin = (next.coverage_margin
        + sign * mv.tactic.coverage_effect() * mv.strength_estimate)
        .clamp(-1.0, 1.0);
    next.applied_moves.push(*mv);
    if state.side_to_move == Side::Ai {
        next.rounds_played += 1;
        next.momentum = ((next.score_margin - next.round_start_margin) / 10.0).clamp(-1.0, 1.0);
        next.round_start_margin = next.score_margin;
    }
    next.side_to_move = state.side_to_move.other();
    next
}

impl GameTree for GameState {
    type Move = Move;

    fn is_terminal(&self) -> bool {
        GameState::is_terminal(self)
    }

    fn maximizing(&self) -> bool {
        self.side_to_move == Side::Ai
    }

    fn moves(&self, limit: usize) -> Vec<Move> {
        if self.is_terminal() || limit == 0 {
            Vec::new()
        } else {
            candidate_moves(self, limit)
        }
    }

    fn play(&self, mv: &Move) -> Self {
        play_unchecked(self, mv)
    }

    fn evaluate(&self) -> f64 {
        evaluate_state(self)
    }
}
