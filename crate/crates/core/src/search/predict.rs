use serde::{Deserialize, Serialize};

use super::{apply_move, mcts_search, minimax_search, Algorithm, GameState, Move, SearchConfig};
use crate::debate::Side;
use crate::error::{Error, Result};
use crate::hash::stub_hash;
use crate::rng::seeded_rng;

/// Below this many milliseconds the search gives up one ply.
pub const DEPTH_BUDGET_THRESHOLD_MS: i64 = 2000;

pub fn adjust_depth(config: &SearchConfig, remaining_budget_ms: i64) -> Result<u32> {
    if remaining_budget_ms < 0 {
        return Err(Error::invalid(format!(
            "remaining budget {remaining_budget_ms} ms is negative"
        )));
    }
    if remaining_budget_ms >= DEPTH_BUDGET_THRESHOLD_MS {
        Ok(config.depth)
    } else {
        Ok(config.depth.saturating_sub(1).max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub predicted_user: Move,
    pub counter: Move,
    /// Plies searched for the prediction.
    pub depth: u32,
    /// Value of the position under the predicted line.
    pub value: f64,
}

/// Predicts the user's next tactic and picks the AI's reply to it.
///
/// The prediction is the minimizing root move at the budget-adjusted depth;
/// the counter is the best AI move one ply below it (at least one ply deep).
pub fn predict_and_counter(state: &GameState, config: &SearchConfig) -> Result<Prediction> {
    config.validate()?;
    if state.is_terminal() {
        return Err(Error::state("cannot predict in a finished game"));
    }
    if state.side_to_move != Side::User {
        return Err(Error::state("prediction needs the user to move"));
    }
    let depth = adjust_depth(config, config.time_budget_ms)?.max(1);
    let root_cfg = SearchConfig {
        depth,
        ..config.clone()
    };
    let (value, predicted) = minimax_search(state, &root_cfg);
    let predicted = predicted.ok_or_else(|| Error::state("no candidate moves"))?;
    let child = apply_move(state, &predicted)?;
    let counter = match config.algorithm {
        Algorithm::Minimax => {
            let reply_cfg = SearchConfig {
                depth: (depth - 1).max(1),
                ..config.clone()
            };
            minimax_search(&child, &reply_cfg)
                .1
                .ok_or_else(|| Error::state("no reply available"))?
        }
        Algorithm::Mcts => {
            let key = serde_json::to_string(&child).expect("game state serializes");
            mcts_search(&child, config, &mut seeded_rng(stub_hash(&key)))?
        }
    };
    Ok(Prediction {
        predicted_user: predicted,
        counter,
        depth,
        value,
    })
}
