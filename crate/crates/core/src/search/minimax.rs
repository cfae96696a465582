use std::io::{self, Write};

use serde::Serialize;

use super::{GameTree, SearchConfig};
use crate::par::{self, Execution};

/// One visited node, emitted when tracing is on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub depth: u32,
    pub side: &'static str,
    #[serde(rename = "move")]
    pub mv: Option<String>,
    pub value: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Writes trace entries as JSON lines.
pub fn write_trace<W: Write>(entries: &[TraceEntry], mut out: W) -> io::Result<()> {
    for e in entries {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

struct Searcher<'t> {
    branching: usize,
    trace: Option<&'t mut Vec<TraceEntry>>,
}

impl Searcher<'_> {
    fn alphabeta<G: GameTree>(
        &mut self,
        node: &G,
        via: Option<&G::Move>,
        depth: u32,
        mut alpha: f64,
        mut beta: f64,
    ) -> f64 {
        let (a0, b0) = (alpha, beta);
        let moves = if depth == 0 || node.is_terminal() {
            Vec::new()
        } else {
            node.moves(self.branching)
        };
        let value = if moves.is_empty() {
            node.evaluate()
        } else if node.maximizing() {
            let mut best = f64::NEG_INFINITY;
            for mv in &moves {
                let v = self.alphabeta(&node.play(mv), Some(mv), depth - 1, alpha, beta);
                best = best.max(v);
                if best >= beta {
                    break;
                }
                alpha = alpha.max(best);
            }
            best
        } else {
            let mut best = f64::INFINITY;
            for mv in &moves {
                let v = self.alphabeta(&node.play(mv), Some(mv), depth - 1, alpha, beta);
                best = best.min(v);
                if best <= alpha {
                    break;
                }
                beta = beta.min(best);
            }
            best
        };
        if let Some(trace) = self.trace.as_deref_mut() {
            trace.push(TraceEntry {
                depth,
                side: if node.maximizing() { "ai" } else { "user" },
                mv: via.map(ToString::to_string),
                value,
                alpha: a0,
                beta: b0,
            });
        }
        value
    }

    /// Root loop; a child replaces the incumbent only on strict improvement,
    /// which keeps the lowest-index optimal move.
    fn root<G: GameTree>(&mut self, state: &G, depth: u32) -> (f64, Option<G::Move>) {
        let moves = state.moves(self.branching);
        if depth == 0 || state.is_terminal() || moves.is_empty() {
            return (state.evaluate(), None);
        }
        let maximizing = state.maximizing();
        let mut best_value = if maximizing {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
        let mut best_index = 0;
        for (i, mv) in moves.iter().enumerate() {
            let child = state.play(mv);
            let v = if maximizing {
                self.alphabeta(&child, Some(mv), depth - 1, best_value, f64::INFINITY)
            } else {
                self.alphabeta(&child, Some(mv), depth - 1, f64::NEG_INFINITY, best_value)
            };
            let improves = if maximizing { v > best_value } else { v < best_value };
            if improves {
                best_value = v;
                best_index = i;
            }
        }
        (best_value, moves.into_iter().nth(best_index))
    }
}

/// Depth-limited minimax with alpha-beta pruning.
///
/// Returns the position value and the best move for the side to move, or
/// `None` at depth 0 and at terminal positions.
pub fn minimax_search<G: GameTree>(state: &G, config: &SearchConfig) -> (f64, Option<G::Move>) {
    Searcher {
        branching: config.branching,
        trace: None,
    }
    .root(state, config.depth)
}

/// Like [`minimax_search`], recording every visited node.
pub fn minimax_search_traced<G: GameTree>(
    state: &G,
    config: &SearchConfig,
    trace: &mut Vec<TraceEntry>,
) -> (f64, Option<G::Move>) {
    Searcher {
        branching: config.branching,
        trace: Some(trace),
    }
    .root(state, config.depth)
}

/// Searches root children independently (in parallel when enabled) and
/// picks the lowest-index optimum, matching [`minimax_search`] exactly.
pub fn minimax_search_with<G>(
    state: &G,
    config: &SearchConfig,
    exec: Execution,
) -> (f64, Option<G::Move>)
where
    G: GameTree + Sync + Send,
    G::Move: Sync + Send,
{
    if !exec.is_parallel() {
        return minimax_search(state, config);
    }
    let moves = state.moves(config.branching);
    if config.depth == 0 || state.is_terminal() || moves.is_empty() {
        return (state.evaluate(), None);
    }
    let values = par::map_slice(&moves, exec, |mv| {
        Searcher {
            branching: config.branching,
            trace: None,
        }
        .alphabeta(
            &state.play(mv),
            Some(mv),
            config.depth - 1,
            f64::NEG_INFINITY,
            f64::INFINITY,
        )
    });
    let maximizing = state.maximizing();
    let mut best_index = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        let improves = if maximizing {
            *v > values[best_index]
        } else {
            *v < values[best_index]
        };
        if improves {
            best_index = i;
        }
    }
    (values[best_index], moves.into_iter().nth(best_index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::GameState;

    #[test]
    fn depth_zero_is_static_evaluation() {
        let mut gs = GameState::new(3);
        gs.score_margin = 4.0;
        let cfg = SearchConfig {
            depth: 0,
            ..SearchConfig::default()
        };
        let (v, mv) = minimax_search(&gs, &cfg);
        assert_eq!(v, crate::search::evaluate_state(&gs));
        assert!(mv.is_none());
    }

    #[test]
    fn parallel_root_matches_sequential() {
        let mut gs = GameState::new(3);
        gs.coverage_margin = 0.3;
        for depth in 1..=4 {
            let cfg = SearchConfig {
                depth,
                branching: 5,
                ..SearchConfig::default()
            };
            let a = minimax_search(&gs, &cfg);
            let b = minimax_search_with(&gs, &cfg, Execution::Parallel);
            assert_eq!(a.0, b.0);
            assert_eq!(a.1, b.1);
        }
    }

    #[test]
    fn trace_lines_are_json_objects() {
        let gs = GameState::new(2);
        let mut trace = Vec::new();
        let cfg = SearchConfig::default();
        let plain = minimax_search(&gs, &cfg);
        let traced = minimax_search_traced(&gs, &cfg, &mut trace);
        assert_eq!(plain.0, traced.0);
        assert!(!trace.is_empty());
        let mut buf = Vec::new();
        write_trace(&trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            for key in ["depth", "side", "move", "value", "alpha", "beta"] {
                assert!(v.get(key).is_some(), "missing {key} in {line}");
            }
        }
    }
}
