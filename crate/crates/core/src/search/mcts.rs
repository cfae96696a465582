use rand::Rng;

use super::{GameTree, SearchConfig};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

struct Node<G: GameTree> {
    state: G,
    moves: Vec<G::Move>,
    children: Vec<usize>,
    visits: u32,
    total: f64,
}

impl<G: GameTree> Node<G> {
    fn new(state: G, branching: usize) -> Self {
        let moves = if state.is_terminal() {
            Vec::new()
        } else {
            state.moves(branching)
        };
        Node {
            state,
            moves,
            children: Vec::new(),
            visits: 0,
            total: 0.0,
        }
    }

    fn mean(&self) -> f64 {
        self.total / f64::from(self.visits)
    }
}

/// Visit counts and mean values of the root's children, in move order.
#[derive(Debug, Clone, PartialEq)]
pub struct MctsStats {
    pub visits: Vec<u32>,
    pub means: Vec<f64>,
}

/// UCT search; returns the most-visited root move (lowest index on ties).
pub fn mcts_search<G: GameTree>(
    state: &G,
    config: &SearchConfig,
    rng: &mut SeededRng,
) -> Result<G::Move> {
    mcts_search_with_stats(state, config, rng).map(|(mv, _)| mv)
}

pub fn mcts_search_with_stats<G: GameTree>(
    state: &G,
    config: &SearchConfig,
    rng: &mut SeededRng,
) -> Result<(G::Move, MctsStats)> {
    if config.mcts_iterations == 0 {
        return Err(Error::invalid("mcts_iterations must be at least 1"));
    }
    if config.branching == 0 {
        return Err(Error::invalid("branching must be at least 1"));
    }
    let root_moves = state.moves(config.branching);
    if state.is_terminal() || root_moves.is_empty() {
        return Err(Error::state("no moves to search from a terminal state"));
    }
    let c = config.exploration_constant;
    let mut tree: Vec<Node<G>> = vec![Node::new(state.clone(), config.branching)];

    for _ in 0..config.mcts_iterations {
        let mut path = vec![0usize];
        let mut current = 0usize;
        loop {
            let node = &tree[current];
            if node.moves.is_empty() {
                break;
            }
            if node.children.len() < node.moves.len() {
                let mv = node.moves[node.children.len()].clone();
                let child = Node::new(node.state.play(&mv), config.branching);
                tree.push(child);
                let id = tree.len() - 1;
                tree[current].children.push(id);
                path.push(id);
                current = id;
                break;
            }
            let parent_visits = f64::from(node.visits.max(1));
            let maximizing = node.state.maximizing();
            let mut best = node.children[0];
            let mut best_score = f64::NEG_INFINITY;
            for &child in &node.children {
                let ch = &tree[child];
                let mean = if maximizing { ch.mean() } else { -ch.mean() };
                let score = mean + c * (parent_visits.ln() / f64::from(ch.visits)).sqrt();
                if score > best_score {
                    best_score = score;
                    best = child;
                }
            }
            path.push(best);
            current = best;
        }
        let value = rollout(&tree[current].state, config.branching, rng);
        for id in path {
            tree[id].visits += 1;
            tree[id].total += value;
        }
    }

    let root = &tree[0];
    let mut visits = vec![0u32; root.moves.len()];
    let mut means = vec![0.0; root.moves.len()];
    for (i, &child) in root.children.iter().enumerate() {
        visits[i] = tree[child].visits;
        means[i] = tree[child].mean();
    }
    let mut best = 0;
    for (i, v) in visits.iter().enumerate() {
        if *v > visits[best] {
            best = i;
        }
    }
    Ok((root.moves[best].clone(), MctsStats { visits, means }))
}

/// Plays uniformly random moves until the game ends, then evaluates.
fn rollout<G: GameTree>(state: &G, branching: usize, rng: &mut SeededRng) -> f64 {
    let mut current = state.clone();
    loop {
        if current.is_terminal() {
            return current.evaluate();
        }
        let moves = current.moves(branching);
        if moves.is_empty() {
            return current.evaluate();
        }
        let pick = rng.gen_range(0..moves.len());
        current = current.play(&moves[pick]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use crate::search::{Algorithm, GameState, Tactic};

    /// Root with two children; every leaf under child 0 is worth +1 and every
    /// leaf under child 1 is worth -1.
    #[derive(Clone)]
    struct Fixed {
        path: Vec<usize>,
    }

    impl GameTree for Fixed {
        type Move = usize;

        fn is_terminal(&self) -> bool {
            self.path.len() >= 3
        }

        fn maximizing(&self) -> bool {
            self.path.len() % 2 == 0
        }

        fn moves(&self, limit: usize) -> Vec<usize> {
            (0..2.min(limit)).collect()
        }

        fn play(&self, mv: &usize) -> Self {
            let mut path = self.path.clone();
            path.push(*mv);
            Fixed { path }
        }

        fn evaluate(&self) -> f64 {
            match self.path.first() {
                Some(0) => 1.0,
                Some(_) => -1.0,
                None => 0.0,
            }
        }
    }

    fn cfg(iterations: u32, c: f64) -> SearchConfig {
        SearchConfig {
            algorithm: Algorithm::Mcts,
            mcts_iterations: iterations,
            exploration_constant: c,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn single_iteration_picks_first_untried_child() {
        let gs = GameState::new(3);
        let mv = mcts_search(&gs, &cfg(1, 1.414), &mut seeded_rng(1)).unwrap();
        assert_eq!(mv.tactic, Tactic::Rebut);
    }

    #[test]
    fn greedy_search_finds_winning_child() {
        let root = Fixed { path: vec![] };
        let (mv, stats) = mcts_search_with_stats(&root, &cfg(500, 0.0), &mut seeded_rng(3)).unwrap();
        assert_eq!(mv, 0);
        assert_eq!(stats.visits.iter().sum::<u32>(), 500);
        assert_eq!(stats.means, vec![1.0, -1.0]);
    }

    /// Same tree with the roles swapped: the root player minimizes.
    #[derive(Clone)]
    struct UserFirst(Fixed);

    impl GameTree for UserFirst {
        type Move = usize;

        fn is_terminal(&self) -> bool {
            self.0.is_terminal()
        }

        fn maximizing(&self) -> bool {
            !self.0.maximizing()
        }

        fn moves(&self, limit: usize) -> Vec<usize> {
            self.0.moves(limit)
        }

        fn play(&self, mv: &usize) -> Self {
            UserFirst(self.0.play(mv))
        }

        fn evaluate(&self) -> f64 {
            self.0.evaluate()
        }
    }

    #[test]
    fn minimizing_root_prefers_low_values() {
        let root = UserFirst(Fixed { path: vec![] });
        let mv = mcts_search(&root, &cfg(200, 0.5), &mut seeded_rng(4)).unwrap();
        assert_eq!(mv, 1);
    }

    #[test]
    fn zero_iterations_rejected() {
        let gs = GameState::new(3);
        assert!(matches!(
            mcts_search(&gs, &cfg(0, 1.0), &mut seeded_rng(1)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn seeded_search_is_deterministic() {
        let gs = GameState::new(3);
        let a = mcts_search_with_stats(&gs, &cfg(300, 1.414), &mut seeded_rng(77)).unwrap();
        let b = mcts_search_with_stats(&gs, &cfg(300, 1.414), &mut seeded_rng(77)).unwrap();
        assert_eq!(a, b);
    }
}
