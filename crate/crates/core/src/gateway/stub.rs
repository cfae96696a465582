//! Deterministic offline provider.
//!
//! Every response is a pure function of the request: the FNV-1a hash of the
//! rendered prompt picks an entry from a small template bank, which is then
//! filled from the request's slot values.

use std::sync::Arc;

use super::template::fill;
use super::topics::TopicBank;
use super::{CompletionRequest, Provider, ProviderFailure, Task};
use crate::hash::stub_hash;

const OPPONENT_BANK: &[&str] = &[
    "Arguing {position} the motion \"{topic}\", I answer with a {tactic} move. {tactic_line} {hint_line}",
    "My case stays {position} \"{topic}\" and this turn I {tactic}. {tactic_line} {hint_line}",
    "Consider why I stand {position} \"{topic}\". {tactic_line} {hint_line} (tactic: {tactic})",
    "On \"{topic}\" I speak {position} the motion, and my reply is to {tactic}. {hint_line} {tactic_line}",
];

const USER_BANK: &[&str] = &[
    "I argue {position} the motion \"{topic}\". {tactic_line}",
    "Speaking {position} \"{topic}\": {tactic_line}",
    "My position is {position} \"{topic}\". {tactic_line} That is why the motion should be judged on its consequences.",
];

#[derive(Debug, Clone)]
pub struct StubProvider {
    topics: Arc<TopicBank>,
}

impl StubProvider {
    pub fn new(topics: Arc<TopicBank>) -> Self {
        StubProvider { topics }
    }

    pub fn respond(&self, request: &CompletionRequest) -> String {
        let h = stub_hash(&request.prompt);
        let slot = |name: &str| request.slots.get(name).cloned().unwrap_or_default();
        let from_bank = |bank: &[&str]| {
            fill(bank[(h % bank.len() as u64) as usize], &request.slots)
                .unwrap_or_else(|_| request.prompt.clone())
        };
        match request.task {
            Task::Evaluate => {
                let [r, p, l, e] = stub_dimensions(&request.prompt);
                format!(
                    "relevance: {r}\npersuasiveness: {p}\nlogical_consistency: {l}\nevidence_usage: {e}"
                )
            }
            Task::Opponent => from_bank(OPPONENT_BANK),
            Task::SelfPlay => from_bank(USER_BANK),
            Task::Topics => self.topics.topic(h as usize % self.topics.len()).to_string(),
            Task::Suggestions => slot("derived"),
            Task::Feedback => slot("draft"),
        }
    }
}

/// Rubric scores the stub assigns to a rendered evaluation prompt: the four
/// low-order bytes of its hash, each reduced mod 11.
pub fn stub_dimensions(prompt: &str) -> [u8; 4] {
    let h = stub_hash(prompt);
    [0u32, 8, 16, 24].map(|shift| (((h >> shift) & 0xff) % 11) as u8)
}

impl Provider for StubProvider {
    fn complete(&self, request: &CompletionRequest) -> Result<String, ProviderFailure> {
        Ok(self.respond(request))
    }
}
