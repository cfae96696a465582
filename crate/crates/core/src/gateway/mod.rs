//! Role-routed access to language models.
//!
//! Each request carries a [`ProviderRole`]; the gateway sends it to the
//! provider configured for that role. HTTP providers speak the
//! chat-completions wire format. When one fails (timeout, bad status,
//! unreadable body) the deterministic [`StubProvider`] answers instead and
//! the result is marked degraded.

mod config;
mod http;
mod stub;
mod template;
mod topics;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::debate::{DebateState, Side};
use crate::error::{Error, Result};
use crate::ga::StrategyHint;
use crate::hash::stub_hash;
use crate::search::{build_game_state, tactic_strength, Move, Tactic};

pub use config::{ProviderConfig, ProviderEntry, ProviderKind, ProviderRole};
pub use http::HttpProvider;
pub use stub::{stub_dimensions, StubProvider};
pub use template::{Template, Templates};
pub use topics::{TopicBank, GENERAL_CATEGORY};

/// What a request is for. The stub uses it to pick its response bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Topics,
    Opponent,
    Suggestions,
    Evaluate,
    Feedback,
    SelfPlay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub role: ProviderRole,
    pub task: Task,
    pub prompt: String,
    /// Values the prompt was rendered from.
    pub slots: BTreeMap<String, String>,
    pub max_tokens: u32,
    pub temperature: f64,
    pub timeout_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    /// True when the stub answered in place of a failed provider.
    pub degraded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct ProviderFailure(pub String);

pub trait Provider: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> std::result::Result<String, ProviderFailure>;
}

#[derive(Clone)]
struct Route {
    kind: ProviderKind,
    entry: ProviderEntry,
    provider: Arc<dyn Provider>,
}

#[derive(Clone)]
pub struct Gateway {
    routes: BTreeMap<ProviderRole, Route>,
    stub: StubProvider,
    templates: Arc<Templates>,
    topics: Arc<TopicBank>,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("roles", &self.routes.iter().map(|(r, x)| (*r, x.kind)).collect::<Vec<_>>())
            .finish()
    }
}

/// Four rubric dimensions as returned by the evaluator role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawEvaluation {
    pub dims: [u8; 4],
    pub degraded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Suggestions {
    pub items: Vec<String>,
    pub degraded: bool,
}

impl Gateway {
    /// Builds routes for every role present in `config`.
    pub fn new(config: &ProviderConfig) -> Result<Self> {
        let topics = Arc::new(TopicBank::default());
        let stub = StubProvider::new(topics.clone());
        let mut routes = BTreeMap::new();
        for (role, entry) in &config.roles {
            let provider: Arc<dyn Provider> = match entry.kind {
                ProviderKind::Stub => Arc::new(stub.clone()),
                ProviderKind::Http => Arc::new(HttpProvider::new(
                    entry.endpoint.clone().unwrap_or_default(),
                    entry.model.clone().unwrap_or_default(),
                    entry.token_env.clone(),
                )),
            };
            routes.insert(
                *role,
                Route {
                    kind: entry.kind,
                    entry: entry.clone(),
                    provider,
                },
            );
        }
        Ok(Gateway {
            routes,
            stub,
            templates: Arc::new(Templates::default()),
            topics,
        })
    }

    /// All four roles served by the stub.
    pub fn stub() -> Self {
        Gateway::new(&ProviderConfig::all_stub()).expect("stub config is valid")
    }

    /// Replaces the provider behind `role`.
    pub fn with_provider(mut self, role: ProviderRole, kind: ProviderKind, provider: Arc<dyn Provider>) -> Self {
        let entry = self
            .routes
            .get(&role)
            .map(|r| r.entry.clone())
            .unwrap_or_else(ProviderEntry::stub);
        self.routes.insert(role, Route { kind, entry, provider });
        self
    }

    pub fn topic_bank(&self) -> &TopicBank {
        &self.topics
    }

    pub fn templates(&self) -> &Templates {
        &self.templates
    }

    pub fn provider_kind(&self, role: ProviderRole) -> Result<ProviderKind> {
        self.route(role).map(|r| r.kind)
    }

    fn route(&self, role: ProviderRole) -> Result<&Route> {
        self.routes
            .get(&role)
            .ok_or_else(|| Error::invalid(format!("no provider configured for role {role}")))
    }

    /// Packs a rendered prompt with the role's limits.
    pub fn request(
        &self,
        role: ProviderRole,
        task: Task,
        prompt: String,
        slots: BTreeMap<String, String>,
    ) -> Result<CompletionRequest> {
        let entry = &self.route(role)?.entry;
        if prompt.is_empty() {
            return Err(Error::invalid("prompt is empty"));
        }
        Ok(CompletionRequest {
            role,
            task,
            prompt,
            slots,
            max_tokens: entry.max_tokens,
            temperature: entry.temperature,
            timeout_ms: entry.timeout_ms,
        })
    }

    /// Sends `request` to its role's provider, falling back to the stub.
    pub fn complete(&self, request: &CompletionRequest) -> Result<Completion> {
        let route = self.route(request.role)?;
        if request.timeout_ms == 0 {
            return Err(Error::invalid("timeout_ms must be positive"));
        }
        match route.provider.complete(request) {
            Ok(text) => Ok(Completion {
                text,
                degraded: false,
            }),
            Err(failure) => {
                warn!(role = %request.role, error = %failure, "provider failed, using stub");
                Ok(Completion {
                    text: self.stub.respond(request),
                    degraded: true,
                })
            }
        }
    }

    /// `count` distinct motions.
    ///
    /// The stub draws bank indices from hashes of a salted prompt, probing
    /// forward past indices already taken.
    pub fn generate_topics(&self, count: usize, salt: u64) -> Result<Vec<String>> {
        if count == 0 {
            return Err(Error::invalid("count must be at least 1"));
        }
        let slots = slot_map([("count", count.to_string())]);
        let prompt = self.templates.topics.render(&slots)?;
        if self.provider_kind(ProviderRole::Topic)? == ProviderKind::Http {
            let req = self.request(ProviderRole::Topic, Task::Topics, prompt.clone(), slots)?;
            let reply = self.complete(&req)?;
            if !reply.degraded {
                let parsed = parse_list(&reply.text, count);
                if parsed.len() == count {
                    return Ok(parsed);
                }
                warn!("topic provider returned too few topics, using the bank");
            }
        }
        self.bank_topics(&prompt, count, salt)
    }

    fn bank_topics(&self, prompt: &str, count: usize, salt: u64) -> Result<Vec<String>> {
        let n = self.topics.len();
        if count > n {
            return Err(Error::invalid(format!(
                "asked for {count} topics but the bank holds {n}"
            )));
        }
        let mut taken = BTreeSet::new();
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            let mut idx = (stub_hash(&format!("{prompt}#{salt}:{i}")) % n as u64) as usize;
            while !taken.insert(idx) {
                idx = (idx + 1) % n;
            }
            out.push(self.topics.topic(idx).to_string());
        }
        Ok(out)
    }

    /// The AI's argument for the current round.
    ///
    /// `debate` must hold the user's argument for the round as its last entry.
    pub fn generate_opponent_argument(
        &self,
        debate: &DebateState,
        hint: StrategyHint,
        counter: &Move,
    ) -> Result<Completion> {
        if debate.is_finished() {
            return Err(Error::state("debate is finished"));
        }
        if debate.transcript.len().is_multiple_of(2) {
            return Err(Error::state("it is not the AI's turn"));
        }
        let last = debate.last_argument_of(Side::User).unwrap_or_default();
        let slots = slot_map([
            ("topic", debate.topic.clone()),
            ("position", debate.ai_position.keyword().to_string()),
            ("last_argument", last.to_string()),
            ("hint", hint.as_str().to_string()),
            ("tactic", counter.tactic.as_str().to_string()),
            ("tactic_line", tactic_line(counter.tactic, last)),
            ("hint_line", hint_line(hint).to_string()),
        ]);
        let prompt = self.templates.opponent.render(&slots)?;
        let req = self.request(ProviderRole::Opponent, Task::Opponent, prompt, slots)?;
        self.complete(&req)
    }

    /// Three ways for the user to strengthen the next argument.
    pub fn generate_suggestions(&self, debate: &DebateState) -> Result<Suggestions> {
        if debate.is_finished() {
            return Err(Error::state("debate is finished"));
        }
        let derived = derived_suggestions(debate)?;
        let slots = slot_map([
            ("topic", debate.topic.clone()),
            ("position", debate.user_position.keyword().to_string()),
            (
                "last_argument",
                debate.last_argument_of(Side::Ai).unwrap_or_default().to_string(),
            ),
            ("derived", derived.join("\n")),
        ]);
        if self.provider_kind(ProviderRole::Assistant)? == ProviderKind::Stub {
            return Ok(Suggestions {
                items: derived,
                degraded: false,
            });
        }
        let prompt = self.templates.suggest.render(&slots)?;
        let req = self.request(ProviderRole::Assistant, Task::Suggestions, prompt, slots)?;
        let reply = self.complete(&req)?;
        let items = parse_list(&reply.text, 3);
        if items.len() == 3 {
            Ok(Suggestions {
                items,
                degraded: reply.degraded,
            })
        } else {
            Ok(Suggestions {
                items: derived,
                degraded: true,
            })
        }
    }

    /// The evaluation prompt for one argument.
    pub fn evaluation_prompt(&self, argument: &str, context: &DebateState) -> Result<String> {
        self.templates.evaluate.render(&evaluation_slots(argument, context))
    }

    /// Four rubric scores in [0, 10] from the evaluator role.
    pub fn raw_evaluate(&self, argument: &str, context: &DebateState) -> Result<RawEvaluation> {
        if argument.trim().is_empty() {
            return Err(Error::invalid("argument is empty"));
        }
        let slots = evaluation_slots(argument, context);
        let prompt = self.templates.evaluate.render(&slots)?;
        let req = self.request(ProviderRole::Evaluator, Task::Evaluate, prompt.clone(), slots)?;
        let mut degraded = false;
        for _attempt in 0..2 {
            let reply = self.complete(&req)?;
            degraded |= reply.degraded;
            if let Some(dims) = parse_dimensions(&reply.text) {
                return Ok(RawEvaluation { dims, degraded });
            }
            warn!("evaluator reply unparseable");
        }
        Ok(RawEvaluation {
            dims: stub_dimensions(&prompt),
            degraded: true,
        })
    }

    /// Rephrases template feedback through a live assistant; with the stub
    /// the draft comes back unchanged.
    pub fn phrase_feedback(&self, draft: &str) -> Result<Completion> {
        if self.provider_kind(ProviderRole::Assistant)? == ProviderKind::Stub {
            return Ok(Completion {
                text: draft.to_string(),
                degraded: false,
            });
        }
        let slots = slot_map([("draft", draft.to_string())]);
        let prompt = self.templates.feedback.render(&slots)?;
        let req = self.request(ProviderRole::Assistant, Task::Feedback, prompt, slots)?;
        self.complete(&req)
    }

    /// An argument for the user side, used when the engine plays itself.
    pub fn generate_selfplay_argument(&self, debate: &DebateState) -> Result<Completion> {
        if debate.is_finished() {
            return Err(Error::state("debate is finished"));
        }
        let last = debate.last_argument_of(Side::Ai).unwrap_or_default();
        let tactic = ranked_user_tactics(debate)?[0];
        let slots = slot_map([
            ("topic", debate.topic.clone()),
            ("position", debate.user_position.keyword().to_string()),
            ("last_argument", last.to_string()),
            ("tactic", tactic.as_str().to_string()),
            ("tactic_line", tactic_line(tactic, last)),
        ]);
        let prompt = self.templates.selfplay.render(&slots)?;
        let req = self.request(ProviderRole::Assistant, Task::SelfPlay, prompt, slots)?;
        self.complete(&req)
    }
}

fn slot_map<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn evaluation_slots(argument: &str, context: &DebateState) -> BTreeMap<String, String> {
    slot_map([
        ("topic", context.topic.clone()),
        ("round", context.current_round.to_string()),
        ("argument", argument.to_string()),
    ])
}

/// Non-empty lines with list markers stripped, deduplicated, at most `limit`.
fn parse_list(text: &str, limit: usize) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for line in text.lines() {
        let item = line
            .trim()
            .trim_start_matches(|c: char| c.is_ascii_digit() || matches!(c, '.' | ')' | '-' | '*' | '•'))
            .trim();
        if !item.is_empty() && !out.iter().any(|o| o == item) {
            out.push(item.to_string());
        }
        if out.len() == limit {
            break;
        }
    }
    out
}

/// Reads `label: n` lines for the four rubric dimensions, clamping to 10.
pub fn parse_dimensions(text: &str) -> Option<[u8; 4]> {
    const LABELS: [&str; 4] = ["relevance", "persuasiveness", "logical_consistency", "evidence_usage"];
    let mut dims: [Option<u8>; 4] = [None; 4];
    for line in text.lines() {
        let Some((label, value)) = line.split_once(':') else {
            continue;
        };
        let label = label
            .trim()
            .trim_matches(|c: char| c == '*' || c == '-')
            .trim()
            .to_ascii_lowercase()
            .replace(' ', "_");
        let Some(slot) = LABELS.iter().position(|l| *l == label) else {
            continue;
        };
        let digits: String = value.trim().chars().take_while(char::is_ascii_digit).collect();
        if let Ok(n) = digits.parse::<u32>() {
            dims[slot] = Some(n.min(10) as u8);
        }
    }
    Some([dims[0]?, dims[1]?, dims[2]?, dims[3]?])
}

fn first_words(text: &str, n: usize) -> String {
    let words: Vec<&str> = text.split_whitespace().take(n).collect();
    let mut s = words.join(" ");
    s = s.trim_end_matches(['.', ',', ';', ':', '!', '?']).to_string();
    if text.split_whitespace().count() > n {
        s.push_str("...");
    }
    s
}

fn tactic_line(tactic: Tactic, last: &str) -> String {
    let point = if last.trim().is_empty() {
        "the other side is right".to_string()
    } else {
        first_words(last, 12)
    };
    match tactic {
        Tactic::Rebut => format!("The claim that \"{point}\" does not hold up once its premises are examined."),
        Tactic::Counterexample => format!(
            "One counterexample is enough: the cases where the opposite happened show that \"{point}\" is no general rule."
        ),
        Tactic::CiteEvidence => {
            "The available evidence, from published studies and public data, points the other way.".to_string()
        }
        Tactic::Reframe => format!("The real question is not whether \"{point}\", but who bears the costs and who gains."),
        Tactic::ConcedeAndPivot => {
            "Granted, part of that point is fair, but it leaves the central issue untouched.".to_string()
        }
        Tactic::EmotionalAppeal => {
            "Imagine the people who would live with the consequences every day.".to_string()
        }
        Tactic::AppealToAuthority => {
            "Experts who have studied this for decades reach the opposite conclusion.".to_string()
        }
        Tactic::SummarizeAndClose => {
            "In summary, every strand of this debate leads to the same conclusion.".to_string()
        }
    }
}

fn hint_line(hint: StrategyHint) -> &'static str {
    match hint {
        StrategyHint::EmphasizeCredibility => "Trust should rest on track records, and the record here is clear.",
        StrategyHint::EmphasizeEmotion => "Behind these numbers are real families and real hopes.",
        StrategyHint::EmphasizeLogic => "Follow the reasoning step by step and the conclusion is unavoidable.",
        StrategyHint::Balanced => "Principle, evidence and human stakes all point the same way.",
    }
}

fn suggestion_text(tactic: Tactic) -> &'static str {
    match tactic {
        Tactic::Rebut => "Rebut your opponent's last claim directly and name the premise that fails.",
        Tactic::Counterexample => "Offer a concrete counterexample that breaks your opponent's generalization.",
        Tactic::CiteEvidence => "Cite a specific statistic or study that backs your position.",
        Tactic::Reframe => "Reframe the debate around the question that favours your side.",
        Tactic::ConcedeAndPivot => "Concede a minor point, then pivot to your strongest argument.",
        Tactic::EmotionalAppeal => "Describe who is affected and why it matters to them.",
        Tactic::AppealToAuthority => "Bring in an expert or institution that supports your view.",
        Tactic::SummarizeAndClose => "Summarize your strongest points and close with a clear conclusion.",
    }
}

/// All tactics ranked by strength for the user, strongest first; ties keep
/// declaration order.
fn ranked_user_tactics(debate: &DebateState) -> Result<Vec<Tactic>> {
    let mut state = build_game_state(debate)?;
    state.side_to_move = Side::User;
    let mut ranked: Vec<(Tactic, f64)> = Tactic::ALL
        .into_iter()
        .map(|t| (t, tactic_strength(&state, t)))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(ranked.into_iter().map(|(t, _)| t).collect())
}

fn derived_suggestions(debate: &DebateState) -> Result<Vec<String>> {
    Ok(ranked_user_tactics(debate)?
        .into_iter()
        .take(3)
        .map(|t| suggestion_text(t).to_string())
        .collect())
}
