//! Debate lifecycle and the per-round pipeline.
//!
//! A round runs: score the user argument, build the game state, evolve the
//! GA population, take a hint from the best strategy, predict the user's
//! tactic and choose a counter, generate the AI reply, score it, write
//! feedback and suggestions, then advance. Work happens on a copy of the
//! debate; the copy replaces the live state only after its events are
//! stored, so a failed round leaves nothing behind.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::clock::{Clock, IdSource, SystemClock};
use crate::debate::{
    DebateState, Phase, Position, Side, TranscriptEntry, DEFAULT_ROUNDS, MAX_ARGUMENT_CHARS, MAX_ROUNDS,
    MIN_ROUNDS,
};
use crate::error::{Error, Result};
use crate::ga::{
    evaluate_fitness, evolve_generation, rank_by_fitness, strategy_hint, FitnessRecord, GaConfig, Population,
    Strategy, StrategyHint,
};
use crate::gateway::Gateway;
use crate::outcome::DebateResult;
use crate::rng::derive_seed;
use crate::rubric::{
    build_feedback, feedback_draft, score_argument_detailed, EvaluationScores, FallacyFlag, Lexicon, RubricWeights,
};
use crate::search::{build_game_state, predict_and_counter, Move, SearchConfig};
use crate::store::{
    load_population, replay, ArgumentPayload, CreatedPayload, EventKind, FinishedPayload, RoundAdvancedPayload,
    ScoresPayload, Storage, StoredEvent,
};

/// Longest accepted topic text.
pub const MAX_TOPIC_CHARS: usize = 300;

/// A debate's working copy of its category population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaSession {
    pub population: Population,
    /// One record per member, aligned with `population`.
    pub records: Vec<FitnessRecord>,
    /// Member whose hint is in play for the current round.
    pub active_index: Option<usize>,
}

impl GaSession {
    pub fn new(population: Population) -> Self {
        let records = (0..population.len()).map(FitnessRecord::new).collect();
        GaSession {
            population,
            records,
            active_index: None,
        }
    }

    pub fn fitnesses(&self) -> Result<Vec<f64>> {
        self.records.iter().map(evaluate_fitness).collect()
    }

    /// Marks the fittest member active and returns it.
    pub fn activate_best(&mut self) -> Result<Strategy> {
        let best = rank_by_fitness(&self.fitnesses()?)[0];
        self.active_index = Some(best);
        Ok(self.population.members()[best])
    }

    /// Credits `margin` to the active member, then evolves one generation.
    /// Elites keep their records at their new indices.
    pub fn record_and_evolve(&mut self, margin: f64, config: &GaConfig) -> Result<()> {
        if let Some(i) = self.active_index {
            self.records[i].round_margins.push(margin);
        }
        let fitnesses = self.fitnesses()?;
        let ranked = rank_by_fitness(&fitnesses);
        let mut rng = self.population.step_rng();
        let next = evolve_generation(&self.population, &fitnesses, config, &mut rng)?;
        let elite = config.elite_count.min(self.population.len());
        let mut records: Vec<FitnessRecord> = (0..next.len()).map(FitnessRecord::new).collect();
        for (slot, &old) in ranked[..elite].iter().enumerate() {
            records[slot].round_margins = self.records[old].round_margins.clone();
        }
        self.population = next;
        self.records = records;
        self.active_index = None;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub default_rounds: u32,
    pub turn_limit_ms: i64,
    pub seed: u64,
    pub ga: GaConfig,
    pub search: SearchConfig,
    pub weights: RubricWeights,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            default_rounds: DEFAULT_ROUNDS,
            turn_limit_ms: 120_000,
            seed: 0,
            ga: GaConfig::default(),
            search: SearchConfig::default(),
            weights: RubricWeights::default(),
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        check_rounds(self.default_rounds)?;
        if self.turn_limit_ms <= 0 {
            return Err(Error::invalid("turn_limit_ms must be positive"));
        }
        self.ga.validate()?;
        self.search.validate()?;
        self.weights.validate()
    }
}

fn check_rounds(rounds: u32) -> Result<()> {
    if (MIN_ROUNDS..=MAX_ROUNDS).contains(&rounds) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "rounds must be in {MIN_ROUNDS}..={MAX_ROUNDS}, got {rounds}"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewDebate {
    pub topic: Option<String>,
    pub user_position: Position,
    pub rounds: Option<u32>,
    #[serde(default)]
    pub subject: String,
}

impl NewDebate {
    pub fn new(user_position: Position) -> Self {
        NewDebate {
            topic: None,
            user_position,
            rounds: None,
            subject: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundResult {
    pub ai_response: String,
    pub user_scores: EvaluationScores,
    pub ai_scores: EvaluationScores,
    pub feedback: String,
    pub suggestions: Vec<String>,
    pub strategy_hint: StrategyHint,
    pub predicted_move: Move,
    pub round: u32,
    pub debate_over: bool,
    pub degraded: bool,
    pub fallacies: Vec<FallacyFlag>,
    pub counter_move: Move,
}

enum UserTurn<'a> {
    Argument(&'a str),
    Forfeit,
}

struct Slot {
    state: DebateState,
    ga: GaSession,
    last_sequence: u64,
    busy: bool,
}

struct Played {
    state: DebateState,
    ga: GaSession,
    result: RoundResult,
    events: Vec<(EventKind, serde_json::Value)>,
}

pub struct Engine {
    config: EngineConfig,
    gateway: Arc<Gateway>,
    lexicon: Arc<Lexicon>,
    store: Arc<dyn Storage>,
    clock: Arc<dyn Clock>,
    ids: IdSource,
    created: AtomicU64,
    debates: Mutex<HashMap<String, Arc<Mutex<Slot>>>>,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine").field("config", &self.config).finish()
    }
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

/// Clears the busy mark if a round ends without committing.
struct BusyGuard<'a> {
    slot: &'a Mutex<Slot>,
    armed: bool,
}

impl Drop for BusyGuard<'_> {
    fn drop(&mut self) {
        if self.armed {
            let mut s = lock(self.slot);
            s.busy = false;
            s.state.phase = Phase::AwaitingUser;
        }
    }
}

impl Engine {
    pub fn new(config: EngineConfig, gateway: Arc<Gateway>, store: Arc<dyn Storage>) -> Result<Self> {
        config.validate()?;
        Ok(Engine {
            config,
            gateway,
            lexicon: Arc::new(Lexicon::default()),
            store,
            clock: Arc::new(SystemClock),
            ids: IdSource::Uuid,
            created: AtomicU64::new(0),
            debates: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_ids(mut self, ids: IdSource) -> Self {
        self.ids = ids;
        self
    }

    pub fn with_lexicon(mut self, lexicon: Lexicon) -> Self {
        self.lexicon = Arc::new(lexicon);
        self
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn gateway(&self) -> &Gateway {
        &self.gateway
    }

    pub fn store(&self) -> &dyn Storage {
        self.store.as_ref()
    }

    pub fn now_ms(&self) -> i64 {
        self.clock.now_ms()
    }

    fn slot(&self, id: &str) -> Result<Arc<Mutex<Slot>>> {
        let mut map = lock(&self.debates);
        if let Some(s) = map.get(id) {
            return Ok(s.clone());
        }
        let r = replay(self.store.as_ref(), id)?;
        let slot = Arc::new(Mutex::new(Slot {
            state: r.state,
            ga: r.ga,
            last_sequence: r.last_sequence,
            busy: false,
        }));
        map.insert(id.to_string(), slot.clone());
        Ok(slot)
    }

    /// Loads every stored debate into memory.
    pub fn recover(&self) -> Result<usize> {
        let ids = self.store.list_debates()?;
        for id in &ids {
            self.slot(id)?;
        }
        Ok(ids.len())
    }

    fn event(&self, state: &DebateState, sequence: u64, kind: EventKind, payload: serde_json::Value) -> StoredEvent {
        StoredEvent {
            debate_id: state.debate_id.clone(),
            sequence,
            kind,
            payload,
            timestamp: self.clock.now_ms(),
            subject: state.subject.clone(),
        }
    }

    pub fn create_debate(&self, request: NewDebate) -> Result<DebateState> {
        let rounds = request.rounds.unwrap_or(self.config.default_rounds);
        check_rounds(rounds)?;
        let topic = match request.topic.as_deref().map(str::trim) {
            Some("") => return Err(Error::invalid("topic is empty")),
            Some(t) if t.chars().count() > MAX_TOPIC_CHARS => {
                return Err(Error::invalid(format!("topic exceeds {MAX_TOPIC_CHARS} characters")))
            }
            Some(t) => t.to_string(),
            None => {
                let n = self.created.load(Ordering::SeqCst);
                self.gateway
                    .generate_topics(1, derive_seed(self.config.seed, n))?
                    .remove(0)
            }
        };
        let key = self.gateway.topic_bank().category_of(&topic).to_string();
        let population = load_population(
            self.store.as_ref(),
            &key,
            self.config.ga.population_size,
            self.config.seed,
        )?;
        let now = self.clock.now_ms();
        let state = DebateState {
            debate_id: self.ids.next_id(),
            topic,
            user_position: request.user_position,
            ai_position: request.user_position.opposite(),
            rounds_total: rounds,
            current_round: 1,
            transcript: Vec::new(),
            cumulative_user: 0.0,
            cumulative_ai: 0.0,
            phase: Phase::AwaitingUser,
            turn_deadline: now + self.config.turn_limit_ms,
            ga_population_key: key,
            last_hint: None,
            last_prediction: None,
            active_strategy: None,
            subject: request.subject,
        };
        let ga = GaSession::new(population);
        let payload = to_value(&CreatedPayload {
            state: state.clone(),
            ga: ga.clone(),
        });
        let mut map = lock(&self.debates);
        self.store
            .append_events(&[self.event(&state, 1, EventKind::Created, payload)])?;
        self.created.fetch_add(1, Ordering::SeqCst);
        map.insert(
            state.debate_id.clone(),
            Arc::new(Mutex::new(Slot {
                state: state.clone(),
                ga,
                last_sequence: 1,
                busy: false,
            })),
        );
        Ok(state)
    }

    pub fn get_state(&self, debate_id: &str) -> Result<DebateState> {
        let slot = self.slot(debate_id)?;
        let state = lock(&slot).state.clone();
        Ok(state)
    }

    /// The debate's GA session as of its last committed round.
    pub fn ga_session(&self, debate_id: &str) -> Result<GaSession> {
        let slot = self.slot(debate_id)?;
        let ga = lock(&slot).ga.clone();
        Ok(ga)
    }

    pub fn finalize(&self, debate_id: &str) -> Result<DebateResult> {
        let state = self.get_state(debate_id)?;
        if !state.is_finished() {
            return Err(Error::state(format!("debate {debate_id} is not finished")));
        }
        Ok(DebateResult::from_rounds(state.round_scores()))
    }

    pub fn submit_argument(&self, debate_id: &str, text: &str) -> Result<RoundResult> {
        let slot = self.slot(debate_id)?;
        let now = self.clock.now_ms();
        let (state, ga) = {
            let mut s = lock(&slot);
            if s.busy {
                return Err(Error::RoundInProgress(debate_id.to_string()));
            }
            if s.state.is_finished() {
                return Err(Error::DebateFinished(debate_id.to_string()));
            }
            let chars = text.chars().count();
            if text.trim().is_empty() {
                return Err(Error::invalid("argument is empty"));
            }
            if chars > MAX_ARGUMENT_CHARS {
                return Err(Error::invalid(format!(
                    "argument has {chars} characters, the limit is {MAX_ARGUMENT_CHARS}"
                )));
            }
            if now > s.state.turn_deadline {
                return Err(Error::TurnExpired(debate_id.to_string()));
            }
            s.busy = true;
            let snapshot = (s.state.clone(), s.ga.clone());
            s.state.phase = Phase::Processing;
            snapshot
        };
        self.run_round(&slot, state, ga, UserTurn::Argument(text), now)
    }

    /// Forfeits the user's turn when `now` is past the deadline.
    pub fn check_turn_timeout(&self, debate_id: &str, now: i64) -> Result<Option<RoundResult>> {
        let slot = self.slot(debate_id)?;
        let (state, ga) = {
            let mut s = lock(&slot);
            if s.busy || s.state.is_finished() || now <= s.state.turn_deadline {
                return Ok(None);
            }
            s.busy = true;
            let snapshot = (s.state.clone(), s.ga.clone());
            s.state.phase = Phase::Processing;
            snapshot
        };
        self.run_round(&slot, state, ga, UserTurn::Forfeit, now).map(Some)
    }

    /// Runs [`Engine::check_turn_timeout`] on every loaded debate.
    pub fn sweep_timeouts(&self) -> Vec<(String, Result<RoundResult>)> {
        let now = self.clock.now_ms();
        let mut ids: Vec<String> = lock(&self.debates).keys().cloned().collect();
        ids.sort();
        ids.into_iter()
            .filter_map(|id| match self.check_turn_timeout(&id, now) {
                Ok(None) => None,
                Ok(Some(r)) => Some((id, Ok(r))),
                Err(e) => Some((id, Err(e))),
            })
            .collect()
    }

    fn run_round(
        &self,
        slot: &Mutex<Slot>,
        state: DebateState,
        ga: GaSession,
        turn: UserTurn<'_>,
        now: i64,
    ) -> Result<RoundResult> {
        let mut guard = BusyGuard { slot, armed: true };
        let played = self.play_round(state, ga, turn, now)?;
        let mut s = lock(slot);
        let first = s.last_sequence + 1;
        let events: Vec<StoredEvent> = played
            .events
            .into_iter()
            .enumerate()
            .map(|(i, (kind, payload))| self.event(&played.state, first + i as u64, kind, payload))
            .collect();
        let last = match self.store.append_events(&events) {
            Ok(last) => last,
            Err(e) => {
                drop(s);
                return Err(e);
            }
        };
        if let Err(e) = self
            .store
            .save_population(&played.state.ga_population_key, &played.ga.population)
        {
            warn!(key = %played.state.ga_population_key, error = %e, "population not saved");
        }
        s.state = played.state;
        s.ga = played.ga;
        s.last_sequence = last;
        s.busy = false;
        guard.armed = false;
        Ok(played.result)
    }

    fn play_round(&self, mut st: DebateState, mut ga: GaSession, turn: UserTurn<'_>, now: i64) -> Result<Played> {
        let gw = self.gateway.as_ref();
        let weights = &self.config.weights;
        let round = st.current_round;
        let mut degraded = false;

        let (user_entry, flags) = match turn {
            UserTurn::Argument(text) => {
                let scored = score_argument_detailed(gw, text, &st, weights)?;
                degraded |= scored.degraded;
                let flags = self.lexicon.flag(text)?;
                let entry = TranscriptEntry {
                    side: Side::User,
                    argument: text.to_string(),
                    scores: scored.scores,
                    forfeit: false,
                };
                (entry, flags)
            }
            UserTurn::Forfeit => {
                let entry = TranscriptEntry {
                    side: Side::User,
                    argument: String::new(),
                    scores: EvaluationScores::zero(),
                    forfeit: true,
                };
                (entry, Vec::new())
            }
        };

        let game = build_game_state(&st)?;
        if let Some(&(user, ai)) = st.round_scores().last() {
            ga.record_and_evolve(ai - user, &self.config.ga)?;
        }
        let best = ga.activate_best()?;
        let hint = strategy_hint(&best);
        let prediction = predict_and_counter(&game, &self.config.search)?;

        st.transcript.push(user_entry.clone());
        let reply = gw.generate_opponent_argument(&st, hint, &prediction.counter)?;
        degraded |= reply.degraded;
        let ai_scored = score_argument_detailed(gw, &reply.text, &st, weights)?;
        degraded |= ai_scored.degraded;

        let feedback = if user_entry.forfeit {
            format!(
                "Turn forfeited: no argument arrived before the deadline.\n{}",
                feedback_draft(&user_entry.scores, &[], "")
            )
        } else {
            build_feedback(gw, &user_entry.scores, &flags, &user_entry.argument)
        };
        let suggestions = gw.generate_suggestions(&st)?;
        degraded |= suggestions.degraded;

        let ai_entry = TranscriptEntry {
            side: Side::Ai,
            argument: reply.text.clone(),
            scores: ai_scored.scores,
            forfeit: false,
        };
        st.transcript.push(ai_entry.clone());
        st.recompute_totals();
        let over = round >= st.rounds_total;
        if over {
            ga.record_and_evolve(ai_entry.scores.overall - user_entry.scores.overall, &self.config.ga)?;
            st.phase = Phase::Finished;
        } else {
            st.current_round += 1;
            st.phase = Phase::AwaitingUser;
            st.turn_deadline = now + self.config.turn_limit_ms;
        }
        st.last_hint = Some(hint);
        st.last_prediction = Some(prediction.predicted_user);
        st.active_strategy = Some(best);
        st.check_history()?;

        let user_kind = if user_entry.forfeit {
            EventKind::Forfeit
        } else {
            EventKind::UserArgument
        };
        let mut events = vec![
            (
                user_kind,
                to_value(&ArgumentPayload {
                    round,
                    entry: user_entry.clone(),
                }),
            ),
            (
                EventKind::AiArgument,
                to_value(&ArgumentPayload {
                    round,
                    entry: ai_entry.clone(),
                }),
            ),
            (
                EventKind::Scores,
                to_value(&ScoresPayload {
                    round,
                    user: user_entry.scores,
                    ai: ai_entry.scores,
                    cumulative_user: st.cumulative_user,
                    cumulative_ai: st.cumulative_ai,
                }),
            ),
            (
                EventKind::RoundAdvanced,
                to_value(&RoundAdvancedPayload {
                    completed_round: round,
                    current_round: st.current_round,
                    phase: st.phase,
                    turn_deadline: st.turn_deadline,
                    last_hint: st.last_hint,
                    last_prediction: st.last_prediction,
                    active_strategy: st.active_strategy,
                    ga: ga.clone(),
                }),
            ),
        ];
        if over {
            events.push((
                EventKind::Finished,
                to_value(&FinishedPayload {
                    result: DebateResult::from_rounds(st.round_scores()),
                }),
            ));
        }

        let result = RoundResult {
            ai_response: reply.text,
            user_scores: user_entry.scores,
            ai_scores: ai_entry.scores,
            feedback,
            suggestions: suggestions.items,
            strategy_hint: hint,
            predicted_move: prediction.predicted_user,
            round,
            debate_over: over,
            degraded,
            fallacies: flags,
            counter_move: prediction.counter,
        };
        Ok(Played {
            state: st,
            ga,
            result,
            events,
        })
    }
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("event payloads serialize")
}
