//! Append-only debate event logs and population snapshots.
//!
//! Each debate is a JSON-lines file of [`StoredEvent`]s; folding the events
//! in order rebuilds the debate. Populations are whole JSON documents
//! replaced atomically.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::debate::{DebateState, Phase, Side, TranscriptEntry};
use crate::engine::GaSession;
use crate::error::{Error, Result};
use crate::ga::{init_population, Population, Strategy, StrategyHint};
use crate::hash::stub_hash;
use crate::outcome::DebateResult;
use crate::rng::derive_seed;
use crate::rubric::EvaluationScores;
use crate::search::Move;

/// Environment variable naming the data directory.
pub const DATA_DIR_ENV: &str = "DEBATE_ARENA_DATA";

pub const POPULATION_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Created,
    UserArgument,
    AiArgument,
    Scores,
    RoundAdvanced,
    Finished,
    Forfeit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredEvent {
    pub debate_id: String,
    pub sequence: u64,
    pub kind: EventKind,
    pub payload: Value,
    /// Unix milliseconds.
    pub timestamp: i64,
    #[serde(default)]
    pub subject: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreatedPayload {
    pub state: DebateState,
    pub ga: GaSession,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgumentPayload {
    pub round: u32,
    pub entry: TranscriptEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoresPayload {
    pub round: u32,
    pub user: EvaluationScores,
    pub ai: EvaluationScores,
    pub cumulative_user: f64,
    pub cumulative_ai: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundAdvancedPayload {
    pub completed_round: u32,
    pub current_round: u32,
    pub phase: Phase,
    pub turn_deadline: i64,
    pub last_hint: Option<StrategyHint>,
    pub last_prediction: Option<Move>,
    pub active_strategy: Option<Strategy>,
    pub ga: GaSession,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinishedPayload {
    pub result: DebateResult,
}

/// Narrow storage interface used by the engine.
pub trait Storage: Send + Sync {
    /// Appends consecutive events of one debate in a single write.
    /// Returns the last sequence written.
    fn append_events(&self, events: &[StoredEvent]) -> Result<u64>;

    /// Events of one debate in order; not-found when there are none.
    fn read_events(&self, debate_id: &str) -> Result<Vec<StoredEvent>>;

    fn list_debates(&self) -> Result<Vec<String>>;

    fn save_population(&self, key: &str, population: &Population) -> Result<()>;

    /// The stored population, or `None` when the key was never saved.
    fn load_population_raw(&self, key: &str) -> Result<Option<Population>>;
}

pub fn append_event(store: &dyn Storage, event: StoredEvent) -> Result<u64> {
    store.append_events(std::slice::from_ref(&event))
}

/// The stored population for `key`, or a fresh one seeded from `base_seed`
/// and the key.
pub fn load_population(store: &dyn Storage, key: &str, size: usize, base_seed: u64) -> Result<Population> {
    match store.load_population_raw(key)? {
        Some(p) => Ok(p),
        None => init_population(size, derive_seed(base_seed, stub_hash(key))),
    }
}

/// A debate rebuilt from its log, with its GA session and next sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Replayed {
    pub state: DebateState,
    pub ga: GaSession,
    pub last_sequence: u64,
}

pub fn load_debate(store: &dyn Storage, debate_id: &str) -> Result<DebateState> {
    replay(store, debate_id).map(|r| r.state)
}

pub fn replay(store: &dyn Storage, debate_id: &str) -> Result<Replayed> {
    fold_events(&store.read_events(debate_id)?)
}

fn corrupt(debate_id: &str, line: usize, reason: impl Into<String>) -> Error {
    Error::CorruptData {
        path: PathBuf::from(format!("debates/{debate_id}.jsonl")),
        line,
        reason: reason.into(),
    }
}

fn payload<T: serde::de::DeserializeOwned>(e: &StoredEvent, line: usize) -> Result<T> {
    serde_json::from_value(e.payload.clone())
        .map_err(|err| corrupt(&e.debate_id, line, format!("{:?} payload: {err}", e.kind)))
}

/// Folds an event log into the debate it describes.
pub fn fold_events(events: &[StoredEvent]) -> Result<Replayed> {
    let first = events
        .first()
        .ok_or_else(|| Error::NotFound("empty event log".into()))?;
    let id = first.debate_id.clone();
    if first.kind != EventKind::Created {
        return Err(corrupt(&id, 1, "log does not start with a created event"));
    }
    let mut replayed: Option<Replayed> = None;
    for (i, e) in events.iter().enumerate() {
        let line = i + 1;
        if e.sequence != line as u64 {
            return Err(corrupt(&id, line, format!("sequence {} out of order", e.sequence)));
        }
        if e.debate_id != id {
            return Err(corrupt(&id, line, "event belongs to another debate"));
        }
        if e.kind == EventKind::Created {
            if replayed.is_some() {
                return Err(corrupt(&id, line, "second created event"));
            }
            let p: CreatedPayload = payload(e, line)?;
            replayed = Some(Replayed {
                state: p.state,
                ga: p.ga,
                last_sequence: 0,
            });
        }
        let r = replayed.as_mut().expect("created event seen first");
        r.last_sequence = e.sequence;
        let state = &mut r.state;
        match e.kind {
            EventKind::Created => {}
            EventKind::UserArgument | EventKind::Forfeit => {
                let p: ArgumentPayload = payload(e, line)?;
                if p.entry.side != Side::User || p.entry.forfeit != (e.kind == EventKind::Forfeit) {
                    return Err(corrupt(&id, line, "user entry does not match event kind"));
                }
                state.transcript.push(p.entry);
            }
            EventKind::AiArgument => {
                let p: ArgumentPayload = payload(e, line)?;
                if p.entry.side != Side::Ai {
                    return Err(corrupt(&id, line, "ai entry recorded for the user"));
                }
                state.transcript.push(p.entry);
            }
            EventKind::Scores => {
                let p: ScoresPayload = payload(e, line)?;
                state.recompute_totals();
                if state.cumulative_user != p.cumulative_user || state.cumulative_ai != p.cumulative_ai {
                    return Err(corrupt(&id, line, "cumulative scores disagree with the transcript"));
                }
            }
            EventKind::RoundAdvanced => {
                let p: RoundAdvancedPayload = payload(e, line)?;
                state.current_round = p.current_round;
                state.phase = p.phase;
                state.turn_deadline = p.turn_deadline;
                state.last_hint = p.last_hint;
                state.last_prediction = p.last_prediction;
                state.active_strategy = p.active_strategy;
                r.ga = p.ga;
            }
            EventKind::Finished => {
                let _: FinishedPayload = payload(e, line)?;
                state.phase = Phase::Finished;
            }
        }
        state
            .check_history()
            .map_err(|err| corrupt(&id, line, err.to_string()))?;
    }
    let mut r = replayed.expect("log is non-empty");
    r.state.recompute_totals();
    Ok(r)
}

fn check_name(kind: &str, name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name.len() <= 128
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(Error::NotFound(format!("{kind} {name:?}")))
    }
}

fn check_batch(events: &[StoredEvent]) -> Result<(&str, u64)> {
    let first = events
        .first()
        .ok_or_else(|| Error::invalid("no events to append"))?;
    for (i, e) in events.iter().enumerate() {
        if e.debate_id != first.debate_id || e.sequence != first.sequence + i as u64 {
            return Err(Error::invalid("events in one append must be consecutive and share a debate"));
        }
    }
    check_name("debate", &first.debate_id)?;
    Ok((&first.debate_id, first.sequence))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PopulationFile {
    version: u32,
    key: String,
    population: Population,
}

/// Stores everything under one data directory.
#[derive(Debug)]
pub struct FileStore {
    root: PathBuf,
    last_sequence: Mutex<HashMap<String, u64>>,
}

impl FileStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(root.join("debates"))?;
        fs::create_dir_all(root.join("populations"))?;
        Ok(FileStore {
            root,
            last_sequence: Mutex::new(HashMap::new()),
        })
    }

    /// Opens the directory named by `DEBATE_ARENA_DATA`, else `fallback`.
    pub fn open_from_env(fallback: impl Into<PathBuf>) -> Result<Self> {
        match std::env::var_os(DATA_DIR_ENV) {
            Some(dir) if !dir.is_empty() => FileStore::open(PathBuf::from(dir)),
            _ => FileStore::open(fallback),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn debate_path(&self, id: &str) -> PathBuf {
        self.root.join("debates").join(format!("{id}.jsonl"))
    }

    fn population_path(&self, key: &str) -> PathBuf {
        self.root.join("populations").join(format!("{key}.json"))
    }

    fn read_log(&self, id: &str) -> Result<Vec<StoredEvent>> {
        check_name("debate", id)?;
        let path = self.debate_path(id);
        let file = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::NotFound(format!("debate {id}")))
            }
            Err(e) => return Err(e.into()),
        };
        let mut reader = BufReader::new(file);
        let mut events = Vec::new();
        let mut line = String::new();
        let mut n = 0;
        loop {
            line.clear();
            if reader.read_line(&mut line)? == 0 {
                break;
            }
            n += 1;
            let bad = |reason: String| Error::CorruptData {
                path: path.clone(),
                line: n,
                reason,
            };
            if !line.ends_with('\n') {
                return Err(bad("truncated line".into()));
            }
            let event: StoredEvent =
                serde_json::from_str(line.trim_end_matches('\n')).map_err(|e| bad(e.to_string()))?;
            if event.sequence != n as u64 {
                return Err(bad(format!("expected sequence {n}, found {}", event.sequence)));
            }
            events.push(event);
        }
        if events.is_empty() {
            return Err(Error::NotFound(format!("debate {id}")));
        }
        Ok(events)
    }
}

impl Storage for FileStore {
    fn append_events(&self, events: &[StoredEvent]) -> Result<u64> {
        let (id, first_seq) = check_batch(events)?;
        let mut seqs = self.last_sequence.lock().expect("sequence table poisoned");
        let last = match seqs.get(id) {
            Some(s) => *s,
            None => match self.read_log(id) {
                Ok(ev) => ev.len() as u64,
                Err(Error::NotFound(_)) => 0,
                Err(e) => return Err(e),
            },
        };
        if first_seq != last + 1 {
            return Err(Error::Conflict {
                debate_id: id.to_string(),
                expected: last + 1,
                got: first_seq,
            });
        }
        let mut buf = Vec::new();
        for e in events {
            serde_json::to_writer(&mut buf, e).map_err(std::io::Error::from)?;
            buf.push(b'\n');
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.debate_path(id))?;
        file.write_all(&buf)?;
        file.flush()?;
        file.sync_data()?;
        let new_last = last + events.len() as u64;
        seqs.insert(id.to_string(), new_last);
        Ok(new_last)
    }

    fn read_events(&self, debate_id: &str) -> Result<Vec<StoredEvent>> {
        self.read_log(debate_id)
    }

    fn list_debates(&self) -> Result<Vec<String>> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(self.root.join("debates"))? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "jsonl") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    ids.push(stem.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    fn save_population(&self, key: &str, population: &Population) -> Result<()> {
        check_name("population", key)?;
        let doc = PopulationFile {
            version: POPULATION_FORMAT_VERSION,
            key: key.to_string(),
            population: population.clone(),
        };
        let dir = self.root.join("populations");
        let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
        serde_json::to_writer_pretty(&mut tmp, &doc).map_err(std::io::Error::from)?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_data()?;
        tmp.persist(self.population_path(key)).map_err(|e| e.error)?;
        Ok(())
    }

    fn load_population_raw(&self, key: &str) -> Result<Option<Population>> {
        check_name("population", key)?;
        let path = self.population_path(key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let bad = |line: usize, reason: String| Error::CorruptData {
            path: path.clone(),
            line,
            reason,
        };
        let doc: Value = serde_json::from_str(&text).map_err(|e| bad(e.line(), e.to_string()))?;
        let version = doc.get("version").and_then(Value::as_u64);
        if version != Some(u64::from(POPULATION_FORMAT_VERSION)) {
            return Err(bad(1, format!("unsupported population format version {version:?}")));
        }
        let doc: PopulationFile = serde_json::from_value(doc).map_err(|e| bad(1, e.to_string()))?;
        Ok(Some(doc.population))
    }
}

/// Volatile store for tests and self-play.
#[derive(Debug, Default)]
pub struct MemoryStore {
    debates: Mutex<HashMap<String, Vec<StoredEvent>>>,
    populations: Mutex<HashMap<String, Population>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        MemoryStore::default()
    }
}

impl Storage for MemoryStore {
    fn append_events(&self, events: &[StoredEvent]) -> Result<u64> {
        let (id, first_seq) = check_batch(events)?;
        let mut debates = self.debates.lock().expect("store poisoned");
        let log = debates.entry(id.to_string()).or_default();
        let last = log.len() as u64;
        if first_seq != last + 1 {
            return Err(Error::Conflict {
                debate_id: id.to_string(),
                expected: last + 1,
                got: first_seq,
            });
        }
        log.extend_from_slice(events);
        Ok(log.len() as u64)
    }

    fn read_events(&self, debate_id: &str) -> Result<Vec<StoredEvent>> {
        self.debates
            .lock()
            .expect("store poisoned")
            .get(debate_id)
            .filter(|l| !l.is_empty())
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("debate {debate_id}")))
    }

    fn list_debates(&self) -> Result<Vec<String>> {
        let mut ids: Vec<String> = self.debates.lock().expect("store poisoned").keys().cloned().collect();
        ids.sort();
        Ok(ids)
    }

    fn save_population(&self, key: &str, population: &Population) -> Result<()> {
        check_name("population", key)?;
        self.populations
            .lock()
            .expect("store poisoned")
            .insert(key.to_string(), population.clone());
        Ok(())
    }

    fn load_population_raw(&self, key: &str) -> Result<Option<Population>> {
        Ok(self.populations.lock().expect("store poisoned").get(key).cloned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn ev(id: &str, seq: u64) -> StoredEvent {
        StoredEvent {
            debate_id: id.into(),
            sequence: seq,
            kind: EventKind::Scores,
            payload: json!({}),
            timestamp: 0,
            subject: String::new(),
        }
    }

    fn stores() -> (tempfile::TempDir, Vec<Box<dyn Storage>>) {
        let dir = tempfile::tempdir().unwrap();
        let file = FileStore::open(dir.path()).unwrap();
        (dir, vec![Box::new(file), Box::new(MemoryStore::new())])
    }

    #[test]
    fn sequence_conflicts() {
        let (_dir, stores) = stores();
        for s in &stores {
            assert!(matches!(s.read_events("d1"), Err(Error::NotFound(_))));
            assert_eq!(append_event(s.as_ref(), ev("d1", 1)).unwrap(), 1);
            assert!(matches!(
                append_event(s.as_ref(), ev("d1", 3)),
                Err(Error::Conflict { expected: 2, got: 3, .. })
            ));
            assert!(matches!(append_event(s.as_ref(), ev("d1", 1)), Err(Error::Conflict { .. })));
            assert_eq!(s.append_events(&[ev("d1", 2), ev("d1", 3)]).unwrap(), 3);
            assert_eq!(s.read_events("d1").unwrap().len(), 3);
            assert_eq!(s.list_debates().unwrap(), ["d1"]);
        }
    }

    #[test]
    fn population_round_trip_and_default() {
        let (_dir, stores) = stores();
        for s in &stores {
            let fresh = load_population(s.as_ref(), "health", 20, 7).unwrap();
            assert_eq!(fresh.len(), 20);
            assert_eq!(fresh, load_population(s.as_ref(), "health", 20, 7).unwrap());
            let p = init_population(5, 99).unwrap();
            s.save_population("health", &p).unwrap();
            assert_eq!(s.load_population_raw("health").unwrap(), Some(p));
        }
    }

    #[test]
    fn population_version_mismatch_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let store = FileStore::open(dir.path()).unwrap();
        store.save_population("k", &init_population(3, 1).unwrap()).unwrap();
        let path = dir.path().join("populations/k.json");
        let text = fs::read_to_string(&path).unwrap().replace("\"version\": 1", "\"version\": 2");
        fs::write(&path, text).unwrap();
        assert!(matches!(store.load_population_raw("k"), Err(Error::CorruptData { .. })));
    }

    #[test]
    fn truncated_line_reports_its_number() {
        let dir = tempfile::tempdir().unwrap();
        let store = FileStore::open(dir.path()).unwrap();
        for i in 1..=6 {
            append_event(&store, ev("d", i)).unwrap();
        }
        let path = dir.path().join("debates/d.jsonl");
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"{\"debate_id\":\"d\",\"seq").unwrap();
        let fresh = FileStore::open(dir.path()).unwrap();
        assert!(matches!(fresh.read_events("d"), Err(Error::CorruptData { line: 7, .. })));
    }

    #[test]
    fn path_like_ids_are_rejected() {
        let (_dir, stores) = stores();
        assert!(matches!(stores[0].read_events("../x"), Err(Error::NotFound(_))));
    }
}
