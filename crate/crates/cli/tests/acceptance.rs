//! Acceptance checks, one line per criterion.

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

use debate_arena_core::clock::{IdSource, ManualClock};
use debate_arena_core::debate::Position;
use debate_arena_core::engine::{Engine, EngineConfig, NewDebate};
use debate_arena_core::ga::{
    crossover_with, evolve_generation, init_population, mutate, CrossoverMethod, CrossoverPlan, GaConfig,
    SelectionMethod, Strategy,
};
use debate_arena_core::gateway::{
    CompletionRequest, Gateway, Provider, ProviderFailure, ProviderKind, ProviderRole, StubProvider, TopicBank,
};
use debate_arena_core::outcome::{DebateResult, Winner};
use debate_arena_core::par::{map_indexed, Execution};
use debate_arena_core::rng::seeded_rng;
use debate_arena_core::search::{minimax_search, minimax_search_with, GameState, GameTree, SearchConfig};
use debate_arena_core::selfplay::{run_evolution_batch, summarize, EvolutionConfig, FitnessProfile, MetricsRow};
use debate_arena_core::store::{replay, FileStore, MemoryStore, Storage};
use debate_arena_server::{router, AppState};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- 1

fn on_simplex(s: &Strategy) -> bool {
    let g = s.genes();
    g.iter().all(|x| *x >= 0.0 && x.is_finite()) && (g.iter().sum::<f64>() - 1.0).abs() <= 1e-9
}

/// Indices by fitness, best first, ties to the lower index.
fn oracle_rank(f: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..f.len()).collect();
    idx.sort_by(|&a, &b| f[b].partial_cmp(&f[a]).unwrap().then(a.cmp(&b)));
    idx
}

fn random_ga_config(rng: &mut ChaCha8Rng) -> GaConfig {
    let population_size = rng.gen_range(2..=30);
    GaConfig {
        population_size,
        tournament_size: rng.gen_range(1..=population_size.min(5)),
        selection_method: if rng.gen() {
            SelectionMethod::Tournament
        } else {
            SelectionMethod::Roulette
        },
        crossover_method: [CrossoverMethod::SinglePoint, CrossoverMethod::TwoPoint, CrossoverMethod::Uniform]
            [rng.gen_range(0..3)],
        mutation_rate: rng.gen_range(0.0..=1.0),
        mutation_magnitude: rng.gen_range(0.0..=0.5),
        elite_count: rng.gen_range(0..population_size.min(5)),
    }
}

fn ga_chain(chain: usize, steps: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE ^ chain as u64);
    let cfg = random_ga_config(&mut rng);
    let mut pop = init_population(cfg.population_size, rng.gen()).map_err(|e| e.to_string())?;
    for step in 0..steps {
        let fitness: Vec<f64> = (0..pop.len())
            .map(|_| {
                let f: f64 = rng.gen();
                if rng.gen_bool(0.3) {
                    (f * 4.0).round() / 4.0
                } else {
                    f
                }
            })
            .collect();
        let seed: u64 = rng.gen();
        let next = evolve_generation(&pop, &fitness, &cfg, &mut seeded_rng(seed)).map_err(|e| e.to_string())?;
        let again = evolve_generation(&pop, &fitness, &cfg, &mut seeded_rng(seed)).map_err(|e| e.to_string())?;
        let ctx = || format!("chain {chain} step {step} ({cfg:?})");
        ensure(next.len() == pop.len(), || format!("{}: size changed", ctx()))?;
        ensure(next.generation() == pop.generation() + 1, || format!("{}: generation", ctx()))?;
        ensure(next.members().iter().all(on_simplex), || format!("{}: off simplex", ctx()))?;
        let ranked = oracle_rank(&fitness);
        for k in 0..cfg.elite_count {
            let (child, parent) = (next.members()[k].genes(), pop.members()[ranked[k]].genes());
            ensure(child.map(f64::to_bits) == parent.map(f64::to_bits), || {
                format!("{}: elite {k} altered", ctx())
            })?;
        }
        ensure(next == again, || format!("{}: same seed, different generation", ctx()))?;
        pop = next;
    }
    Ok(())
}

fn criterion_ga_invariants() -> Check {
    let start = Instant::now();
    let (chains, steps) = (500, 20);
    for r in map_indexed(chains, Execution::default(), |c| ga_chain(c, steps)) {
        r?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("{} evolve steps in {:.2?}", chains * steps, elapsed))
}

// ---------------------------------------------------------------- 2

fn close(a: [f64; 3], b: [f64; 3]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9)
}

fn criterion_crossover_arithmetic() -> Check {
    let s = |e, p, l| Strategy::new(e, p, l).map_err(|e| e.to_string());
    let a = s(0.2, 0.5, 0.3)?;
    let b = s(0.6, 0.1, 0.3)?;
    let one = crossover_with(&a, &b, CrossoverPlan::SinglePoint { cut: 1 }).map_err(|e| e.to_string())?;
    ensure(close(one.genes(), [1.0 / 3.0, 1.0 / 6.0, 0.5]), || format!("single point gave {:?}", one.genes()))?;
    let same = crossover_with(&a, &b, CrossoverPlan::Uniform { from_a: [true; 3] }).map_err(|e| e.to_string())?;
    ensure(close(same.genes(), a.genes()), || format!("uniform all-A gave {:?}", same.genes()))?;
    let a2 = s(0.5, 0.25, 0.25)?;
    let b2 = s(0.25, 0.5, 0.25)?;
    let two = crossover_with(&a2, &b2, CrossoverPlan::TwoPoint { start: 1, end: 2 }).map_err(|e| e.to_string())?;
    ensure(close(two.genes(), [0.4, 0.4, 0.2]), || format!("two point gave {:?}", two.genes()))?;
    let kept = mutate(&a, 0.0, 0.15, &mut seeded_rng(9)).map_err(|e| e.to_string())?;
    ensure(kept == a, || "rate 0 mutation changed the strategy".into())?;
    let moved = mutate(&a, 1.0, 0.15, &mut seeded_rng(9)).map_err(|e| e.to_string())?;
    ensure(on_simplex(&moved), || "mutation left the simplex".into())?;
    Ok("single-point, two-point and uniform examples within 1e-9".into())
}

// ---------------------------------------------------------------- 3

#[derive(Debug)]
struct Node {
    value: f64,
    children: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Arc<Vec<Node>>,
    at: usize,
    max_to_move: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Edge(usize);

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "child-{}", self.0)
    }
}

impl GameTree for Tree {
    type Move = Edge;

    fn is_terminal(&self) -> bool {
        self.nodes[self.at].children.is_empty()
    }

    fn maximizing(&self) -> bool {
        self.max_to_move
    }

    fn moves(&self, limit: usize) -> Vec<Edge> {
        (0..self.nodes[self.at].children.len().min(limit)).map(Edge).collect()
    }

    fn play(&self, mv: &Edge) -> Self {
        Tree {
            nodes: self.nodes.clone(),
            at: self.nodes[self.at].children[mv.0],
            max_to_move: !self.max_to_move,
        }
    }

    fn evaluate(&self) -> f64 {
        self.nodes[self.at].value
    }
}

fn random_tree(rng: &mut ChaCha8Rng) -> (Tree, SearchConfig) {
    fn grow(rng: &mut ChaCha8Rng, nodes: &mut Vec<Node>, depth: u32) -> usize {
        let value = f64::from(rng.gen_range(-4..=4)) / 4.0;
        let id = nodes.len();
        nodes.push(Node {
            value,
            children: Vec::new(),
        });
        if depth > 0 && rng.gen_bool(0.9) {
            let n = rng.gen_range(1..=4);
            let kids: Vec<usize> = (0..n).map(|_| grow(rng, nodes, depth - 1)).collect();
            nodes[id].children = kids;
        }
        id
    }
    let mut nodes = Vec::new();
    let tree_depth = rng.gen_range(1..=3);
    grow(rng, &mut nodes, tree_depth);
    let cfg = SearchConfig {
        depth: rng.gen_range(1..=3),
        branching: rng.gen_range(1..=4),
        ..SearchConfig::default()
    };
    (
        Tree {
            nodes: Arc::new(nodes),
            at: 0,
            max_to_move: rng.gen(),
        },
        cfg,
    )
}

/// Plain minimax over every line, no pruning.
fn exhaustive<G: GameTree>(state: &G, depth: u32, branching: usize) -> f64 {
    let moves = state.moves(branching);
    if depth == 0 || state.is_terminal() || moves.is_empty() {
        return state.evaluate();
    }
    let values = moves.iter().map(|m| exhaustive(&state.play(m), depth - 1, branching));
    if state.maximizing() {
        values.fold(f64::NEG_INFINITY, f64::max)
    } else {
        values.fold(f64::INFINITY, f64::min)
    }
}

/// Root value and first move index attaining it.
fn oracle_root<G: GameTree>(state: &G, cfg: &SearchConfig) -> (f64, Option<usize>) {
    let moves = state.moves(cfg.branching);
    if cfg.depth == 0 || state.is_terminal() || moves.is_empty() {
        return (state.evaluate(), None);
    }
    let values: Vec<f64> = moves
        .iter()
        .map(|m| exhaustive(&state.play(m), cfg.depth - 1, cfg.branching))
        .collect();
    let best = if state.maximizing() {
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        values.iter().copied().fold(f64::INFINITY, f64::min)
    };
    (best, values.iter().position(|v| *v == best))
}

fn random_game_state(rng: &mut ChaCha8Rng) -> (GameState, SearchConfig) {
    let rounds_total = rng.gen_range(1..=7);
    let mut gs = GameState::new(rounds_total);
    gs.rounds_played = rng.gen_range(0..rounds_total);
    gs.score_margin = f64::from(rng.gen_range(-40..=40)) / 4.0;
    gs.coverage_margin = f64::from(rng.gen_range(-4..=4)) / 4.0;
    gs.momentum = f64::from(rng.gen_range(-4..=4)) / 4.0;
    if rng.gen() {
        gs = gs
            .moves(8)
            .get(rng.gen_range(0..8))
            .map(|m| gs.play(m))
            .unwrap_or(gs);
    }
    let cfg = SearchConfig {
        depth: rng.gen_range(1..=3),
        branching: rng.gen_range(1..=4),
        ..SearchConfig::default()
    };
    (gs, cfg)
}

fn check_instance<G>(state: &G, cfg: &SearchConfig, label: &str) -> Result<(), String>
where
    G: GameTree + Send + Sync,
    G::Move: PartialEq + Send + Sync,
{
    let (want_value, want_index) = oracle_root(state, cfg);
    let want_move = want_index.map(|i| state.moves(cfg.branching)[i].clone());
    for (name, got) in [
        ("alpha-beta", minimax_search(state, cfg)),
        ("root-parallel", minimax_search_with(state, cfg, Execution::default())),
    ] {
        ensure(got.0 == want_value, || format!("{label} {name}: value {} vs {want_value}", got.0))?;
        ensure(got.1 == want_move, || format!("{label} {name}: move differs from the oracle"))?;
    }
    Ok(())
}

fn criterion_minimax_oracle() -> Check {
    let start = Instant::now();
    let n = 1000;
    let results = map_indexed(n, Execution::default(), |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EA4C4 + i as u64);
        let (tree, cfg) = random_tree(&mut rng);
        check_instance(&tree, &cfg, &format!("tree {i}"))?;
        let (gs, cfg) = random_game_state(&mut rng);
        check_instance(&gs, &cfg, &format!("debate state {i}"))
    });
    for r in results {
        r?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{n} random trees and {n} debate positions match exhaustive search in {elapsed:.2?}"))
}

// ---------------------------------------------------------------- 4

fn criterion_pathos_dominance() -> Check {
    let cfg = EvolutionConfig::new(50, 20, FitnessProfile::PathosFavoring, 0);
    let seeds: Vec<u64> = (0..100).collect();
    let runs = run_evolution_batch(&cfg, &seeds, Execution::default()).map_err(|e| e.to_string())?;
    let finals: Vec<f64> = runs.iter().map(|r| r.last().expect("rows").mean_pathos).collect();
    let dominant = finals.iter().filter(|p| **p > 0.5).count();
    ensure(dominant >= 95, || format!("only {dominant}/100 seeds end with pathos > 0.5"))?;
    Ok(format!(
        "{dominant}/100 seeds end with mean pathos > 0.5 (lowest {:.3})",
        finals.iter().copied().fold(1.0, f64::min)
    ))
}

// ---------------------------------------------------------------- 5

/// `n` two-decimal scores summing to exactly `n * mean_cents` hundredths.
fn cents_series(n: usize, mean_cents: i64, rng: &mut ChaCha8Rng) -> Vec<i64> {
    let mut v: Vec<i64> = (0..n - 1).map(|_| mean_cents + rng.gen_range(-150..=150)).collect();
    let rest = mean_cents * n as i64 - v.iter().sum::<i64>();
    v.push(rest);
    v
}

fn criterion_score_aggregation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let ai = cents_series(23, 272, &mut rng);
    let user = cents_series(23, 267, &mut rng);
    ensure(ai.iter().sum::<i64>() == 272 * 23 && user.iter().sum::<i64>() == 267 * 23, || {
        "fixture sums are off".into()
    })?;
    let rows: Vec<MetricsRow> = (0..23)
        .map(|i| MetricsRow {
            debate_index: i,
            topic: format!("fixture {i}"),
            avg_user: user[i] as f64 / 100.0,
            avg_ai: ai[i] as f64 / 100.0,
            winner: Winner::from_averages(user[i] as f64 / 100.0, ai[i] as f64 / 100.0),
            rounds: 3,
            seed: i as u64,
        })
        .collect();
    let summary = summarize(&rows).map_err(|e| e.to_string())?;
    let text = summary.to_string();
    ensure(text == "Average AI Score: 2.72\nAverage User Score: 2.67", || format!("printed {text:?}"))?;
    ensure(summary.winner == Winner::Ai, || format!("winner {}", summary.winner))?;
    let per_round = rows.iter().map(|r| (r.avg_user, r.avg_ai)).collect();
    let result = DebateResult::from_rounds(per_round);
    ensure(
        result.winner == Winner::Ai && result.avg_ai == 2.72 && result.avg_user == 2.67,
        || format!("debate result {result:?}"),
    )?;
    Ok("\"Average AI Score: 2.72\" / \"Average User Score: 2.67\", winner ai".into())
}

// ---------------------------------------------------------------- 6

struct Replay {
    transcript: String,
    result: String,
    log: String,
}

fn play_debate(store: Arc<dyn Storage>) -> Result<(Replay, Engine, String), String> {
    let err = |e: debate_arena_core::Error| e.to_string();
    let config = EngineConfig {
        seed: 77,
        ..EngineConfig::default()
    };
    let engine = Engine::new(config, Arc::new(Gateway::stub()), store)
        .map_err(err)?
        .with_clock(Arc::new(ManualClock::new(1_700_000_000_000)))
        .with_ids(IdSource::sequential("acceptance"));
    let id = engine.create_debate(NewDebate::new(Position::For)).map_err(err)?.debate_id;
    let arguments = [
        "Everyone knows public transit lowers emissions, and the data agree.",
        "A 2022 survey of forty cities found fares fell while ridership rose.",
        "Either we invest now or we pay far more later in congestion.",
    ];
    for a in arguments {
        engine.submit_argument(&id, a).map_err(err)?;
    }
    let state = engine.get_state(&id).map_err(err)?;
    let result = engine.finalize(&id).map_err(err)?;
    let log = engine.store().read_events(&id).map_err(err)?;
    let replay = Replay {
        transcript: serde_json::to_string(&state).map_err(|e| e.to_string())?,
        result: serde_json::to_string(&result).map_err(|e| e.to_string())?,
        log: serde_json::to_string(&log).map_err(|e| e.to_string())?,
    };
    Ok((replay, engine, id))
}

fn criterion_end_to_end_determinism() -> Check {
    let (a, engine, id) = play_debate(Arc::new(MemoryStore::new()))?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (b, _, _) = play_debate(Arc::new(FileStore::open(dir.path()).map_err(|e| e.to_string())?))?;
    ensure(a.transcript == b.transcript, || "transcripts differ between runs".into())?;
    ensure(a.result == b.result, || "results differ between runs".into())?;
    ensure(a.log == b.log, || "event logs differ between runs".into())?;
    let live = engine.get_state(&id).map_err(|e| e.to_string())?;
    let replayed = replay(engine.store(), &id).map_err(|e| e.to_string())?;
    ensure(replayed.state == live, || "in-memory replay differs from live state".into())?;
    let disk = FileStore::open(dir.path()).map_err(|e| e.to_string())?;
    let from_disk = replay(&disk, &id).map_err(|e| e.to_string())?;
    ensure(from_disk.state == live, || "file replay differs from live state".into())?;
    ensure(from_disk.ga == engine.ga_session(&id).map_err(|e| e.to_string())?, || {
        "replayed GA session differs".into()
    })?;
    Ok(format!(
        "two runs byte-identical ({} transcript bytes), replay equals live state",
        a.transcript.len()
    ))
}

// ---------------------------------------------------------------- 7

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>, token: Option<&str>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
    }
    let req = req
        .header(header::CONTENT_TYPE, "application/json")
        .body(body.map(|b| Body::from(b.to_string())).unwrap_or_default())
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

struct Slow(StubProvider);

impl Provider for Slow {
    fn complete(&self, request: &CompletionRequest) -> Result<String, ProviderFailure> {
        std::thread::sleep(Duration::from_millis(300));
        self.0.complete(request)
    }
}

fn api(store: Arc<dyn Storage>, gateway: Gateway, clock: Arc<ManualClock>, auth: bool) -> Router {
    let engine = Engine::new(EngineConfig::default(), Arc::new(gateway), store)
        .expect("engine")
        .with_clock(clock);
    router(AppState {
        engine: Arc::new(engine),
        auth,
    })
}

async fn api_contract() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let open = || -> Arc<dyn Storage> { Arc::new(FileStore::open(dir.path()).expect("store")) };
    let clock = Arc::new(ManualClock::new(0));
    let app = api(open(), Gateway::stub(), clock.clone(), true);
    let tok = Some("u123");
    let mut seen = std::collections::BTreeSet::new();
    let mut expect = |label: &str, got: (StatusCode, Value), status: u16, code: &str| -> Result<Value, String> {
        ensure(got.0.as_u16() == status, || format!("{label}: status {} body {}", got.0, got.1))?;
        if status >= 400 {
            ensure(got.1["code"] == code, || format!("{label}: code {}", got.1["code"]))?;
            seen.insert(code.to_string());
        }
        Ok(got.1)
    };

    expect("no token", call(&app, "GET", "/api/topics?count=3", None, None).await, 401, "unauthorized")?;
    let topics = expect("topics", call(&app, "GET", "/api/topics?count=3", None, tok).await, 200, "")?;
    ensure(topics["topics"].as_array().map(Vec::len) == Some(3), || "topics count".into())?;
    expect("bad count", call(&app, "GET", "/api/topics?count=0", None, tok).await, 400, "invalid_argument")?;
    expect(
        "bad position",
        call(&app, "POST", "/api/debates", Some(json!({"user_position": "maybe"})), tok).await,
        400,
        "invalid_argument",
    )?;
    expect(
        "bad rounds",
        call(&app, "POST", "/api/debates", Some(json!({"user_position": "for", "rounds": 9})), tok).await,
        400,
        "invalid_argument",
    )?;
    expect("unknown debate", call(&app, "GET", "/api/debates/missing", None, tok).await, 404, "not_found")?;

    let created = expect(
        "create",
        call(&app, "POST", "/api/debates", Some(json!({"user_position": "for", "rounds": 1})), tok).await,
        201,
        "",
    )?;
    let id = created["debate_id"].as_str().unwrap_or_default().to_string();
    ensure(!id.is_empty(), || "empty debate id".into())?;
    expect("early result", call(&app, "GET", &format!("/api/debates/{id}/result"), None, tok).await, 409, "round_in_progress")?;
    let arg = Some(json!({"text": "Cities with good transit grow faster."}));
    let round = expect("argue", call(&app, "POST", &format!("/api/debates/{id}/arguments"), arg.clone(), tok).await, 200, "")?;
    ensure(round["suggestions"].as_array().map(Vec::len) == Some(3), || "suggestions".into())?;
    expect("finished", call(&app, "POST", &format!("/api/debates/{id}/arguments"), arg.clone(), tok).await, 409, "debate_finished")?;

    let late = expect(
        "create late",
        call(&app, "POST", "/api/debates", Some(json!({"user_position": "against"})), tok).await,
        201,
        "",
    )?;
    let late_id = late["debate_id"].as_str().unwrap_or_default().to_string();
    clock.advance(120_001);
    expect("expired", call(&app, "POST", &format!("/api/debates/{late_id}/arguments"), arg.clone(), tok).await, 409, "turn_expired")?;

    let slow = Arc::new(Slow(StubProvider::new(Arc::new(TopicBank::default()))));
    let slow_app = api(
        Arc::new(MemoryStore::new()),
        Gateway::stub().with_provider(ProviderRole::Opponent, ProviderKind::Stub, slow),
        Arc::new(ManualClock::new(0)),
        false,
    );
    let raced = call(&slow_app, "POST", "/api/debates", Some(json!({"user_position": "for"})), None).await;
    let raced_id = raced.1["debate_id"].as_str().unwrap_or_default().to_string();
    let uri = format!("/api/debates/{raced_id}/arguments");
    let (x, y) = tokio::join!(
        call(&slow_app, "POST", &uri, arg.clone(), None),
        call(&slow_app, "POST", &uri, arg.clone(), None)
    );
    let ok = [&x, &y].iter().filter(|r| r.0 == StatusCode::OK).count();
    let busy: Vec<_> = [&x, &y].into_iter().filter(|r| r.0 == StatusCode::CONFLICT).collect();
    ensure(ok == 1 && busy.len() == 1, || format!("double submit gave {} and {}", x.0, y.0))?;
    expect("double submit", busy[0].clone(), 409, "round_in_progress")?;

    let gets = [
        format!("/api/debates/{id}"),
        format!("/api/debates/{id}/result"),
        format!("/api/debates/{late_id}"),
        format!("/api/debates/{late_id}/result"),
    ];
    let mut before = Vec::new();
    for g in &gets {
        before.push(call(&app, "GET", g, None, tok).await);
    }
    drop(app);
    let restarted = api(open(), Gateway::stub(), clock.clone(), true);
    for (g, b) in gets.iter().zip(&before) {
        let after = call(&restarted, "GET", g, None, tok).await;
        ensure(&after == b, || format!("{g} changed across restart"))?;
    }

    std::fs::write(dir.path().join("debates/broken.jsonl"), "{\"debate_id\":\n").map_err(|e| e.to_string())?;
    expect("corrupt log", call(&restarted, "GET", "/api/debates/broken", None, tok).await, 500, "internal")?;

    let closed = [
        "invalid_argument",
        "not_found",
        "round_in_progress",
        "debate_finished",
        "turn_expired",
        "unauthorized",
        "internal",
    ];
    ensure(closed.iter().all(|c| seen.contains(*c)), || format!("codes seen: {seen:?}"))?;
    Ok("all 7 error codes exercised, one of two racing submits wins, GETs survive restart".into())
}

fn criterion_api_contract() -> Check {
    tokio::runtime::Builder::new_multi_thread()
        .worker_threads(4)
        .enable_all()
        .build()
        .map_err(|e| e.to_string())?
        .block_on(api_contract())
}

// ---------------------------------------------------------------- 8

fn selfplay_once(out: &std::path::Path, extra: &[&str]) -> Result<(Duration, String), String> {
    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_debate-arena"))
        .args(["selfplay", "--debates", "23", "--provider", "stub", "--seed", "2024", "--out"])
        .arg(out)
        .args(extra)
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(output.status.success(), || {
        format!("exit {:?}: {}", output.status.code(), String::from_utf8_lossy(&output.stderr))
    })?;
    Ok((elapsed, String::from_utf8_lossy(&output.stdout).into_owned()))
}

fn criterion_selfplay() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (first, second, third) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("c.csv"));
    let (elapsed, printed) = selfplay_once(&first, &[])?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    selfplay_once(&second, &[])?;
    selfplay_once(&third, &["--sequential"])?;
    let a = std::fs::read(&first).map_err(|e| e.to_string())?;
    ensure(a == std::fs::read(&second).map_err(|e| e.to_string())?, || "rerun changed the CSV".into())?;
    ensure(a == std::fs::read(&third).map_err(|e| e.to_string())?, || "sequential run changed the CSV".into())?;
    let text = String::from_utf8(a).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    ensure(lines.next() == Some("debate_index,topic,avg_user,avg_ai,winner,rounds,seed"), || "header".into())?;
    let mut reader = csv::Reader::from_path(&first).map_err(|e| e.to_string())?;
    let (mut n, mut user, mut ai) = (0usize, 0.0f64, 0.0f64);
    for rec in reader.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        user += rec[2].parse::<f64>().map_err(|e| e.to_string())?;
        ai += rec[3].parse::<f64>().map_err(|e| e.to_string())?;
        n += 1;
    }
    ensure(n == 23, || format!("{n} rows"))?;
    let expected = format!(
        "Average AI Score: {:.2}\nAverage User Score: {:.2}\n",
        ai / n as f64,
        user / n as f64
    );
    ensure(printed == expected, || format!("printed {printed:?}, recomputed {expected:?}"))?;
    Ok(format!("23 rows in {elapsed:.2?}, identical bytes on rerun and sequential run"))
}

// ----------------------------------------------------------------

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("GA invariant suite", criterion_ga_invariants),
        ("crossover and mutation arithmetic", criterion_crossover_arithmetic),
        ("minimax oracle equivalence", criterion_minimax_oracle),
        ("pathos-dominance evolution", criterion_pathos_dominance),
        ("score aggregation", criterion_score_aggregation),
        ("end-to-end determinism", criterion_end_to_end_determinism),
        ("API contract", criterion_api_contract),
        ("self-play harness", criterion_selfplay),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
