//! Offline experiments: engine-vs-engine debates and GA runs under
//! synthetic fitness profiles, with CSV export.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::clock::{IdSource, ManualClock};
use crate::debate::{Position, DEFAULT_ROUNDS, MAX_ARGUMENT_CHARS};
use crate::engine::{Engine, EngineConfig, NewDebate};
use crate::error::{Error, Result};
use crate::ga::{evaluate_fitness, evolve_generation, init_population, FitnessRecord, GaConfig, Population, Strategy};
use crate::gateway::{Gateway, ProviderConfig};
use crate::outcome::{ScoreSummary, Winner};
use crate::par::{map_indexed, map_slice, Execution};
use crate::rng::derive_seed;
use crate::store::MemoryStore;

pub const METRICS_HEADER: [&str; 7] = ["debate_index", "topic", "avg_user", "avg_ai", "winner", "rounds", "seed"];

pub const EVOLUTION_HEADER: [&str; 5] = ["generation", "mean_ethos", "mean_pathos", "mean_logos", "best_fitness"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub debate_index: usize,
    pub topic: String,
    pub avg_user: f64,
    pub avg_ai: f64,
    pub winner: Winner,
    pub rounds: u32,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SelfPlayConfig {
    pub debates: usize,
    pub seed: u64,
    pub rounds: u32,
    pub providers: ProviderConfig,
    /// Base engine settings; each debate gets its own derived seed.
    pub engine: EngineConfig,
    pub execution: Execution,
}

impl SelfPlayConfig {
    pub fn stub(debates: usize, seed: u64) -> Self {
        SelfPlayConfig {
            debates,
            seed,
            rounds: DEFAULT_ROUNDS,
            providers: ProviderConfig::all_stub(),
            engine: EngineConfig::default(),
            execution: Execution::default(),
        }
    }
}

/// Plays `debates` full debates, the user side voiced by the assistant role
/// and the AI side by the opponent role. Rows come back in debate order.
pub fn run_selfplay(config: &SelfPlayConfig) -> Result<Vec<MetricsRow>> {
    if config.debates == 0 {
        return Err(Error::invalid("debates must be at least 1"));
    }
    let mut base = config.engine.clone();
    base.default_rounds = config.rounds;
    base.validate()?;
    config.providers.validate()?;
    let gateway = Arc::new(Gateway::new(&config.providers)?);
    map_indexed(config.debates, config.execution, |i| {
        play_one(i, config.seed, &base, gateway.clone())
    })
    .into_iter()
    .collect()
}

fn play_one(index: usize, seed: u64, base: &EngineConfig, gateway: Arc<Gateway>) -> Result<MetricsRow> {
    let debate_seed = derive_seed(seed, index as u64);
    let engine_config = EngineConfig {
        seed: debate_seed,
        ..base.clone()
    };
    let engine = Engine::new(engine_config, gateway.clone(), Arc::new(MemoryStore::new()))?
        .with_clock(Arc::new(ManualClock::new(0)))
        .with_ids(IdSource::sequential(format!("selfplay-{index}")));
    let position = if index.is_multiple_of(2) { Position::For } else { Position::Against };
    let state = engine.create_debate(NewDebate::new(position))?;
    let id = state.debate_id.clone();
    let mut state = state;
    while !state.is_finished() {
        let argument = gateway.generate_selfplay_argument(&state)?.text;
        let argument: String = argument.chars().take(MAX_ARGUMENT_CHARS).collect();
        engine.submit_argument(&id, &argument)?;
        state = engine.get_state(&id)?;
    }
    let result = engine.finalize(&id)?;
    Ok(MetricsRow {
        debate_index: index,
        topic: state.topic,
        avg_user: result.avg_user,
        avg_ai: result.avg_ai,
        winner: result.winner,
        rounds: state.rounds_total,
        seed: debate_seed,
    })
}

/// Mean of the per-debate averages.
pub fn summarize(rows: &[MetricsRow]) -> Result<ScoreSummary> {
    let users: Vec<f64> = rows.iter().map(|r| r.avg_user).collect();
    let ais: Vec<f64> = rows.iter().map(|r| r.avg_ai).collect();
    ScoreSummary::from_series(&users, &ais)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Storage(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Storage(std::io::Error::other(e))
}

pub fn metrics_csv(rows: &[MetricsRow]) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(METRICS_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.debate_index.to_string(),
            r.topic.clone(),
            format!("{:.2}", r.avg_user),
            format!("{:.2}", r.avg_ai),
            r.winner.to_string(),
            r.rounds.to_string(),
            r.seed.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn export_metrics(rows: &[MetricsRow], path: &Path) -> Result<()> {
    std::fs::write(path, metrics_csv(rows)?)?;
    Ok(())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(METRICS_HEADER) {
        return Err(Error::invalid("unexpected metrics header"));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err)?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64> {
            field(i)
                .parse()
                .map_err(|_| Error::invalid(format!("bad number {:?}", field(i))))
        };
        rows.push(MetricsRow {
            debate_index: num(0)? as usize,
            topic: field(1).to_string(),
            avg_user: num(2)?,
            avg_ai: num(3)?,
            winner: field(4).parse()?,
            rounds: num(5)? as u32,
            seed: field(6)
                .parse()
                .map_err(|_| Error::invalid(format!("bad seed {:?}", field(6))))?,
        });
    }
    Ok(rows)
}

/// Synthetic judges used to drive evolution experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitnessProfile {
    /// Fitness from the round margin a fixed linear judge would award.
    Margin,
    PathosFavoring,
    LogosFavoring,
}

impl FitnessProfile {
    pub fn as_str(&self) -> &'static str {
        match self {
            FitnessProfile::Margin => "margin",
            FitnessProfile::PathosFavoring => "pathos_favoring",
            FitnessProfile::LogosFavoring => "logos_favoring",
        }
    }

    pub fn fitness(&self, s: &Strategy) -> Result<f64> {
        match self {
            FitnessProfile::PathosFavoring => Ok(s.pathos()),
            FitnessProfile::LogosFavoring => Ok(s.logos()),
            FitnessProfile::Margin => {
                let judged = 0.2 * s.ethos() + 0.3 * s.pathos() + 0.5 * s.logos();
                let record = FitnessRecord {
                    strategy_index: 0,
                    round_margins: vec![(20.0 * judged - 6.5).clamp(-10.0, 10.0)],
                };
                evaluate_fitness(&record)
            }
        }
    }
}

impl fmt::Display for FitnessProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FitnessProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "margin" => Ok(FitnessProfile::Margin),
            "pathos_favoring" => Ok(FitnessProfile::PathosFavoring),
            "logos_favoring" => Ok(FitnessProfile::LogosFavoring),
            other => Err(Error::invalid(format!("unknown fitness profile {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub generation: u64,
    pub mean_ethos: f64,
    pub mean_pathos: f64,
    pub mean_logos: f64,
    pub best_fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub generations: u64,
    pub population: usize,
    pub profile: FitnessProfile,
    pub seed: u64,
    /// Operator settings; `population_size` is replaced by `population`.
    pub ga: GaConfig,
}

impl EvolutionConfig {
    pub fn new(generations: u64, population: usize, profile: FitnessProfile, seed: u64) -> Self {
        EvolutionConfig {
            generations,
            population,
            profile,
            seed,
            ga: GaConfig::default(),
        }
    }
}

fn summary(pop: &Population, profile: FitnessProfile) -> Result<(GenerationSummary, Vec<f64>)> {
    let fitnesses = pop
        .members()
        .iter()
        .map(|s| profile.fitness(s))
        .collect::<Result<Vec<f64>>>()?;
    let [e, p, l] = pop.mean_weights();
    let best = fitnesses.iter().copied().fold(f64::MIN, f64::max);
    Ok((
        GenerationSummary {
            generation: pop.generation(),
            mean_ethos: e,
            mean_pathos: p,
            mean_logos: l,
            best_fitness: best,
        },
        fitnesses,
    ))
}

/// Summaries for generation 0 through `generations`.
pub fn run_evolution_experiment(config: &EvolutionConfig) -> Result<Vec<GenerationSummary>> {
    if config.generations == 0 {
        return Err(Error::invalid("generations must be at least 1"));
    }
    let ga = GaConfig {
        population_size: config.population,
        ..config.ga.clone()
    };
    ga.validate()?;
    let mut pop = init_population(config.population, config.seed)?;
    let mut out = Vec::with_capacity(config.generations as usize + 1);
    for _ in 0..config.generations {
        let (row, fitnesses) = summary(&pop, config.profile)?;
        out.push(row);
        let mut rng = pop.step_rng();
        pop = evolve_generation(&pop, &fitnesses, &ga, &mut rng)?;
    }
    out.push(summary(&pop, config.profile)?.0);
    Ok(out)
}

/// One experiment per seed, in seed order.
pub fn run_evolution_batch(
    config: &EvolutionConfig,
    seeds: &[u64],
    execution: Execution,
) -> Result<Vec<Vec<GenerationSummary>>> {
    map_slice(seeds, execution, |&seed| {
        run_evolution_experiment(&EvolutionConfig {
            seed,
            ..config.clone()
        })
    })
    .into_iter()
    .collect()
}

pub fn evolution_csv(rows: &[GenerationSummary]) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(EVOLUTION_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.generation.to_string(),
            r.mean_ethos.to_string(),
            r.mean_pathos.to_string(),
            r.mean_logos.to_string(),
            r.best_fitness.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn export_evolution(rows: &[GenerationSummary], path: &Path) -> Result<()> {
    std::fs::write(path, evolution_csv(rows)?)?;
    Ok(())
}
