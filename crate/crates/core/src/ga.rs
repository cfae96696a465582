//! Evolutionary optimizer over rhetorical strategies.
//!
//! A strategy is a point on the 2-simplex: three non-negative weights for
//! ethos, pathos and logos that sum to one. A [`Population`] of strategies is
//! evolved one generation per debate round through selection, crossover,
//! mutation and elitist replacement. Every operation takes its randomness from
//! an explicit [`SeededRng`], so identical inputs always produce bitwise
//! identical generations.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{seeded_rng, SeededRng};

/// Allowed deviation of a strategy's weight sum from one.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Mix of the three persuasion modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Weights", into = "Weights")]
pub struct Strategy {
    ethos: f64,
    pathos: f64,
    logos: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct Weights {
    ethos: f64,
    pathos: f64,
    logos: f64,
}

impl TryFrom<Weights> for Strategy {
    type Error = Error;

    fn try_from(w: Weights) -> Result<Self> {
        Strategy::new(w.ethos, w.pathos, w.logos)
    }
}

impl From<Strategy> for Weights {
    fn from(s: Strategy) -> Self {
        Weights {
            ethos: s.ethos,
            pathos: s.pathos,
            logos: s.logos,
        }
    }
}

impl Strategy {
    /// Builds a strategy from weights that already lie on the simplex.
    pub fn new(ethos: f64, pathos: f64, logos: f64) -> Result<Self> {
        let genes = [ethos, pathos, logos];
        if genes.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::invalid(format!(
                "strategy weights must be finite and non-negative, got {genes:?}"
            )));
        }
        let sum: f64 = genes.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::invalid(format!(
                "strategy weights must sum to 1, got {sum}"
            )));
        }
        Ok(Strategy {
            ethos,
            pathos,
            logos,
        })
    }

    pub fn uniform() -> Self {
        let third = 1.0 / 3.0;
        Strategy {
            ethos: third,
            pathos: third,
            logos: third,
        }
    }

    pub fn ethos(&self) -> f64 {
        self.ethos
    }

    pub fn pathos(&self) -> f64 {
        self.pathos
    }

    pub fn logos(&self) -> f64 {
        self.logos
    }

    /// Genes in fixed order: ethos, pathos, logos.
    pub fn genes(&self) -> [f64; 3] {
        [self.ethos, self.pathos, self.logos]
    }
}

/// Scales non-negative raw weights onto the simplex.
///
/// An all-zero input maps to the uniform strategy.
pub fn normalize_strategy(raw: [f64; 3]) -> Result<Strategy> {
    if raw.iter().any(|g| !g.is_finite() || *g < 0.0) {
        return Err(Error::invalid(format!(
            "raw weights must be finite and non-negative, got {raw:?}"
        )));
    }
    let sum: f64 = raw.iter().sum();
    if sum == 0.0 {
        return Ok(Strategy::uniform());
    }
    Ok(Strategy {
        ethos: raw[0] / sum,
        pathos: raw[1] / sum,
        logos: raw[2] / sum,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PopulationRepr", into = "PopulationRepr")]
pub struct Population {
    members: Vec<Strategy>,
    generation: u64,
    seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PopulationRepr {
    generation: u64,
    seed: u64,
    members: Vec<Strategy>,
}

impl TryFrom<PopulationRepr> for Population {
    type Error = Error;

    fn try_from(r: PopulationRepr) -> Result<Self> {
        Population::from_parts(r.members, r.generation, r.seed)
    }
}

impl From<Population> for PopulationRepr {
    fn from(p: Population) -> Self {
        PopulationRepr {
            generation: p.generation,
            seed: p.seed,
            members: p.members,
        }
    }
}

impl Population {
    pub fn from_parts(members: Vec<Strategy>, generation: u64, seed: u64) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("population must have at least one member"));
        }
        Ok(Population {
            members,
            generation,
            seed,
        })
    }

    pub fn members(&self) -> &[Strategy] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Seed recorded when the population was created.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Component-wise mean of the member weights.
    pub fn mean_weights(&self) -> [f64; 3] {
        let n = self.members.len() as f64;
        let mut acc = [0.0; 3];
        for m in &self.members {
            for (a, g) in acc.iter_mut().zip(m.genes()) {
                *a += g;
            }
        }
        acc.map(|a| a / n)
    }

    /// Generator for the step that produces the next generation.
    ///
    /// Derived from the creation seed and the generation counter so an
    /// evolve step can be replayed without persisting generator state.
    pub fn step_rng(&self) -> SeededRng {
        seeded_rng(crate::rng::derive_seed(self.seed, self.generation))
    }
}

/// Samples `size` strategies by normalizing three uniform draws in (0, 1].
pub fn init_population(size: usize, seed: u64) -> Result<Population> {
    if size == 0 {
        return Err(Error::invalid("population size must be at least 1"));
    }
    let mut rng = seeded_rng(seed);
    let members = (0..size)
        .map(|_| {
            // gen::<f64>() is in [0, 1); flip it into (0, 1].
            let raw = [
                1.0 - rng.gen::<f64>(),
                1.0 - rng.gen::<f64>(),
                1.0 - rng.gen::<f64>(),
            ];
            normalize_strategy(raw)
        })
        .collect::<Result<Vec<_>>>()?;
    Population::from_parts(members, 0, seed)
}

/// Round-by-round score margins observed while a strategy was active.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessRecord {
    pub strategy_index: usize,
    /// AI round score minus user round score, each in [-10, 10].
    pub round_margins: Vec<f64>,
}

impl FitnessRecord {
    pub fn new(strategy_index: usize) -> Self {
        FitnessRecord {
            strategy_index,
            round_margins: Vec::new(),
        }
    }
}

/// Mean of `clamp((margin + 5) / 10, 0, 1)`; 0.5 when nothing was recorded.
pub fn evaluate_fitness(record: &FitnessRecord) -> Result<f64> {
    if let Some(m) = record
        .round_margins
        .iter()
        .find(|m| !m.is_finite() || m.abs() > 10.0)
    {
        return Err(Error::invalid(format!("round margin {m} outside [-10, 10]")));
    }
    if record.round_margins.is_empty() {
        return Ok(0.5);
    }
    let total: f64 = record
        .round_margins
        .iter()
        .map(|m| ((m + 5.0) / 10.0).clamp(0.0, 1.0))
        .sum();
    Ok(total / record.round_margins.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    Tournament,
    Roulette,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverMethod {
    SinglePoint,
    TwoPoint,
    Uniform,
}

impl FromStr for SelectionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tournament" => Ok(SelectionMethod::Tournament),
            "roulette" => Ok(SelectionMethod::Roulette),
            other => Err(Error::invalid(format!("unknown selection method {other:?}"))),
        }
    }
}

impl FromStr for CrossoverMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single_point" => Ok(CrossoverMethod::SinglePoint),
            "two_point" => Ok(CrossoverMethod::TwoPoint),
            "uniform" => Ok(CrossoverMethod::Uniform),
            other => Err(Error::invalid(format!("unknown crossover method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub tournament_size: usize,
    pub selection_method: SelectionMethod,
    pub crossover_method: CrossoverMethod,
    pub mutation_rate: f64,
    pub mutation_magnitude: f64,
    pub elite_count: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 20,
            tournament_size: 3,
            selection_method: SelectionMethod::Tournament,
            crossover_method: CrossoverMethod::Uniform,
            mutation_rate: 0.1,
            mutation_magnitude: 0.15,
            elite_count: 2,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 {
            return Err(Error::invalid("population_size must be at least 1"));
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return Err(Error::invalid(format!(
                "tournament_size {} must be in 1..={}",
                self.tournament_size, self.population_size
            )));
        }
        if self.elite_count >= self.population_size {
            return Err(Error::invalid(format!(
                "elite_count {} must be below population_size {}",
                self.elite_count, self.population_size
            )));
        }
        check_unit("mutation_rate", self.mutation_rate)?;
        check_unit("mutation_magnitude", self.mutation_magnitude)
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be in [0, 1], got {v}")))
    }
}

fn check_fitnesses(population: &Population, fitnesses: &[f64]) -> Result<()> {
    if fitnesses.len() != population.len() {
        return Err(Error::invalid(format!(
            "{} fitness values for a population of {}",
            fitnesses.len(),
            population.len()
        )));
    }
    if let Some(f) = fitnesses.iter().find(|f| !f.is_finite()) {
        return Err(Error::invalid(format!("non-finite fitness {f}")));
    }
    Ok(())
}

/// Member indices ordered by fitness, best first; ties by lowest index.
pub fn rank_by_fitness(fitnesses: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitnesses.len()).collect();
    order.sort_by(|&a, &b| fitnesses[b].total_cmp(&fitnesses[a]).then(a.cmp(&b)));
    order
}

/// Draws `population_size - elite_count` parent pairs.
pub fn select_parents(
    population: &Population,
    fitnesses: &[f64],
    config: &GaConfig,
    rng: &mut SeededRng,
) -> Result<Vec<(usize, usize)>> {
    check_fitnesses(population, fitnesses)?;
    let n = population.len();
    if config.tournament_size > n {
        return Err(Error::invalid(format!(
            "tournament_size {} exceeds population of {n}",
            config.tournament_size
        )));
    }
    if config.elite_count >= n {
        return Err(Error::invalid(format!(
            "elite_count {} must be below population of {n}",
            config.elite_count
        )));
    }
    let pick = |rng: &mut SeededRng| -> Result<usize> {
        match config.selection_method {
            SelectionMethod::Tournament => tournament_pick(fitnesses, config.tournament_size, rng),
            SelectionMethod::Roulette => roulette_pick(fitnesses, rng),
        }
    };
    (0..n - config.elite_count)
        .map(|_| Ok((pick(rng)?, pick(rng)?)))
        .collect()
}

/// Fittest of `size` indices drawn with replacement.
pub fn tournament_pick(fitnesses: &[f64], size: usize, rng: &mut SeededRng) -> Result<usize> {
    if size == 0 || size > fitnesses.len() {
        return Err(Error::invalid(format!(
            "tournament_size {size} must be in 1..={}",
            fitnesses.len()
        )));
    }
    let entrants: Vec<usize> = (0..size)
        .map(|_| rng.gen_range(0..fitnesses.len()))
        .collect();
    Ok(tournament_winner(fitnesses, &entrants))
}

/// Highest-fitness entrant; equal fitness goes to the lower index.
pub fn tournament_winner(fitnesses: &[f64], entrants: &[usize]) -> usize {
    let mut best = entrants[0];
    for &i in &entrants[1..] {
        if fitnesses[i] > fitnesses[best] || (fitnesses[i] == fitnesses[best] && i < best) {
            best = i;
        }
    }
    best
}

/// Fitness-proportional pick; uniform when every fitness is zero.
pub fn roulette_pick(fitnesses: &[f64], rng: &mut SeededRng) -> Result<usize> {
    if let Some(f) = fitnesses.iter().find(|f| **f < 0.0) {
        return Err(Error::invalid(format!(
            "roulette selection needs non-negative fitness, got {f}"
        )));
    }
    let total: f64 = fitnesses.iter().sum();
    if total <= 0.0 {
        return Ok(rng.gen_range(0..fitnesses.len()));
    }
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, f) in fitnesses.iter().enumerate() {
        if *f > 0.0 {
            last_positive = i;
        }
        acc += f;
        if target < acc {
            return Ok(i);
        }
    }
    Ok(last_positive)
}

/// Concrete gene-exchange pattern for one crossover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossoverPlan {
    /// Genes before `cut` from A, the rest from B. `cut` in {1, 2}.
    SinglePoint { cut: usize },
    /// Genes in `start..end` from B, the rest from A.
    TwoPoint { start: usize, end: usize },
    /// `true` takes the gene from A.
    Uniform { from_a: [bool; 3] },
}

impl CrossoverPlan {
    pub fn draw(method: CrossoverMethod, rng: &mut SeededRng) -> Self {
        match method {
            CrossoverMethod::SinglePoint => CrossoverPlan::SinglePoint {
                cut: rng.gen_range(1..=2),
            },
            CrossoverMethod::TwoPoint => {
                let start = rng.gen_range(1..=2);
                let end = rng.gen_range(start + 1..=3);
                CrossoverPlan::TwoPoint { start, end }
            }
            CrossoverMethod::Uniform => CrossoverPlan::Uniform {
                from_a: [rng.gen::<bool>(), rng.gen::<bool>(), rng.gen::<bool>()],
            },
        }
    }

    fn takes_a(&self, gene: usize) -> bool {
        match *self {
            CrossoverPlan::SinglePoint { cut } => gene < cut,
            CrossoverPlan::TwoPoint { start, end } => !(start..end).contains(&gene),
            CrossoverPlan::Uniform { from_a } => from_a[gene],
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            CrossoverPlan::SinglePoint { cut } if !(1..=2).contains(&cut) => {
                Err(Error::invalid(format!("single-point cut {cut} not in 1..=2")))
            }
            CrossoverPlan::TwoPoint { start, end } if start >= end || end > 3 => Err(
                Error::invalid(format!("two-point cuts {start}..{end} out of order")),
            ),
            _ => Ok(()),
        }
    }
}

/// Applies an explicit crossover plan and renormalizes the child.
pub fn crossover_with(a: &Strategy, b: &Strategy, plan: CrossoverPlan) -> Result<Strategy> {
    plan.validate()?;
    let (ga, gb) = (a.genes(), b.genes());
    let mut raw = [0.0; 3];
    for (i, slot) in raw.iter_mut().enumerate() {
        *slot = if plan.takes_a(i) { ga[i] } else { gb[i] };
    }
    normalize_strategy(raw)
}

pub fn crossover(
    a: &Strategy,
    b: &Strategy,
    method: CrossoverMethod,
    rng: &mut SeededRng,
) -> Result<Strategy> {
    crossover_with(a, b, CrossoverPlan::draw(method, rng))
}

/// Perturbs each gene with probability `rate` by a uniform delta in
/// `[-magnitude, magnitude]`, clamps at zero and renormalizes.
pub fn mutate(
    strategy: &Strategy,
    rate: f64,
    magnitude: f64,
    rng: &mut SeededRng,
) -> Result<Strategy> {
    check_unit("mutation rate", rate)?;
    check_unit("mutation magnitude", magnitude)?;
    if rate == 0.0 {
        return Ok(*strategy);
    }
    let mut genes = strategy.genes();
    for g in genes.iter_mut() {
        if rng.gen::<f64>() < rate {
            let delta = if magnitude > 0.0 {
                rng.gen_range(-magnitude..=magnitude)
            } else {
                0.0
            };
            *g = (*g + delta).max(0.0);
        }
    }
    normalize_strategy(genes)
}

/// Produces the next generation: elites copied verbatim, the rest bred by
/// selection, crossover and mutation.
pub fn evolve_generation(
    population: &Population,
    fitnesses: &[f64],
    config: &GaConfig,
    rng: &mut SeededRng,
) -> Result<Population> {
    check_fitnesses(population, fitnesses)?;
    check_unit("mutation_rate", config.mutation_rate)?;
    check_unit("mutation_magnitude", config.mutation_magnitude)?;
    let ranked = rank_by_fitness(fitnesses);
    let elite_count = config.elite_count.min(population.len());
    let mut members: Vec<Strategy> = ranked[..elite_count]
        .iter()
        .map(|&i| population.members[i])
        .collect();
    for (a, b) in select_parents(population, fitnesses, config, rng)? {
        let child = crossover(
            &population.members[a],
            &population.members[b],
            config.crossover_method,
            rng,
        )?;
        members.push(mutate(
            &child,
            config.mutation_rate,
            config.mutation_magnitude,
            rng,
        )?);
    }
    Population::from_parts(members, population.generation + 1, population.seed)
}

/// Coaching hint derived from a strategy's dominant weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyHint {
    EmphasizeCredibility,
    EmphasizeEmotion,
    EmphasizeLogic,
    Balanced,
}

impl StrategyHint {
    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyHint::EmphasizeCredibility => "emphasize-credibility",
            StrategyHint::EmphasizeEmotion => "emphasize-emotion",
            StrategyHint::EmphasizeLogic => "emphasize-logic",
            StrategyHint::Balanced => "balanced",
        }
    }
}

impl fmt::Display for StrategyHint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// "balanced" when the weight spread is under 0.1, otherwise the dominant
/// mode with ties resolved ethos, then pathos, then logos.
pub fn strategy_hint(strategy: &Strategy) -> StrategyHint {
    let genes = strategy.genes();
    let max = genes.iter().copied().fold(f64::MIN, f64::max);
    let min = genes.iter().copied().fold(f64::MAX, f64::min);
    if max - min < 0.1 {
        return StrategyHint::Balanced;
    }
    if genes[0] == max {
        StrategyHint::EmphasizeCredibility
    } else if genes[1] == max {
        StrategyHint::EmphasizeEmotion
    } else {
        StrategyHint::EmphasizeLogic
    }
}
