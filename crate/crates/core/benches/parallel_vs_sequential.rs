use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use debate_arena_core::par::Execution;
use debate_arena_core::search::{minimax_search_with, GameState, SearchConfig};
use debate_arena_core::selfplay::{run_evolution_batch, run_selfplay, EvolutionConfig, FitnessProfile, SelfPlayConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn selfplay(c: &mut Criterion) {
    let mut group = c.benchmark_group("selfplay_23_debates");
    group.sample_size(10);
    for (name, exec) in MODES {
        let mut cfg = SelfPlayConfig::stub(23, 42);
        cfg.execution = exec;
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_selfplay(black_box(&cfg)).unwrap())
        });
    }
    group.finish();
}

fn evolution(c: &mut Criterion) {
    let cfg = EvolutionConfig::new(50, 20, FitnessProfile::PathosFavoring, 0);
    let seeds: Vec<u64> = (0..32).collect();
    let mut group = c.benchmark_group("evolution_32_seeds");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_evolution_batch(black_box(&cfg), &seeds, exec).unwrap())
        });
    }
    group.finish();
}

fn minimax(c: &mut Criterion) {
    let mut state = GameState::new(7);
    state.score_margin = 1.5;
    let cfg = SearchConfig {
        depth: 6,
        branching: 6,
        ..SearchConfig::default()
    };
    let mut group = c.benchmark_group("minimax_depth6");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| minimax_search_with(black_box(&state), &cfg, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, selfplay, evolution, minimax);
criterion_main!(benches);
