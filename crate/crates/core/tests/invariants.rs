use proptest::prelude::*;

use debate_arena_core::ga::{
    crossover_with, evolve_generation, init_population, mutate, normalize_strategy, CrossoverMethod, CrossoverPlan,
    GaConfig, SelectionMethod, Strategy as Genes,
};
use debate_arena_core::gateway::stub_dimensions;
use debate_arena_core::rng::seeded_rng;
use debate_arena_core::rubric::{combine_scores, flag_fallacies, RubricWeights};
use debate_arena_core::search::{evaluate_state, GameState};

fn strategy() -> impl Strategy<Value = Genes> {
    (0.0f64..1.0, 0.0f64..1.0, 0.001f64..1.0).prop_map(|(a, b, c)| normalize_strategy([a, b, c]).unwrap())
}

fn on_simplex(s: &Genes) -> bool {
    let g = s.genes();
    g.iter().all(|x| *x >= 0.0) && (g.iter().sum::<f64>() - 1.0).abs() <= 1e-9
}

fn plan() -> impl Strategy<Value = CrossoverPlan> {
    prop_oneof![
        (1usize..3).prop_map(|cut| CrossoverPlan::SinglePoint { cut }),
        (0usize..3, 1usize..=3)
            .prop_filter("ordered", |(s, e)| s < e)
            .prop_map(|(start, end)| CrossoverPlan::TwoPoint { start, end }),
        any::<[bool; 3]>().prop_map(|from_a| CrossoverPlan::Uniform { from_a }),
    ]
}

proptest! {
    #[test]
    fn normalize_lands_on_simplex(raw in prop::array::uniform3(0.0f64..100.0)) {
        prop_assume!(raw.iter().sum::<f64>() > 1e-6);
        let s = normalize_strategy(raw).unwrap();
        prop_assert!(on_simplex(&s));
    }

    #[test]
    fn crossover_and_mutation_stay_on_simplex(
        a in strategy(),
        b in strategy(),
        p in plan(),
        rate in 0.0f64..=1.0,
        mag in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let child = crossover_with(&a, &b, p).unwrap();
        prop_assert!(on_simplex(&child));
        let m = mutate(&child, rate, mag, &mut seeded_rng(seed)).unwrap();
        prop_assert!(on_simplex(&m));
        prop_assert_eq!(mutate(&child, 0.0, mag, &mut seeded_rng(seed)).unwrap(), child);
    }

    #[test]
    fn evolve_keeps_size_and_elites(
        size in 2usize..25,
        elite in 0usize..4,
        seed in any::<u64>(),
        fit_seed in any::<u64>(),
        roulette in any::<bool>(),
    ) {
        prop_assume!(elite < size);
        let cfg = GaConfig {
            population_size: size,
            elite_count: elite,
            tournament_size: 2.min(size),
            selection_method: if roulette { SelectionMethod::Roulette } else { SelectionMethod::Tournament },
            crossover_method: CrossoverMethod::Uniform,
            ..GaConfig::default()
        };
        let pop = init_population(size, seed).unwrap();
        let fitness: Vec<f64> = (0..size).map(|i| ((fit_seed >> (i % 60)) & 7) as f64 / 7.0).collect();
        let next = evolve_generation(&pop, &fitness, &cfg, &mut seeded_rng(seed)).unwrap();
        prop_assert_eq!(next.len(), size);
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&x, &y| fitness[y].partial_cmp(&fitness[x]).unwrap().then(x.cmp(&y)));
        for k in 0..elite {
            prop_assert_eq!(next.members()[k], pop.members()[order[k]]);
        }
        prop_assert!(next.members().iter().all(on_simplex));
    }

    #[test]
    fn combined_score_is_monotone_and_bounded(dims in prop::array::uniform4(0u8..=10), which in 0usize..4) {
        let w = RubricWeights::default();
        let base = combine_scores(dims, &w).unwrap();
        prop_assert!((0.0..=10.0).contains(&base));
        let lo = *dims.iter().min().unwrap() as f64;
        let hi = *dims.iter().max().unwrap() as f64;
        prop_assert!(base >= lo - 0.005 && base <= hi + 0.005);
        if dims[which] < 10 {
            let mut up = dims;
            up[which] += 1;
            prop_assert!(combine_scores(up, &w).unwrap() >= base);
        }
    }

    #[test]
    fn stub_dimensions_are_in_range(prompt in ".{0,200}") {
        prop_assert!(stub_dimensions(&prompt).iter().all(|d| *d <= 10));
    }

    #[test]
    fn fallacy_spans_are_in_bounds(text in "[a-zA-Z ,.']{1,200}", tail in prop::sample::select(vec![
        "everyone knows", "slippery slope", "either we", "you are wrong because you",
    ])) {
        let arg = format!("{text} {tail} it");
        let flags = flag_fallacies(&arg).unwrap();
        let n = arg.chars().count();
        let mut seen = std::collections::BTreeSet::new();
        for f in &flags {
            prop_assert!(f.span.start < f.span.end && f.span.end <= n);
            prop_assert!(seen.insert((f.span.start, f.phrase.clone())));
        }
    }

    #[test]
    fn evaluation_is_bounded_and_antisymmetric(
        margin in -30.0f64..30.0,
        coverage in -1.0f64..=1.0,
        momentum in -1.0f64..=1.0,
        played in 0u32..3,
    ) {
        let mut s = GameState::new(3);
        s.score_margin = margin;
        s.coverage_margin = coverage;
        s.momentum = momentum;
        s.rounds_played = played;
        let v = evaluate_state(&s);
        prop_assert!((-1.0..=1.0).contains(&v));
        let mut m = s.clone();
        m.score_margin = -margin;
        m.coverage_margin = -coverage;
        m.momentum = -momentum;
        prop_assert!((evaluate_state(&m) + v).abs() < 1e-12);
    }
}
