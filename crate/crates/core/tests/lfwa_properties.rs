use lfwa_fs::lfwa::{
    elite_random_select, explosion_intensity, gaussian_mutation, gaussian_sparks,
    generate_explosion_sparks, map_into_bounds, optimize, BetaMode, Individual, LfwaConfig,
    PbestArchive, Sampler, SearchBounds,
};
use lfwa_fs::Execution;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Forced {
    beta: f64,
    normal: f64,
}

impl Sampler for Forced {
    fn unit(&mut self) -> f64 {
        self.beta
    }
    fn standard_normal(&mut self) -> f64 {
        self.normal
    }
    fn below(&mut self, _n: usize) -> usize {
        0
    }
}

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| (v - 0.5).powi(2)).sum()
}

proptest! {
    #[test]
    fn intensity_stays_in_range_with_extremes(
        fitness in prop::collection::vec(-100.0f64..100.0, 1..12),
        m in 2usize..9,
    ) {
        let s = explosion_intensity(&fitness, m, 1e-12).unwrap();
        prop_assert!(s.iter().all(|&v| (1..=m).contains(&v)));
        let lo = fitness.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let best = fitness.iter().position(|&f| f == lo).unwrap();
        let worst = fitness.iter().position(|&f| f == hi).unwrap();
        prop_assert_eq!(s[worst], 1);
        prop_assert_eq!(s[best], *s.iter().max().unwrap());
        if hi - lo > 1e-6 {
            prop_assert_eq!(s[best], m);
        }
    }

    #[test]
    fn intensity_ignores_constant_shifts(
        fitness in prop::collection::vec(-100.0f64..100.0, 1..12),
        c in prop::sample::select(vec![-10.0, 10.0]),
    ) {
        let shifted: Vec<f64> = fitness.iter().map(|f| f + c).collect();
        prop_assert_eq!(
            explosion_intensity(&fitness, 5, 1e-12).unwrap(),
            explosion_intensity(&shifted, 5, 1e-12).unwrap()
        );
    }

    #[test]
    fn mapping_lands_in_the_closed_box(
        raw in prop::collection::vec(prop_oneof![-10.0f64..10.0, Just(f64::NAN), Just(0.0), Just(1.0)], 1..20),
        seed in any::<u64>(),
    ) {
        let bounds = SearchBounds::unit(raw.len()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mapped = map_into_bounds(raw.clone(), &bounds, &mut rng);
        prop_assert!(bounds.contains(&mapped));
        for (a, b) in raw.iter().zip(&mapped) {
            if (0.0..=1.0).contains(a) {
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn sparks_stay_in_bounds(
        x in prop::collection::vec(0.0f64..=1.0, 1..8),
        r in prop::collection::vec(-2.0f64..2.0, 8),
        seed in any::<u64>(),
    ) {
        let d = x.len();
        let bounds = SearchBounds::unit(d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for mode in [BetaMode::PerDimension, BetaMode::PerSpark] {
            for s in generate_explosion_sparks(&x, &r[..d], 5, &bounds, mode, &mut rng) {
                prop_assert!(bounds.contains(&s));
            }
        }
        let pop = vec![Individual::new(x.clone(), 0.0)];
        for s in gaussian_sparks(&pop, 5, &bounds, &mut rng) {
            prop_assert!(bounds.contains(&s));
        }
    }

    #[test]
    fn archive_only_improves(fitness in prop::collection::vec(-5.0f64..5.0, 1..30)) {
        let mut archive = PbestArchive::new(&[Individual::new(vec![0.0], fitness[0])]);
        let mut prev = fitness[0];
        for &f in &fitness[1..] {
            archive.update(0, &Individual::new(vec![f], f));
            let now = archive.entries()[0].fitness;
            prop_assert!(now <= prev && now <= f);
            prev = now;
        }
    }

    #[test]
    fn optimizer_keeps_the_elite_and_the_box(seed in any::<u64>(), budget in 5usize..120) {
        let cfg = LfwaConfig { rng_seed: seed, max_evaluations: budget, ..LfwaConfig::default() };
        let bounds = SearchBounds::unit(4).unwrap();
        let run = optimize(sphere, &bounds, &cfg).unwrap();
        prop_assert_eq!(run.evaluations, budget);
        for w in run.history.windows(2) {
            prop_assert!(w[1].best_fitness <= w[0].best_fitness);
            for i in 0..cfg.population_size {
                prop_assert!(w[1].archive_fitness[i] <= w[0].archive_fitness[i]);
            }
        }
        for g in &run.history {
            for (a, f) in g.archive_fitness.iter().zip(&g.firework_fitness) {
                prop_assert!(a <= f);
            }
            prop_assert!(g.best_fitness <= g.archive_fitness.iter().copied().fold(f64::INFINITY, f64::min));
        }
        prop_assert!(run.fireworks.iter().all(|f| bounds.contains(&f.position)));
        prop_assert!(run.archive.entries().iter().all(|f| bounds.contains(&f.position)));
        prop_assert_eq!(run.best.fitness, run.history.last().unwrap().best_fitness);
    }
}

#[test]
fn forced_unit_beta_reaches_the_endpoint() {
    let bounds = SearchBounds::unit(2).unwrap();
    let mut s = Forced { beta: 1.0, normal: 0.0 };
    let sparks = generate_explosion_sparks(&[0.2, 0.1], &[0.3, 0.4], 3, &bounds, BetaMode::PerDimension, &mut s);
    for spark in sparks {
        assert!((spark[0] - 0.5).abs() < 1e-15 && (spark[1] - 0.5).abs() < 1e-15);
    }
}

#[test]
fn forced_zero_deviate_keeps_the_parent() {
    let mut s = Forced { beta: 0.0, normal: 0.0 };
    assert_eq!(gaussian_mutation(&[0.3, 0.7], &[0, 1], &mut s), vec![0.3, 0.7]);
}

#[test]
fn spark_mean_matches_half_the_radius() {
    let bounds = SearchBounds::unit(1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sparks = generate_explosion_sparks(&[0.5], &[0.2], 10_000, &bounds, BetaMode::PerDimension, &mut rng);
    let mean = sparks.iter().map(|s| s[0]).sum::<f64>() / 1e4;
    assert!((mean - 0.6).abs() < 0.01, "mean {mean}");
}

#[test]
fn gaussian_moments_match_the_multiplicative_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let xs: Vec<f64> = (0..10_000)
        .map(|_| gaussian_mutation(&[0.4, 0.9], &[0], &mut rng)[0])
        .collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    // Standard errors are about 0.004 for the mean and 0.003 for the std.
    assert!((mean - 0.4).abs() < 0.02, "mean {mean}");
    assert!((var.sqrt() - 0.4).abs() < 0.02, "std {}", var.sqrt());
}

#[test]
fn non_elite_slots_are_uniform() {
    let fitness = [3.0, 1.0, 2.0, 5.0, 4.0, 6.0];
    let cands: Vec<Individual> = fitness.iter().map(|&f| Individual::new(vec![f], f)).collect();
    let m = 3;
    let trials = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut hits = [0usize; 6];
    for _ in 0..trials {
        let next = elite_random_select(&cands, m, &mut rng).unwrap();
        assert_eq!(next[0].fitness, 1.0);
        for ind in &next[1..] {
            hits[ind.fitness as usize - 1] += 1;
        }
    }
    // Five non-elite candidates share two slots.
    let p = 2.0 / 5.0;
    let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
    for (f, &h) in hits.iter().enumerate().skip(1) {
        let z = (h as f64 - trials as f64 * p) / sigma;
        assert!(z.abs() < 5.0, "fitness {} seen {h} times (z = {z:.2})", f + 1);
    }
    assert_eq!(hits[0], 0);
}

#[test]
fn runs_are_reproducible_across_policies() {
    let bounds = SearchBounds::unit(5).unwrap();
    let a = optimize(sphere, &bounds, &LfwaConfig { rng_seed: 4, execution: Execution::Sequential, ..Default::default() }).unwrap();
    let b = optimize(sphere, &bounds, &LfwaConfig { rng_seed: 4, execution: Execution::Parallel, ..Default::default() }).unwrap();
    assert_eq!(a, b);
    let history_a = lfwa_fs::lfwa::write_history(&a.history);
    assert_eq!(history_a, lfwa_fs::lfwa::write_history(&b.history));
    assert_eq!(lfwa_fs::lfwa::parse_history(&history_a).unwrap().len(), a.history.len());
}

#[test]
fn non_finite_objective_names_the_position() {
    let bounds = SearchBounds::unit(2).unwrap();
    let err = optimize(|_| f64::NAN, &bounds, &LfwaConfig::default()).unwrap_err();
    assert!(err.to_string().contains("position"), "{err}");
}
