use citysim::demographics::{lifespan, mating_gap, DemographicsParams};
use citysim::matching::MatchMode;
use citysim::model::{happiness, InteractionMatrix, Person, Sex, TraitVector};
use citysim::scenario::{preset, PRESETS};
use citysim::sim::{available, run, update_pop, RunStatus, SeedGroup, SimConfig, Simulation, TraitSpread};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform_matrix(v: f64) -> InteractionMatrix {
    let d = InteractionMatrix::default();
    InteractionMatrix::new(d.row_names().to_vec(), d.col_names().to_vec(), vec![v; 8 * 13]).unwrap()
}

fn couple_config(seed: u64) -> SimConfig {
    let mut c = SimConfig::new(vec![SeedGroup { count: 2, mean: vec![1.0; 8], std: TraitSpread::Scalar(0.0) }]);
    c.seed = seed;
    c.theta0 = TraitVector::splat(1.0, 13);
    c.learning_rate.multiplier = 0.0;
    c.demographics.mutation_prob = 0.0;
    c.max_time = 3.0;
    c
}

#[test]
fn hermetic_couple_by_hand() {
    let matrix = uniform_matrix(0.05);
    let demo = DemographicsParams::default();
    // one male and one female
    let seed = (0..100)
        .find(|&s| {
            let sim = Simulation::with_matrix(couple_config(s), matrix.clone()).unwrap();
            let p = sim.population();
            p[0].sex != p[1].sex
        })
        .unwrap();
    let mut sim = Simulation::with_matrix(couple_config(seed), matrix.clone()).unwrap();
    let h = 0.05 * 104.0;
    assert!(h > 10f64.ln());
    for p in sim.population() {
        assert!((p.happiness - h).abs() < 1e-12);
    }
    let life = lifespan(h, &demo);
    let gap = mating_gap(h, &demo);
    assert!(gap < 1.0 && life > 3.0);

    // Everyone has the same traits, so every available opposite-sex pair
    // clears the threshold and the matching size is min(males, females).
    let mut expected_n = 2usize;
    for round in 1..=3u64 {
        let t = round as f64;
        let before: Vec<Person> = sim.population().to_vec();
        let (males, females) = available(&before, t);
        let births = males.len().min(females.len());
        sim.step().unwrap();
        expected_n += births;
        let pop = sim.population();
        assert_eq!(pop.len(), expected_n, "round {round}");
        for child in pop.iter().filter(|p| p.birth_time == t) {
            assert_eq!(child.traits, TraitVector::splat(1.0, 8));
            assert!((child.happiness - h).abs() < 1e-12);
            assert_eq!(child.death_time, t + life);
            assert_eq!(child.next_available_time, t + 1.0);
        }
        let parents = pop.iter().filter(|p| p.birth_time < t && p.next_available_time == t + gap).count();
        assert_eq!(parents, 2 * births, "round {round}");
        assert_eq!(sim.theta(), &TraitVector::splat(1.0, 13));
        let row = sim.log().rows.last().unwrap();
        assert_eq!((row.time, row.population, row.births, row.deaths), (t, expected_n, births, 0));
    }
    assert_eq!(sim.status(), Some(RunStatus::Completed));
    assert_eq!(sim.log().rows.len(), 3);
}

#[test]
fn zero_horizon_has_header_only_log() {
    let mut sc = preset("criminal-75-25").unwrap();
    sc.simulation.max_time = 0.0;
    let out = run(&sc.simulation).unwrap();
    assert_eq!(out.status, RunStatus::Completed);
    assert!(out.log.rows.is_empty());
    assert_eq!(out.log.to_csv_string().lines().count(), 1);
    assert_eq!(out.min_population(), (200, 0.0));
}

#[test]
fn identical_seeds_give_identical_logs() {
    for (name, _) in PRESETS {
        let mut sc = preset(name).unwrap();
        sc.simulation.max_time = 30.0;
        let a = run(&sc.simulation).unwrap().log.to_csv_string();
        let b = run(&sc.simulation).unwrap().log.to_csv_string();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn different_seeds_differ() {
    let mut sc = preset("criminal-75-25").unwrap();
    sc.simulation.max_time = 10.0;
    let a = run(&sc.simulation).unwrap().log.to_csv_string();
    sc.simulation.seed += 1;
    let b = run(&sc.simulation).unwrap().log.to_csv_string();
    assert_ne!(a, b);
}

#[test]
fn noise_toggle_keeps_initial_draws() {
    let mut sc = preset("high-intellect-pop-in-criminal-city").unwrap();
    sc.simulation.max_time = 5.0;
    let a = run(&sc.simulation).unwrap();
    sc.simulation.matching.mode = MatchMode::Noisy;
    let b = run(&sc.simulation).unwrap();
    assert_eq!(a.initial_population, b.initial_population);
}

#[test]
fn zero_spread_copies_the_mean() {
    let mean = vec![0.2, 0.4, 0.6, 0.8, 0.1, 0.3, 0.5, 0.7];
    let mut c = SimConfig::new(vec![SeedGroup { count: 30, mean: mean.clone(), std: TraitSpread::Scalar(0.0) }]);
    c.max_time = 0.0;
    let sim = Simulation::new(c).unwrap();
    assert!(sim.population().iter().all(|p| p.traits.as_slice() == mean.as_slice()));
}

#[test]
fn large_group_sample_mean() {
    let mut c = SimConfig::new(vec![SeedGroup { count: 10_000, mean: vec![0.5; 8], std: TraitSpread::Scalar(0.1) }]);
    c.max_time = 0.0;
    let sim = Simulation::new(c).unwrap();
    for k in 0..8 {
        let m = sim.population().iter().map(|p| p.traits[k]).sum::<f64>() / 10_000.0;
        assert!((m - 0.5).abs() < 0.005, "trait {k}: {m}");
    }
}

#[test]
fn group_counts_and_tags() {
    let sc = preset("agrarian-80-20").unwrap();
    let sim = Simulation::new(sc.simulation).unwrap();
    let tagged = |g| sim.population().iter().filter(|p| p.group == Some(g)).count();
    assert_eq!((tagged(0), tagged(1)), (160, 40));
}

fn person(id: u64, sex: Sex, birth: f64, death: f64, avail: f64) -> Person {
    Person {
        id,
        sex,
        traits: TraitVector::splat(0.5, 8),
        happiness: 1.0,
        birth_time: birth,
        death_time: death,
        next_available_time: avail,
        location: None,
        group: None,
    }
}

#[test]
fn available_boundaries() {
    let roster = vec![
        person(0, Sex::Male, 0.0, 10.0, 1.0),
        person(1, Sex::Female, 0.0, 5.0, 2.0),
        person(2, Sex::Male, 0.0, 5.0, 5.0),
        person(3, Sex::Female, 3.0, 20.0, 4.0),
        person(4, Sex::Female, 0.0, 4.5, 0.0),
    ];
    let ids = |v: Vec<&Person>| v.into_iter().map(|p| p.id).collect::<Vec<_>>();
    let (m, f) = available(&roster, 0.5);
    assert!(m.is_empty());
    assert_eq!(ids(f), vec![4]);
    let (m, f) = available(&roster, 4.0);
    assert_eq!((ids(m), ids(f)), (vec![0], vec![1, 3, 4]));
    // death is exclusive
    let (m, f) = available(&roster, 5.0);
    assert_eq!((ids(m), ids(f)), (vec![0], vec![3]));
    let young = [person(9, Sex::Male, 2.0, 9.0, 2.0)];
    let (m, f) = available(&young, 1.0);
    assert!(m.is_empty() && f.is_empty());
}

#[test]
fn update_pop_matches_naive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.random_range(0..30);
        let mut roster: Vec<Person> = (0..n)
            .map(|i| person(i, Sex::Male, 0.0, rng.random_range(0.0..10.0), 0.0))
            .collect();
        let births: Vec<Person> = (n..n + rng.random_range(0..10))
            .map(|i| person(i, Sex::Female, 5.0, rng.random_range(5.0..15.0), 6.0))
            .collect();
        let t = rng.random_range(0.0..10.0);
        let mut oracle: Vec<Person> = Vec::new();
        for p in roster.iter().chain(&births) {
            if !(p.death_time <= t) {
                oracle.push(p.clone());
            }
        }
        let removed = update_pop(&mut roster, births.clone(), t).unwrap();
        assert_eq!(roster, oracle);
        assert_eq!(removed, n as usize + births.len() - oracle.len());
    }
}

#[test]
fn update_pop_edge_cases() {
    let mut roster = vec![person(0, Sex::Male, 0.0, 10.0, 0.0)];
    assert_eq!(update_pop(&mut roster, vec![], 1.0).unwrap(), 0);
    assert_eq!(roster.len(), 1);
    let births = vec![person(1, Sex::Female, 1.0, 50.0, 2.0)];
    update_pop(&mut roster, births, 10.0).unwrap();
    assert_eq!(roster.iter().map(|p| p.id).collect::<Vec<_>>(), vec![1]);
    let dup = vec![person(1, Sex::Male, 1.0, 50.0, 2.0)];
    assert!(update_pop(&mut roster, dup, 10.0).is_err());
}

#[test]
fn population_invariants_hold_every_round() {
    let mut sc = preset("criminal-75-25").unwrap();
    sc.simulation.max_time = 60.0;
    let matrix = sc.simulation.load_matrix().unwrap();
    let mut sim = Simulation::new(sc.simulation.clone()).unwrap();
    sim.set_audit(true);
    let mut last_theta = sim.theta().clone();
    while !sim.is_finished() {
        let prev_theta = sim.theta().clone();
        sim.step().unwrap();
        let t = sim.time();
        for p in sim.population() {
            assert!(p.death_time > t, "dead person kept at {t}");
            assert!(p.traits.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
            if p.birth_time == t {
                let h = happiness(&p.traits, &matrix, &prev_theta).unwrap();
                assert!((p.happiness - h).abs() < 1e-12);
            }
        }
        let mut ids: Vec<u64> = sim.population().iter().map(|p| p.id).collect();
        ids.dedup();
        assert_eq!(ids.len(), sim.population().len());
        assert!(ids.windows(2).all(|w| w[0] < w[1]));
        assert!(sim.theta().as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
        last_theta = sim.theta().clone();
    }
    assert!(last_theta.dim() == 13);
    let out = sim.finish();
    for e in &out.events {
        assert!(e.father_available_at <= e.time && e.mother_available_at <= e.time);
        assert!(e.father_born_at < e.time && e.mother_born_at < e.time);
    }
    let births: usize = out.log.rows.iter().map(|r| r.births).sum();
    assert_eq!(births, out.events.len());
}

#[test]
fn extinction_when_nobody_is_happy() {
    let mut c = SimConfig::new(vec![SeedGroup { count: 50, mean: vec![0.5; 8], std: TraitSpread::Scalar(0.05) }]);
    c.theta0 = TraitVector::splat(0.0, 13);
    let out = run(&c).unwrap();
    assert_eq!(out.status, RunStatus::Extinct);
    assert!(out.final_population.is_empty());
    assert_eq!(out.log.rows.last().unwrap().population, 0);
}

#[test]
fn locality_grid_keeps_people_on_the_grid() {
    let mut sc = preset("locality-grid").unwrap();
    sc.simulation.max_time = 40.0;
    let out = run(&sc.simulation).unwrap();
    assert!(out.final_population.iter().all(|p| matches!(p.location, Some((x, y)) if x < 10 && y < 10)));
    let last = out.log.grid.last().unwrap().time;
    let total: usize = out.log.grid.iter().filter(|g| g.time == last).map(|g| g.population).sum();
    assert_eq!(total, out.final_population.len());
}

#[test]
fn partitioned_and_noisy_modes_run() {
    for mode in [MatchMode::Noisy, MatchMode::Partitioned] {
        let mut sc = preset("high-intellect-pop-in-criminal-city").unwrap();
        sc.simulation.max_time = 20.0;
        sc.simulation.matching.mode = mode;
        let out = run(&sc.simulation).unwrap();
        assert_eq!(out.log.rows.len() as f64, out.final_time);
    }
}
