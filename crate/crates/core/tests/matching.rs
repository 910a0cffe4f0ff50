mod common;

use std::collections::HashMap;

use citysim::demographics::DemographicsParams;
use citysim::matching::{
    build_weights, partitioned_match, plan_matings, solve_assignment, MatchMode, MatchParams, MatchPlan, MatchWeights,
};
use citysim::model::{InteractionMatrix, Person, Sex, TraitVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense(values: Vec<f64>, n: usize, m: usize) -> MatchWeights {
    MatchWeights::dense(MatchMode::Noisy, (0..n as u64).collect(), (100..100 + m as u64).collect(), values).unwrap()
}

fn person(id: u64, sex: Sex, traits: Vec<f64>, location: Option<(u32, u32)>) -> Person {
    Person {
        id,
        sex,
        traits: TraitVector::clipped(traits),
        happiness: 1.0,
        birth_time: 0.0,
        death_time: 100.0,
        next_available_time: 0.0,
        location,
        group: None,
    }
}

fn random_people<R: Rng>(rng: &mut R, n: usize, sex: Sex, first_id: u64) -> Vec<Person> {
    (0..n)
        .map(|i| person(first_id + i as u64, sex, (0..8).map(|_| rng.random()).collect(), None))
        .collect()
}

#[test]
fn small_examples() {
    let p = solve_assignment(&dense(vec![5.0], 1, 1));
    assert_eq!((p.pairs, p.total_weight), (vec![(0, 100)], 5.0));
    let p = solve_assignment(&dense(vec![2.0, 1.0, 1.0, 2.0], 2, 2));
    assert_eq!((p.pairs, p.total_weight), (vec![(0, 100), (1, 101)], 4.0));
    let p = solve_assignment(&dense(vec![], 0, 3));
    assert!(p.pairs.is_empty());
}

#[test]
fn random_six_by_six_equals_brute_force() {
    let perms = common::permutations(6);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..1000 {
        let w: Vec<f64> = (0..36).map(|_| rng.random_range(-2.0..2.0)).collect();
        let plan = solve_assignment(&dense(w.clone(), 6, 6));
        assert_eq!(plan.total_weight, common::brute_force_max(&w, 6, &perms));
    }
}

#[test]
fn rectangular_covers_smaller_side_optimally() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for (n, m) in [(2, 5), (5, 3), (1, 4), (4, 1)] {
        for _ in 0..200 {
            let w: Vec<f64> = (0..n * m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let plan = solve_assignment(&dense(w.clone(), n, m));
            assert_eq!(plan.pairs.len(), n.min(m));
            // pad to square with zeros and compare with brute force
            let k = n.max(m);
            let mut sq = vec![0.0; k * k];
            for i in 0..n {
                for j in 0..m {
                    sq[i * k + j] = w[i * m + j];
                }
            }
            let best = common::brute_force_max(&sq, k, &common::permutations(k));
            assert!((plan.total_weight - best).abs() < 1e-12);
        }
    }
}

#[test]
fn optimal_weights_match_expected_child_cell() {
    let matrix = InteractionMatrix::default();
    let demo = DemographicsParams { mutation_prob: 0.0, ..Default::default() };
    let a = TraitVector::indicator(0, 8).into_inner();
    let y = [person(0, Sex::Male, a.clone(), Some((0, 0)))];
    let z = [person(1, Sex::Female, a, Some((1, 1)))];
    let yr: Vec<&Person> = y.iter().collect();
    let zr: Vec<&Person> = z.iter().collect();
    let theta = TraitVector::indicator(0, 13);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let w = build_weights(&yr, &zr, &theta, &matrix, &MatchParams::default(), &demo, &mut rng).unwrap();
    assert!((w.get(0, 0) - 0.9).abs() < 1e-12);
    let loc = MatchParams { mode: MatchMode::Locality, gamma: 1.0, ..Default::default() };
    let w = build_weights(&yr, &zr, &theta, &matrix, &loc, &demo, &mut rng).unwrap();
    assert!((w.get(0, 0) + 1.1).abs() < 1e-12);
    let empty = build_weights(&[], &zr, &theta, &matrix, &MatchParams::default(), &demo, &mut rng).unwrap();
    assert_eq!((empty.rows(), empty.cols()), (0, 1));
}

#[test]
fn structured_solvers_agree_with_dense_hungarian() {
    let matrix = InteractionMatrix::default();
    let demo = DemographicsParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..100 {
        let (n, m) = (rng.random_range(1..15), rng.random_range(1..15));
        let mut y = random_people(&mut rng, n, Sex::Male, 0);
        let mut z = random_people(&mut rng, m, Sex::Female, 1000);
        for p in y.iter_mut().chain(z.iter_mut()) {
            p.location = Some((rng.random_range(0..3), rng.random_range(0..3)));
        }
        let theta = TraitVector::clipped((0..13).map(|_| rng.random()).collect());
        let yr: Vec<&Person> = y.iter().collect();
        let zr: Vec<&Person> = z.iter().collect();
        for mode in [MatchMode::Optimal, MatchMode::Locality] {
            let params = MatchParams { mode, ..Default::default() };
            let w = build_weights(&yr, &zr, &theta, &matrix, &params, &demo, &mut rng).unwrap();
            let plan = solve_assignment(&w);
            let reference = solve_assignment(&dense(w.to_dense(), n, m));
            assert_eq!(plan.pairs.len(), n.min(m));
            assert!(
                (plan.total_weight - reference.total_weight).abs() < 1e-9,
                "trial {trial} {mode:?}: {} vs {}",
                plan.total_weight,
                reference.total_weight
            );
        }
    }
}

fn noise_free_total(plan: &MatchPlan, w: &MatchWeights) -> f64 {
    let row: HashMap<u64, usize> = w.y_ids().iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let col: HashMap<u64, usize> = w.z_ids().iter().enumerate().map(|(j, &id)| (id, j)).collect();
    plan.pairs.iter().map(|(a, b)| w.get(row[a], col[b])).sum()
}

#[test]
fn partitioned_never_beats_global_optimum() {
    let matrix = InteractionMatrix::default();
    let demo = DemographicsParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..100 {
        let (n, m) = (rng.random_range(1..40), rng.random_range(1..40));
        let y = random_people(&mut rng, n, Sex::Male, 0);
        let z = random_people(&mut rng, m, Sex::Female, 1000);
        let yr: Vec<&Person> = y.iter().collect();
        let zr: Vec<&Person> = z.iter().collect();
        let theta = TraitVector::clipped((0..13).map(|_| rng.random()).collect());
        let exact = build_weights(&yr, &zr, &theta, &matrix, &MatchParams::default(), &demo, &mut rng).unwrap();
        let best = solve_assignment(&exact).total_weight;
        let params = MatchParams { mode: MatchMode::Partitioned, noise_std: 0.0, partition_size: 7, ..Default::default() };
        let mut prng = ChaCha8Rng::seed_from_u64(rng.random());
        let plan = partitioned_match(&yr, &zr, &theta, &matrix, &params, &demo, &mut prng, &mut rng).unwrap();
        assert!(noise_free_total(&plan, &exact) <= best + 1e-9);
    }
}

fn permutation_frequencies(mode: MatchMode, partition_size: usize, trials: usize) -> HashMap<Vec<(u64, u64)>, f64> {
    let matrix = InteractionMatrix::default();
    let demo = DemographicsParams::default();
    let y: Vec<Person> = (0..3).map(|i| person(i, Sex::Male, vec![0.2 + 0.3 * i as f64; 8], None)).collect();
    let z: Vec<Person> = (0..3).map(|i| person(10 + i, Sex::Female, vec![0.9 - 0.3 * i as f64; 8], None)).collect();
    let yr: Vec<&Person> = y.iter().collect();
    let zr: Vec<&Person> = z.iter().collect();
    let theta = TraitVector::splat(0.5, 13);
    let params = MatchParams { mode, partition_size, noise_std: 0.3, ..Default::default() };
    let mut prng = ChaCha8Rng::seed_from_u64(1);
    let mut nrng = ChaCha8Rng::seed_from_u64(2);
    let mut counts: HashMap<Vec<(u64, u64)>, f64> = HashMap::new();
    for _ in 0..trials {
        let plan = if mode == MatchMode::Partitioned {
            partitioned_match(&yr, &zr, &theta, &matrix, &params, &demo, &mut prng, &mut nrng).unwrap()
        } else {
            solve_assignment(&build_weights(&yr, &zr, &theta, &matrix, &params, &demo, &mut nrng).unwrap())
        };
        let mut pairs = plan.pairs;
        pairs.sort_unstable();
        *counts.entry(pairs).or_insert(0.0) += 1.0 / trials as f64;
    }
    counts
}

#[test]
fn one_block_partition_matches_global_noisy_distribution() {
    let global = permutation_frequencies(MatchMode::Noisy, 20, 4000);
    let blocked = permutation_frequencies(MatchMode::Partitioned, 20, 4000);
    for (k, f) in &global {
        let g = blocked.get(k).copied().unwrap_or(0.0);
        assert!((f - g).abs() < 0.04, "{k:?}: {f} vs {g}");
    }
}

#[test]
fn unit_partition_pairs_uniformly() {
    let freq = permutation_frequencies(MatchMode::Partitioned, 1, 6000);
    assert_eq!(freq.len(), 6);
    for f in freq.values() {
        assert!((f - 1.0 / 6.0).abs() < 0.03, "{f}");
    }
}

#[test]
fn plan_filtering() {
    let d = DemographicsParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut pop = vec![
        person(0, Sex::Male, vec![0.5; 8], None),
        person(1, Sex::Female, vec![0.5; 8], None),
        person(2, Sex::Male, vec![0.5; 8], None),
        person(3, Sex::Female, vec![0.5; 8], None),
    ];
    pop[2].happiness = -1.0;
    pop[3].happiness = -1.0;
    let empty = MatchPlan { mode: MatchMode::Optimal, pairs: vec![], total_weight: 0.0 };
    assert!(plan_matings(&empty, &pop, 0, &d, &mut rng).unwrap().is_empty());
    let plan = MatchPlan { mode: MatchMode::Optimal, pairs: vec![(0, 1), (2, 3)], total_weight: 0.0 };
    assert_eq!(plan_matings(&plan, &pop, 0, &d, &mut rng).unwrap(), vec![(0, 1)]);
    assert!(plan_matings(&plan, &pop, 1000, &d, &mut rng).unwrap().is_empty());
}
