mod common;

use citysim::equilibrium::{
    pure_nash, support_enumeration, verify_equilibrium, verify_profile, BimatrixGame, EquilibriumKind, DEFAULT_TOL,
};
use citysim::model::InteractionMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_game<R: Rng>(rng: &mut R, p: usize, s: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut m = || (0..p).map(|_| (0..s).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    (m(), m())
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |d, (x, y)| d.max((x - y).abs()))
}

#[test]
fn pure_cells_of_the_built_in_matrix() {
    let m = InteractionMatrix::default();
    let game = BimatrixGame::common_interest(&m);
    let cells = pure_nash(&game);
    assert_eq!(cells, common::pure_nash_oracle(&m));
    for &(i, j) in &cells {
        assert!(verify_profile(&game, &unit(8, i), &unit(13, j), 0.0));
    }
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = 1.0;
    v
}

#[test]
fn non_row_maximal_cell_fails_verification() {
    let m = InteractionMatrix::default();
    let game = BimatrixGame::common_interest(&m);
    let cells = pure_nash(&game);
    let mut rejected = 0;
    for p in 0..8 {
        for s in 0..13 {
            let row_max = (0..13).all(|t| m.get(p, t) <= m.get(p, s));
            if !row_max {
                assert!(!verify_profile(&game, &unit(8, p), &unit(13, s), DEFAULT_TOL));
                assert!(!cells.contains(&(p, s)));
                rejected += 1;
            }
        }
    }
    assert!(rejected > 0);
}

#[test]
fn random_three_by_three_games_match_cramer_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for trial in 0..100 {
        let (a, b) = random_game(&mut rng, 3, 3);
        let game = BimatrixGame::from_rows(&a, &b).unwrap();
        let found = support_enumeration(&game, 3, DEFAULT_TOL).unwrap();
        let oracle = common::equilibria_oracle(&a, &b);
        assert_eq!(found.equilibria.len(), oracle.len(), "trial {trial}");
        for eq in &found.equilibria {
            assert!(verify_equilibrium(&game, eq, 1e-9));
            assert!(oracle.iter().any(|(x, y)| linf(x, &eq.sigma_p).max(linf(y, &eq.sigma_s)) < 1e-6), "trial {trial}");
        }
        assert!(!found.report.degenerate, "trial {trial}");
    }
}

#[test]
fn rectangular_games_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..50 {
        let (a, b) = random_game(&mut rng, 2, 4);
        let game = BimatrixGame::from_rows(&a, &b).unwrap();
        let found = support_enumeration(&game, 2, DEFAULT_TOL).unwrap();
        assert!(!found.equilibria.is_empty());
        assert_eq!(found.equilibria.len(), common::equilibria_oracle(&a, &b).len());
        assert!(found.equilibria.iter().all(|e| verify_equilibrium(&game, e, 1e-9)));
    }
}

#[test]
fn positive_affine_rescaling_keeps_equilibria() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..30 {
        let (a, b) = random_game(&mut rng, 3, 3);
        let scale = |m: &Vec<Vec<f64>>, k: f64, c: f64| -> Vec<Vec<f64>> {
            m.iter().map(|r| r.iter().map(|v| k * v + c).collect()).collect()
        };
        let g1 = BimatrixGame::from_rows(&a, &b).unwrap();
        let g2 = BimatrixGame::from_rows(&scale(&a, 3.0, 1.0), &scale(&b, 0.5, -2.0)).unwrap();
        let e1 = support_enumeration(&g1, 3, DEFAULT_TOL).unwrap().equilibria;
        let e2 = support_enumeration(&g2, 3, DEFAULT_TOL).unwrap().equilibria;
        assert_eq!(e1.len(), e2.len());
        for (x, y) in e1.iter().zip(&e2) {
            assert!(linf(&x.sigma_p, &y.sigma_p) < 1e-9 && linf(&x.sigma_s, &y.sigma_s) < 1e-9);
        }
    }
}

#[test]
fn built_in_matrix_counts_are_reported() {
    let m = InteractionMatrix::default();
    let game = BimatrixGame::common_interest(&m);
    let found = support_enumeration(&game, 8, DEFAULT_TOL).unwrap();
    let pure = found.equilibria.iter().filter(|e| e.kind == EquilibriumKind::Pure).count();
    assert_eq!(pure, pure_nash(&game).len());
    assert!(found.equilibria.iter().all(|e| verify_equilibrium(&game, e, 1e-9)));
    assert!(found.report.support_pairs > 0);
    // pairwise distinct
    for (i, a) in found.equilibria.iter().enumerate() {
        for b in &found.equilibria[i + 1..] {
            assert!(linf(&a.sigma_p, &b.sigma_p).max(linf(&a.sigma_s, &b.sigma_s)) >= 1e-6);
        }
    }
}
