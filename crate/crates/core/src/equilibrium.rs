//! Nash equilibria of two-player bimatrix games.
//!
//! Pure equilibria are read off directly. Mixed equilibria come from
//! support enumeration over supports of equal size: for each pair of
//! supports the two indifference systems are solved and the solution is
//! kept only if it is a genuine best response everywhere.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::InteractionMatrix;

pub const DEFAULT_TOL: f64 = 1e-9;
/// L-infinity radius under which two profiles count as the same equilibrium.
pub const DEDUP_RADIUS: f64 = 1e-6;
/// Relative pivot size below which a support system is treated as singular.
const PIVOT_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BimatrixGame {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl BimatrixGame {
    /// `a` pays the row player, `b` the column player.
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if a.shape() != b.shape() {
            return Err(Error::config(
                "game",
                format!("payoff shapes differ: {:?} vs {:?}", a.shape(), b.shape()),
            ));
        }
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::config("game", "payoff matrices must be non-empty"));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::config("game", "payoffs must be finite"));
        }
        Ok(BimatrixGame { a, b })
    }

    pub fn from_rows(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Self> {
        let to_matrix = |rows: &[Vec<f64>], name: &str| -> Result<DMatrix<f64>> {
            let m = rows.first().map_or(0, Vec::len);
            if rows.iter().any(|r| r.len() != m) {
                return Err(Error::config(name, "ragged payoff rows"));
            }
            Ok(DMatrix::from_fn(rows.len(), m, |i, j| rows[i][j]))
        };
        BimatrixGame::new(to_matrix(a, "game.a")?, to_matrix(b, "game.b")?)
    }

    /// Both players receive the interaction matrix; the population picks rows.
    pub fn common_interest(matrix: &InteractionMatrix) -> Self {
        let a = DMatrix::from_row_slice(matrix.individual_dim(), matrix.society_dim(), matrix.entries());
        BimatrixGame { b: a.clone(), a }
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn shape(&self) -> (usize, usize) {
        self.a.shape()
    }

    /// Expected payoffs (row, column) of a mixed profile.
    pub fn payoffs(&self, x: &[f64], y: &[f64]) -> (f64, f64) {
        let (xv, yv) = (DVector::from_column_slice(x), DVector::from_column_slice(y));
        ((xv.transpose() * &self.a * &yv)[0], (xv.transpose() * &self.b * &yv)[0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    Pure,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub sigma_p: Vec<f64>,
    pub sigma_s: Vec<f64>,
    pub payoffs: (f64, f64),
    pub supports: (Vec<usize>, Vec<usize>),
    pub kind: EquilibriumKind,
}

impl Equilibrium {
    pub fn pure(game: &BimatrixGame, i: usize, j: usize) -> Self {
        let (p, s) = game.shape();
        let mut x = vec![0.0; p];
        let mut y = vec![0.0; s];
        x[i] = 1.0;
        y[j] = 1.0;
        Equilibrium {
            sigma_p: x,
            sigma_s: y,
            payoffs: (game.a[(i, j)], game.b[(i, j)]),
            supports: (vec![i], vec![j]),
            kind: EquilibriumKind::Pure,
        }
    }

    fn distance(&self, other: &Equilibrium) -> f64 {
        self.sigma_p
            .iter()
            .zip(&other.sigma_p)
            .chain(self.sigma_s.iter().zip(&other.sigma_s))
            .fold(0.0, |d, (a, b)| d.max((a - b).abs()))
    }
}

/// Cells where the row is a best response to the column and vice versa,
/// in row-major order.
pub fn pure_nash(game: &BimatrixGame) -> Vec<(usize, usize)> {
    let (p, s) = game.shape();
    let col_max: Vec<f64> = (0..s).map(|j| game.a.column(j).max()).collect();
    let row_max: Vec<f64> = (0..p).map(|i| game.b.row(i).max()).collect();
    let mut cells = Vec::new();
    for i in 0..p {
        for j in 0..s {
            if game.a[(i, j)] >= col_max[j] && game.b[(i, j)] >= row_max[i] {
                cells.push((i, j));
            }
        }
    }
    cells
}

/// True when neither player gains more than `tol` by deviating unilaterally.
pub fn verify_profile(game: &BimatrixGame, x: &[f64], y: &[f64], tol: f64) -> bool {
    let (p, s) = game.shape();
    if x.len() != p || y.len() != s {
        return false;
    }
    let valid = |v: &[f64]| v.iter().all(|&q| q >= -tol) && (v.iter().sum::<f64>() - 1.0).abs() <= tol;
    if !valid(x) || !valid(y) {
        return false;
    }
    let (xv, yv) = (DVector::from_column_slice(x), DVector::from_column_slice(y));
    let row_payoffs = &game.a * &yv;
    let col_payoffs = game.b.tr_mul(&xv);
    let (u, v) = game.payoffs(x, y);
    row_payoffs.max() <= u + tol && col_payoffs.max() <= v + tol
}

pub fn verify_equilibrium(game: &BimatrixGame, eq: &Equilibrium, tol: f64) -> bool {
    verify_profile(game, &eq.sigma_p, &eq.sigma_s, tol)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub support_pairs: usize,
    /// Support pairs whose indifference system had no unique solution.
    pub singular_systems: usize,
    /// Feasible solutions that put zero weight on a member of their support.
    /// These are kept under the support they actually use.
    pub zero_probability_supports: usize,
    /// Accepted solutions that merged into an equilibrium already found.
    pub duplicates: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportEnumeration {
    pub equilibria: Vec<Equilibrium>,
    pub report: DegeneracyReport,
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..k).rev().find(|&i| cur[i] != i + n - k) else {
            return out;
        };
        cur[pos] += 1;
        for i in pos + 1..k {
            cur[i] = cur[i - 1] + 1;
        }
    }
}

enum Solve {
    Singular,
    Solved(Vec<f64>),
}

/// Mixed strategy over the columns of `m` (restricted rows x support
/// columns) that equalises every row, padded to `full` entries.
fn indifference(m: &DMatrix<f64>, cols: &[usize], full: usize) -> Solve {
    let k = m.nrows();
    let mut sys = DMatrix::zeros(k + 1, k + 1);
    for r in 0..k {
        for c in 0..k {
            sys[(r, c)] = m[(r, c)];
        }
        sys[(r, k)] = -1.0;
    }
    for c in 0..k {
        sys[(k, c)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let lu = sys.full_piv_lu();
    let u = lu.u();
    let pivots = u.diagonal().map(f64::abs);
    if pivots.min() <= PIVOT_RATIO * pivots.max() {
        return Solve::Singular;
    }
    match lu.solve(&rhs) {
        Some(sol) if sol.iter().all(|v| v.is_finite()) => {
            let mut out = vec![0.0; full];
            for (c, &j) in cols.iter().enumerate() {
                out[j] = sol[c];
            }
            Solve::Solved(out)
        }
        _ => Solve::Singular,
    }
}

enum Outcome {
    Singular,
    Infeasible,
    ZeroWeight(Option<Equilibrium>),
    Found(Equilibrium),
}

fn try_supports(game: &BimatrixGame, rows: &[usize], cols: &[usize], tol: f64) -> Outcome {
    let (p, s) = game.shape();
    let a_sub = game.a.select_rows(rows).select_columns(cols);
    let b_sub_t = game.b.select_rows(rows).select_columns(cols).transpose();
    let y = match indifference(&a_sub, cols, s) {
        Solve::Singular => return Outcome::Singular,
        Solve::Solved(y) => y,
    };
    let x = match indifference(&b_sub_t, rows, p) {
        Solve::Singular => return Outcome::Singular,
        Solve::Solved(x) => x,
    };
    if x.iter().chain(&y).any(|&q| q < -tol) {
        return Outcome::Infeasible;
    }
    let clean = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|q| q.max(0.0)).collect() };
    let (x, y) = (clean(x), clean(y));
    if !verify_profile(game, &x, &y, tol) {
        return Outcome::Infeasible;
    }
    let positive = |v: &[f64]| -> Vec<usize> { (0..v.len()).filter(|&i| v[i] > tol).collect() };
    let supports = (positive(&x), positive(&y));
    let zero = supports.0.len() < rows.len() || supports.1.len() < cols.len();
    let kind = if supports.0.len() == 1 && supports.1.len() == 1 {
        EquilibriumKind::Pure
    } else {
        EquilibriumKind::Mixed
    };
    let eq = Equilibrium { payoffs: game.payoffs(&x, &y), sigma_p: x, sigma_s: y, supports, kind };
    if zero {
        Outcome::ZeroWeight(Some(eq))
    } else {
        Outcome::Found(eq)
    }
}

fn support_size(eq: &Equilibrium) -> usize {
    eq.supports.0.len() + eq.supports.1.len()
}

/// Equilibria supported on equal-size strategy sets of size
/// `1..=max_support`, sorted by support sets.
pub fn support_enumeration(game: &BimatrixGame, max_support: usize, tol: f64) -> Result<SupportEnumeration> {
    let (p, s) = game.shape();
    if max_support == 0 || max_support > p.min(s) {
        return Err(Error::config("max_support", format!("must lie in 1..={}", p.min(s))));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::config("tol", "must be positive"));
    }
    let pairs: Vec<(Vec<usize>, Vec<usize>)> = (1..=max_support)
        .flat_map(|k| {
            let col_sets = subsets(s, k);
            subsets(p, k)
                .into_iter()
                .flat_map(move |r| col_sets.clone().into_iter().map(move |c| (r.clone(), c)))
        })
        .collect();
    let outcomes: Vec<Outcome> = pairs.par_iter().map(|(r, c)| try_supports(game, r, c, tol)).collect();

    let mut report = DegeneracyReport { support_pairs: pairs.len(), ..Default::default() };
    let mut found = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Singular => report.singular_systems += 1,
            Outcome::Infeasible => {}
            Outcome::ZeroWeight(eq) => {
                report.zero_probability_supports += 1;
                found.extend(eq);
            }
            Outcome::Found(eq) => found.push(eq),
        }
    }
    // Smallest supports first, so a duplicate keeps its tightest description.
    found.sort_by(|a, b| support_size(a).cmp(&support_size(b)).then_with(|| a.supports.cmp(&b.supports)));
    let mut equilibria: Vec<Equilibrium> = Vec::new();
    for eq in found {
        if equilibria.iter().any(|e| e.distance(&eq) < DEDUP_RADIUS) {
            report.duplicates += 1;
        } else {
            equilibria.push(eq);
        }
    }
    equilibria.sort_by(|a, b| a.supports.cmp(&b.supports));
    report.degenerate = report.singular_systems > 0 || report.zero_probability_supports > 0;
    Ok(SupportEnumeration { equilibria, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game(a: &[&[f64]], b: &[&[f64]]) -> BimatrixGame {
        let rows = |m: &[&[f64]]| m.iter().map(|r| r.to_vec()).collect::<Vec<_>>();
        BimatrixGame::from_rows(&rows(a), &rows(b)).unwrap()
    }

    #[test]
    fn coordination_game() {
        let g = game(&[&[1.0, 0.0], &[0.0, 1.0]], &[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(pure_nash(&g), vec![(0, 0), (1, 1)]);
        let all = support_enumeration(&g, 2, DEFAULT_TOL).unwrap();
        assert_eq!(all.equilibria.len(), 3);
        let mixed = &all.equilibria[1];
        assert_eq!(mixed.kind, EquilibriumKind::Mixed);
        for q in mixed.sigma_p.iter().chain(&mixed.sigma_s) {
            assert!((q - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn matching_pennies() {
        let g = game(&[&[1.0, -1.0], &[-1.0, 1.0]], &[&[-1.0, 1.0], &[1.0, -1.0]]);
        assert!(pure_nash(&g).is_empty());
        let all = support_enumeration(&g, 2, DEFAULT_TOL).unwrap();
        assert_eq!(all.equilibria.len(), 1);
        assert_eq!(all.equilibria[0].sigma_p, vec![0.5, 0.5]);
        assert_eq!(all.equilibria[0].sigma_s, vec![0.5, 0.5]);
    }

    #[test]
    fn dominant_cell() {
        let g = game(&[&[3.0, 2.0], &[1.0, 0.0]], &[&[3.0, 1.0], &[2.0, 0.0]]);
        assert_eq!(pure_nash(&g), vec![(0, 0)]);
    }

    #[test]
    fn subsets_are_lexicographic() {
        assert_eq!(subsets(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(subsets(2, 3), Vec::<Vec<usize>>::new());
    }

    #[test]
    fn perturbed_mixed_profile_fails_verification() {
        let g = game(&[&[1.0, 0.0], &[0.0, 1.0]], &[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(verify_profile(&g, &[0.5, 0.5], &[0.5, 0.5], DEFAULT_TOL));
        assert!(!verify_profile(&g, &[0.5, 0.5], &[0.55, 0.45], DEFAULT_TOL));
    }

    #[test]
    fn rejects_bad_arguments() {
        let g = game(&[&[1.0]], &[&[1.0]]);
        assert!(support_enumeration(&g, 2, DEFAULT_TOL).is_err());
        assert!(support_enumeration(&g, 1, 0.0).is_err());
        assert!(BimatrixGame::from_rows(&[vec![1.0, 2.0]], &[vec![1.0]]).is_err());
    }
}
