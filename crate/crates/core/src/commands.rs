//! The work behind each CLI subcommand. Every function writes its files into
//! `out` and returns what it wrote so callers can inspect the results.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{classical_mds, cluster_summary, kmeans, ClusterSummary, PointSet, DEFAULT_MAX_ITER};
use crate::equilibrium::{pure_nash, support_enumeration, BimatrixGame, DegeneracyReport, Equilibrium, EquilibriumKind};
use crate::error::{Error, Result};
use crate::experiments::{compare_matching, sweep_csv_string, sweep_lambda, ComparisonReport, SweepRun};
use crate::matching::MatchMode;
use crate::model::InteractionMatrix;
use crate::scenario::Scenario;
use crate::sim::{read_population_csv, run, SimOutcome};

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Error::Consistency(e.to_string()))
}

/// One run: `log.csv`, `summary.json`, both population snapshots and, on a
/// grid, `grid.csv`.
pub fn simulate(scenario: &Scenario, out: &Path) -> Result<SimOutcome> {
    let outcome = run(&scenario.simulation)?;
    outcome.write_outputs(out, scenario.simulation.seed)?;
    Ok(outcome)
}

fn label(x: f64) -> String {
    x.to_string()
}

/// One run per (multiplier, seed). Logs go to `log_m{multiplier}.csv`, or
/// `log_m{multiplier}_seed{seed}.csv` with several seeds; the comparison goes
/// to `sweep.csv`.
pub fn sweep(scenario: &Scenario, multipliers: &[f64], seeds: &[u64], out: &Path) -> Result<Vec<SweepRun>> {
    if multipliers.is_empty() || seeds.is_empty() {
        return Err(Error::config("multipliers", "need at least one multiplier and one seed"));
    }
    if let Some(m) = multipliers.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
        return Err(Error::config("multipliers", format!("{m} is not a non-negative number")));
    }
    let results = sweep_lambda(&scenario.simulation, multipliers, seeds)?;
    let mut runs = Vec::with_capacity(results.len());
    for (r, outcome) in results {
        let name = if seeds.len() == 1 {
            format!("log_m{}.csv", label(r.multiplier))
        } else {
            format!("log_m{}_seed{}.csv", label(r.multiplier), r.seed)
        };
        write(out, &name, &outcome.log.to_csv_string())?;
        runs.push(r);
    }
    write(out, "sweep.csv", &sweep_csv_string(&runs))?;
    Ok(runs)
}

/// Optimal against noisy matching on paired seeds. Writes `comparison.json`
/// and a per-run `comparison.csv`.
pub fn compare(scenario: &Scenario, seeds: &[u64], out: &Path) -> Result<ComparisonReport> {
    compare_modes(scenario, MatchMode::Noisy, seeds, out)
}

pub fn compare_modes(scenario: &Scenario, alternative: MatchMode, seeds: &[u64], out: &Path) -> Result<ComparisonReport> {
    if seeds.len() < 2 {
        return Err(Error::config("seeds", "need at least 2 paired seeds"));
    }
    let mut optimal = scenario.simulation.clone();
    optimal.matching.mode = MatchMode::Optimal;
    let mut alt = scenario.simulation.clone();
    alt.matching.mode = alternative;
    let report = compare_matching(&optimal, &alt, seeds)?;
    let mut csv = String::from("seed,mode,min_population,min_population_time,convergent_happiness,final_population\n");
    for (mode, arm) in [("optimal", &report.optimal), (mode_name(alternative), &report.alternative)] {
        for r in arm {
            let _ = writeln!(
                csv,
                "{},{mode},{},{},{},{}",
                r.seed, r.min_population, r.min_population_time, r.convergent_happiness, r.final_population
            );
        }
    }
    write(out, "comparison.csv", &csv)?;
    write(out, "comparison.json", &json(&report)?)?;
    Ok(report)
}

fn mode_name(mode: MatchMode) -> &'static str {
    match mode {
        MatchMode::Optimal => "optimal",
        MatchMode::Noisy => "noisy",
        MatchMode::Partitioned => "partitioned",
        MatchMode::Locality => "locality",
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageAnalysis {
    pub stage: String,
    pub population: usize,
    pub inertia: f64,
    /// Largest cluster first; embedding files use these positions as labels.
    pub clusters: Vec<ClusterSummary>,
    pub mds_eigenvalues: Vec<f64>,
    pub mds_degenerate: bool,
}

/// Clusters the raw traits of `population_initial.csv` and
/// `population_final.csv` from `input`, and embeds each roster in 2-D for
/// display. Writes `{stage}_embedding.csv` and `clusters.json`.
pub fn analyze(input: &Path, k: usize, seed: u64, out: &Path) -> Result<Vec<StageAnalysis>> {
    let mut stages = Vec::new();
    for stage in ["initial", "final"] {
        let (people, _) = read_population_csv(&input.join(format!("population_{stage}.csv")))?;
        if people.is_empty() {
            stages.push(StageAnalysis {
                stage: stage.to_string(),
                population: 0,
                inertia: 0.0,
                clusters: Vec::new(),
                mds_eigenvalues: Vec::new(),
                mds_degenerate: true,
            });
            write(out, &format!("{stage}_embedding.csv"), "id,mds_1,mds_2,cluster\n")?;
            continue;
        }
        let points = PointSet::from_population(&people)?;
        let km = kmeans(&points, k.min(points.len()), &mut ChaCha8Rng::seed_from_u64(seed), DEFAULT_MAX_ITER)?;
        let clusters = cluster_summary(&points, &km.labels)?;
        let mut rank = vec![0; km.centroids.len()];
        for (pos, c) in clusters.iter().enumerate() {
            rank[c.label] = pos;
        }
        let emb = classical_mds(&points, 2.min(points.len()))?;
        let mut csv = String::from("id,mds_1,mds_2,cluster\n");
        for ((p, row), &l) in people.iter().zip(emb.points.rows()).zip(&km.labels) {
            let y = row.get(1).copied().unwrap_or(0.0);
            let _ = writeln!(csv, "{},{},{},{}", p.id, row[0], y, rank[l]);
        }
        write(out, &format!("{stage}_embedding.csv"), &csv)?;
        stages.push(StageAnalysis {
            stage: stage.to_string(),
            population: people.len(),
            inertia: km.inertia,
            clusters,
            mds_eigenvalues: emb.eigenvalues,
            mds_degenerate: emb.degenerate,
        });
    }
    write(out, "clusters.json", &json(&stages)?)?;
    Ok(stages)
}

/// The published counts for the built-in matrix, compared against ours.
pub const REPORTED_TOTAL: usize = 36;
pub const REPORTED_PURE: usize = 4;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumReport {
    /// Pure equilibria as (individual trait, society trait) labels.
    pub pure_cells: Vec<(String, String)>,
    pub pure_count: usize,
    pub total_count: usize,
    pub mixed_count: usize,
    pub reported_pure: usize,
    pub reported_total: usize,
    pub pure_matches_reported: bool,
    pub total_matches_reported: bool,
    pub max_support: usize,
    pub degeneracy: DegeneracyReport,
    pub equilibria: Vec<Equilibrium>,
}

pub fn equilibria(matrix: &InteractionMatrix, max_support: usize, tol: f64, out: &Path) -> Result<EquilibriumReport> {
    let game = BimatrixGame::common_interest(matrix);
    let pure = pure_nash(&game);
    let found = support_enumeration(&game, max_support, tol)?;
    let pure_count = pure.len();
    let total_count = found.equilibria.len();
    let report = EquilibriumReport {
        pure_cells: pure
            .iter()
            .map(|&(i, j)| (matrix.row_names()[i].clone(), matrix.col_names()[j].clone()))
            .collect(),
        pure_count,
        total_count,
        mixed_count: found.equilibria.iter().filter(|e| e.kind == EquilibriumKind::Mixed).count(),
        reported_pure: REPORTED_PURE,
        reported_total: REPORTED_TOTAL,
        pure_matches_reported: pure_count == REPORTED_PURE,
        total_matches_reported: total_count == REPORTED_TOTAL,
        max_support,
        degeneracy: found.report,
        equilibria: found.equilibria,
    };
    write(out, "equilibria.json", &json(&report)?)?;
    Ok(report)
}
