//! Multi-run experiments: learning-rate sweeps and matching comparisons.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matching::MatchMode;
use crate::sim::{run, SimConfig, SimOutcome, TimeSeriesLog};

pub const PLATEAU_SLOPE: f64 = 1e-5;
pub const PLATEAU_WINDOW_FRACTION: f64 = 0.05;

/// OLS slope of `y` against `t`. Zero for fewer than two distinct times.
pub fn ols_slope(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    if t.len() < 2 {
        return 0.0;
    }
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in t.iter().zip(y) {
        sxy += (a - tm) * (b - ym);
        sxx += (a - tm) * (a - tm);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Slope at each sample over the trailing window `[t_k - window, t_k]`.
/// Early samples use whatever part of the window exists.
pub fn trailing_slopes(t: &[f64], y: &[f64], window: f64) -> Vec<f64> {
    let mut start = 0;
    (0..t.len())
        .map(|k| {
            while t[start] < t[k] - window {
                start += 1;
            }
            ols_slope(&t[start..=k], &y[start..=k])
        })
        .collect()
}

/// First time after which the trailing slope magnitude stays below
/// `threshold` for the rest of the series.
pub fn plateau_time(t: &[f64], y: &[f64], window: f64, threshold: f64) -> Option<f64> {
    let slopes = trailing_slopes(t, y, window);
    let mut first = None;
    for (k, s) in slopes.iter().enumerate().rev() {
        if s.abs() < threshold {
            first = Some(k);
        } else {
            break;
        }
    }
    first.map(|k| t[k])
}

/// Plateau of the mean happiness column with the default window and slope.
pub fn log_plateau(log: &TimeSeriesLog, max_time: f64) -> Option<f64> {
    plateau_time(
        &log.times(),
        &log.mean_happiness(),
        PLATEAU_WINDOW_FRACTION * max_time,
        PLATEAU_SLOPE,
    )
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties. NaN when either
/// side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRun {
    pub multiplier: f64,
    pub seed: u64,
    pub final_population: usize,
    pub plateau_time: Option<f64>,
    /// Mean of the mean-happiness column from the plateau onwards.
    pub plateau_happiness: Option<f64>,
    pub wall_seconds: f64,
}

/// Runs `config` once per (multiplier, seed). Each member keeps every other
/// setting, so runs with the same seed share their initial population.
pub fn sweep_lambda(
    config: &SimConfig,
    multipliers: &[f64],
    seeds: &[u64],
) -> Result<Vec<(SweepRun, SimOutcome)>> {
    let jobs: Vec<(f64, u64)> = multipliers
        .iter()
        .flat_map(|&m| seeds.iter().map(move |&s| (m, s)))
        .collect();
    jobs.par_iter()
        .map(|&(multiplier, seed)| {
            let mut c = config.clone();
            c.learning_rate.multiplier = multiplier;
            c.seed = seed;
            let outcome = run(&c)?;
            let plateau = log_plateau(&outcome.log, c.max_time);
            let plateau_happiness = plateau.map(|p| {
                let tail: Vec<f64> =
                    outcome.log.rows.iter().filter(|r| r.time >= p).map(|r| r.mean_happiness).collect();
                tail.iter().sum::<f64>() / tail.len() as f64
            });
            Ok((
                SweepRun {
                    multiplier,
                    seed,
                    final_population: outcome.final_population.len(),
                    plateau_time: plateau,
                    plateau_happiness,
                    wall_seconds: outcome.wall_seconds,
                },
                outcome,
            ))
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn sweep_csv_string(runs: &[SweepRun]) -> String {
    let mut out = String::from("multiplier,seed,final_population,plateau_time,plateau_happiness\n");
    for r in runs {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.multiplier,
            r.seed,
            r.final_population,
            opt(r.plateau_time),
            opt(r.plateau_happiness)
        );
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArmResult {
    pub seed: u64,
    pub min_population: usize,
    pub min_population_time: f64,
    /// Mean of the mean-happiness column over the last 10% of the run.
    pub convergent_happiness: f64,
    pub final_population: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Higher,
    Lower,
    Equal,
}

impl Direction {
    fn of(x: f64) -> Self {
        if x > 0.0 {
            Direction::Higher
        } else if x < 0.0 {
            Direction::Lower
        } else {
            Direction::Equal
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricComparison {
    pub optimal_mean: f64,
    pub alternative_mean: f64,
    /// Mean of paired (alternative - optimal) differences.
    pub mean_difference: f64,
    /// Sign of the alternative relative to the optimal arm.
    pub direction: Direction,
    /// Whether that sign is the one reported for non-optimal mating.
    pub matches_reported_direction: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub alternative_mode: MatchMode,
    pub seeds: Vec<u64>,
    pub optimal: Vec<ArmResult>,
    pub alternative: Vec<ArmResult>,
    pub min_population: MetricComparison,
    pub convergent_happiness: MetricComparison,
}

fn arm_result(seed: u64, outcome: &SimOutcome) -> ArmResult {
    let (min_population, min_population_time) = outcome.min_population();
    let cutoff = 0.9 * outcome.final_time;
    let tail: Vec<f64> = outcome
        .log
        .rows
        .iter()
        .filter(|r| r.time >= cutoff)
        .map(|r| r.mean_happiness)
        .collect();
    ArmResult {
        seed,
        min_population,
        min_population_time,
        convergent_happiness: tail.iter().sum::<f64>() / tail.len().max(1) as f64,
        final_population: outcome.final_population.len(),
    }
}

fn compare_metric(opt: &[f64], alt: &[f64]) -> MetricComparison {
    let n = opt.len() as f64;
    let om = opt.iter().sum::<f64>() / n;
    let am = alt.iter().sum::<f64>() / n;
    let d = opt.iter().zip(alt).map(|(o, a)| a - o).sum::<f64>() / n;
    let direction = Direction::of(d);
    MetricComparison {
        optimal_mean: om,
        alternative_mean: am,
        mean_difference: d,
        direction,
        matches_reported_direction: direction == Direction::Higher,
    }
}

/// Runs `optimal` and `alternative` on the same seeds and compares the
/// initial drop and the convergent happiness. Both reported effects of
/// non-optimal mating point upwards (a shallower drop, higher happiness).
pub fn compare_matching(optimal: &SimConfig, alternative: &SimConfig, seeds: &[u64]) -> Result<ComparisonReport> {
    let jobs: Vec<(bool, u64)> = seeds.iter().flat_map(|&s| [(false, s), (true, s)]).collect();
    let results: Vec<(bool, ArmResult)> = jobs
        .par_iter()
        .map(|&(alt, seed)| {
            let mut c = if alt { alternative.clone() } else { optimal.clone() };
            c.seed = seed;
            let outcome = run(&c)?;
            Ok((alt, arm_result(seed, &outcome)))
        })
        .collect::<Result<_>>()?;
    let (a, o): (Vec<_>, Vec<_>) = results.into_iter().partition(|(alt, _)| *alt);
    let optimal_runs: Vec<ArmResult> = o.into_iter().map(|x| x.1).collect();
    let alternative_runs: Vec<ArmResult> = a.into_iter().map(|x| x.1).collect();
    let pick = |runs: &[ArmResult], f: fn(&ArmResult) -> f64| runs.iter().map(f).collect::<Vec<_>>();
    Ok(ComparisonReport {
        alternative_mode: alternative.matching.mode,
        seeds: seeds.to_vec(),
        min_population: compare_metric(
            &pick(&optimal_runs, |r| r.min_population as f64),
            &pick(&alternative_runs, |r| r.min_population as f64),
        ),
        convergent_happiness: compare_metric(
            &pick(&optimal_runs, |r| r.convergent_happiness),
            &pick(&alternative_runs, |r| r.convergent_happiness),
        ),
        optimal: optimal_runs,
        alternative: alternative_runs,
    })
}
