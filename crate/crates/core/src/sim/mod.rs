//! The mating-round event loop.
//!
//! Time advances in fixed periods. Each round collects the available
//! people, matches them, applies the success threshold, adds one child per
//! successful pair, retires the dead and nudges the society vector towards
//! the survivors' mean traits.

mod config;
mod log;

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use config::{DensityScope, GridConfig, SeedGroup, SimConfig, TraitSpread};
pub use log::{population_csv_string, read_population_csv, GridRow, LogRow, TimeSeriesLog};

use crate::demographics::{born, lifespan, mating_gap};
use crate::error::{Error, Result};
use crate::matching::{build_weights, filter_plan, partitioned_match, solve_assignment, MatchMode, MatchPlan};
use crate::model::{happiness, mean_traits, InteractionMatrix, Location, Person, Sex, TraitVector};
use crate::rng::Streams;
use crate::society::{effective_lambda, society_update};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Extinct,
    /// Only one sex is left alive.
    NoFertilePairs,
}

/// One successful mating, recorded when auditing is on.
#[derive(Debug, Clone, PartialEq)]
pub struct MatingEvent {
    pub time: f64,
    pub father: u64,
    pub mother: u64,
    pub child: u64,
    pub father_available_at: f64,
    pub mother_available_at: f64,
    pub father_born_at: f64,
    pub mother_born_at: f64,
    pub child_happiness: f64,
}

/// Draws the initial roster. Members are adults: available from the first
/// round, born at time 0, happiness frozen against `theta0`.
pub fn init_population(
    config: &SimConfig,
    matrix: &InteractionMatrix,
    streams: &mut Streams,
) -> Result<Vec<Person>> {
    config.validate(matrix)?;
    let mut people = Vec::new();
    let mut id = 0u64;
    for (gi, group) in config.groups.iter().enumerate() {
        for _ in 0..group.count {
            let traits: Vec<f64> = group
                .mean
                .iter()
                .enumerate()
                .map(|(i, &mu)| {
                    let z: f64 = streams.init.sample(StandardNormal);
                    mu + group.std.at(i) * z
                })
                .collect();
            let traits = TraitVector::clipped(traits);
            let h = happiness(&traits, matrix, &config.theta0)?;
            let sex = if streams.sex.random::<bool>() { Sex::Male } else { Sex::Female };
            let location = config
                .grid
                .map(|g| (streams.location.random_range(0..g.width), streams.location.random_range(0..g.height)));
            people.push(Person {
                id,
                sex,
                traits,
                happiness: h,
                birth_time: 0.0,
                death_time: lifespan(h, &config.demographics),
                next_available_time: 0.0,
                location,
                group: Some(gi),
            });
            id += 1;
        }
    }
    Ok(people)
}

/// People alive at `t` whose availability time has passed, split into
/// (males, females) in roster order.
pub fn available(population: &[Person], t: f64) -> (Vec<&Person>, Vec<&Person>) {
    population
        .iter()
        .filter(|p| p.is_alive(t) && p.next_available_time <= t)
        .partition(|p| p.sex == Sex::Male)
}

/// Appends `births` and drops everyone with `death_time <= t`. Returns the
/// number removed.
pub fn update_pop(population: &mut Vec<Person>, births: Vec<Person>, t: f64) -> Result<usize> {
    let max_existing = population.iter().map(|p| p.id).max();
    let monotone = births.windows(2).all(|w| w[0].id < w[1].id)
        && match (max_existing, births.first()) {
            (Some(m), Some(b)) => b.id > m,
            _ => true,
        };
    if !monotone {
        let mut seen: HashSet<u64> = population.iter().map(|p| p.id).collect();
        if seen.len() != population.len() {
            return Err(Error::Consistency("duplicate id in roster".into()));
        }
        for b in &births {
            if !seen.insert(b.id) {
                return Err(Error::Consistency(format!("duplicate id {}", b.id)));
            }
        }
    }
    population.extend(births);
    let before = population.len();
    population.retain(|p| p.death_time > t);
    Ok(before - population.len())
}

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub status: RunStatus,
    pub log: TimeSeriesLog,
    pub initial_population: Vec<Person>,
    pub final_population: Vec<Person>,
    pub final_theta: TraitVector,
    pub final_time: f64,
    pub wall_seconds: f64,
    pub events: Vec<MatingEvent>,
}

impl SimOutcome {
    /// Smallest population and the first time it occurs, counting the
    /// initial roster at time 0.
    pub fn min_population(&self) -> (usize, f64) {
        self.log.rows.iter().fold((self.initial_population.len(), 0.0), |acc, r| {
            if r.population < acc.0 {
                (r.population, r.time)
            } else {
                acc
            }
        })
    }
}

/// A running simulation that can be advanced one round at a time.
pub struct Simulation {
    config: SimConfig,
    matrix: InteractionMatrix,
    streams: Streams,
    theta: TraitVector,
    population: Vec<Person>,
    initial_population: Vec<Person>,
    next_id: u64,
    round: u64,
    rounds: u64,
    status: Option<RunStatus>,
    log: TimeSeriesLog,
    pending_births: usize,
    pending_deaths: usize,
    audit: bool,
    events: Vec<MatingEvent>,
    started: Instant,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        let matrix = config.load_matrix()?;
        Simulation::with_matrix(config, matrix)
    }

    pub fn with_matrix(config: SimConfig, matrix: InteractionMatrix) -> Result<Self> {
        let started = Instant::now();
        let mut streams = Streams::new(config.seed);
        let population = init_population(&config, &matrix, &mut streams)?;
        let next_id = population.len() as u64;
        let log = TimeSeriesLog {
            society_labels: matrix.col_names().to_vec(),
            individual_labels: matrix.row_names().to_vec(),
            rows: Vec::new(),
            grid: Vec::new(),
        };
        let mut sim = Simulation {
            theta: config.theta0.clone(),
            rounds: config.rounds(),
            config,
            matrix,
            streams,
            initial_population: population.clone(),
            population,
            next_id,
            round: 0,
            status: None,
            log,
            pending_births: 0,
            pending_deaths: 0,
            audit: false,
            events: Vec::new(),
            started,
        };
        if sim.config.grid.is_some() {
            sim.push_grid(0.0);
        }
        if sim.rounds == 0 {
            sim.status = Some(RunStatus::Completed);
        }
        Ok(sim)
    }

    /// Records every successful mating in [`SimOutcome::events`].
    pub fn set_audit(&mut self, on: bool) {
        self.audit = on;
    }

    pub fn time(&self) -> f64 {
        self.round as f64 * self.config.mating_period
    }

    pub fn theta(&self) -> &TraitVector {
        &self.theta
    }

    pub fn population(&self) -> &[Person] {
        &self.population
    }

    pub fn log(&self) -> &TimeSeriesLog {
        &self.log
    }

    pub fn status(&self) -> Option<RunStatus> {
        self.status
    }

    pub fn is_finished(&self) -> bool {
        self.status.is_some()
    }

    /// Runs one mating round. Does nothing once the run has ended.
    pub fn step(&mut self) -> Result<()> {
        if self.status.is_some() {
            return Ok(());
        }
        self.round += 1;
        let t = self.time();
        let demo = self.config.demographics.clone();

        let alive = self.population.iter().filter(|p| p.is_alive(t)).count();
        let block_counts = self.block_counts(t);
        let plan = self.match_round(t)?;

        let successes = {
            let pop = &self.population;
            let base = pop.iter().map(|p| p.id).min().unwrap_or(0);
            let span = pop.iter().map(|p| p.id - base + 1).max().unwrap_or(0) as usize;
            let mut slots = vec![usize::MAX; span];
            for (i, p) in pop.iter().enumerate() {
                slots[(p.id - base) as usize] = i;
            }
            let index = |id: u64| {
                id.checked_sub(base)
                    .and_then(|k| slots.get(k as usize))
                    .copied()
                    .filter(|&i| i != usize::MAX)
            };
            let scope = self.config.density;
            filter_plan(
                &plan,
                |id| index(id).map(|i| &pop[i]),
                |m, f| match (scope, m.location, f.location) {
                    (DensityScope::Block, Some(a), Some(b)) => {
                        block_counts.get(&a).copied().unwrap_or(0).max(block_counts.get(&b).copied().unwrap_or(0))
                    }
                    _ => alive,
                },
                &demo,
                &mut self.streams.success,
            )?
            .into_iter()
            .filter_map(|(m, f)| Some((index(m)?, index(f)?)))
            .collect::<Vec<_>>()
        };

        let maturity = demo.maturity(self.config.mating_period);
        let mut births = Vec::with_capacity(successes.len());
        for &(mi, fi) in &successes {
            let (father, mother) = (&self.population[mi], &self.population[fi]);
            let traits = born(&father.traits, &mother.traits, &demo, &mut self.streams.inheritance);
            let sex = if self.streams.sex.random::<bool>() { Sex::Male } else { Sex::Female };
            let location = match (father.location, mother.location) {
                (Some(a), Some(b)) => Some(if self.streams.location.random::<bool>() { a } else { b }),
                _ => None,
            };
            let h = happiness(&traits, &self.matrix, &self.theta)?;
            let child = Person {
                id: self.next_id,
                sex,
                traits,
                happiness: h,
                birth_time: t,
                death_time: t + lifespan(h, &demo),
                next_available_time: t + maturity,
                location,
                group: None,
            };
            self.next_id += 1;
            if self.audit {
                self.events.push(MatingEvent {
                    time: t,
                    father: father.id,
                    mother: mother.id,
                    child: child.id,
                    father_available_at: father.next_available_time,
                    mother_available_at: mother.next_available_time,
                    father_born_at: father.birth_time,
                    mother_born_at: mother.birth_time,
                    child_happiness: h,
                });
            }
            births.push(child);
        }
        for &(mi, fi) in &successes {
            for i in [mi, fi] {
                let p = &mut self.population[i];
                p.next_available_time = t + mating_gap(p.happiness, &demo);
            }
        }

        self.pending_births += births.len();
        self.pending_deaths += update_pop(&mut self.population, births, t)?;

        if !self.population.is_empty() {
            let x_bar = mean_traits(&self.population)?;
            let lambda = effective_lambda(&self.config.learning_rate, &self.population);
            self.theta = society_update(&self.theta, &x_bar, &self.matrix, lambda)?;
        }

        let has_male = self.population.iter().any(|p| p.sex == Sex::Male);
        let has_female = self.population.iter().any(|p| p.sex == Sex::Female);
        if self.population.is_empty() {
            self.status = Some(RunStatus::Extinct);
        } else if !(has_male && has_female) {
            self.status = Some(RunStatus::NoFertilePairs);
        } else if self.round >= self.rounds {
            self.status = Some(RunStatus::Completed);
        }
        if self.status.is_some() || self.round % self.config.log_every == 0 {
            self.push_row(t)?;
        }
        if self.config.grid.is_some()
            && (self.status.is_some() || self.round % self.config.grid_snapshot_every == 0)
        {
            self.push_grid(t);
        }
        Ok(())
    }

    fn match_round(&mut self, t: f64) -> Result<MatchPlan> {
        let (y, z) = available(&self.population, t);
        let mode = self.config.matching.mode;
        if y.is_empty() || z.is_empty() {
            return Ok(MatchPlan { mode, pairs: Vec::new(), total_weight: 0.0 });
        }
        if mode == MatchMode::Partitioned {
            partitioned_match(
                &y,
                &z,
                &self.theta,
                &self.matrix,
                &self.config.matching,
                &self.config.demographics,
                &mut self.streams.partition,
                &mut self.streams.noise,
            )
        } else {
            let w = build_weights(
                &y,
                &z,
                &self.theta,
                &self.matrix,
                &self.config.matching,
                &self.config.demographics,
                &mut self.streams.noise,
            )?;
            Ok(solve_assignment(&w))
        }
    }

    fn block_counts(&self, t: f64) -> HashMap<Location, usize> {
        let mut counts = HashMap::new();
        if self.config.density == DensityScope::Block {
            for p in self.population.iter().filter(|p| p.is_alive(t)) {
                if let Some(l) = p.location {
                    *counts.entry(l).or_insert(0) += 1;
                }
            }
        }
        counts
    }

    fn push_row(&mut self, t: f64) -> Result<()> {
        let n = self.population.len();
        let total: f64 = self.population.iter().map(|p| p.happiness).sum();
        let (mean_traits_v, current) = if n == 0 {
            (vec![0.0; self.matrix.individual_dim()], 0.0)
        } else {
            let g = self.matrix.project(self.theta.as_slice());
            let cur: f64 = self
                .population
                .iter()
                .map(|p| p.traits.as_slice().iter().zip(&g).map(|(a, b)| a * b).sum::<f64>())
                .sum();
            (mean_traits(&self.population)?.into_inner(), cur / n as f64)
        };
        self.log.rows.push(LogRow {
            time: t,
            population: n,
            births: self.pending_births,
            deaths: self.pending_deaths,
            total_happiness: total,
            mean_happiness: if n == 0 { 0.0 } else { total / n as f64 },
            mean_current_happiness: current,
            theta: self.theta.as_slice().to_vec(),
            mean_traits: mean_traits_v,
        });
        self.pending_births = 0;
        self.pending_deaths = 0;
        Ok(())
    }

    fn push_grid(&mut self, t: f64) {
        let Some(grid) = self.config.grid else { return };
        let w = grid.width as usize;
        let mut count = vec![0usize; w * grid.height as usize];
        let mut sum = vec![0.0f64; count.len()];
        for p in &self.population {
            if let Some((x, y)) = p.location {
                let k = y as usize * w + x as usize;
                count[k] += 1;
                sum[k] += p.happiness;
            }
        }
        for gx in 0..grid.width {
            for gy in 0..grid.height {
                let k = gy as usize * w + gx as usize;
                self.log.grid.push(GridRow {
                    time: t,
                    gx,
                    gy,
                    population: count[k],
                    mean_happiness: (count[k] > 0).then(|| sum[k] / count[k] as f64),
                });
            }
        }
    }

    /// Steps until the run ends.
    pub fn run_to_end(mut self) -> Result<SimOutcome> {
        while self.status.is_none() {
            self.step()?;
        }
        Ok(self.finish())
    }

    pub fn finish(self) -> SimOutcome {
        SimOutcome {
            status: self.status.unwrap_or(RunStatus::Completed),
            final_time: self.time(),
            log: self.log,
            initial_population: self.initial_population,
            final_population: self.population,
            final_theta: self.theta,
            wall_seconds: self.started.elapsed().as_secs_f64(),
            events: self.events,
        }
    }
}

/// Runs a configuration to completion.
pub fn run(config: &SimConfig) -> Result<SimOutcome> {
    Simulation::new(config.clone())?.run_to_end()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub status: RunStatus,
    pub seed: u64,
    pub final_time: f64,
    pub rounds_logged: usize,
    pub initial_population: usize,
    pub final_population: usize,
    pub min_population: usize,
    pub min_population_time: f64,
    pub final_mean_happiness: f64,
    pub final_theta: Vec<f64>,
    pub metadata: RunMetadata,
}

/// The only non-deterministic part of the outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub wall_seconds: f64,
    pub finished_unix_seconds: u64,
}

impl SimOutcome {
    pub fn summary(&self, seed: u64) -> RunSummary {
        let (min_population, min_population_time) = self.min_population();
        RunSummary {
            status: self.status,
            seed,
            final_time: self.final_time,
            rounds_logged: self.log.rows.len(),
            initial_population: self.initial_population.len(),
            final_population: self.final_population.len(),
            min_population,
            min_population_time,
            final_mean_happiness: self.log.rows.last().map_or(0.0, |r| r.mean_happiness),
            final_theta: self.final_theta.as_slice().to_vec(),
            metadata: RunMetadata {
                wall_seconds: self.wall_seconds,
                finished_unix_seconds: std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map_or(0, |d| d.as_secs()),
            },
        }
    }

    /// Writes `log.csv`, `summary.json`, `population_initial.csv`,
    /// `population_final.csv` and, with a grid, `grid.csv` into `dir`.
    pub fn write_outputs(&self, dir: &Path, seed: u64) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: &str, text: String| -> Result<()> {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| Error::io(path, e))
        };
        let labels = &self.log.individual_labels;
        put("log.csv", self.log.to_csv_string())?;
        put("population_initial.csv", population_csv_string(&self.initial_population, labels))?;
        put("population_final.csv", population_csv_string(&self.final_population, labels))?;
        let summary = serde_json::to_string_pretty(&self.summary(seed))
            .map_err(|e| Error::Consistency(e.to_string()))?;
        put("summary.json", summary + "\n")?;
        if !self.log.grid.is_empty() {
            put("grid.csv", self.log.grid_csv_string())?;
        }
        Ok(())
    }
}
