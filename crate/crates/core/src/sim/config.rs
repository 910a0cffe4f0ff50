use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::demographics::DemographicsParams;
use crate::error::{Error, Result};
use crate::matching::{MatchMode, MatchParams};
use crate::model::{InteractionMatrix, TraitVector};
use crate::society::LearningRateSchedule;

/// Per-trait standard deviation: one value for every trait, or a full vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TraitSpread {
    Scalar(f64),
    PerTrait(Vec<f64>),
}

impl TraitSpread {
    pub fn at(&self, i: usize) -> f64 {
        match self {
            TraitSpread::Scalar(s) => *s,
            TraitSpread::PerTrait(v) => v[i],
        }
    }
}

impl Default for TraitSpread {
    fn default() -> Self {
        TraitSpread::Scalar(0.1)
    }
}

/// A block of initial population drawn from one diagonal normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedGroup {
    pub count: usize,
    pub mean: Vec<f64>,
    #[serde(default)]
    pub std: TraitSpread,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub width: u32,
    pub height: u32,
}

/// Population count fed to the mating success threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityScope {
    /// Everyone alive at the start of the round.
    #[default]
    Global,
    /// Residents of the parents' grid block (the larger of the two blocks).
    Block,
}

fn default_theta0() -> TraitVector {
    TraitVector::splat(0.5, 13)
}

fn default_period() -> f64 {
    1.0
}

fn default_max_time() -> f64 {
    10_000.0
}

fn default_one() -> u64 {
    1
}

fn default_snapshot() -> u64 {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub seed: u64,
    pub groups: Vec<SeedGroup>,
    #[serde(default = "default_theta0")]
    pub theta0: TraitVector,
    /// CSV in the printed society-major layout; the built-in table when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction_matrix: Option<PathBuf>,
    #[serde(default)]
    pub demographics: DemographicsParams,
    #[serde(default)]
    pub matching: MatchParams,
    #[serde(default)]
    pub learning_rate: LearningRateSchedule,
    #[serde(default = "default_period")]
    pub mating_period: f64,
    #[serde(default = "default_max_time")]
    pub max_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default = "default_one")]
    pub log_every: u64,
    #[serde(default)]
    pub density: DensityScope,
    /// Rounds between per-block snapshots when a grid is configured.
    #[serde(default = "default_snapshot")]
    pub grid_snapshot_every: u64,
}

impl SimConfig {
    /// A config with every default and the given seed groups.
    pub fn new(groups: Vec<SeedGroup>) -> Self {
        SimConfig {
            seed: 0,
            groups,
            theta0: default_theta0(),
            interaction_matrix: None,
            demographics: DemographicsParams::default(),
            matching: MatchParams::default(),
            learning_rate: LearningRateSchedule::default(),
            mating_period: default_period(),
            max_time: default_max_time(),
            grid: None,
            log_every: 1,
            density: DensityScope::Global,
            grid_snapshot_every: default_snapshot(),
        }
    }

    pub fn load_matrix(&self) -> Result<InteractionMatrix> {
        match &self.interaction_matrix {
            Some(path) => InteractionMatrix::from_csv_path(path),
            None => Ok(InteractionMatrix::default()),
        }
    }

    /// Number of mating rounds the run will attempt.
    pub fn rounds(&self) -> u64 {
        (self.max_time / self.mating_period + 1e-9).floor() as u64
    }

    pub fn validate(&self, matrix: &InteractionMatrix) -> Result<()> {
        let p = matrix.individual_dim();
        let s = matrix.society_dim();
        if self.groups.iter().map(|g| g.count).sum::<usize>() == 0 {
            return Err(Error::config("groups", "initial population is empty"));
        }
        for (gi, g) in self.groups.iter().enumerate() {
            let field = format!("groups[{gi}].mean");
            if g.mean.len() != p {
                return Err(Error::config(field, format!("expected {p} traits, got {}", g.mean.len())));
            }
            TraitVector::try_new(&field, g.mean.clone())?;
            let field = format!("groups[{gi}].std");
            if let TraitSpread::PerTrait(v) = &g.std {
                if v.len() != p {
                    return Err(Error::config(field, format!("expected {p} values, got {}", v.len())));
                }
            }
            for i in 0..p {
                let sd = g.std.at(i);
                if !(sd.is_finite() && sd >= 0.0) {
                    return Err(Error::config(field, format!("standard deviation {sd} must be non-negative")));
                }
            }
        }
        if self.theta0.dim() != s {
            return Err(Error::config("theta0", format!("expected {s} traits, got {}", self.theta0.dim())));
        }
        TraitVector::try_new("theta0", self.theta0.as_slice().to_vec())?;
        self.demographics.validate()?;
        self.matching.validate()?;
        self.learning_rate.validate(p)?;
        if !(self.mating_period.is_finite() && self.mating_period > 0.0) {
            return Err(Error::config("mating_period", "must be positive"));
        }
        if !(self.max_time.is_finite() && self.max_time >= 0.0) {
            return Err(Error::config("max_time", "must be finite and non-negative"));
        }
        if self.log_every == 0 {
            return Err(Error::config("log_every", "must be at least 1"));
        }
        if self.grid_snapshot_every == 0 {
            return Err(Error::config("grid_snapshot_every", "must be at least 1"));
        }
        match self.grid {
            Some(g) if g.width == 0 || g.height == 0 => {
                return Err(Error::config("grid", "width and height must be at least 1"));
            }
            None if self.matching.mode == MatchMode::Locality => {
                return Err(Error::config("grid", "locality matching needs a grid"));
            }
            None if self.density == DensityScope::Block => {
                return Err(Error::config("density", "block density needs a grid"));
            }
            _ => {}
        }
        Ok(())
    }
}
