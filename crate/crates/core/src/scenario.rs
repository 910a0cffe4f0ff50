//! Scenario files and the built-in presets.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! name = "demo"
//! output_dir = "out/demo"      # optional, defaults to "out"
//! preset = "..."               # optional tag, informational only
//!
//! [simulation]
//! seed = 7
//! [[simulation.groups]]
//! count = 200
//! mean = [0.9, 0.3, 0.6, 0.5, 0.6, 0.7, 0.5, 0.4]
//! std = 0.15
//! ```
//!
//! Every `[simulation]` key other than `groups` has a default. A relative
//! `interaction_matrix` path is resolved against the scenario file's folder.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::MatchMode;
use crate::model::TraitVector;
use crate::sim::{DensityScope, GridConfig, SeedGroup, SimConfig, TraitSpread};

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub simulation: SimConfig,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let matrix = self.simulation.load_matrix()?;
        self.simulation.validate(&matrix)
    }
}

/// Parses scenario text. `origin` is used in diagnostics and to resolve a
/// relative matrix path.
pub fn parse_scenario(text: &str, origin: &Path) -> Result<Scenario> {
    let mut sc: Scenario = toml::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        message: e.to_string().trim_end().to_string(),
    })?;
    if let Some(m) = &sc.simulation.interaction_matrix {
        if m.is_relative() {
            let base = origin.parent().unwrap_or(Path::new(""));
            sc.simulation.interaction_matrix = Some(base.join(m));
        }
    }
    sc.validate()?;
    Ok(sc)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text, path)
}

/// Fully expanded TOML for a scenario, every default written out.
pub fn dump_scenario(scenario: &Scenario) -> Result<String> {
    toml::to_string(scenario).map_err(|e| Error::Consistency(format!("cannot serialise scenario: {e}")))
}

// Individual traits: intellect, strength, obedience, flexibility, health,
// sincerity, family orientation, religiousness.
pub const HIGH_INTELLECT: [f64; 8] = [0.9, 0.3, 0.6, 0.5, 0.6, 0.7, 0.5, 0.4];
pub const LOW_INTELLECT: [f64; 8] = [0.1, 0.6, 0.6, 0.4, 0.5, 0.5, 0.6, 0.6];
pub const CRIMINAL: [f64; 8] = [0.3, 0.8, 0.1, 0.5, 0.6, 0.1, 0.3, 0.2];
pub const FARMER: [f64; 8] = [0.3, 0.8, 0.7, 0.3, 0.7, 0.6, 0.8, 0.7];

// Society traits: literacy, living standard, crime, agrarian, industrial,
// conservative, communist, then six latent traits.
pub const CRIMINAL_CITY: [f64; 13] = [0.2, 0.3, 0.9, 0.5, 0.4, 0.5, 0.3, 0.4, 0.6, 0.5, 0.5, 0.6, 0.7];
pub const INTELLECTUAL_CITY: [f64; 13] = [0.9, 0.8, 0.1, 0.2, 0.7, 0.3, 0.3, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5];
pub const AGRARIAN_CITY: [f64; 13] = [0.3, 0.4, 0.3, 0.9, 0.2, 0.7, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5];

pub const GROUP_STD: f64 = 0.15;
pub const DEFAULT_PRESET: &str = "high-intellect-pop-in-criminal-city";

/// (name, description) of every preset.
pub const PRESETS: [(&str, &str); 9] = [
    ("high-intellect-pop-in-criminal-city", "200 high-intellect people in a criminal city"),
    ("criminal-pop-in-criminal-city", "200 criminals in a criminal city"),
    ("high-intellect-pop-in-intellectual-city", "200 high-intellect people in an intellectual city"),
    ("low-intellect-pop-in-intellectual-city", "200 low-intellect people in an intellectual city"),
    ("agrarian-80-20", "160 farmers and 40 high-intellect people in an agrarian city"),
    ("intellectual-75-25", "150 farmers and 50 high-intellect people in an intellectual city"),
    ("criminal-75-25", "150 criminals and 50 high-intellect people in a criminal city"),
    (
        "locality-grid",
        "the default preset on a 10x10 grid with locality mating and per-block density",
    ),
    (
        "lambda-sweep",
        "the default preset with a 20-unit mating period over 400000 time units",
    ),
];

fn group(count: usize, mean: [f64; 8]) -> SeedGroup {
    SeedGroup { count, mean: mean.to_vec(), std: TraitSpread::Scalar(GROUP_STD) }
}

fn config(groups: Vec<SeedGroup>, city: [f64; 13]) -> SimConfig {
    let mut c = SimConfig::new(groups);
    c.theta0 = TraitVector::clipped(city.to_vec());
    c
}

/// The built-in scenario called `name`.
pub fn preset(name: &str) -> Result<Scenario> {
    let simulation = match name {
        "high-intellect-pop-in-criminal-city" => config(vec![group(200, HIGH_INTELLECT)], CRIMINAL_CITY),
        "criminal-pop-in-criminal-city" => config(vec![group(200, CRIMINAL)], CRIMINAL_CITY),
        "high-intellect-pop-in-intellectual-city" => config(vec![group(200, HIGH_INTELLECT)], INTELLECTUAL_CITY),
        "low-intellect-pop-in-intellectual-city" => config(vec![group(200, LOW_INTELLECT)], INTELLECTUAL_CITY),
        "agrarian-80-20" => config(vec![group(160, FARMER), group(40, HIGH_INTELLECT)], AGRARIAN_CITY),
        "intellectual-75-25" => config(vec![group(150, FARMER), group(50, HIGH_INTELLECT)], INTELLECTUAL_CITY),
        "criminal-75-25" => config(vec![group(150, CRIMINAL), group(50, HIGH_INTELLECT)], CRIMINAL_CITY),
        "locality-grid" => {
            let mut c = config(vec![group(200, HIGH_INTELLECT)], CRIMINAL_CITY);
            c.grid = Some(GridConfig { width: 10, height: 10 });
            c.matching.mode = MatchMode::Locality;
            c.density = DensityScope::Block;
            // Per-block density with the coefficient scaled by the block
            // count keeps the city-wide carrying capacity unchanged.
            c.demographics.success_a *= 100.0;
            c
        }
        "lambda-sweep" => {
            let mut c = config(vec![group(200, HIGH_INTELLECT)], CRIMINAL_CITY);
            c.mating_period = 20.0;
            c.max_time = 400_000.0;
            c
        }
        other => {
            let names: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
            return Err(Error::config("preset", format!("unknown preset {other:?}; known: {}", names.join(", "))));
        }
    };
    Ok(Scenario {
        name: name.to_string(),
        preset: Some(name.to_string()),
        output_dir: PathBuf::from("out").join(name),
        simulation,
    })
}
