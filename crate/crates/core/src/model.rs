//! Trait vectors, the interaction matrix and the person record.
//!
//! The interaction matrix is stored individual-major (P x S) so that the
//! payoff of a trait vector `x` against a society vector `theta` is the
//! bilinear form `x^T I theta`. The default table is printed society-major
//! (13 rows x 8 columns) and is transposed on load; CSV files use the same
//! society-major orientation as the printed table.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Labels of the eight individual traits, in storage order.
pub const INDIVIDUAL_TRAIT_LABELS: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

/// Descriptive names of the individual traits.
pub const INDIVIDUAL_TRAIT_NAMES: [&str; 8] = [
    "intellect",
    "physical_strength",
    "obedience",
    "flexibility",
    "health",
    "sincerity",
    "family_oriented",
    "religious",
];

/// Labels of the thirteen society traits, in storage order.
pub const SOCIETY_TRAIT_LABELS: [&str; 13] = [
    "1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "11", "12", "13",
];

/// Descriptive names of the society traits. Only the first seven carry a
/// meaning; the remaining six are unnamed latent characteristics.
pub const SOCIETY_TRAIT_NAMES: [&str; 13] = [
    "literacy",
    "living_standard",
    "crime_rate",
    "agrarian",
    "industrial",
    "conservative",
    "communist",
    "s8",
    "s9",
    "s10",
    "s11",
    "s12",
    "s13",
];

/// Index of the "flexibility towards change" individual trait.
pub const FLEXIBILITY_TRAIT: usize = 3;

// Society-major, exactly as printed: row s = society trait, column p = individual trait.
const DEFAULT_TABLE: [[f64; 8]; 13] = [
    [0.9, -0.5, 0.5, 0.3, 0.3, 0.7, 0.5, -0.2],
    [0.7, 0.2, 0.0, 0.0, 0.4, 0.7, 0.0, 0.0],
    [-0.1, 0.8, -0.5, -0.5, 0.0, 0.0, -1.0, 0.0],
    [-0.9, 0.9, 0.0, 0.0, 0.5, 0.6, 0.0, 0.0],
    [0.7, 0.7, 0.0, 0.4, 0.5, 0.6, 0.0, 0.0],
    [-0.5, 0.0, 0.8, -0.9, 0.0, 0.0, 0.4, 0.8],
    [0.6, 0.2, 1.0, 0.0, 0.0, 0.5, 0.8, 0.5],
    [0.0, 0.3, 0.0, 0.2, 0.0, 0.5, 0.3, 0.0],
    [-0.5, 0.5, 0.5, -0.8, 0.0, 0.5, 0.4, 1.0],
    [0.0, 0.8, -0.2, 0.0, 0.2, 0.0, 0.3, 0.0],
    [0.0, -0.8, 0.2, 0.5, 0.0, 0.0, 0.4, 0.0],
    [-0.4, 0.0, -0.5, 1.0, 0.0, 0.0, -0.3, 0.6],
    [0.2, 0.2, 0.5, -1.0, 0.0, 0.0, -0.6, -0.5],
];

/// A fixed-length vector of traits, every coordinate in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TraitVector(Vec<f64>);

impl TraitVector {
    /// Builds a vector, clipping every coordinate into `[0, 1]`. NaN maps to 0.
    pub fn clipped(values: Vec<f64>) -> Self {
        TraitVector(values.into_iter().map(clip_unit).collect())
    }

    /// Builds a vector, rejecting coordinates outside `[0, 1]`.
    pub fn try_new(field: &str, values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::config(
                format!("{field}[{i}]"),
                format!("trait value {v} outside [0, 1]"),
            ));
        }
        Ok(TraitVector(values))
    }

    pub fn splat(value: f64, dim: usize) -> Self {
        TraitVector::clipped(vec![value; dim])
    }

    pub fn zeros(dim: usize) -> Self {
        TraitVector(vec![0.0; dim])
    }

    /// Indicator vector of coordinate `index`.
    pub fn indicator(index: usize, dim: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[index] = 1.0;
        TraitVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for TraitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for TraitVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

pub(crate) fn clip_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The P x S payoff matrix shared by the population and the society.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    row_names: Vec<String>,
    col_names: Vec<String>,
}

impl Default for InteractionMatrix {
    fn default() -> Self {
        let rows = INDIVIDUAL_TRAIT_LABELS.len();
        let cols = SOCIETY_TRAIT_LABELS.len();
        let mut entries = vec![0.0; rows * cols];
        for (s, printed_row) in DEFAULT_TABLE.iter().enumerate() {
            for (p, &v) in printed_row.iter().enumerate() {
                entries[p * cols + s] = v;
            }
        }
        InteractionMatrix {
            rows,
            cols,
            entries,
            row_names: INDIVIDUAL_TRAIT_LABELS.iter().map(|s| s.to_string()).collect(),
            col_names: SOCIETY_TRAIT_LABELS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl InteractionMatrix {
    /// Builds a matrix from individual-major entries.
    pub fn new(
        row_names: Vec<String>,
        col_names: Vec<String>,
        entries: Vec<f64>,
    ) -> Result<Self> {
        let (rows, cols) = (row_names.len(), col_names.len());
        if rows == 0 || cols == 0 {
            return Err(Error::config("interaction_matrix", "matrix must be non-empty"));
        }
        if entries.len() != rows * cols {
            return Err(Error::config(
                "interaction_matrix",
                format!("expected {} entries, got {}", rows * cols, entries.len()),
            ));
        }
        if let Some((k, v)) = entries
            .iter()
            .enumerate()
            .find(|(_, v)| !(-1.0..=1.0).contains(*v))
        {
            return Err(Error::config(
                format!(
                    "interaction_matrix[{}][{}]",
                    row_names[k / cols],
                    col_names[k % cols]
                ),
                format!("entry {v} outside [-1, 1]"),
            ));
        }
        Ok(InteractionMatrix {
            rows,
            cols,
            entries,
            row_names,
            col_names,
        })
    }

    /// Individual dimension P.
    pub fn individual_dim(&self) -> usize {
        self.rows
    }

    /// Society dimension S.
    pub fn society_dim(&self) -> usize {
        self.cols
    }

    pub fn row_names(&self) -> &[String] {
        &self.row_names
    }

    pub fn col_names(&self) -> &[String] {
        &self.col_names
    }

    pub fn get(&self, individual: usize, society: usize) -> f64 {
        self.entries[individual * self.cols + society]
    }

    /// Entry addressed by trait labels, e.g. `("a", "1")`.
    pub fn by_name(&self, individual: &str, society: &str) -> Option<f64> {
        let p = self.row_names.iter().position(|n| n == individual)?;
        let s = self.col_names.iter().position(|n| n == society)?;
        Some(self.get(p, s))
    }

    /// Row-major P x S entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn check_dims(&self, individual: usize, society: usize) -> Result<()> {
        if individual != self.rows || society != self.cols {
            return Err(Error::DimensionMismatch {
                individual,
                rows: self.rows,
                cols: self.cols,
                society,
            });
        }
        Ok(())
    }

    /// `I theta`, the per-individual-trait payoff of the society vector.
    pub fn project(&self, theta: &[f64]) -> Vec<f64> {
        debug_assert_eq!(theta.len(), self.cols);
        self.entries
            .chunks_exact(self.cols)
            .map(|row| dot(row, theta))
            .collect()
    }

    /// `x^T I`, the gradient of `x^T I theta` with respect to theta.
    pub fn society_gradient(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (row, &xp) in self.entries.chunks_exact(self.cols).zip(x) {
            for (o, &v) in out.iter_mut().zip(row) {
                *o += xp * v;
            }
        }
        out
    }

    /// Unchecked bilinear form on raw slices (no clipping).
    pub fn evaluate(&self, x: &[f64], theta: &[f64]) -> f64 {
        dot(x, &self.project(theta))
    }

    /// Loads a society-major CSV: header row holds individual trait names,
    /// first column holds society trait names.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let parse_err = |message: String| Error::Parse {
            path: "<interaction matrix>".into(),
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| parse_err(e.to_string()))?
            .clone();
        if headers.len() < 2 {
            return Err(parse_err("header needs a corner cell and at least one trait".into()));
        }
        let row_names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
        let mut col_names = Vec::new();
        let mut society_major = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| parse_err(e.to_string()))?;
            if record.len() != headers.len() {
                return Err(parse_err(format!(
                    "row {} has {} cells, expected {}",
                    line + 2,
                    record.len(),
                    headers.len()
                )));
            }
            col_names.push(record[0].to_string());
            for cell in record.iter().skip(1) {
                let v: f64 = cell.parse().map_err(|_| {
                    parse_err(format!("row {}: cannot parse {cell:?} as a number", line + 2))
                })?;
                society_major.push(v);
            }
        }
        let (p, s) = (row_names.len(), col_names.len());
        let mut entries = vec![0.0; p * s];
        for si in 0..s {
            for pi in 0..p {
                entries[pi * s + si] = society_major[si * p + pi];
            }
        }
        InteractionMatrix::new(row_names, col_names, entries)
    }

    /// Society-major CSV text, the inverse of [`InteractionMatrix::from_csv_str`].
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("society");
        for name in &self.row_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for s in 0..self.cols {
            out.push_str(&self.col_names[s]);
            for p in 0..self.rows {
                let _ = write!(out, ",{}", self.get(p, s));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Male,
    Female,
}

/// Grid block coordinates for locality-based mating.
pub type Location = (u32, u32);

#[derive(Debug, Clone, PartialEq)]
pub struct Person {
    pub id: u64,
    pub sex: Sex,
    pub traits: TraitVector,
    /// Payoff against the society vector at birth; never re-evaluated.
    pub happiness: f64,
    pub birth_time: f64,
    pub death_time: f64,
    pub next_available_time: f64,
    pub location: Option<Location>,
    /// Seed group index for members of the initial population.
    pub group: Option<usize>,
}

impl Person {
    pub fn is_alive(&self, t: f64) -> bool {
        self.birth_time <= t && t < self.death_time
    }
}

/// `x^T I theta`.
pub fn happiness(x: &TraitVector, matrix: &InteractionMatrix, theta: &TraitVector) -> Result<f64> {
    matrix.check_dims(x.dim(), theta.dim())?;
    Ok(matrix.evaluate(x.as_slice(), theta.as_slice()))
}

/// Sum of the birth-time happiness of every person.
pub fn total_happiness(population: &[Person]) -> f64 {
    population.iter().map(|p| p.happiness).sum()
}

/// Coordinate-wise mean of the population's traits.
pub fn mean_traits(population: &[Person]) -> Result<TraitVector> {
    let first = population.first().ok_or(Error::EmptyPopulation)?;
    let mut acc = vec![0.0; first.traits.dim()];
    for person in population {
        for (a, v) in acc.iter_mut().zip(person.traits.as_slice()) {
            *a += v;
        }
    }
    let n = population.len() as f64;
    Ok(TraitVector::clipped(acc.into_iter().map(|a| a / n).collect()))
}
