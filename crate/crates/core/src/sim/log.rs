use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Location, Person, Sex, TraitVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub time: f64,
    pub population: usize,
    pub births: usize,
    pub deaths: usize,
    /// Sum of birth-time happiness over the living.
    pub total_happiness: f64,
    pub mean_happiness: f64,
    /// Mean of `x^T I theta` against the row's society vector.
    pub mean_current_happiness: f64,
    pub theta: Vec<f64>,
    pub mean_traits: Vec<f64>,
}

/// Per-block occupancy at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub time: f64,
    pub gx: u32,
    pub gy: u32,
    pub population: usize,
    pub mean_happiness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeSeriesLog {
    pub society_labels: Vec<String>,
    pub individual_labels: Vec<String>,
    pub rows: Vec<LogRow>,
    pub grid: Vec<GridRow>,
}

impl TimeSeriesLog {
    pub fn header(&self) -> String {
        let mut h = String::from(
            "time,population,births,deaths,total_happiness,mean_happiness,mean_current_happiness",
        );
        for s in &self.society_labels {
            let _ = write!(h, ",theta_{s}");
        }
        for p in &self.individual_labels {
            let _ = write!(h, ",mean_{p}");
        }
        h
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{}",
                r.time,
                r.population,
                r.births,
                r.deaths,
                r.total_happiness,
                r.mean_happiness,
                r.mean_current_happiness
            );
            for v in r.theta.iter().chain(&r.mean_traits) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn grid_csv_string(&self) -> String {
        let mut out = String::from("time,gx,gy,population,mean_happiness\n");
        for g in &self.grid {
            let _ = write!(out, "{},{},{},{},", g.time, g.gx, g.gy, g.population);
            if let Some(h) = g.mean_happiness {
                let _ = write!(out, "{h}");
            }
            out.push('\n');
        }
        out
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.time).collect()
    }

    pub fn mean_happiness(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mean_happiness).collect()
    }

    pub fn populations(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.population).collect()
    }
}

const POPULATION_FIXED: [&str; 9] = [
    "id",
    "sex",
    "group",
    "birth_time",
    "death_time",
    "next_available_time",
    "happiness",
    "gx",
    "gy",
];

/// Roster snapshot, one person per row followed by their traits.
pub fn population_csv_string(population: &[Person], trait_labels: &[String]) -> String {
    let mut out = POPULATION_FIXED.join(",");
    for l in trait_labels {
        let _ = write!(out, ",{l}");
    }
    out.push('\n');
    for p in population {
        let sex = match p.sex {
            Sex::Male => "male",
            Sex::Female => "female",
        };
        let _ = write!(out, "{},{sex},", p.id);
        if let Some(g) = p.group {
            let _ = write!(out, "{g}");
        }
        let _ = write!(
            out,
            ",{},{},{},{},",
            p.birth_time, p.death_time, p.next_available_time, p.happiness
        );
        if let Some((x, y)) = p.location {
            let _ = write!(out, "{x},{y}");
        } else {
            out.push(',');
        }
        for v in p.traits.as_slice() {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Reads a snapshot written by [`population_csv_string`]. Returns the roster
/// and the trait column labels.
pub fn read_population_csv(path: &Path) -> Result<(Vec<Person>, Vec<String>)> {
    let parse = |message: String| Error::Parse { path: path.to_path_buf(), message };
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => parse(format!("{other:?}")),
    })?;
    let headers = reader.headers().map_err(|e| parse(e.to_string()))?.clone();
    if headers.len() < POPULATION_FIXED.len()
        || headers.iter().take(POPULATION_FIXED.len()).ne(POPULATION_FIXED.iter().copied())
    {
        return Err(parse(format!("expected leading columns {}", POPULATION_FIXED.join(","))));
    }
    let labels: Vec<String> = headers.iter().skip(POPULATION_FIXED.len()).map(String::from).collect();
    let mut people = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| parse(e.to_string()))?;
        let row = line + 2;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| parse(format!("line {row}: column {} is not a number", headers[i].to_string())))
        };
        let opt_u = |i: usize| -> Result<Option<u64>> {
            let s = rec[i].trim();
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<u64>()
                    .map(Some)
                    .map_err(|_| parse(format!("line {row}: column {} is not an integer", &headers[i])))
            }
        };
        let sex = match rec[1].trim() {
            "male" => Sex::Male,
            "female" => Sex::Female,
            other => return Err(parse(format!("line {row}: unknown sex {other:?}"))),
        };
        let id = opt_u(0)?.ok_or_else(|| parse(format!("line {row}: missing id")))?;
        let location: Option<Location> = match (opt_u(7)?, opt_u(8)?) {
            (Some(x), Some(y)) => Some((x as u32, y as u32)),
            _ => None,
        };
        let traits = (POPULATION_FIXED.len()..rec.len()).map(num).collect::<Result<Vec<_>>>()?;
        people.push(Person {
            id,
            sex,
            group: opt_u(2)?.map(|g| g as usize),
            birth_time: num(3)?,
            death_time: num(4)?,
            next_available_time: num(5)?,
            happiness: num(6)?,
            location,
            traits: TraitVector::try_new(&format!("line {row} traits"), traits)?,
        });
    }
    Ok((people, labels))
}
