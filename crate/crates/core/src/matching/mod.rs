//! Pairing available males and females each mating round.
//!
//! The weight of a pair is the happiness its expected child would have under
//! the current society. Because expected inheritance is linear, these weights
//! split into a per-male term, a per-female term and a constant, which lets
//! the noiseless modes use exact solvers that never materialise the full
//! matrix. Noisy weights are dense and go through the Hungarian solver.

mod block_flow;
mod hungarian;
mod separable;
mod sparse;

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::demographics::{mating_success_probability, mating_succeeds, DemographicsParams, SuccessRule};
use crate::error::{Error, Result};
use crate::model::{dot, InteractionMatrix, Location, Person, TraitVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    #[default]
    Optimal,
    Noisy,
    Partitioned,
    Locality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    /// Number of differing grid coordinates (0, 1 or 2).
    #[default]
    Hamming,
    Manhattan,
}

impl DistanceMetric {
    pub fn distance(self, a: Location, b: Location) -> f64 {
        match self {
            DistanceMetric::Hamming => (u32::from(a.0 != b.0) + u32::from(a.1 != b.1)) as f64,
            DistanceMetric::Manhattan => (a.0.abs_diff(b.0) + a.1.abs_diff(b.1)) as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatchParams {
    pub mode: MatchMode,
    /// Standard deviation of the Gaussian noise added per pair.
    pub noise_std: f64,
    /// Penalty per unit of grid distance.
    pub gamma: f64,
    pub partition_size: usize,
    pub distance: DistanceMetric,
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            mode: MatchMode::Optimal,
            noise_std: 1.0,
            gamma: 1.0,
            partition_size: 20,
            distance: DistanceMetric::Hamming,
        }
    }
}

impl MatchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::config("matching.noise_std", "must be finite and non-negative"));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::config("matching.gamma", "must be finite and non-negative"));
        }
        if self.partition_size == 0 {
            return Err(Error::config("matching.partition_size", "must be at least 1"));
        }
        Ok(())
    }
}

/// Internal layout of a weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// Row-major `|Y| x |Z|` values.
    Dense(Vec<f64>),
    /// `w_ij = rows[i] + cols[j] + offset`.
    Separable { rows: Vec<f64>, cols: Vec<f64>, offset: f64 },
    /// Separable minus `gamma * distance(row_locs[i], col_locs[j])`.
    Locality {
        rows: Vec<f64>,
        cols: Vec<f64>,
        offset: f64,
        row_locs: Vec<Location>,
        col_locs: Vec<Location>,
        gamma: f64,
        metric: DistanceMetric,
    },
}

/// Pair weights between available males (rows) and females (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct MatchWeights {
    mode: MatchMode,
    y_ids: Vec<u64>,
    z_ids: Vec<u64>,
    kind: WeightKind,
}

impl MatchWeights {
    pub fn dense(mode: MatchMode, y_ids: Vec<u64>, z_ids: Vec<u64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != y_ids.len() * z_ids.len() {
            return Err(Error::Consistency(format!(
                "weight matrix has {} entries, expected {} x {}",
                values.len(),
                y_ids.len(),
                z_ids.len()
            )));
        }
        let w = MatchWeights { mode, y_ids, z_ids, kind: WeightKind::Dense(values) };
        w.check_finite()?;
        Ok(w)
    }

    pub fn separable(
        mode: MatchMode,
        y_ids: Vec<u64>,
        z_ids: Vec<u64>,
        rows: Vec<f64>,
        cols: Vec<f64>,
        offset: f64,
    ) -> Result<Self> {
        if rows.len() != y_ids.len() || cols.len() != z_ids.len() {
            return Err(Error::Consistency("separable weights do not match id lists".into()));
        }
        let w = MatchWeights { mode, y_ids, z_ids, kind: WeightKind::Separable { rows, cols, offset } };
        w.check_finite()?;
        Ok(w)
    }

    fn check_finite(&self) -> Result<()> {
        let ok = match &self.kind {
            WeightKind::Dense(v) => v.iter().all(|x| x.is_finite()),
            WeightKind::Separable { rows, cols, offset }
            | WeightKind::Locality { rows, cols, offset, .. } => {
                rows.iter().chain(cols).all(|x| x.is_finite()) && offset.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Consistency("non-finite match weight".into()))
        }
    }

    pub fn mode(&self) -> MatchMode {
        self.mode
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn y_ids(&self) -> &[u64] {
        &self.y_ids
    }

    pub fn z_ids(&self) -> &[u64] {
        &self.z_ids
    }

    pub fn rows(&self) -> usize {
        self.y_ids.len()
    }

    pub fn cols(&self) -> usize {
        self.z_ids.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.kind {
            WeightKind::Dense(v) => v[i * self.cols() + j],
            WeightKind::Separable { rows, cols, offset } => rows[i] + cols[j] + offset,
            WeightKind::Locality { rows, cols, offset, row_locs, col_locs, gamma, metric } => {
                rows[i] + cols[j] + offset - gamma * metric.distance(row_locs[i], col_locs[j])
            }
        }
    }

    /// Row-major copy of every entry.
    pub fn to_dense(&self) -> Vec<f64> {
        let m = self.cols();
        (0..self.rows() * m).map(|x| self.get(x / m, x % m)).collect()
    }
}

/// Chosen pairs as `(male id, female id)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchPlan {
    pub mode: MatchMode,
    pub pairs: Vec<(u64, u64)>,
    pub total_weight: f64,
}

/// Per-person projections `x . (I theta)` scaled into separable terms.
fn separable_terms(
    y: &[&Person],
    z: &[&Person],
    theta: &TraitVector,
    matrix: &InteractionMatrix,
    demo: &DemographicsParams,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    matrix.check_dims(
        y.first().or(z.first()).map_or(matrix.individual_dim(), |p| p.traits.dim()),
        theta.dim(),
    )?;
    let g = matrix.project(theta.as_slice());
    let p = demo.mutation_prob;
    let scale = 0.5 * (1.0 - p);
    let proj = |people: &[&Person]| -> Result<Vec<f64>> {
        people
            .iter()
            .map(|q| {
                matrix.check_dims(q.traits.dim(), theta.dim())?;
                Ok(scale * dot(q.traits.as_slice(), &g))
            })
            .collect()
    };
    let rows = proj(y)?;
    let cols = proj(z)?;
    let offset = 0.5 * p * g.iter().sum::<f64>();
    Ok((rows, cols, offset))
}

/// Builds the weight matrix for the configured mode. `Noisy` and
/// `Partitioned` draw one Gaussian per pair from `rng` in row-major order.
pub fn build_weights<R: Rng + ?Sized>(
    y: &[&Person],
    z: &[&Person],
    theta: &TraitVector,
    matrix: &InteractionMatrix,
    params: &MatchParams,
    demo: &DemographicsParams,
    rng: &mut R,
) -> Result<MatchWeights> {
    let (rows, cols, offset) = separable_terms(y, z, theta, matrix, demo)?;
    let y_ids: Vec<u64> = y.iter().map(|p| p.id).collect();
    let z_ids: Vec<u64> = z.iter().map(|p| p.id).collect();
    match params.mode {
        MatchMode::Optimal => MatchWeights::separable(params.mode, y_ids, z_ids, rows, cols, offset),
        MatchMode::Noisy | MatchMode::Partitioned => {
            let mut values = Vec::with_capacity(rows.len() * cols.len());
            for r in &rows {
                for c in &cols {
                    let eps: f64 = rng.sample(StandardNormal);
                    values.push(r + c + offset + params.noise_std * eps);
                }
            }
            MatchWeights::dense(params.mode, y_ids, z_ids, values)
        }
        MatchMode::Locality => {
            let locs = |people: &[&Person]| -> Result<Vec<Location>> {
                people
                    .iter()
                    .map(|p| {
                        p.location.ok_or_else(|| {
                            Error::config("matching.mode", "locality matching needs a grid location for every person")
                        })
                    })
                    .collect()
            };
            let w = MatchWeights {
                mode: params.mode,
                y_ids,
                z_ids,
                kind: WeightKind::Locality {
                    rows,
                    cols,
                    offset,
                    row_locs: locs(y)?,
                    col_locs: locs(z)?,
                    gamma: params.gamma,
                    metric: params.distance,
                },
            };
            w.check_finite()?;
            Ok(w)
        }
    }
}

/// Index pairs of a maximum-weight matching that covers the smaller side.
pub fn assignment_indices(weights: &MatchWeights) -> Vec<(usize, usize)> {
    let (n, m) = (weights.rows(), weights.cols());
    match &weights.kind {
        WeightKind::Dense(v) => hungarian::max_weight_pairs(v, n, m),
        WeightKind::Separable { rows, cols, .. } => separable::rank_pairs(rows, cols),
        WeightKind::Locality { rows, cols, row_locs, col_locs, gamma, metric, .. } => {
            let (rb, nrb) = block_index(row_locs);
            let (cb, ncb) = block_index(col_locs);
            let mut rep_r = vec![(0, 0); nrb];
            let mut rep_c = vec![(0, 0); ncb];
            for (i, &b) in rb.iter().enumerate() {
                rep_r[b] = row_locs[i];
            }
            for (j, &b) in cb.iter().enumerate() {
                rep_c[b] = col_locs[j];
            }
            if n >= m {
                let cost: Vec<f64> = rep_r
                    .iter()
                    .flat_map(|&a| rep_c.iter().map(move |&b| gamma * metric.distance(a, b)))
                    .collect();
                block_flow::block_assignment(rows, &rb, cols, &cb, &cost, nrb, ncb)
            } else {
                let cost: Vec<f64> = rep_c
                    .iter()
                    .flat_map(|&a| rep_r.iter().map(move |&b| gamma * metric.distance(a, b)))
                    .collect();
                let mut pairs: Vec<(usize, usize)> =
                    block_flow::block_assignment(cols, &cb, rows, &rb, &cost, ncb, nrb)
                        .into_iter()
                        .map(|(j, i)| (i, j))
                        .collect();
                pairs.sort_unstable();
                pairs
            }
        }
    }
}

fn block_index(locs: &[Location]) -> (Vec<usize>, usize) {
    let mut map: HashMap<Location, usize> = HashMap::new();
    let idx = locs
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect();
    (idx, map.len())
}

/// Maximum-weight assignment covering `min(|Y|, |Z|)` pairs.
pub fn solve_assignment(weights: &MatchWeights) -> MatchPlan {
    let idx = assignment_indices(weights);
    let total_weight = idx.iter().map(|&(i, j)| weights.get(i, j)).sum();
    MatchPlan {
        mode: weights.mode,
        pairs: idx
            .into_iter()
            .map(|(i, j)| (weights.y_ids[i], weights.z_ids[j]))
            .collect(),
        total_weight,
    }
}

/// Shuffles both sides, splits them into blocks of `partition_size` and
/// solves noisy weights within each aligned pair of blocks. Surplus blocks
/// of the larger side stay unmatched.
#[allow(clippy::too_many_arguments)]
pub fn partitioned_match<R1: Rng + ?Sized, R2: Rng + ?Sized>(
    y: &[&Person],
    z: &[&Person],
    theta: &TraitVector,
    matrix: &InteractionMatrix,
    params: &MatchParams,
    demo: &DemographicsParams,
    partition_rng: &mut R1,
    noise_rng: &mut R2,
) -> Result<MatchPlan> {
    if params.partition_size == 0 {
        return Err(Error::config("matching.partition_size", "must be at least 1"));
    }
    let mut ys: Vec<&Person> = y.to_vec();
    let mut zs: Vec<&Person> = z.to_vec();
    ys.shuffle(partition_rng);
    zs.shuffle(partition_rng);
    let block_params = MatchParams { mode: MatchMode::Partitioned, ..params.clone() };
    let mut pairs = Vec::new();
    let mut total_weight = 0.0;
    for (yb, zb) in ys.chunks(params.partition_size).zip(zs.chunks(params.partition_size)) {
        let w = build_weights(yb, zb, theta, matrix, &block_params, demo, noise_rng)?;
        let plan = solve_assignment(&w);
        pairs.extend(plan.pairs);
        total_weight += plan.total_weight;
    }
    Ok(MatchPlan { mode: MatchMode::Partitioned, pairs, total_weight })
}

/// Applies the success rule to a plan. `pop_size` gives the density seen by
/// a (male, female) pair.
pub(crate) fn filter_plan<'a, L, P, R>(
    plan: &MatchPlan,
    lookup: L,
    pop_size: P,
    params: &DemographicsParams,
    rng: &mut R,
) -> Result<Vec<(u64, u64)>>
where
    L: Fn(u64) -> Option<&'a Person>,
    P: Fn(&Person, &Person) -> usize,
    R: Rng + ?Sized,
{
    let mut out = Vec::new();
    for &(m, f) in &plan.pairs {
        let male = lookup(m).ok_or_else(|| Error::Consistency(format!("plan names unknown person {m}")))?;
        let female = lookup(f).ok_or_else(|| Error::Consistency(format!("plan names unknown person {f}")))?;
        let n = pop_size(male, female);
        let ok = match params.success_rule {
            SuccessRule::Threshold => mating_succeeds(n, male, female, params),
            SuccessRule::Probabilistic => {
                rng.random::<f64>() < mating_success_probability(n, male, female, params)
            }
        };
        if ok {
            out.push((m, f));
        }
    }
    Ok(out)
}

/// Keeps the pairs of `plan` whose mating succeeds at population `pop_size`.
pub fn plan_matings<R: Rng + ?Sized>(
    plan: &MatchPlan,
    population: &[Person],
    pop_size: usize,
    params: &DemographicsParams,
    rng: &mut R,
) -> Result<Vec<(u64, u64)>> {
    let index: HashMap<u64, &Person> = population.iter().map(|p| (p.id, p)).collect();
    filter_plan(plan, |id| index.get(&id).copied(), |_, _| pop_size, params, rng)
}
