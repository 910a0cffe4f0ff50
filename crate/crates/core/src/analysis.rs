//! Population analysis: classical MDS embeddings, k-means clustering and
//! per-cluster trait means.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Person;

pub const RESTARTS: usize = 10;
pub const DEFAULT_MAX_ITER: usize = 100;
/// Above this many points the embedding is computed from the D x D scatter
/// matrix instead of the N x N double-centred distance matrix.
pub const DISTANCE_ROUTE_LIMIT: usize = 1000;

/// N points of equal dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    rows: Vec<Vec<f64>>,
    pub labels: Option<Vec<usize>>,
}

impl PointSet {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::config("points", "need at least one point"));
        };
        let d = first.len();
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::config(format!("points[{i}]"), format!("expected {d} coordinates")));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::config("points", "coordinates must be finite"));
        }
        Ok(PointSet { rows, labels: None })
    }

    pub fn from_population(population: &[Person]) -> Result<Self> {
        PointSet::new(population.iter().map(|p| p.traits.as_slice().to_vec()).collect())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    fn centred(&self) -> DMatrix<f64> {
        let (n, d) = (self.len(), self.dim());
        let mut x = DMatrix::from_fn(n, d, |i, j| self.rows[i][j]);
        for j in 0..d {
            let m = x.column(j).mean();
            x.column_mut(j).add_scalar_mut(-m);
        }
        x
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub points: PointSet,
    /// Eigenvalues of the kept axes, negatives truncated to zero.
    pub eigenvalues: Vec<f64>,
    /// Set when every kept eigenvalue is zero (e.g. identical input points).
    pub degenerate: bool,
}

/// Top `out_dim` eigenpairs of a symmetric matrix, largest first.
fn top_eigen(m: DMatrix<f64>, out_dim: usize) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let n = eig.eigenvectors.nrows();
    let mut vecs = DMatrix::zeros(n, out_dim);
    let mut vals = Vec::with_capacity(out_dim);
    for (c, &k) in order.iter().take(out_dim).enumerate() {
        vals.push(eig.eigenvalues[k]);
        vecs.set_column(c, &eig.eigenvectors.column(k));
    }
    (vals, vecs)
}

/// Torgerson scaling to `out_dim` dimensions. Each axis is oriented so its
/// largest-magnitude coordinate is positive.
pub fn classical_mds(points: &PointSet, out_dim: usize) -> Result<Embedding> {
    let n = points.len();
    if out_dim == 0 || n < out_dim {
        return Err(Error::config("out_dim", format!("need 1 <= out_dim <= {n}")));
    }
    let x = points.centred();
    let mut coords = DMatrix::zeros(n, out_dim);
    let mut eigenvalues = vec![0.0; out_dim];
    if n <= DISTANCE_ROUTE_LIMIT {
        let mut b = DMatrix::from_fn(n, n, |i, j| sq_dist(&points.rows[i], &points.rows[j]));
        let row_means: Vec<f64> = (0..n).map(|i| b.row(i).mean()).collect();
        let grand = row_means.iter().sum::<f64>() / n as f64;
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] = -0.5 * (b[(i, j)] - row_means[i] - row_means[j] + grand);
            }
        }
        let (vals, vecs) = top_eigen(b, out_dim);
        for (c, &l) in vals.iter().enumerate() {
            let l = l.max(0.0);
            eigenvalues[c] = l;
            coords.set_column(c, &(vecs.column(c) * l.sqrt()));
        }
    } else {
        // X^T X shares its non-zero spectrum with X X^T; projecting onto its
        // eigenvectors gives the same coordinates.
        let (vals, vecs) = top_eigen(x.tr_mul(&x), out_dim.min(points.dim()));
        for (c, &l) in vals.iter().enumerate() {
            eigenvalues[c] = l.max(0.0);
            if l > 0.0 {
                coords.set_column(c, &(&x * vecs.column(c)));
            }
        }
    }
    for c in 0..out_dim {
        let col = coords.column(c);
        let peak = col.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if peak < 0.0 {
            coords.column_mut(c).neg_mut();
        }
        let m = coords.column(c).mean();
        coords.column_mut(c).add_scalar_mut(-m);
    }
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let degenerate = eigenvalues.iter().all(|&l| l <= 1e-12 * (1.0 + scale * scale) * n as f64);
    if degenerate {
        coords.fill(0.0);
    }
    let rows = (0..n).map(|i| coords.row(i).iter().copied().collect()).collect();
    Ok(Embedding { points: PointSet { rows, labels: None }, eigenvalues, degenerate })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia after each assignment step of the winning restart.
    pub inertia_history: Vec<f64>,
    pub restart: usize,
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, cen) in centroids.iter().enumerate() {
        let d = sq_dist(p, cen);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Greedy k-means++: each new centre is the best of a few distance-weighted
/// candidates.
fn seed_centroids<R: Rng + ?Sized>(rows: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = rows.len();
    let trials = 2 + (k as f64).ln() as usize;
    let mut centroids = vec![rows[rng.random_range(0..n)].clone()];
    let mut closest: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = closest.iter().sum();
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for _ in 0..trials {
            let cand = if total > 0.0 {
                let mut target = rng.random::<f64>() * total;
                let mut pick = n - 1;
                for (i, &d) in closest.iter().enumerate() {
                    if target < d {
                        pick = i;
                        break;
                    }
                    target -= d;
                }
                pick
            } else {
                rng.random_range(0..n)
            };
            let updated: Vec<f64> = rows.iter().zip(&closest).map(|(r, &d)| d.min(sq_dist(r, &rows[cand]))).collect();
            let potential: f64 = updated.iter().sum();
            if best.as_ref().is_none_or(|b| potential < b.0) {
                best = Some((potential, cand, updated));
            }
        }
        let (_, cand, updated) = best.expect("at least one trial");
        centroids.push(rows[cand].clone());
        closest = updated;
    }
    centroids
}

fn lloyd<R: Rng + ?Sized>(rows: &[Vec<f64>], k: usize, max_iter: usize, rng: &mut R) -> KMeansResult {
    let (n, d) = (rows.len(), rows[0].len());
    let mut centroids = seed_centroids(rows, k, rng);
    let mut labels = vec![usize::MAX; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let mut changed = false;
        let mut inertia = 0.0;
        let mut dists = vec![0.0; n];
        for (i, r) in rows.iter().enumerate() {
            let (c, dist) = nearest(r, &centroids);
            changed |= labels[i] != c;
            labels[i] = c;
            dists[i] = dist;
            inertia += dist;
        }
        debug_assert!(history.last().is_none_or(|&h: &f64| inertia <= h * (1.0 + 1e-12) + 1e-12));
        history.push(inertia);
        if !changed || iterations >= max_iter {
            return KMeansResult {
                labels,
                centroids,
                inertia,
                iterations,
                inertia_history: history,
                restart: 0,
            };
        }
        iterations += 1;
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (r, &c) in rows.iter().zip(&labels) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(r) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                let far = (0..n).max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a))).unwrap_or(0);
                centroids[c] = rows[far].clone();
                dists[far] = 0.0;
            }
        }
    }
}

/// Best of [`RESTARTS`] seeded Lloyd runs by inertia; ties go to the
/// earlier restart.
pub fn kmeans<R: Rng + ?Sized>(points: &PointSet, k: usize, rng: &mut R, max_iter: usize) -> Result<KMeansResult> {
    if k == 0 || k > points.len() {
        return Err(Error::config("k", format!("need 1 <= k <= {}", points.len())));
    }
    let seeds: Vec<u64> = (0..RESTARTS).map(|_| rng.random()).collect();
    let runs: Vec<KMeansResult> = seeds
        .par_iter()
        .enumerate()
        .map(|(r, &s)| {
            let mut res = lloyd(&points.rows, k, max_iter, &mut ChaCha8Rng::seed_from_u64(s));
            res.restart = r;
            res
        })
        .collect();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.inertia < a.inertia { b } else { a })
        .expect("RESTARTS > 0");
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    /// Label as produced by the clustering.
    pub label: usize,
    pub size: usize,
    pub mean: Vec<f64>,
}

/// Per-cluster coordinate means, largest cluster first, then by mean.
pub fn cluster_summary(points: &PointSet, labels: &[usize]) -> Result<Vec<ClusterSummary>> {
    if labels.len() != points.len() {
        return Err(Error::config(
            "labels",
            format!("{} labels for {} points", labels.len(), points.len()),
        ));
    }
    let d = points.dim();
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sums = vec![vec![0.0; d]; k];
    let mut sizes = vec![0usize; k];
    for (r, &l) in points.rows.iter().zip(labels) {
        sizes[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(r) {
            *s += v;
        }
    }
    let mut out: Vec<ClusterSummary> = (0..k)
        .filter(|&l| sizes[l] > 0)
        .map(|l| ClusterSummary {
            label: l,
            size: sizes[l],
            mean: sums[l].iter().map(|s| s / sizes[l] as f64).collect(),
        })
        .collect();
    out.sort_by(|a, b| {
        b.size.cmp(&a.size).then_with(|| {
            a.mean
                .iter()
                .zip(&b.mean)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    Ok(out)
}
