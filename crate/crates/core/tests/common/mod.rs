//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use citysim::model::InteractionMatrix;

/// Every permutation of `0..k` (Heap's algorithm).
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn heap(n: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..n - 1 {
            heap(n - 1, a, out);
            if n % 2 == 0 {
                a.swap(i, n - 1);
            } else {
                a.swap(0, n - 1);
            }
        }
        heap(n - 1, a, out);
    }
    let mut a: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    heap(k, &mut a, &mut out);
    out
}

/// Best total over all permutations of a row-major square matrix, summed in
/// row order.
pub fn brute_force_max(w: &[f64], k: usize, perms: &[Vec<usize>]) -> f64 {
    perms
        .iter()
        .map(|p| (0..k).map(|i| w[i * k + p[i]]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// One-sample Kolmogorov-Smirnov statistic against Uniform[0, 1].
pub fn ks_uniform(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo = x - i as f64 / n;
            let hi = (i + 1) as f64 / n - x;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic critical value at alpha = 0.01.
pub fn ks_critical(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Cells maximal in their column (over individual traits) and in their row
/// (over society traits), by direct comparison.
pub fn pure_nash_oracle(m: &InteractionMatrix) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    for p in 0..m.individual_dim() {
        for s in 0..m.society_dim() {
            let v = m.get(p, s);
            let col_ok = (0..m.individual_dim()).all(|q| m.get(q, s) <= v);
            let row_ok = (0..m.society_dim()).all(|t| m.get(p, t) <= v);
            if col_ok && row_ok {
                cells.push((p, s));
            }
        }
    }
    cells
}

fn det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|c| {
            let minor: Vec<Vec<f64>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &v)| v).collect())
                .collect();
            let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[0][c] * det(&minor)
        })
        .sum()
}

/// Solves a small square system by Cramer's rule; `None` if singular.
pub fn cramer(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let d = det(a);
    if d.abs() < 1e-12 {
        return None;
    }
    Some(
        (0..b.len())
            .map(|c| {
                let mut m = a.to_vec();
                for (r, row) in m.iter_mut().enumerate() {
                    row[c] = b[r];
                }
                det(&m) / d
            })
            .collect(),
    )
}

fn subsets(n: usize) -> Vec<Vec<usize>> {
    (1..1u32 << n)
        .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect())
        .collect()
}

/// Mixes `y` over `cols` so that every row in `rows` earns the same payoff
/// under `pay[i][j]`. Returns the full-length profile.
fn indifferent(pay: &[Vec<f64>], rows: &[usize], cols: &[usize], width: usize) -> Option<Vec<f64>> {
    let k = cols.len();
    // unknowns: y over cols, then the common payoff
    let mut a = Vec::new();
    let mut b = Vec::new();
    for &i in rows {
        let mut r: Vec<f64> = cols.iter().map(|&j| pay[i][j]).collect();
        r.push(-1.0);
        a.push(r);
        b.push(0.0);
    }
    let mut r = vec![1.0; k];
    r.push(0.0);
    a.push(r);
    b.push(1.0);
    let sol = cramer(&a, &b)?;
    let mut y = vec![0.0; width];
    for (n, &j) in cols.iter().enumerate() {
        if sol[n] <= 1e-12 {
            return None;
        }
        y[j] = sol[n];
    }
    Some(y)
}

/// Every equilibrium of a nondegenerate bimatrix game found by trying all
/// equal-size support pairs.
pub fn equilibria_oracle(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let (p, s) = (a.len(), a[0].len());
    let bt: Vec<Vec<f64>> = (0..s).map(|j| (0..p).map(|i| b[i][j]).collect()).collect();
    let mut out = Vec::new();
    for rows in subsets(p) {
        for cols in subsets(s).into_iter().filter(|c| c.len() == rows.len()) {
            let Some(y) = indifferent(a, &rows, &cols, s) else { continue };
            let Some(x) = indifferent(&bt, &cols, &rows, p) else { continue };
            let row_pay: Vec<f64> = (0..p).map(|i| (0..s).map(|j| a[i][j] * y[j]).sum()).collect();
            let col_pay: Vec<f64> = (0..s).map(|j| (0..p).map(|i| b[i][j] * x[i]).sum()).collect();
            let u = row_pay[rows[0]];
            let v = col_pay[cols[0]];
            if row_pay.iter().all(|&r| r <= u + 1e-9) && col_pay.iter().all(|&c| c <= v + 1e-9) {
                out.push((x, y));
            }
        }
    }
    out
}

/// Eigenpairs of a symmetric matrix by cyclic Jacobi rotations, unsorted.
pub fn jacobi_eigen(m: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.len();
    let mut a = m.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| a[i][i]).collect();
    let vecs = (0..n).map(|k| (0..n).map(|i| v[i][k]).collect()).collect();
    (vals, vecs)
}

pub fn distances(points: &[Vec<f64>]) -> Vec<f64> {
    let mut d = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d.push(points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt());
        }
    }
    d
}

pub fn stress(original: &[Vec<f64>], embedded: &[Vec<f64>]) -> f64 {
    distances(original)
        .iter()
        .zip(distances(embedded))
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Two Gaussian blobs with unit spread whose centres are `gap` apart.
pub fn two_blobs<R: rand::Rng>(rng: &mut R, per_blob: usize, dim: usize, gap: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    use rand_distr::{Distribution, StandardNormal};
    let mut pts = Vec::new();
    let mut truth = Vec::new();
    for blob in 0..2 {
        for _ in 0..per_blob {
            let mut p: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
            p[0] += blob as f64 * gap;
            pts.push(p);
            truth.push(blob);
        }
    }
    (pts, truth)
}

/// Whether two labelings describe the same partition.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    let mut map = std::collections::HashMap::new();
    let mut back = std::collections::HashMap::new();
    a.iter().zip(b).all(|(x, y)| *map.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x)
}

pub fn spearman_oracle(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; v.len()];
        for i in 0..v.len() {
            let less = v.iter().filter(|&&w| w < v[i]).count() as f64;
            let eq = v.iter().filter(|&&w| w == v[i]).count() as f64;
            r[i] = less + (eq + 1.0) / 2.0;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx * vy).sqrt()
}
