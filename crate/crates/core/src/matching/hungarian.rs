//! Dense shortest-augmenting-path assignment (Hungarian method with
//! potentials), O(n^2 m) for an n x m cost matrix with n <= m.

/// Assigns every row of a row-major `n x m` cost matrix (`n <= m`) to a
/// distinct column at minimum total cost. Returns the column of each row.
pub(crate) fn min_cost_rows(cost: &[f64], n: usize, m: usize) -> Vec<usize> {
    debug_assert!(n <= m);
    debug_assert_eq!(cost.len(), n * m);
    if n == 0 {
        return Vec::new();
    }
    let c = |i: usize, j: usize| cost[(i - 1) * m + (j - 1)];

    // 1-based: p[j] is the row holding column j (0 = free); column 0 is the
    // virtual root of each search tree.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    // Feasible starting duals. Column reduction is only valid for square
    // problems: free columns of a rectangular problem must keep v = 0.
    if n == m {
        for j in 1..=m {
            v[j] = (1..=n).map(|i| c(i, j)).fold(f64::INFINITY, f64::min);
        }
    }
    let mut assigned = vec![false; n + 1];
    for i in 1..=n {
        u[i] = (1..=m).map(|j| c(i, j) - v[j]).fold(f64::INFINITY, f64::min);
        for j in 1..=m {
            if p[j] == 0 && (c(i, j) - v[j]) - u[i] == 0.0 {
                p[j] = i;
                assigned[i] = true;
                break;
            }
        }
    }

    let mut minv = vec![0.0f64; m + 1];
    let mut used = vec![false; m + 1];
    for i in 1..=n {
        if assigned[i] {
            continue;
        }
        p[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = c(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut out = vec![usize::MAX; n];
    for j in 1..=m {
        if p[j] != 0 {
            out[p[j] - 1] = j - 1;
        }
    }
    debug_assert!(out.iter().all(|&j| j != usize::MAX));
    out
}

const DENSE_LIMIT: usize = 4096;

fn solve_min(cost: &[f64], n: usize, m: usize) -> Vec<usize> {
    if n * m <= DENSE_LIMIT {
        min_cost_rows(cost, n, m)
    } else {
        super::sparse::min_cost_rows(cost, n, m)
    }
}

/// Maximum-weight matching of the smaller side of a row-major `rows x cols`
/// weight matrix. Returns `(row, col)` pairs sorted by row.
pub(crate) fn max_weight_pairs(weights: &[f64], rows: usize, cols: usize) -> Vec<(usize, usize)> {
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    if rows <= cols {
        let cost: Vec<f64> = weights.iter().map(|w| -w).collect();
        solve_min(&cost, rows, cols)
            .into_iter()
            .enumerate()
            .collect()
    } else {
        let mut cost = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                cost[j * rows + i] = -weights[i * cols + j];
            }
        }
        let mut pairs: Vec<(usize, usize)> = solve_min(&cost, cols, rows)
            .into_iter()
            .enumerate()
            .map(|(j, i)| (i, j))
            .collect();
        pairs.sort_unstable();
        pairs
    }
}
