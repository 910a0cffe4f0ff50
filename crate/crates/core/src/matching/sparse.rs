//! Exact assignment for large dense matrices via a sparse candidate graph.
//!
//! Shortest augmenting paths run over a few promising columns per row.
//! The resulting duals are then checked against every entry of the full
//! matrix; any entry with negative reduced cost joins the candidate set and
//! the solve restarts. A passing check certifies optimality on the full
//! matrix: all reduced costs are non-negative, matched edges are tight, and
//! free columns keep a zero dual.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const CANDIDATES: usize = 10;
const NONE: usize = usize::MAX;

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// The `CANDIDATES` smallest keys seen so far.
#[derive(Clone)]
struct TopK {
    keys: [f64; CANDIDATES],
    idx: [usize; CANDIDATES],
    len: usize,
    worst: usize,
}

impl TopK {
    fn new() -> Self {
        TopK { keys: [f64::INFINITY; CANDIDATES], idx: [NONE; CANDIDATES], len: 0, worst: 0 }
    }

    /// Returns the key a newcomer must beat from now on.
    fn offer(&mut self, key: f64, index: usize) -> f64 {
        if self.len < CANDIDATES {
            self.keys[self.len] = key;
            self.idx[self.len] = index;
            self.len += 1;
            if self.len < CANDIDATES {
                return f64::INFINITY;
            }
        } else {
            self.keys[self.worst] = key;
            self.idx[self.worst] = index;
        }
        self.find_worst();
        self.keys[self.worst]
    }

    fn find_worst(&mut self) {
        let mut w = 0;
        for k in 1..CANDIDATES {
            if self.keys[k] > self.keys[w] {
                w = k;
            }
        }
        self.worst = w;
    }

    fn indices(&self) -> &[usize] {
        &self.idx[..self.len]
    }
}

fn initial_candidates(cost: &[f64], n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut col_min = vec![f64::INFINITY; m];
    let mut row_min = vec![f64::INFINITY; n];
    for (i, row) in cost.chunks_exact(m).enumerate() {
        for (j, &c) in row.iter().enumerate() {
            col_min[j] = col_min[j].min(c);
            row_min[i] = row_min[i].min(c);
        }
    }
    let mut by_col = vec![TopK::new(); m];
    let mut col_bar = vec![f64::INFINITY; m];
    let mut cands: Vec<Vec<usize>> = Vec::with_capacity(n);
    for (i, row) in cost.chunks_exact(m).enumerate() {
        let mut top = TopK::new();
        let mut bar = f64::INFINITY;
        let rmin = row_min[i];
        for (j, ((&c, &cm), cb)) in row.iter().zip(&col_min).zip(col_bar.iter_mut()).enumerate() {
            let key = c - cm;
            if key < bar {
                bar = top.offer(key, j);
            }
            let key = c - rmin;
            if key < *cb {
                *cb = by_col[j].offer(key, i);
            }
        }
        cands.push(top.indices().to_vec());
    }
    for (j, top) in by_col.iter().enumerate() {
        for &i in top.indices() {
            cands[i].push(j);
        }
    }
    for row in &mut cands {
        row.sort_unstable();
        row.dedup();
    }
    cands
}

struct State {
    n: usize,
    u: Vec<f64>,
    v: Vec<f64>,
    col_of: Vec<usize>,
    row_of: Vec<usize>,
}

impl State {
    /// Column-reduced duals plus a greedy pass over tight candidate edges.
    fn new(cost: &[f64], n: usize, cands: &[Vec<usize>]) -> Self {
        let c = |i: usize, j: usize| cost[i * n + j];
        let mut v = vec![f64::INFINITY; n];
        for (i, row) in cands.iter().enumerate() {
            for &j in row {
                v[j] = v[j].min(c(i, j));
            }
        }
        for x in &mut v {
            if !x.is_finite() {
                *x = 0.0;
            }
        }
        let mut s = State { n, u: vec![0.0; n], v, col_of: vec![NONE; n], row_of: vec![NONE; n] };
        for i in 0..n {
            s.u[i] = cands[i].iter().map(|&j| c(i, j) - s.v[j]).fold(f64::INFINITY, f64::min);
            if let Some(&j) = cands[i]
                .iter()
                .find(|&&j| s.row_of[j] == NONE && (c(i, j) - s.v[j]) - s.u[i] == 0.0)
            {
                s.col_of[i] = j;
                s.row_of[j] = i;
            }
        }
        s
    }

    /// Lowers `u[i]` until every candidate edge of row `i` is feasible; the
    /// row is released if its matched edge stops being tight.
    fn relax_row(&mut self, cost: &[f64], i: usize, cands: &[usize]) {
        let row = &cost[i * self.n..(i + 1) * self.n];
        let floor = cands.iter().map(|&j| row[j] - self.v[j]).fold(f64::INFINITY, f64::min);
        if floor < self.u[i] {
            self.u[i] = floor;
            let j = self.col_of[i];
            if j != NONE {
                self.col_of[i] = NONE;
                self.row_of[j] = NONE;
            }
        }
    }

    /// Augments every free row. Err(row) when `row` cannot reach a free
    /// column in the candidate graph.
    fn augment_all(&mut self, cost: &[f64], cands: &[Vec<usize>]) -> Result<(), usize> {
        let n = self.n;
        let c = |i: usize, j: usize| cost[i * n + j];
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![NONE; n];
        let mut done = vec![false; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut finished: Vec<usize> = Vec::new();
        let mut heap = BinaryHeap::new();
        for i0 in 0..n {
            if self.col_of[i0] != NONE {
                continue;
            }
            let (u, v) = (&mut self.u, &mut self.v);
            for &j in &cands[i0] {
                let d = (c(i0, j) - u[i0] - v[j]).max(0.0);
                if d < dist[j] {
                    if dist[j] == f64::INFINITY {
                        touched.push(j);
                    }
                    dist[j] = d;
                    pred[j] = i0;
                    heap.push(Entry(d, j));
                }
            }
            let mut end = NONE;
            while let Some(Entry(d, j)) = heap.pop() {
                if done[j] || d > dist[j] {
                    continue;
                }
                done[j] = true;
                finished.push(j);
                let i = self.row_of[j];
                if i == NONE {
                    end = j;
                    break;
                }
                for &j2 in &cands[i] {
                    if done[j2] {
                        continue;
                    }
                    let nd = d + (c(i, j2) - u[i] - v[j2]).max(0.0);
                    if nd < dist[j2] {
                        if dist[j2] == f64::INFINITY {
                            touched.push(j2);
                        }
                        dist[j2] = nd;
                        pred[j2] = i;
                        heap.push(Entry(nd, j2));
                    }
                }
            }
            if end == NONE {
                return Err(i0);
            }
            let total = dist[end];
            u[i0] += total;
            for &j in &finished {
                if j != end {
                    let shift = total - dist[j];
                    u[self.row_of[j]] += shift;
                    v[j] -= shift;
                }
            }
            let mut j = end;
            loop {
                let i = pred[j];
                let prev = self.col_of[i];
                self.col_of[i] = j;
                self.row_of[j] = i;
                if i == i0 {
                    break;
                }
                j = prev;
            }
            for &j in &touched {
                dist[j] = f64::INFINITY;
                pred[j] = NONE;
                done[j] = false;
            }
            touched.clear();
            finished.clear();
            heap.clear();
        }
        Ok(())
    }
}

fn solve_square(cost: &[f64], n: usize) -> Vec<usize> {
    let scale = cost.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let tol = 1e-10 * (1.0 + scale);
    let mut cands = initial_candidates(cost, n, n);
    let mut state = State::new(cost, n, &cands);
    loop {
        if let Err(row) = state.augment_all(cost, &cands) {
            cands[row] = (0..n).collect();
            state.relax_row(cost, row, &cands[row]);
            continue;
        }
        let mut violated = false;
        for i in 0..n {
            let row = &cost[i * n..(i + 1) * n];
            let (ui, v) = (state.u[i], &state.v);
            let before = cands[i].len();
            for (j, (&cij, &vj)) in row.iter().zip(v).enumerate() {
                if cij - ui - vj < -tol {
                    cands[i].push(j);
                }
            }
            if cands[i].len() > before {
                violated = true;
                cands[i].sort_unstable();
                cands[i].dedup();
                state.relax_row(cost, i, &cands[i]);
            }
        }
        if !violated {
            return state.col_of;
        }
    }
}

/// Same contract as the dense solver: every row of an `n x m` cost matrix
/// (`n <= m`) gets a distinct column at minimum total cost. Rectangular
/// problems are padded with zero-cost rows.
pub(crate) fn min_cost_rows(cost: &[f64], n: usize, m: usize) -> Vec<usize> {
    debug_assert!(n <= m);
    if n == 0 {
        return Vec::new();
    }
    if n == m {
        return solve_square(cost, n);
    }
    let mut padded = Vec::with_capacity(m * m);
    padded.extend_from_slice(cost);
    padded.resize(m * m, 0.0);
    let mut cols = solve_square(&padded, m);
    cols.truncate(n);
    cols
}
