//! Exact assignment for weights `w_ij = r_i + c_j + k - cost(block_i, block_j)`
//! where people sit in a small number of blocks (grid cells).
//!
//! The person-level problem collapses to a min-cost flow between blocks:
//! every small-side person is matched, and the larger side leaves its
//! `n - k` lowest-valued members unmatched. Within a block all members are
//! interchangeable apart from their own term, so the flow is turned back
//! into pairs by rank.

use super::separable::descending_order;

const INF: f64 = f64::INFINITY;

/// `big_blocks[i]` / `small_blocks[j]` index into a row-major
/// `n_big_blocks x n_small_blocks` cost table. Returns `(big, small)` pairs
/// sorted by the big-side index.
pub(crate) fn block_assignment(
    big_vals: &[f64],
    big_blocks: &[usize],
    small_vals: &[f64],
    small_blocks: &[usize],
    cost: &[f64],
    n_big_blocks: usize,
    n_small_blocks: usize,
) -> Vec<(usize, usize)> {
    let n = big_vals.len();
    let k = small_vals.len();
    debug_assert!(k <= n);
    debug_assert_eq!(cost.len(), n_big_blocks * n_small_blocks);
    if k == 0 {
        return Vec::new();
    }
    let nu = n_big_blocks;
    let nv = n_small_blocks;

    // Members of each big block, ascending by value (dropping order).
    let mut big_members: Vec<Vec<usize>> = vec![Vec::new(); nu];
    for i in descending_order(big_vals).into_iter().rev() {
        big_members[big_blocks[i]].push(i);
    }
    let mut small_members: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for j in descending_order(small_vals) {
        small_members[small_blocks[j]].push(j);
    }
    let cap_u: Vec<usize> = big_members.iter().map(Vec::len).collect();
    let cap_v: Vec<usize> = small_members.iter().map(Vec::len).collect();
    let drop_cost = |u: usize, d: usize| big_vals[big_members[u][d]];

    // Node layout: s, big blocks, small blocks, dummy, t.
    let s = 0;
    let ub = 1;
    let vb = 1 + nu;
    let dn = 1 + nu + nv;
    let t = dn + 1;
    let nodes = t + 1;

    let mut sent = vec![0usize; nu];
    let mut flow = vec![0usize; nu * nv];
    let mut dropped = vec![0usize; nu];
    let mut recv = vec![0usize; nv];
    let mut dflow = 0usize;
    let dcap = n - k;

    let mut pi = vec![0.0f64; nodes];
    for v in 0..nv {
        pi[vb + v] = (0..nu)
            .filter(|&u| cap_u[u] > 0)
            .map(|u| cost[u * nv + v])
            .fold(INF, f64::min);
    }
    pi[dn] = (0..nu)
        .filter(|&u| cap_u[u] > 0)
        .map(|u| drop_cost(u, 0))
        .fold(INF, f64::min);
    if !pi[dn].is_finite() {
        pi[dn] = 0.0;
    }
    pi[t] = (0..nv)
        .filter(|&v| cap_v[v] > 0)
        .map(|v| pi[vb + v])
        .chain(std::iter::once(if dcap > 0 { pi[dn] } else { INF }))
        .fold(INF, f64::min);

    let mut dist = vec![INF; nodes];
    let mut pred = vec![usize::MAX; nodes];
    let mut done = vec![false; nodes];
    let mut pushed = 0usize;

    while pushed < n {
        dist.iter_mut().for_each(|d| *d = INF);
        pred.iter_mut().for_each(|p| *p = usize::MAX);
        done.iter_mut().for_each(|d| *d = false);
        dist[s] = 0.0;
        loop {
            let mut x = usize::MAX;
            let mut best = INF;
            for (node, &d) in dist.iter().enumerate() {
                if !done[node] && d < best {
                    best = d;
                    x = node;
                }
            }
            if x == usize::MAX {
                break;
            }
            done[x] = true;
            let mut relax = |y: usize, c: f64, dist: &mut Vec<f64>| {
                let nd = best + (c + pi[x] - pi[y]).max(0.0);
                if nd < dist[y] {
                    dist[y] = nd;
                    pred[y] = x;
                }
            };
            if x == s {
                for u in 0..nu {
                    if sent[u] < cap_u[u] {
                        relax(ub + u, 0.0, &mut dist);
                    }
                }
            } else if x < vb {
                let u = x - ub;
                for v in 0..nv {
                    relax(vb + v, cost[u * nv + v], &mut dist);
                }
                if dropped[u] < cap_u[u] {
                    relax(dn, drop_cost(u, dropped[u]), &mut dist);
                }
            } else if x < dn {
                let v = x - vb;
                for u in 0..nu {
                    if flow[u * nv + v] > 0 {
                        relax(ub + u, -cost[u * nv + v], &mut dist);
                    }
                }
                if recv[v] < cap_v[v] {
                    relax(t, 0.0, &mut dist);
                }
            } else if x == dn {
                for u in 0..nu {
                    if dropped[u] > 0 {
                        relax(ub + u, -drop_cost(u, dropped[u] - 1), &mut dist);
                    }
                }
                if dflow < dcap {
                    relax(t, 0.0, &mut dist);
                }
            }
        }
        assert!(dist[t].is_finite(), "block flow: sink unreachable");

        let reach_max = dist.iter().copied().filter(|d| d.is_finite()).fold(0.0, f64::max);
        for (p, &d) in pi.iter_mut().zip(&dist) {
            *p += if d.is_finite() { d } else { reach_max };
        }

        // Bottleneck along the path.
        let mut amount = n - pushed;
        let mut y = t;
        while y != s {
            let x = pred[y];
            let cap = if x == s {
                cap_u[y - ub] - sent[y - ub]
            } else if y == t && x == dn {
                dcap - dflow
            } else if y == t {
                cap_v[x - vb] - recv[x - vb]
            } else if y == dn || x == dn {
                1
            } else if x < vb {
                usize::MAX
            } else {
                flow[(y - ub) * nv + (x - vb)]
            };
            amount = amount.min(cap);
            y = x;
        }
        debug_assert!(amount > 0);

        let mut y = t;
        while y != s {
            let x = pred[y];
            if x == s {
                sent[y - ub] += amount;
            } else if y == t && x == dn {
                dflow += amount;
            } else if y == t {
                recv[x - vb] += amount;
            } else if y == dn {
                dropped[x - ub] += amount;
            } else if x == dn {
                dropped[y - ub] -= amount;
            } else if x < vb {
                flow[(x - ub) * nv + (y - vb)] += amount;
            } else {
                flow[(y - ub) * nv + (x - vb)] -= amount;
            }
            y = x;
        }
        pushed += amount;
    }

    // Selected big-block members, best first.
    let mut big_queue: Vec<Vec<usize>> = big_members
        .iter()
        .zip(&dropped)
        .map(|(m, &d)| m[d..].iter().rev().copied().collect())
        .collect();
    let mut small_pos = vec![0usize; nv];
    let mut pairs = Vec::with_capacity(k);
    for u in 0..nu {
        let mut taken = 0;
        for v in 0..nv {
            for _ in 0..flow[u * nv + v] {
                let i = big_queue[u][taken];
                let j = small_members[v][small_pos[v]];
                taken += 1;
                small_pos[v] += 1;
                pairs.push((i, j));
            }
        }
        big_queue[u].clear();
    }
    pairs.sort_unstable();
    pairs
}
