//! Exact assignment for additively separable weights `w_ij = r_i + c_j + k`.
//!
//! Every complete matching of the smaller side has total
//! `sum(selected r) + sum(selected c) + k * size`, so an optimum takes the
//! largest entries of the larger side. Ties are broken by pairing ranks:
//! the i-th best row with the i-th best column.

pub(crate) fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = values.iter().copied().zip(0..).collect();
    keyed.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, i)| i).collect()
}

pub(crate) fn rank_pairs(rows: &[f64], cols: &[f64]) -> Vec<(usize, usize)> {
    let r = descending_order(rows);
    let c = descending_order(cols);
    let mut col_of = vec![usize::MAX; rows.len()];
    for (i, j) in r.into_iter().zip(c) {
        col_of[i] = j;
    }
    col_of.into_iter().enumerate().filter(|&(_, j)| j != usize::MAX).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selects_top_of_larger_side() {
        let pairs = rank_pairs(&[1.0, 5.0, 3.0], &[0.5, 0.25]);
        assert_eq!(pairs, vec![(1, 0), (2, 1)]);
    }

    #[test]
    fn ties_break_by_index() {
        assert_eq!(descending_order(&[2.0, 2.0, 1.0, 2.0]), vec![0, 1, 3, 2]);
    }
}
