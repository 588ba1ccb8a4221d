//! Maximum-weight bipartite matching between generated and ground-truth
//! events, and inversion counting over the matched order.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::SimilarityMatrix;

/// Minimum-cost assignment of every row to a distinct column (`rows <= cols`),
/// shortest augmenting path with potentials. Returns the column of each row.
fn assign_min_cost(cost: &[f64], rows: usize, cols: usize) -> Vec<usize> {
    debug_assert!(rows <= cols);
    let inf = f64::INFINITY;
    // 1-based with a virtual column 0.
    let mut u = vec![0.0f64; rows + 1];
    let mut v = vec![0.0f64; cols + 1];
    let mut p = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];

    for i in 1..=rows {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * cols + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
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

    let mut assignment = vec![0usize; rows];
    for j in 1..=cols {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Maximum total weight of a matching of size `min(|rows|, |cols|)` on the
/// submatrix selected by `rows` x `cols`.
fn best_value(m: &SimilarityMatrix, rows: &[usize], cols: &[usize]) -> f64 {
    if rows.is_empty() || cols.is_empty() {
        return 0.0;
    }
    let transpose = rows.len() > cols.len();
    let (r, c) = if transpose {
        (cols, rows)
    } else {
        (rows, cols)
    };
    let weight = |a: usize, b: usize| {
        if transpose {
            m.get(b, a)
        } else {
            m.get(a, b)
        }
    };
    let mut cost = Vec::with_capacity(r.len() * c.len());
    for &a in r {
        for &b in c {
            cost.push(-weight(a, b));
        }
    }
    let assignment = assign_min_cost(&cost, r.len(), c.len());
    assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| weight(r[i], c[j]))
        .sum()
}

/// Matches generated events (rows) to ground-truth events (cols).
///
/// The result has `min(rows, cols)` pairs, maximizes total similarity, and is
/// the lexicographically smallest `(gen_index, gt_index)` sequence among all
/// optimal matchings. Pairs are ordered by generated index.
pub fn match_events(matrix: &SimilarityMatrix) -> Vec<(usize, usize)> {
    let (r, c) = (matrix.rows(), matrix.cols());
    let size = r.min(c);
    if size == 0 {
        return Vec::new();
    }
    let all_rows: Vec<usize> = (0..r).collect();
    let all_cols: Vec<usize> = (0..c).collect();
    let optimum = best_value(matrix, &all_rows, &all_cols);
    let tol = 1e-9 * optimum.max(1.0);

    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(size);
    let mut used_cols = vec![false; c];
    let mut fixed = 0.0;
    let mut next_row = 0;
    while pairs.len() < size {
        let remaining_after = size - pairs.len() - 1;
        let mut chosen = None;
        'rows: for g in next_row..r {
            let rest_rows: Vec<usize> = (g + 1..r).collect();
            if rest_rows.len() < remaining_after {
                break;
            }
            for t in 0..c {
                if used_cols[t] {
                    continue;
                }
                let rest_cols: Vec<usize> = (0..c).filter(|&j| !used_cols[j] && j != t).collect();
                if rest_rows.len().min(rest_cols.len()) != remaining_after {
                    continue;
                }
                let total = fixed + matrix.get(g, t) + best_value(matrix, &rest_rows, &rest_cols);
                if total >= optimum - tol {
                    chosen = Some((g, t));
                    break 'rows;
                }
            }
        }
        let (g, t) = chosen.expect("an optimal completion always exists");
        fixed += matrix.get(g, t);
        used_cols[t] = true;
        next_row = g + 1;
        pairs.push((g, t));
    }
    pairs
}

/// Total weight of a set of pairs.
pub fn matching_weight(matrix: &SimilarityMatrix, pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().map(|&(g, t)| matrix.get(g, t)).sum()
}

/// Number of pairs `a < b` with `values[a] > values[b]`, by merge sort.
pub fn count_inversions(values: &[usize]) -> u64 {
    fn sort_count(v: &mut [usize], buf: &mut [usize]) -> u64 {
        let n = v.len();
        if n < 2 {
            return 0;
        }
        let mid = n / 2;
        let mut count = {
            let (left, right) = v.split_at_mut(mid);
            let (bl, br) = buf.split_at_mut(mid);
            sort_count(left, bl) + sort_count(right, br)
        };
        let (mut i, mut j, mut k) = (0, mid, 0);
        while i < mid && j < n {
            if v[i] <= v[j] {
                buf[k] = v[i];
                i += 1;
            } else {
                buf[k] = v[j];
                count += (mid - i) as u64;
                j += 1;
            }
            k += 1;
        }
        while i < mid {
            buf[k] = v[i];
            i += 1;
            k += 1;
        }
        while j < n {
            buf[k] = v[j];
            j += 1;
            k += 1;
        }
        v.copy_from_slice(&buf[..n]);
        count
    }
    let mut work = values.to_vec();
    let mut buf = vec![0usize; values.len()];
    sort_count(&mut work, &mut buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn brute_force_best(m: &SimilarityMatrix) -> f64 {
        fn rec(m: &SimilarityMatrix, row: usize, used: &mut Vec<bool>, left: usize) -> f64 {
            if left == 0 || row == m.rows() {
                return if left == 0 { 0.0 } else { f64::NEG_INFINITY };
            }
            // skip this row
            let mut best = if m.rows() - row > left {
                rec(m, row + 1, used, left)
            } else {
                f64::NEG_INFINITY
            };
            for c in 0..m.cols() {
                if !used[c] {
                    used[c] = true;
                    let v = m.get(row, c) + rec(m, row + 1, used, left - 1);
                    used[c] = false;
                    if v > best {
                        best = v;
                    }
                }
            }
            best
        }
        let k = m.rows().min(m.cols());
        if k == 0 {
            return 0.0;
        }
        rec(m, 0, &mut vec![false; m.cols()], k)
    }

    #[test]
    fn identity_matrix_matches_diagonal() {
        let m = SimilarityMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(match_events(&m), vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn two_by_two_prefers_larger_total() {
        let m = SimilarityMatrix::from_rows(&[vec![0.9, 0.1], vec![0.8, 0.7]]).unwrap();
        let pairs = match_events(&m);
        assert_eq!(pairs, vec![(0, 0), (1, 1)]);
        assert!((matching_weight(&m, &pairs) - 1.6).abs() < 1e-12);
        assert!((matching_weight(&m, &[(0, 1), (1, 0)]) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn ties_resolve_lexicographically() {
        let m = SimilarityMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_eq!(match_events(&m), vec![(0, 0), (1, 1)]);
        // More generated events than ground truth: earliest rows win ties.
        let m = SimilarityMatrix::from_rows(&[vec![0.3], vec![0.3], vec![0.3]]).unwrap();
        assert_eq!(match_events(&m), vec![(0, 0)]);
    }

    #[test]
    fn rectangular_shapes() {
        let m = SimilarityMatrix::from_rows(&[vec![0.1, 0.9, 0.2]]).unwrap();
        assert_eq!(match_events(&m), vec![(0, 1)]);
        let m = SimilarityMatrix::from_rows(&[vec![0.1], vec![0.9], vec![0.2]]).unwrap();
        assert_eq!(match_events(&m), vec![(1, 0)]);
        assert!(match_events(&SimilarityMatrix::zeros(0, 4)).is_empty());
        assert!(match_events(&SimilarityMatrix::zeros(3, 0)).is_empty());
    }

    #[test]
    fn agrees_with_brute_force_on_fixed_matrices() {
        let mut seed = 12345u64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed % 1000) as f64 / 1000.0
        };
        for _ in 0..50 {
            let vals: Vec<f64> = (0..25).map(|_| next()).collect();
            let m = SimilarityMatrix::new(5, 5, vals).unwrap();
            let pairs = match_events(&m);
            assert_eq!(pairs.len(), 5);
            assert!((matching_weight(&m, &pairs) - brute_force_best(&m)).abs() < 1e-9);
        }
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(count_inversions(&[0, 1, 2, 3]), 0);
        assert_eq!(count_inversions(&[3, 2, 1, 0]), 6);
        assert_eq!(count_inversions(&[2, 0, 3, 1]), 3);
        assert_eq!(count_inversions(&[]), 0);
        assert_eq!(count_inversions(&[1, 1, 0]), 2);
    }
}
