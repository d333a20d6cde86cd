//! Rectangular assignment by the Hungarian method with potentials.

/// Maximum-weight matching of rows to distinct columns.
///
/// Every row of the smaller side is matched. Returns the total weight and,
/// for each row, its column (`None` when there are more rows than columns
/// and the row is left out).
pub fn max_weight_assignment(weights: &[Vec<i64>]) -> (i64, Vec<Option<usize>>) {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return (0, vec![None; rows]);
    }
    let transpose = rows > cols;
    let (n, m) = if transpose { (cols, rows) } else { (rows, cols) };
    let max = weights.iter().flatten().copied().max().unwrap_or(0);
    let cost = |i: usize, j: usize| -> i64 {
        let w = if transpose { weights[j][i] } else { weights[i][j] };
        max - w
    };

    // 1-based potentials and matching, column 0 is the virtual start.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; m + 1];
    let mut matched_row = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![i64::MAX; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![None; rows];
    let mut total = 0i64;
    for j in 1..=m {
        let i = matched_row[j];
        if i == 0 {
            continue;
        }
        let (r, c) = if transpose { (j - 1, i - 1) } else { (i - 1, j - 1) };
        assignment[r] = Some(c);
        total += weights[r][c];
    }
    (total, assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(weights: &[Vec<i64>]) -> i64 {
        fn go(w: &[Vec<i64>], row: usize, used: &mut Vec<bool>, rows_left: usize) -> i64 {
            if row == w.len() {
                return 0;
            }
            let cols = w[0].len();
            let free_cols = used.iter().filter(|u| !**u).count();
            let mut best = i64::MIN;
            // skipping a row is only allowed when rows outnumber columns
            if rows_left > free_cols {
                best = go(w, row + 1, used, rows_left - 1);
            }
            for c in 0..cols {
                if !used[c] {
                    used[c] = true;
                    best = best.max(w[row][c] + go(w, row + 1, used, rows_left - 1));
                    used[c] = false;
                }
            }
            best
        }
        let mut used = vec![false; weights[0].len()];
        go(weights, 0, &mut used, weights.len())
    }

    #[test]
    fn square_case() {
        let w = vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]];
        let (total, a) = max_weight_assignment(&w);
        assert_eq!(total, 11);
        assert_eq!(a, vec![Some(0), Some(2), Some(1)]);
    }

    #[test]
    fn rectangular_cases_match_brute_force() {
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) % 10
        };
        for _ in 0..200 {
            let rows = 1 + next() as usize % 5;
            let cols = 1 + next() as usize % 5;
            let w: Vec<Vec<i64>> = (0..rows).map(|_| (0..cols).map(|_| next() as i64).collect()).collect();
            let (total, a) = max_weight_assignment(&w);
            assert_eq!(total, brute_force(&w), "{w:?}");
            let assigned: Vec<usize> = a.iter().flatten().copied().collect();
            assert_eq!(assigned.len(), rows.min(cols));
            let mut dedup = assigned.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), assigned.len());
        }
    }

    #[test]
    fn empty_input() {
        assert_eq!(max_weight_assignment(&[]), (0, vec![]));
    }
}
