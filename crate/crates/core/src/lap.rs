//! Square linear assignment by the Hungarian method with row/column potentials, O(n^3).

/// Returns `col[i]`, the column assigned to row `i`, minimizing `sum cost[i][col[i]]`.
///
/// Panics if `cost` is not square.
pub fn solve(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    assert!(cost.iter().all(|r| r.len() == n), "cost matrix must be square");
    if n == 0 {
        return Vec::new();
    }
    const INF: i64 = i64::MAX / 4;
    // 1-based internals; index 0 is the virtual root row/column.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col = vec![0usize; n];
    for j in 1..=n {
        col[row_of[j] - 1] = j - 1;
    }
    col
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total(cost: &[Vec<i64>], col: &[usize]) -> i64 {
        col.iter().enumerate().map(|(i, &j)| cost[i][j]).sum()
    }

    #[test]
    fn small_known_instance() {
        let cost = vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]];
        let col = solve(&cost);
        assert_eq!(total(&cost, &col), 5);
    }

    #[test]
    fn empty_and_single() {
        assert!(solve(&[]).is_empty());
        assert_eq!(solve(&[vec![7]]), vec![0]);
    }

    #[test]
    fn returns_a_permutation_with_negative_costs() {
        let cost = vec![vec![-1, 1, 1], vec![-1, -1, 1], vec![1, 1, 1]];
        let mut col = solve(&cost);
        assert_eq!(total(&cost, &col), -1);
        col.sort_unstable();
        assert_eq!(col, vec![0, 1, 2]);
    }
}
