//! Moving infeasible assignments onto permutation matrices.
//!
//! [`bfha_repair`] is the greedy bit-flip heuristic driven by the violation
//! matrix `V[i][j] = rowsum(i) + colsum(j) - 2`. It first clears 1-cells with
//! the largest positive violation until no over-covered row or column is
//! left, then sets 0-cells with the most negative violation. The first phase
//! strictly decreases `sum(U)` with `U = q ∘ V`, and the second never creates
//! a positive entry of `U`, so the loop always ends at `V = 0`, i.e. at a
//! permutation matrix.
//!
//! [`hungarian_repair`] is the exact counterpart: the closest permutation in
//! Hamming distance, found as a linear assignment with cost `1 - 2 q[i][j]`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::instance::Assignment;
use crate::lap;

/// `V[i][j] = r[i] + c[j] - 2` with cached row sums `r` and column sums `c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViolationMatrix {
    n: usize,
    v: Vec<i64>,
    rows: Vec<i64>,
    cols: Vec<i64>,
}

impl ViolationMatrix {
    pub fn new(q: &Assignment) -> Self {
        let n = q.n();
        let rows: Vec<i64> = q.row_sums().into_iter().map(|x| x as i64).collect();
        let cols: Vec<i64> = q.col_sums().into_iter().map(|x| x as i64).collect();
        let mut v = Vec::with_capacity(n * n);
        for &r in &rows {
            for &c in &cols {
                v.push(r + c - 2);
            }
        }
        Self { n, v, rows, cols }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.v[i * self.n + j]
    }

    pub fn row_sums(&self) -> &[i64] {
        &self.rows
    }

    pub fn col_sums(&self) -> &[i64] {
        &self.cols
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.v.chunks(self.n.max(1)).map(<[i64]>::to_vec).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.v.iter().all(|&x| x == 0)
    }

    /// Updates sums and `V` after cell `(i, j)` changed by `delta` (+1 or -1).
    /// Row `i` and column `j` shift by `delta`; their crossing by `2 * delta`.
    pub fn apply_flip(&mut self, i: usize, j: usize, delta: i64) {
        let n = self.n;
        self.rows[i] += delta;
        self.cols[j] += delta;
        for k in 0..n {
            self.v[i * n + k] += delta;
            self.v[k * n + j] += delta;
        }
    }

    /// `sum max(U, 0)` with `U = q ∘ V`.
    pub fn positive_u_total(&self, q: &Assignment) -> i64 {
        (0..self.n)
            .flat_map(|i| (0..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| q.get(i, j) == 1)
            .map(|(i, j)| self.get(i, j).max(0))
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairResult {
    pub repaired: Assignment,
    /// Total bit flips performed.
    pub flips: usize,
    /// Flips that cleared a 1-cell.
    pub removals: usize,
    /// Hamming distance between input and `repaired`.
    pub hamming: usize,
}

/// Number of differing entries.
pub fn hamming(a: &Assignment, b: &Assignment) -> Result<usize> {
    check_len(a.n(), b.n())?;
    Ok(a
        .as_flat()
        .iter()
        .zip(b.as_flat())
        .filter(|(x, y)| x != y)
        .count())
}

/// Bit-flip heuristic repair. Ties go to the lexicographically smallest `(i, j)`.
///
/// Only row and column sums are tracked since `V` is determined by them. The
/// removal phase scans the 1-cells alone. Once it is exhausted every row and
/// column sum is at most 1, so the cells with `V <= -1` among 0-cells reach
/// their minimum `-2` exactly at (empty row, empty column) pairs, and the
/// lexicographic choice is the first empty row with the first empty column.
pub fn bfha_repair(q: &Assignment) -> RepairResult {
    let n = q.n();
    let mut cur = q.clone();
    let mut rows: Vec<i64> = q.row_sums().into_iter().map(|x| x as i64).collect();
    let mut cols: Vec<i64> = q.col_sums().into_iter().map(|x| x as i64).collect();
    // Row-major, so the first strict maximum is the lexicographic one.
    let mut ones: Vec<(usize, usize)> = q.ones().collect();
    let mut removals = 0;

    loop {
        let mut pick: Option<(usize, i64)> = None;
        for (k, &(i, j)) in ones.iter().enumerate() {
            let v = rows[i] + cols[j] - 2;
            if v >= 1 && pick.map_or(true, |(_, best)| v > best) {
                pick = Some((k, v));
            }
        }
        let Some((k, _)) = pick else { break };
        let (i, j) = ones.remove(k);
        cur.set(i, j, false);
        rows[i] -= 1;
        cols[j] -= 1;
        removals += 1;
    }

    let empty_rows = (0..n).filter(|&i| rows[i] == 0);
    let empty_cols = (0..n).filter(|&j| cols[j] == 0);
    let mut fills = 0;
    for (i, j) in empty_rows.zip(empty_cols) {
        cur.set(i, j, true);
        fills += 1;
    }

    let hamming = hamming(q, &cur).expect("same size");
    RepairResult {
        repaired: cur,
        flips: removals + fills,
        removals,
        hamming,
    }
}

/// Closest permutation matrix in Hamming distance.
pub fn hungarian_repair(q: &Assignment) -> RepairResult {
    let n = q.n();
    let cost: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| 1 - 2 * i64::from(q.get(i, j))).collect())
        .collect();
    let perm = lap::solve(&cost);
    let repaired = Assignment::from_permutation(&perm);
    let hamming = hamming(q, &repaired).expect("same size");
    let removals = q.ones().filter(|&(i, j)| repaired.get(i, j) == 0).count();
    RepairResult {
        repaired,
        flips: hamming,
        removals,
        hamming,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub samples: usize,
    pub mean_bfha_distance: f64,
    pub mean_min_distance: f64,
    /// `100 * (mean_bfha - mean_min) / mean_min`, 0 when `mean_min` is 0.
    pub gap_percent: f64,
    pub bfha_time_s: f64,
    pub hungarian_time_s: f64,
}

impl GapReport {
    pub const CSV_HEADER: &'static str =
        "size,mean_bfha_dist,mean_min_dist,gap_percent,bfha_time_s,hungarian_time_s";

    pub fn csv_row(&self, size: usize) -> String {
        format!(
            "{size},{:.6},{:.6},{:.6},{:.6e},{:.6e}",
            self.mean_bfha_distance,
            self.mean_min_distance,
            self.gap_percent,
            self.bfha_time_s,
            self.hungarian_time_s
        )
    }
}

/// Runs both repairs over `batch` single-threaded and compares mean distances.
pub fn repair_gap(batch: &[Assignment]) -> Result<GapReport> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let start = Instant::now();
    let bfha: Vec<usize> = batch.iter().map(|q| bfha_repair(q).hamming).collect();
    let bfha_time_s = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let exact: Vec<usize> = batch.iter().map(|q| hungarian_repair(q).hamming).collect();
    let hungarian_time_s = start.elapsed().as_secs_f64();

    let len = batch.len() as f64;
    let mean_bfha_distance = bfha.iter().sum::<usize>() as f64 / len;
    let mean_min_distance = exact.iter().sum::<usize>() as f64 / len;
    let gap_percent = if mean_min_distance == 0.0 {
        0.0
    } else {
        100.0 * (mean_bfha_distance - mean_min_distance) / mean_min_distance
    };
    Ok(GapReport {
        samples: batch.len(),
        mean_bfha_distance,
        mean_min_distance,
        gap_percent,
        bfha_time_s,
        hungarian_time_s,
    })
}
