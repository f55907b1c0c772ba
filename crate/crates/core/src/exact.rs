//! Enumeration oracles over all `n!` permutation matrices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Assignment, QapInstance};

pub const DEFAULT_OPT_LIMIT: usize = 10;
pub const DEFAULT_HAMMING_LIMIT: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub best: Assignment,
    pub score: f64,
    /// Complete permutations visited.
    pub enumerated: u64,
}

/// Rearranges `perm` into the next permutation in lexicographic order.
/// Returns `false` (leaving `perm` sorted) after the last one.
pub fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(k) = perm.windows(2).rposition(|w| w[0] < w[1]) else {
        perm.reverse();
        return false;
    };
    let l = perm.iter().rposition(|&x| x > perm[k]).unwrap();
    perm.swap(k, l);
    perm[k + 1..].reverse();
    true
}

struct Search<'a> {
    inst: &'a QapInstance,
    perm: Vec<usize>,
    used: Vec<bool>,
    best: Option<(f64, Vec<usize>)>,
    visited: u64,
}

impl Search<'_> {
    /// Cost change from placing item `i` at position `j`, given items `0..i` placed.
    fn placement_cost(&self, i: usize, j: usize) -> f64 {
        let f = self.inst.similarity();
        let d = self.inst.adjacency();
        let mut quad = 0.0;
        for (i2, &j2) in self.perm[..i].iter().enumerate() {
            if d[j][j2] == 1 {
                quad += f[i][i2] + f[i2][i];
            }
        }
        -self.inst.sales()[i][j] + self.inst.w() * quad
    }

    fn descend(&mut self, i: usize, partial: f64) {
        let n = self.inst.n();
        if i == n {
            self.visited += 1;
            if self.best.as_ref().is_none_or(|(b, _)| partial < *b) {
                self.best = Some((partial, self.perm.clone()));
            }
            return;
        }
        for j in 0..n {
            if self.used[j] {
                continue;
            }
            let cost = partial + self.placement_cost(i, j);
            self.perm[i] = j;
            self.used[j] = true;
            self.descend(i + 1, cost);
            self.used[j] = false;
        }
    }
}

/// Global minimum of the objective over all permutations.
///
/// Ties resolve to the first permutation in lexicographic order (item `i`
/// at position `perm[i]`). Subtrees rooted at item 0's position are searched
/// in parallel and merged in order.
pub fn brute_force_opt(inst: &QapInstance, limit_n: usize) -> Result<ExactResult> {
    let n = inst.n();
    if n > limit_n {
        return Err(Error::SizeLimit { n, limit: limit_n });
    }
    let branches: Vec<(Option<(f64, Vec<usize>)>, u64)> = (0..n)
        .into_par_iter()
        .map(|j0| {
            let mut search = Search {
                inst,
                perm: vec![0; n],
                used: vec![false; n],
                best: None,
                visited: 0,
            };
            search.perm[0] = j0;
            search.used[j0] = true;
            let start = search.placement_cost(0, j0);
            search.descend(1, start);
            (search.best, search.visited)
        })
        .collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut enumerated = 0;
    for (candidate, visited) in branches {
        enumerated += visited;
        if let Some((c, p)) = candidate {
            if best.as_ref().is_none_or(|(b, _)| c < *b) {
                best = Some((c, p));
            }
        }
    }
    let (_, perm) = best.expect("n >= 1 has at least one permutation");
    Ok(ExactResult {
        score: inst.permutation_objective(&perm),
        best: Assignment::from_permutation(&perm),
        enumerated,
    })
}

/// Minimum Hamming distance from `q` to any permutation matrix, by enumeration.
pub fn brute_force_min_hamming(q: &Assignment, limit_n: usize) -> Result<usize> {
    let n = q.n();
    if n > limit_n {
        return Err(Error::SizeLimit { n, limit: limit_n });
    }
    let bits = q.as_flat();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = usize::MAX;
    loop {
        let mut dist = 0;
        for i in 0..n {
            for j in 0..n {
                let p = u8::from(perm[i] == j);
                if bits[i * n + j] != p {
                    dist += 1;
                }
            }
        }
        best = best.min(dist);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(best)
}
