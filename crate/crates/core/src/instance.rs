//! Problem data for the item-ordering QAP and its binary assignments.
//!
//! The objective is minimized:
//!
//! ```text
//! f0(q) = -sum_ij s[i][j] q[i][j] + w * sum_{i,i',j,j'} f[i][i'] d[j][j'] q[i][j] q[i'][j']
//! ```
//!
//! `q[i][j] = 1` places item `i` at position `j`. Feasible assignments are
//! permutation matrices; infeasible ones are ordinary values here because the
//! samplers produce them routinely.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Sampling ranges used by [`generate_instance`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// `s[i][j] ~ Uniform[0, sales_scale)`.
    pub sales_scale: f64,
    /// `f[i][i'] ~ Uniform[0, similarity_scale)` for `i < i'`, mirrored.
    pub similarity_scale: f64,
    pub w: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            sales_scale: 1.0,
            similarity_scale: 1.0,
            w: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct QapInstance {
    n: usize,
    w: f64,
    seed: u64,
    s: Vec<Vec<f64>>,
    f: Vec<Vec<f64>>,
    d: Vec<Vec<u8>>,
    /// Adjacent positions of every position, derived from `d`.
    neighbors: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    w: f64,
    seed: u64,
    s: Vec<Vec<f64>>,
    f: Vec<Vec<f64>>,
    d: Vec<Vec<u8>>,
}

impl TryFrom<InstanceFile> for QapInstance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        let inst = QapInstance::new(file.s, file.f, file.d, file.w, file.seed)?;
        if inst.n != file.n {
            return Err(Error::InvalidInstance(format!(
                "declared n = {} but matrices are {}x{}",
                file.n, inst.n, inst.n
            )));
        }
        Ok(inst)
    }
}

impl From<QapInstance> for InstanceFile {
    fn from(inst: QapInstance) -> Self {
        InstanceFile {
            n: inst.n,
            w: inst.w,
            seed: inst.seed,
            s: inst.s,
            f: inst.f,
            d: inst.d,
        }
    }
}

fn check_square<T>(name: &str, m: &[Vec<T>], n: usize) -> Result<()> {
    if m.len() != n || m.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidInstance(format!("{name} must be {n}x{n}")));
    }
    Ok(())
}

impl QapInstance {
    /// Validates and assembles an instance. `n` is taken from `s`.
    pub fn new(
        s: Vec<Vec<f64>>,
        f: Vec<Vec<f64>>,
        d: Vec<Vec<u8>>,
        w: f64,
        seed: u64,
    ) -> Result<Self> {
        let n = s.len();
        if n == 0 {
            return Err(Error::EmptyProblem);
        }
        check_square("s", &s, n)?;
        check_square("f", &f, n)?;
        check_square("d", &d, n)?;
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidInstance(format!("w must be >= 0, got {w}")));
        }
        if s.iter().flatten().chain(f.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInstance("non-finite matrix entry".into()));
        }
        for a in 0..n {
            if f[a][a] != 0.0 {
                return Err(Error::InvalidInstance(format!("f[{a}][{a}] must be 0")));
            }
            if d[a][a] != 0 {
                return Err(Error::InvalidInstance(format!("d[{a}][{a}] must be 0")));
            }
            for b in 0..n {
                if f[a][b] != f[b][a] {
                    return Err(Error::InvalidInstance("f must be symmetric".into()));
                }
                if d[a][b] > 1 {
                    return Err(Error::InvalidInstance("d must be 0/1".into()));
                }
                if d[a][b] != d[b][a] {
                    return Err(Error::InvalidInstance("d must be symmetric".into()));
                }
            }
        }
        let neighbors = d
            .iter()
            .map(|row| (0..n).filter(|&b| row[b] == 1).collect())
            .collect();
        Ok(Self {
            n,
            w,
            seed,
            s,
            f,
            d,
            neighbors,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sales(&self) -> &[Vec<f64>] {
        &self.s
    }

    pub fn similarity(&self) -> &[Vec<f64>] {
        &self.f
    }

    pub fn adjacency(&self) -> &[Vec<u8>] {
        &self.d
    }

    /// Positions adjacent to position `j`.
    pub fn neighbors(&self, j: usize) -> &[usize] {
        &self.neighbors[j]
    }

    /// Objective of the assignment placing item `i` at `perm[i]`.
    pub fn permutation_objective(&self, perm: &[usize]) -> f64 {
        let mut linear = 0.0;
        let mut quad = 0.0;
        for (i, &j) in perm.iter().enumerate() {
            linear += self.s[i][j];
            for (i2, &j2) in perm.iter().enumerate() {
                if self.d[j][j2] == 1 {
                    quad += self.f[i][i2];
                }
            }
        }
        -linear + self.w * quad
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json_string()?)?;
        Ok(())
    }
}

/// Random instance with linear-list adjacency (`d[j][j'] = 1` iff `|j - j'| = 1`).
///
/// Deterministic in `(n, seed, config)`: `s` is drawn row-major first, then the
/// upper triangle of `f` row by row.
pub fn generate_instance(n: usize, seed: u64, config: &GeneratorConfig) -> Result<QapInstance> {
    if n == 0 {
        return Err(Error::EmptyProblem);
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let s = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| rng.gen::<f64>() * config.sales_scale)
                .collect()
        })
        .collect();
    let mut f = vec![vec![0.0; n]; n];
    for i in 0..n {
        for i2 in i + 1..n {
            let x = rng.gen::<f64>() * config.similarity_scale;
            f[i][i2] = x;
            f[i2][i] = x;
        }
    }
    let d = (0..n)
        .map(|j| (0..n).map(|j2| u8::from(j.abs_diff(j2) == 1)).collect())
        .collect();
    QapInstance::new(s, f, d, config.w, seed)
}

/// An `n x n` binary matrix, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "AssignmentFile", into = "AssignmentFile")]
pub struct Assignment {
    n: usize,
    bits: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct AssignmentFile {
    n: usize,
    q: Vec<Vec<u8>>,
}

impl TryFrom<AssignmentFile> for Assignment {
    type Error = Error;

    fn try_from(file: AssignmentFile) -> Result<Self> {
        let a = Assignment::from_rows(&file.q)?;
        check_len(file.n, a.n)?;
        Ok(a)
    }
}

impl From<Assignment> for AssignmentFile {
    fn from(a: Assignment) -> Self {
        AssignmentFile {
            n: a.n,
            q: a.rows(),
        }
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Assignment")
            .field("n", &self.n)
            .field("q", &self.rows())
            .finish()
    }
}

impl Assignment {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            bits: vec![0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_permutation(&(0..n).collect::<Vec<_>>())
    }

    /// Places item `i` at position `perm[i]`. Panics if `perm` is not a permutation.
    pub fn from_permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut a = Self::zeros(n);
        let mut seen = vec![false; n];
        for (i, &j) in perm.iter().enumerate() {
            assert!(j < n && !seen[j], "not a permutation: {perm:?}");
            seen[j] = true;
            a.bits[i * n + j] = 1;
        }
        a
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        check_square("q", rows, n)?;
        let bits: Vec<u8> = rows.iter().flatten().copied().collect();
        Self::from_flat(n, bits)
    }

    /// Builds from a flat row-major vector; variable `i * n + j` is `q[i][j]`.
    pub fn from_flat(n: usize, bits: Vec<u8>) -> Result<Self> {
        check_len(n * n, bits.len())?;
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter("assignment entries must be 0/1".into()));
        }
        Ok(Self { n, bits })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.bits[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.bits[i * self.n + j] = u8::from(value);
    }

    pub fn as_flat(&self) -> &[u8] {
        &self.bits
    }

    pub fn into_flat(self) -> Vec<u8> {
        self.bits
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        if self.n == 0 {
            return Vec::new();
        }
        self.bits.chunks(self.n).map(<[u8]>::to_vec).collect()
    }

    pub fn row_sums(&self) -> Vec<usize> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| usize::from(self.get(i, j))).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| usize::from(self.get(i, j))).sum())
            .collect()
    }

    /// `perm[i]` = position of item `i`, if this is a permutation matrix.
    pub fn to_permutation(&self) -> Option<Vec<usize>> {
        if !is_feasible(self) {
            return None;
        }
        Some(
            (0..self.n)
                .map(|i| (0..self.n).position(|j| self.get(i, j) == 1).unwrap())
                .collect(),
        )
    }

    pub(crate) fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(k, _)| (k / self.n, k % self.n))
    }
}

/// Minimization objective `f0(q)`; defined for infeasible `q` too.
pub fn objective(inst: &QapInstance, q: &Assignment) -> Result<f64> {
    check_len(inst.n, q.n)?;
    let ones: Vec<(usize, usize)> = q.ones().collect();
    let mut linear = 0.0;
    let mut quad = 0.0;
    for &(i, j) in &ones {
        linear += inst.s[i][j];
        for &(i2, j2) in &ones {
            if inst.d[j][j2] == 1 {
                quad += inst.f[i][i2];
            }
        }
    }
    Ok(-linear + inst.w * quad)
}

/// True iff every row and column sums to one.
pub fn is_feasible(q: &Assignment) -> bool {
    count_violations(q) == 0
}

/// Number of the `2n` one-hot constraints (rows, then columns) not equal to one.
pub fn count_violations(q: &Assignment) -> usize {
    q.row_sums()
        .into_iter()
        .chain(q.col_sums())
        .filter(|&x| x != 1)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_item() -> QapInstance {
        QapInstance::new(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![vec![0, 1], vec![1, 0]],
            0.5,
            0,
        )
        .unwrap()
    }

    #[test]
    fn single_item_instance_is_forced() {
        let inst = generate_instance(1, 99, &GeneratorConfig::default()).unwrap();
        assert_eq!(inst.similarity(), &[vec![0.0]]);
        assert_eq!(inst.adjacency(), &[vec![0u8]]);
        assert!((0.0..1.0).contains(&inst.sales()[0][0]));
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = GeneratorConfig::default();
        let a = generate_instance(3, 42, &cfg).unwrap();
        let b = generate_instance(3, 42, &cfg).unwrap();
        assert_eq!(a.to_json_string().unwrap(), b.to_json_string().unwrap());
        let c = generate_instance(3, 43, &cfg).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn linear_adjacency_has_n_minus_one_pairs() {
        let inst = generate_instance(5, 7, &GeneratorConfig::default()).unwrap();
        let ones: usize = inst.adjacency().iter().flatten().map(|&x| x as usize).sum();
        assert_eq!(ones, 8);
    }

    #[test]
    fn rejects_empty_problem() {
        assert!(matches!(
            generate_instance(0, 1, &GeneratorConfig::default()),
            Err(Error::EmptyProblem)
        ));
    }

    #[test]
    fn rejects_asymmetric_similarity() {
        let err = QapInstance::new(
            vec![vec![0.0; 2]; 2],
            vec![vec![0.0, 1.0], vec![0.5, 0.0]],
            vec![vec![0, 1], vec![1, 0]],
            0.5,
            0,
        );
        assert!(matches!(err, Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn objective_examples() {
        let inst = two_item();
        assert_eq!(objective(&inst, &Assignment::zeros(2)).unwrap(), 0.0);
        assert_eq!(objective(&inst, &Assignment::identity(2)).unwrap(), -1.0);

        let one = QapInstance::new(vec![vec![2.0]], vec![vec![0.0]], vec![vec![0]], 0.5, 0).unwrap();
        assert_eq!(objective(&one, &Assignment::identity(1)).unwrap(), -2.0);
    }

    #[test]
    fn objective_rejects_size_mismatch() {
        let inst = two_item();
        assert!(objective(&inst, &Assignment::identity(3)).is_err());
    }

    #[test]
    fn permutation_objective_matches_general_objective() {
        let inst = generate_instance(6, 3, &GeneratorConfig::default()).unwrap();
        let perm = [3, 1, 5, 0, 2, 4];
        let a = inst.permutation_objective(&perm);
        let b = objective(&inst, &Assignment::from_permutation(&perm)).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn feasibility_and_violation_counts() {
        assert!(is_feasible(&Assignment::identity(4)));
        assert!(!is_feasible(&Assignment::zeros(3)));
        let q = Assignment::from_rows(&[vec![1, 1], vec![0, 0]]).unwrap();
        assert!(!is_feasible(&q));
        assert_eq!(count_violations(&q), 2);
        assert_eq!(count_violations(&Assignment::identity(8)), 0);
        assert_eq!(count_violations(&Assignment::zeros(8)), 16);
    }

    #[test]
    fn assignment_json_schema() {
        let q = Assignment::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        let text = serde_json::to_string(&q).unwrap();
        assert_eq!(text, r#"{"n":2,"q":[[0,1],[1,0]]}"#);
        let back: Assignment = serde_json::from_str(&text).unwrap();
        assert_eq!(back, q);
        assert!(serde_json::from_str::<Assignment>(r#"{"n":3,"q":[[0,1],[1,0]]}"#).is_err());
        assert!(serde_json::from_str::<Assignment>(r#"{"n":2,"q":[[0,2],[1,0]]}"#).is_err());
    }

    #[test]
    fn instance_json_round_trip_and_schema() {
        let inst = generate_instance(4, 11, &GeneratorConfig::default()).unwrap();
        let text = inst.to_json_string().unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["n", "w", "seed", "s", "f", "d"] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
        assert_eq!(QapInstance::from_json_str(&text).unwrap(), inst);
    }

    #[test]
    fn to_permutation_only_for_feasible() {
        let perm = vec![2, 0, 1];
        assert_eq!(Assignment::from_permutation(&perm).to_permutation(), Some(perm));
        assert_eq!(Assignment::zeros(3).to_permutation(), None);
    }
}
