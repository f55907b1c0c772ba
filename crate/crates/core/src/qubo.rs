//! QUBO and Ising models of the QAP.
//!
//! Variable `i * n + j` is `q[i][j]`. The penalty form uses the half-weight
//! convention `f0(q) + (lambda / 2) * sum_k (F_k(q) - 1)^2`; the relaxed form
//! replaces the penalty with linear multipliers, `f0(q) - sum_k v_k F_k(q)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::instance::QapInstance;

/// Upper-triangular coefficient map plus a constant offset.
///
/// Diagonal keys `(a, a)` hold linear terms. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Qubo {
    l: usize,
    coeffs: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl Qubo {
    pub fn new(l: usize) -> Self {
        Self {
            l,
            coeffs: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.l
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn add_offset(&mut self, value: f64) {
        self.offset += value;
    }

    /// Accumulates `value * q[a] * q[b]`; the pair is reordered so `a <= b`.
    pub fn add(&mut self, a: usize, b: usize, value: f64) {
        assert!(a < self.l && b < self.l, "variable index out of range");
        if value == 0.0 {
            return;
        }
        let key = if a <= b { (a, b) } else { (b, a) };
        let entry = self.coeffs.entry(key).or_insert(0.0);
        *entry += value;
        if *entry == 0.0 {
            self.coeffs.remove(&key);
        }
    }

    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.coeffs.get(&key).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.coeffs
    }

    pub fn linear_terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeffs
            .iter()
            .filter(|((a, b), _)| a == b)
            .map(|(&(a, _), &c)| (a, c))
    }

    pub fn quadratic_terms(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.coeffs
            .iter()
            .filter(|((a, b), _)| a != b)
            .map(|(&k, &c)| (k, c))
    }

    pub fn quadratic_count(&self) -> usize {
        self.quadratic_terms().count()
    }

    /// Sorted key set of the off-diagonal support.
    pub fn quadratic_support(&self) -> Vec<(usize, usize)> {
        self.quadratic_terms().map(|(k, _)| k).collect()
    }

    /// `offset + sum coeffs[a, b] * q[a] * q[b]`.
    pub fn energy(&self, q: &[u8]) -> Result<f64> {
        check_len(self.l, q.len())?;
        Ok(self.energy_unchecked(q))
    }

    pub(crate) fn energy_unchecked(&self, q: &[u8]) -> f64 {
        self.offset
            + self
                .coeffs
                .iter()
                .filter(|((a, b), _)| q[*a] == 1 && q[*b] == 1)
                .map(|(_, c)| c)
                .sum::<f64>()
    }

    /// Stable 64-bit FNV-1a digest of size, offset and coefficients.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bytes: &[u8]| {
            for &b in bytes {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        feed(&(self.l as u64).to_le_bytes());
        feed(&self.offset.to_bits().to_le_bytes());
        for (&(a, b), &c) in &self.coeffs {
            feed(&(a as u64).to_le_bytes());
            feed(&(b as u64).to_le_bytes());
            feed(&c.to_bits().to_le_bytes());
        }
        h
    }

    /// COO text: a header `# l <l> offset <offset>` then one `a b value` line per coefficient.
    pub fn to_coo_string(&self) -> String {
        let mut out = format!("# l {} offset {}\n", self.l, self.offset);
        for (&(a, b), &c) in &self.coeffs {
            writeln!(out, "{a} {b} {c}").unwrap();
        }
        out
    }

    pub fn from_coo_str(text: &str) -> Result<Self> {
        let bad = |line: &str| Error::InvalidParameter(format!("malformed COO line `{line}`"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad(""))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (l, offset) = match fields.as_slice() {
            ["#", "l", l, "offset", off] => (
                l.parse().map_err(|_| bad(header))?,
                off.parse().map_err(|_| bad(header))?,
            ),
            _ => return Err(bad(header)),
        };
        let mut qubo = Qubo::new(l);
        qubo.offset = offset;
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [a, b, c] = parts.as_slice() else {
                return Err(bad(line));
            };
            let a: usize = a.parse().map_err(|_| bad(line))?;
            let b: usize = b.parse().map_err(|_| bad(line))?;
            let c: f64 = c.parse().map_err(|_| bad(line))?;
            if a >= l || b >= l {
                return Err(bad(line));
            }
            qubo.add(a, b, c);
        }
        Ok(qubo)
    }
}

/// Spin model `offset + sum_a h_a s_a + sum_{a<b} J_ab s_a s_b`, `s in {-1, +1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    pub l: usize,
    pub couplings: BTreeMap<(usize, usize), f64>,
    pub biases: Vec<f64>,
    pub offset: f64,
}

impl IsingModel {
    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        check_len(self.l, spins.len())?;
        let mut e = self.offset;
        for (h, &s) in self.biases.iter().zip(spins) {
            e += h * f64::from(s);
        }
        for (&(a, b), &j) in &self.couplings {
            e += j * f64::from(spins[a]) * f64::from(spins[b]);
        }
        Ok(e)
    }
}

/// Substitutes `q = (s + 1) / 2`.
pub fn qubo_to_ising(qubo: &Qubo) -> IsingModel {
    let mut biases = vec![0.0; qubo.l];
    let mut couplings = BTreeMap::new();
    let mut offset = qubo.offset;
    for (&(a, b), &c) in &qubo.coeffs {
        if a == b {
            biases[a] += c / 2.0;
            offset += c / 2.0;
        } else {
            let quarter = c / 4.0;
            couplings.insert((a, b), quarter);
            biases[a] += quarter;
            biases[b] += quarter;
            offset += quarter;
        }
    }
    IsingModel {
        l: qubo.l,
        couplings,
        biases,
        offset,
    }
}

/// Substitutes `s = 2q - 1`.
pub fn ising_to_qubo(ising: &IsingModel) -> Qubo {
    let mut qubo = Qubo::new(ising.l);
    qubo.offset = ising.offset;
    for (a, &h) in ising.biases.iter().enumerate() {
        qubo.add(a, a, 2.0 * h);
        qubo.offset -= h;
    }
    for (&(a, b), &j) in &ising.couplings {
        qubo.add(a, b, 4.0 * j);
        qubo.add(a, a, -2.0 * j);
        qubo.add(b, b, -2.0 * j);
        qubo.offset += j;
    }
    qubo
}

/// The `2n` one-hot constraints: `F_1..F_n` are row (item) sums, `F_{n+1}..F_{2n}` column (site) sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSystem {
    pub n: usize,
}

impl ConstraintSystem {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn len(&self) -> usize {
        2 * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Indices of the two constraints containing variable `var`.
    pub fn constraints_of(&self, var: usize) -> (usize, usize) {
        (var / self.n, self.n + var % self.n)
    }

    /// Variables summed by constraint `k`.
    pub fn members(&self, k: usize) -> Vec<usize> {
        let n = self.n;
        if k < n {
            (0..n).map(|j| k * n + j).collect()
        } else {
            (0..n).map(|i| i * n + (k - n)).collect()
        }
    }

    /// `(F_1(q), ..., F_2n(q))` for a flat assignment.
    pub fn evaluate(&self, q: &[u8]) -> Result<Vec<usize>> {
        check_len(self.n * self.n, q.len())?;
        let mut out = vec![0usize; self.len()];
        for (var, &bit) in q.iter().enumerate() {
            if bit == 1 {
                let (r, c) = self.constraints_of(var);
                out[r] += 1;
                out[c] += 1;
            }
        }
        Ok(out)
    }
}

/// QUBO of the unconstrained objective `f0` alone.
pub fn build_objective_qubo(inst: &QapInstance) -> Qubo {
    let n = inst.n();
    let mut qubo = Qubo::new(n * n);
    let s = inst.sales();
    let f = inst.similarity();
    for i in 0..n {
        for j in 0..n {
            qubo.add(i * n + j, i * n + j, -s[i][j]);
        }
    }
    // Both ordered terms (a, b) and (b, a) accumulate on the same key.
    for i in 0..n {
        for j in 0..n {
            for i2 in 0..n {
                if f[i][i2] == 0.0 {
                    continue;
                }
                for &j2 in inst.neighbors(j) {
                    qubo.add(i * n + j, i2 * n + j2, inst.w() * f[i][i2]);
                }
            }
        }
    }
    qubo
}

/// Dense penalty QUBO `f0(q) + (lambda / 2) * sum_k (F_k(q) - 1)^2`.
pub fn build_penalty_qubo(inst: &QapInstance, lambda: f64) -> Result<Qubo> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "penalty weight must be positive, got {lambda}"
        )));
    }
    let n = inst.n();
    let cs = ConstraintSystem::new(n);
    let mut qubo = build_objective_qubo(inst);
    for k in 0..cs.len() {
        let members = cs.members(k);
        for (x, &a) in members.iter().enumerate() {
            qubo.add(a, a, -lambda / 2.0);
            for &b in &members[x + 1..] {
                qubo.add(a, b, lambda);
            }
        }
        qubo.add_offset(lambda / 2.0);
    }
    Ok(qubo)
}

/// Sparse relaxed QUBO `f0(q) - sum_k v_k F_k(q)`; only linear terms depend on `v`.
pub fn build_relaxed_qubo(inst: &QapInstance, multipliers: &[f64]) -> Result<Qubo> {
    let n = inst.n();
    let cs = ConstraintSystem::new(n);
    check_len(cs.len(), multipliers.len())?;
    let mut qubo = build_objective_qubo(inst);
    for var in 0..n * n {
        let (r, c) = cs.constraints_of(var);
        qubo.add(var, var, -(multipliers[r] + multipliers[c]));
    }
    Ok(qubo)
}

/// Penalty weight `2 * (max|s| + w * max|f| * max_j sum_j' d[j][j'])`.
///
/// Bounds the objective change from removing or adding one placement, so
/// violating a constraint never pays off.
pub fn default_lambda(inst: &QapInstance) -> f64 {
    let max_abs = |m: &[Vec<f64>]| m.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let max_degree = inst
        .adjacency()
        .iter()
        .map(|row| row.iter().map(|&x| f64::from(x)).sum::<f64>())
        .fold(0.0f64, f64::max);
    let lambda = 2.0 * (max_abs(inst.sales()) + inst.w() * max_abs(inst.similarity()) * max_degree);
    if lambda > 0.0 {
        lambda
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, GeneratorConfig};

    #[test]
    fn energy_examples() {
        let q = Qubo::new(3);
        assert_eq!(q.energy(&[0, 0, 0]).unwrap(), 0.0);
        let mut q = Qubo::new(1);
        q.add(0, 0, -3.0);
        q.add_offset(1.0);
        assert_eq!(q.energy(&[1]).unwrap(), -2.0);
        assert_eq!(q.energy(&[0]).unwrap(), 1.0);
        assert!(q.energy(&[1, 0]).is_err());
    }

    #[test]
    fn zero_sums_are_not_stored() {
        let mut q = Qubo::new(2);
        q.add(1, 0, 2.0);
        q.add(0, 1, -2.0);
        q.add(1, 1, 0.0);
        assert!(q.coeffs().is_empty());
    }

    #[test]
    fn ising_examples() {
        let mut q = Qubo::new(1);
        q.add(0, 0, 1.0);
        let ising = qubo_to_ising(&q);
        assert_eq!(ising.biases, vec![0.5]);
        assert_eq!(ising.offset, 0.5);

        let mut q = Qubo::new(2);
        q.add(0, 1, 4.0);
        let ising = qubo_to_ising(&q);
        assert_eq!(ising.couplings.get(&(0, 1)), Some(&1.0));
        assert_eq!(ising.biases, vec![1.0, 1.0]);
        assert_eq!(ising.offset, 1.0);
        assert_eq!(ising_to_qubo(&ising), q);
    }

    #[test]
    fn relaxed_with_zero_multipliers_is_objective_qubo() {
        let inst = generate_instance(4, 5, &GeneratorConfig::default()).unwrap();
        let relaxed = build_relaxed_qubo(&inst, &[0.0; 8]).unwrap();
        assert_eq!(relaxed, build_objective_qubo(&inst));
        assert!(build_relaxed_qubo(&inst, &[0.0; 7]).is_err());
    }

    #[test]
    fn penalty_rejects_nonpositive_lambda() {
        let inst = generate_instance(2, 5, &GeneratorConfig::default()).unwrap();
        assert!(build_penalty_qubo(&inst, 0.0).is_err());
        assert!(build_penalty_qubo(&inst, -1.0).is_err());
    }

    #[test]
    fn penalty_adds_ten_for_overfull_row() {
        let inst = generate_instance(2, 5, &GeneratorConfig::default()).unwrap();
        let q = [1, 1, 0, 0];
        let base = build_objective_qubo(&inst).energy(&q).unwrap();
        let pen = build_penalty_qubo(&inst, 10.0).unwrap().energy(&q).unwrap();
        assert!((pen - base - 10.0).abs() < 1e-9);
    }

    #[test]
    fn relaxed_is_sparser_than_penalty() {
        let inst = generate_instance(5, 1, &GeneratorConfig::default()).unwrap();
        let relaxed = build_relaxed_qubo(&inst, &[0.3; 10]).unwrap();
        let penalty = build_penalty_qubo(&inst, 2.0).unwrap();
        assert!(relaxed.quadratic_count() < penalty.quadratic_count());
    }

    #[test]
    fn constraint_layout() {
        let cs = ConstraintSystem::new(3);
        assert_eq!(cs.len(), 6);
        assert_eq!(cs.members(1), vec![3, 4, 5]);
        assert_eq!(cs.members(4), vec![1, 4, 7]);
        assert_eq!(cs.constraints_of(5), (1, 5));
        assert_eq!(
            cs.evaluate(&[1, 1, 0, 0, 0, 0, 0, 0, 1]).unwrap(),
            vec![2, 0, 1, 1, 1, 1]
        );
    }

    #[test]
    fn coo_round_trip() {
        let inst = generate_instance(3, 9, &GeneratorConfig::default()).unwrap();
        let q = build_penalty_qubo(&inst, 3.5).unwrap();
        let text = q.to_coo_string();
        assert!(text.starts_with("# l 9 offset "));
        assert_eq!(Qubo::from_coo_str(&text).unwrap(), q);
        assert!(Qubo::from_coo_str("# l 2 offset 0\n0 5 1.0\n").is_err());
    }

    #[test]
    fn default_lambda_for_linear_layout() {
        let inst = QapInstance::new(
            vec![vec![1.0, -3.0], vec![0.0, 1.0]],
            vec![vec![0.0, 2.0], vec![2.0, 0.0]],
            vec![vec![0, 1], vec![1, 0]],
            0.5,
            0,
        )
        .unwrap();
        assert_eq!(default_lambda(&inst), 2.0 * (3.0 + 0.5 * 2.0 * 1.0));
    }
}
