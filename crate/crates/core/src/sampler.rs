//! Classical Boltzmann sampling of QUBOs.
//!
//! [`GibbsSampler`] runs one independent single-site Gibbs chain per read with
//! the inverse temperature ramped geometrically from `beta_initial` to
//! `beta_final`. Chain `c` is seeded with `seed + c`, so batches are
//! reproducible regardless of how chains are scheduled across threads.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{ConstraintSystem, Qubo};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub num_reads: usize,
    /// Full passes over all variables per read.
    pub sweeps: usize,
    pub beta_initial: f64,
    /// Inverse temperature of the last sweep.
    pub beta_final: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            num_reads: 1000,
            sweeps: 100,
            beta_initial: 0.1,
            beta_final: 3.0,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_reads == 0 || self.sweeps == 0 {
            return Err(Error::InvalidParameter(
                "num_reads and sweeps must be at least 1".into(),
            ));
        }
        if !(self.beta_initial > 0.0 && self.beta_final >= self.beta_initial && self.beta_final.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < beta_initial <= beta_final, got {} and {}",
                self.beta_initial, self.beta_final
            )));
        }
        Ok(())
    }

    /// Inverse temperature of every sweep, geometric from initial to final.
    pub fn beta_schedule(&self) -> Vec<f64> {
        if self.sweeps == 1 {
            return vec![self.beta_final];
        }
        let ratio = self.beta_final / self.beta_initial;
        let last = (self.sweeps - 1) as f64;
        (0..self.sweeps)
            .map(|s| {
                if s + 1 == self.sweeps {
                    self.beta_final
                } else {
                    self.beta_initial * ratio.powf(s as f64 / last)
                }
            })
            .collect()
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub samples: Vec<Vec<u8>>,
    pub energies: Vec<f64>,
    pub config: SamplerConfig,
    pub qubo_fingerprint: u64,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// CSV with header `energy,x0,x1,...` and one row per sample.
    pub fn to_csv(&self) -> String {
        let l = self.samples.first().map_or(0, Vec::len);
        let mut out = String::from("energy");
        for a in 0..l {
            write!(out, ",x{a}").unwrap();
        }
        out.push('\n');
        for (sample, e) in self.samples.iter().zip(&self.energies) {
            write!(out, "{e}").unwrap();
            for b in sample {
                write!(out, ",{b}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// A source of approximately Boltzmann-distributed QUBO samples.
pub trait Sampler: Send + Sync {
    fn name(&self) -> &str;

    fn config(&self) -> &SamplerConfig;

    /// Draws `num_reads` samples using `seed` in place of the configured seed.
    fn sample_with_seed(&self, qubo: &Qubo, seed: u64) -> Result<SampleBatch>;

    fn sample(&self, qubo: &Qubo) -> Result<SampleBatch> {
        self.sample_with_seed(qubo, self.config().seed)
    }
}

/// Resolves a backend by name; `"gibbs"` is the only built-in.
pub fn sampler_from_name(name: &str, config: SamplerConfig) -> Result<Box<dyn Sampler>> {
    match name {
        "gibbs" => Ok(Box::new(GibbsSampler::new(config)?)),
        other => Err(Error::UnknownBackend(other.to_string())),
    }
}

#[derive(Clone, Debug)]
pub struct GibbsSampler {
    config: SamplerConfig,
}

impl GibbsSampler {
    pub fn new(config: SamplerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }
}

/// Linear terms and symmetric CSR adjacency of a QUBO's quadratic terms.
struct LocalFields {
    linear: Vec<f64>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<f64>,
}

impl LocalFields {
    fn new(qubo: &Qubo) -> Self {
        let l = qubo.num_vars();
        let mut linear = vec![0.0; l];
        let mut degree = vec![0usize; l];
        for (&(a, b), &c) in qubo.coeffs() {
            if a == b {
                linear[a] += c;
            } else {
                degree[a] += 1;
                degree[b] += 1;
            }
        }
        let mut offsets = vec![0usize; l + 1];
        for a in 0..l {
            offsets[a + 1] = offsets[a] + degree[a];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![0usize; offsets[l]];
        let mut weights = vec![0.0; offsets[l]];
        for ((a, b), c) in qubo.quadratic_terms() {
            for (x, y) in [(a, b), (b, a)] {
                neighbors[fill[x]] = y;
                weights[fill[x]] = c;
                fill[x] += 1;
            }
        }
        Self {
            linear,
            offsets,
            neighbors,
            weights,
        }
    }

    /// Adds `sign * J_ab` to the field of every neighbor `b` of `a`.
    fn propagate(&self, a: usize, sign: f64, field: &mut [f64]) {
        for k in self.offsets[a]..self.offsets[a + 1] {
            field[self.neighbors[k]] += sign * self.weights[k];
        }
    }
}

/// One chain. `field[a]` is the energy change from setting `q[a] = 1` versus
/// `q[a] = 0` and is kept current as neighbors flip.
fn run_chain(fields: &LocalFields, betas: &[f64], seed: u64) -> Vec<u8> {
    let l = fields.linear.len();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut q: Vec<u8> = (0..l).map(|_| u8::from(rng.gen::<bool>())).collect();
    let mut field = fields.linear.clone();
    for a in 0..l {
        if q[a] == 1 {
            fields.propagate(a, 1.0, &mut field);
        }
    }
    for &beta in betas {
        for a in 0..l {
            let x = beta * field[a];
            // P(q_a = 1) = 1 / (1 + exp(x)), written to avoid overflow.
            let p_one = if x >= 0.0 {
                let e = (-x).exp();
                e / (1.0 + e)
            } else {
                1.0 / (1.0 + x.exp())
            };
            let bit = u8::from(rng.gen::<f64>() < p_one);
            if bit != q[a] {
                q[a] = bit;
                fields.propagate(a, if bit == 1 { 1.0 } else { -1.0 }, &mut field);
            }
        }
    }
    q
}

impl Sampler for GibbsSampler {
    fn name(&self) -> &str {
        "gibbs"
    }

    fn config(&self) -> &SamplerConfig {
        &self.config
    }

    fn sample_with_seed(&self, qubo: &Qubo, seed: u64) -> Result<SampleBatch> {
        if qubo.num_vars() == 0 {
            return Err(Error::EmptyProblem);
        }
        let fields = LocalFields::new(qubo);
        let betas = self.config.beta_schedule();
        let base = seed;
        let samples: Vec<Vec<u8>> = (0..self.config.num_reads)
            .into_par_iter()
            .map(|c| run_chain(&fields, &betas, base.wrapping_add(c as u64)))
            .collect();
        let energies = samples.iter().map(|q| qubo.energy_unchecked(q)).collect();
        Ok(SampleBatch {
            samples,
            energies,
            config: self.config.with_seed(seed),
            qubo_fingerprint: qubo.fingerprint(),
        })
    }
}

/// Convenience wrapper around [`GibbsSampler`].
pub fn sample(qubo: &Qubo, config: &SamplerConfig) -> Result<SampleBatch> {
    GibbsSampler::new(config.clone())?.sample(qubo)
}

/// Sample averages `(1/N) sum_i F_k(q_i)` for every constraint `k`.
pub fn estimate_constraint_expectations(batch: &SampleBatch, cs: &ConstraintSystem) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut totals = vec![0usize; cs.len()];
    for q in &batch.samples {
        for (t, v) in totals.iter_mut().zip(cs.evaluate(q)?) {
            *t += v;
        }
    }
    let n = batch.len() as f64;
    Ok(totals.into_iter().map(|t| t as f64 / n).collect())
}
