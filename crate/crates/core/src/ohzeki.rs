//! Multiplier iteration for the relaxed one-hot constraints.
//!
//! Each iteration samples the sparse QUBO `f0(q) - sum_k v_k F_k(q)`, repairs
//! every sample with [`bfha_repair`], keeps the best repaired permutation and
//! moves the multipliers towards constraint satisfaction:
//!
//! ```text
//! v_k <- v_k + eta_t * (1 - <F_k>)
//! ```
//!
//! `<F_k>` is averaged over the raw samples. Averaging repaired samples would
//! give exactly 1 for every constraint and leave `v` fixed.

use std::collections::HashSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::instance::{count_violations, Assignment, QapInstance};
use crate::qubo::{build_penalty_qubo, build_relaxed_qubo, ConstraintSystem};
use crate::repair::bfha_repair;
use crate::sampler::{estimate_constraint_expectations, GibbsSampler, Sampler, SamplerConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub eta0: f64,
    pub decay: f64,
    /// Step size stops shrinking from this iteration on.
    pub clamp_t: usize,
    pub max_iters: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            eta0: 0.1,
            decay: 0.92,
            clamp_t: 9,
            max_iters: 30,
        }
    }
}

impl ScheduleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta0 > 0.0 && self.eta0.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta0 must be positive, got {}", self.eta0)));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::InvalidParameter(format!("decay must lie in (0, 1], got {}", self.decay)));
        }
        if self.clamp_t == 0 || self.max_iters == 0 {
            return Err(Error::InvalidParameter("clamp_t and max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// `eta0 * decay^(min(t, clamp_t) - 1)`, for `t >= 1`.
pub fn eta(t: usize, sched: &ScheduleConfig) -> f64 {
    debug_assert!(t >= 1, "iterations are counted from 1");
    let exponent = t.min(sched.clamp_t).saturating_sub(1);
    sched.eta0 * sched.decay.powi(exponent as i32)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierState {
    pub v: Vec<f64>,
    /// Iteration counter, starting at 1.
    pub t: usize,
}

impl MultiplierState {
    /// Zero multipliers for an `n`-item problem.
    pub fn zeros(n: usize) -> Self {
        Self {
            v: vec![0.0; 2 * n],
            t: 1,
        }
    }

    pub fn from_vec(v: Vec<f64>) -> Self {
        Self { v, t: 1 }
    }
}

pub fn update_multipliers(
    state: &MultiplierState,
    expectations: &[f64],
    sched: &ScheduleConfig,
) -> Result<MultiplierState> {
    check_len(state.v.len(), expectations.len())?;
    let step = eta(state.t, sched);
    let v = state
        .v
        .iter()
        .zip(expectations)
        .map(|(v, e)| v + step * (1.0 - e))
        .collect();
    Ok(MultiplierState { v, t: state.t + 1 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    pub eta: f64,
    /// Multipliers the iteration sampled with.
    pub multipliers: Vec<f64>,
    /// Raw-sample constraint averages.
    pub expectations: Vec<f64>,
    /// Best repaired score within this iteration.
    pub iteration_best: f64,
    /// Best repaired score so far.
    pub best_score: f64,
    /// Raw samples that were already permutations.
    pub raw_feasible: usize,
    pub repaired_feasible: usize,
    /// `histogram[k]` = raw samples violating exactly `k` of the `2n` constraints.
    pub violation_histogram: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub records: Vec<IterationRecord>,
}

impl OptimizationTrace {
    pub fn best_scores(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.best_score).collect()
    }

    /// One JSON object per line, one line per iteration.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Initial multipliers; zeros when absent.
    pub initial_multipliers: Option<Vec<f64>>,
    /// Stop as soon as a repaired score reaches this value (within 1e-9).
    pub target_score: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub best: Assignment,
    pub score: f64,
    pub trace: OptimizationTrace,
    pub final_multipliers: MultiplierState,
    pub time_s: f64,
}

/// Violation counts of a raw batch as a histogram over `0..=2n`.
pub fn violation_histogram(n: usize, samples: &[Vec<u8>]) -> Result<Vec<usize>> {
    let mut hist = vec![0usize; 2 * n + 1];
    for q in samples {
        let a = Assignment::from_flat(n, q.clone())?;
        hist[count_violations(&a)] += 1;
    }
    Ok(hist)
}

/// Largest `n` for which every visited permutation is tracked; `8! = 40320`.
const EXHAUSTION_TRACKING_MAX_N: usize = 8;

/// Relaxation, sampling and repair loop with the built-in Gibbs sampler.
pub fn run_algorithm2(
    inst: &QapInstance,
    sched: &ScheduleConfig,
    sampler_cfg: &SamplerConfig,
    options: &SolveOptions,
) -> Result<SolveResult> {
    let sampler = GibbsSampler::new(sampler_cfg.clone())?;
    run_algorithm2_with(inst, sched, &sampler, options)
}

/// As [`run_algorithm2`] with any [`Sampler`] backend.
///
/// Iteration `t` samples with seed `config.seed + (t - 1) * num_reads`, so
/// chain seeds never repeat across iterations. The loop also ends early when
/// the repaired samples have covered all `n!` permutations, since the best
/// of them is then the exact optimum.
pub fn run_algorithm2_with(
    inst: &QapInstance,
    sched: &ScheduleConfig,
    sampler: &dyn Sampler,
    options: &SolveOptions,
) -> Result<SolveResult> {
    sched.validate()?;
    let start = Instant::now();
    let n = inst.n();
    let cs = ConstraintSystem::new(n);
    let mut state = match &options.initial_multipliers {
        Some(v) => {
            check_len(cs.len(), v.len())?;
            MultiplierState::from_vec(v.clone())
        }
        None => MultiplierState::zeros(n),
    };
    let total_perms: Option<usize> =
        (n <= EXHAUSTION_TRACKING_MAX_N).then(|| (1..=n).product());
    let mut seen: HashSet<Vec<usize>> = HashSet::new();

    let reads = sampler.config().num_reads as u64;
    let base_seed = sampler.config().seed;
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut trace = OptimizationTrace::default();

    for t in 1..=sched.max_iters {
        let qubo = build_relaxed_qubo(inst, &state.v)?;
        let seed = base_seed.wrapping_add((t as u64 - 1).wrapping_mul(reads));
        let batch = sampler.sample_with_seed(&qubo, seed)?;

        let repaired: Vec<(f64, Vec<usize>, bool)> = batch
            .samples
            .par_iter()
            .map(|raw| {
                let q = Assignment::from_flat(n, raw.clone()).expect("sampler returns n*n bits");
                let r = bfha_repair(&q);
                let perm = r.repaired.to_permutation().expect("repair yields a permutation");
                (inst.permutation_objective(&perm), perm, r.hamming == 0)
            })
            .collect();

        // First minimum in sample order.
        let mut iter_best: Option<(f64, &Vec<usize>)> = None;
        for (score, perm, _) in &repaired {
            if iter_best.is_none_or(|(b, _)| *score < b) {
                iter_best = Some((*score, perm));
            }
        }
        let (iter_score, iter_perm) = iter_best.ok_or(Error::EmptyBatch)?;
        if best.as_ref().is_none_or(|(b, _)| iter_score < *b) {
            best = Some((iter_score, iter_perm.clone()));
        }
        let best_score = best.as_ref().map(|(b, _)| *b).unwrap();
        let raw_feasible = repaired.iter().filter(|(_, _, unchanged)| *unchanged).count();

        let expectations = estimate_constraint_expectations(&batch, &cs)?;
        trace.records.push(IterationRecord {
            t,
            eta: eta(t, sched),
            multipliers: state.v.clone(),
            expectations: expectations.clone(),
            iteration_best: iter_score,
            best_score,
            raw_feasible,
            repaired_feasible: repaired.len(),
            violation_histogram: violation_histogram(n, &batch.samples)?,
        });

        if let Some(target) = options.target_score {
            if best_score <= target + 1e-9 {
                break;
            }
        }
        if let Some(total) = total_perms {
            seen.extend(repaired.into_iter().map(|(_, p, _)| p));
            if seen.len() == total {
                break;
            }
        }
        state = update_multipliers(&state, &expectations, sched)?;
    }

    let (score, perm) = best.expect("max_iters >= 1");
    Ok(SolveResult {
        best: Assignment::from_permutation(&perm),
        score,
        trace,
        final_multipliers: state,
        time_s: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    /// Best feasible raw sample; `None` when no sample was feasible.
    pub best: Option<Assignment>,
    pub score: Option<f64>,
    pub feasible_samples: usize,
    pub time_s: f64,
}

/// Samples the dense penalty QUBO once, without multipliers or repair.
pub fn run_qubo_baseline(
    inst: &QapInstance,
    lambda: f64,
    sampler_cfg: &SamplerConfig,
) -> Result<BaselineResult> {
    let qubo = build_penalty_qubo(inst, lambda)?;
    let sampler = GibbsSampler::new(sampler_cfg.clone())?;
    let n = inst.n();
    let start = Instant::now();
    let batch = sampler.sample(&qubo)?;
    let time_s = start.elapsed().as_secs_f64();

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut feasible_samples = 0;
    for raw in &batch.samples {
        let q = Assignment::from_flat(n, raw.clone())?;
        if let Some(perm) = q.to_permutation() {
            feasible_samples += 1;
            let score = inst.permutation_objective(&perm);
            if best.as_ref().is_none_or(|(b, _)| score < *b) {
                best = Some((score, perm));
            }
        }
    }
    Ok(BaselineResult {
        score: best.as_ref().map(|(s, _)| *s),
        best: best.map(|(_, p)| Assignment::from_permutation(&p)),
        feasible_samples,
        time_s,
    })
}
