//! Experiment drivers: solving with each method, repair benchmarks,
//! violation histograms and the per-size comparison report.
//!
//! Everything here is deterministic under fixed seeds except wall-clock
//! columns, which [`Timing::Omit`] blanks out for byte-stable output.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{brute_force_opt, DEFAULT_OPT_LIMIT};
use crate::instance::{generate_instance, is_feasible, Assignment, GeneratorConfig, QapInstance};
use crate::ohzeki::{
    run_algorithm2, run_qubo_baseline, update_multipliers, violation_histogram, MultiplierState,
    OptimizationTrace, ScheduleConfig, SolveOptions,
};
use crate::qubo::{build_relaxed_qubo, default_lambda, ConstraintSystem};
use crate::repair::{repair_gap, GapReport};
use crate::sampler::{estimate_constraint_expectations, sample, SampleBatch, SamplerConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    OhzekiBfha,
    QuboDirect,
    Exact,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::OhzekiBfha => "ohzeki-bfha",
            Method::QuboDirect => "qubo-direct",
            Method::Exact => "exact",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ohzeki-bfha" => Ok(Method::OhzekiBfha),
            "qubo-direct" => Ok(Method::QuboDirect),
            "exact" => Ok(Method::Exact),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Timing {
    #[default]
    Record,
    Omit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSettings {
    pub schedule: ScheduleConfig,
    pub sampler: SamplerConfig,
    /// Penalty weight for `qubo-direct`; [`default_lambda`] when absent.
    pub lambda: Option<f64>,
    pub exact_limit: usize,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            schedule: ScheduleConfig::default(),
            sampler: SamplerConfig::default(),
            lambda: None,
            exact_limit: DEFAULT_OPT_LIMIT,
        }
    }
}

/// Result record written by `solve`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: String,
    pub score: Option<f64>,
    pub feasible: bool,
    pub time_s: Option<f64>,
    pub solution: Option<Assignment>,
}

pub fn solve(
    inst: &QapInstance,
    method: Method,
    settings: &SolveSettings,
) -> Result<(SolveReport, Option<OptimizationTrace>)> {
    let (score, solution, time_s, trace) = match method {
        Method::OhzekiBfha => {
            let r = run_algorithm2(inst, &settings.schedule, &settings.sampler, &SolveOptions::default())?;
            (Some(r.score), Some(r.best), r.time_s, Some(r.trace))
        }
        Method::QuboDirect => {
            let lambda = settings.lambda.unwrap_or_else(|| default_lambda(inst));
            let r = run_qubo_baseline(inst, lambda, &settings.sampler)?;
            (r.score, r.best, r.time_s, None)
        }
        Method::Exact => {
            let start = Instant::now();
            let r = brute_force_opt(inst, settings.exact_limit)?;
            (Some(r.score), Some(r.best), start.elapsed().as_secs_f64(), None)
        }
    };
    let feasible = solution.as_ref().is_some_and(is_feasible);
    Ok((
        SolveReport {
            method: method.as_str().to_string(),
            score,
            feasible,
            time_s: Some(time_s),
            solution,
        },
        trace,
    ))
}

/// Samples the relaxed QUBO after `warmup` multiplier updates from zero.
///
/// Round `t` (0-based) uses sampler seed `config.seed + t * num_reads`.
pub fn ohzeki_round(
    inst: &QapInstance,
    schedule: &ScheduleConfig,
    sampler: &SamplerConfig,
    warmup: usize,
) -> Result<SampleBatch> {
    let cs = ConstraintSystem::new(inst.n());
    let mut state = MultiplierState::zeros(inst.n());
    let reads = sampler.num_reads as u64;
    for t in 0..=warmup {
        let qubo = build_relaxed_qubo(inst, &state.v)?;
        let cfg = sampler.with_seed(sampler.seed.wrapping_add(t as u64 * reads));
        let batch = sample(&qubo, &cfg)?;
        if t == warmup {
            return Ok(batch);
        }
        let expectations = estimate_constraint_expectations(&batch, &cs)?;
        state = update_multipliers(&state, &expectations, schedule)?;
    }
    unreachable!()
}

/// Collects `count` infeasible raw samples, drawing further rounds with fresh
/// seeds while feasible samples are discarded.
pub fn infeasible_samples(
    inst: &QapInstance,
    schedule: &ScheduleConfig,
    sampler: &SamplerConfig,
    warmup: usize,
    count: usize,
) -> Result<Vec<Assignment>> {
    let mut out = Vec::with_capacity(count);
    let stride = (warmup as u64 + 1) * sampler.num_reads as u64;
    for attempt in 0u64.. {
        let cfg = sampler.with_seed(sampler.seed.wrapping_add(attempt * stride));
        let batch = ohzeki_round(inst, schedule, &cfg, warmup)?;
        for raw in batch.samples {
            let q = Assignment::from_flat(inst.n(), raw)?;
            if !is_feasible(&q) {
                out.push(q);
                if out.len() == count {
                    return Ok(out);
                }
            }
        }
        if attempt >= 100 && out.is_empty() {
            return Err(Error::InvalidParameter(
                "sampler produced only feasible samples".into(),
            ));
        }
    }
    unreachable!()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRepairConfig {
    pub sizes: Vec<usize>,
    pub samples_per_size: usize,
    pub seed: u64,
    /// Multiplier updates before the sampled round.
    pub warmup: usize,
    pub schedule: ScheduleConfig,
    pub sampler: SamplerConfig,
}

impl Default for BenchRepairConfig {
    fn default() -> Self {
        Self {
            sizes: (5..=20).collect(),
            samples_per_size: 1000,
            seed: 0,
            warmup: 5,
            schedule: ScheduleConfig::default(),
            sampler: SamplerConfig::default(),
        }
    }
}

/// One [`GapReport`] per size, on infeasible samples of instance `(size, seed)`.
pub fn bench_repair(cfg: &BenchRepairConfig) -> Result<Vec<(usize, GapReport)>> {
    cfg.sizes
        .iter()
        .map(|&n| {
            let inst = generate_instance(n, cfg.seed, &GeneratorConfig::default())?;
            let sampler = SamplerConfig {
                num_reads: cfg.samples_per_size,
                seed: derive_seed(cfg.sampler.seed, n as u64, cfg.seed),
                ..cfg.sampler.clone()
            };
            let batch = infeasible_samples(&inst, &cfg.schedule, &sampler, cfg.warmup, cfg.samples_per_size)?;
            Ok((n, repair_gap(&batch)?))
        })
        .collect()
}

pub fn bench_repair_csv(rows: &[(usize, GapReport)], timing: Timing) -> String {
    let mut out = format!("{}\n", GapReport::CSV_HEADER);
    for (n, report) in rows {
        let mut r = report.clone();
        if timing == Timing::Omit {
            r.bfha_time_s = 0.0;
            r.hungarian_time_s = 0.0;
        }
        writeln!(out, "{}", r.csv_row(*n)).unwrap();
    }
    out
}

/// Histogram of violated constraints over one relaxed sampling round.
pub fn violations(
    inst: &QapInstance,
    schedule: &ScheduleConfig,
    sampler: &SamplerConfig,
    warmup: usize,
) -> Result<Vec<usize>> {
    let batch = ohzeki_round(inst, schedule, sampler, warmup)?;
    violation_histogram(inst.n(), &batch.samples)
}

pub fn histogram_csv(hist: &[usize]) -> String {
    let mut out = String::from("violations,count\n");
    for (k, c) in hist.iter().enumerate() {
        writeln!(out, "{k},{c}").unwrap();
    }
    out
}

/// Mixes a base seed with two labels (SplitMix64 finalizer).
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut z = base
        .wrapping_add(a.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(b.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub sizes: Vec<usize>,
    pub instances_per_size: usize,
    pub base_seed: u64,
    pub settings: SolveSettings,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            sizes: (5..=20).collect(),
            instances_per_size: 10,
            base_seed: 0,
            settings: SolveSettings::default(),
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes.contains(&0) || self.instances_per_size == 0 {
            return Err(Error::InvalidParameter(
                "sizes and instances_per_size must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Seed of the `k`-th instance of size `n`.
    pub fn instance_seed(&self, n: usize, k: usize) -> u64 {
        self.base_seed.wrapping_add(1000 * n as u64 + k as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRow {
    pub size: usize,
    pub seed: u64,
    pub ohzeki_score: f64,
    pub ohzeki_time_s: f64,
    /// Raw relaxed samples that were permutations, summed over iterations.
    pub ohzeki_raw_feasible: usize,
    pub qubo_score: Option<f64>,
    pub qubo_time_s: f64,
    pub opt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub size: usize,
    pub instances: usize,
    pub ohzeki_score: f64,
    pub ohzeki_time_s: f64,
    pub ohzeki_raw_feasible: usize,
    pub qubo_feasible: usize,
    /// Mean over the instances where the penalty QUBO gave a feasible sample.
    pub qubo_score: Option<f64>,
    pub qubo_time_s: f64,
    pub opt: Option<f64>,
    /// Instances where `ohzeki_score` equals `opt` within 1e-9.
    pub opt_hits: Option<usize>,
}

/// Runs every method on `instances_per_size` instances of each size.
pub fn run_report(cfg: &ExperimentConfig) -> Result<(Vec<InstanceRow>, Vec<SizeSummary>)> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &n in &cfg.sizes {
        let mut size_rows = Vec::new();
        for k in 0..cfg.instances_per_size {
            let seed = cfg.instance_seed(n, k);
            let inst = generate_instance(n, seed, &GeneratorConfig::default())?;
            let sampler = cfg
                .settings
                .sampler
                .with_seed(derive_seed(cfg.settings.sampler.seed, n as u64, seed));
            let oz = run_algorithm2(&inst, &cfg.settings.schedule, &sampler, &SolveOptions::default())?;
            let lambda = cfg.settings.lambda.unwrap_or_else(|| default_lambda(&inst));
            let qb = run_qubo_baseline(&inst, lambda, &sampler)?;
            let opt = if n <= cfg.settings.exact_limit {
                Some(brute_force_opt(&inst, cfg.settings.exact_limit)?.score)
            } else {
                None
            };
            size_rows.push(InstanceRow {
                size: n,
                seed,
                ohzeki_score: oz.score,
                ohzeki_time_s: oz.time_s,
                ohzeki_raw_feasible: oz.trace.records.iter().map(|r| r.raw_feasible).sum(),
                qubo_score: qb.score,
                qubo_time_s: qb.time_s,
                opt,
            });
        }
        summary.push(summarize(n, &size_rows));
        rows.extend(size_rows);
    }
    Ok((rows, summary))
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (count > 0).then(|| sum / count as f64)
}

fn summarize(n: usize, rows: &[InstanceRow]) -> SizeSummary {
    let all_opt = rows.iter().all(|r| r.opt.is_some());
    SizeSummary {
        size: n,
        instances: rows.len(),
        ohzeki_score: mean(rows.iter().map(|r| r.ohzeki_score)).unwrap_or(f64::NAN),
        ohzeki_time_s: mean(rows.iter().map(|r| r.ohzeki_time_s)).unwrap_or(0.0),
        ohzeki_raw_feasible: rows.iter().map(|r| r.ohzeki_raw_feasible).sum(),
        qubo_feasible: rows.iter().filter(|r| r.qubo_score.is_some()).count(),
        qubo_score: mean(rows.iter().filter_map(|r| r.qubo_score)),
        qubo_time_s: mean(rows.iter().map(|r| r.qubo_time_s)).unwrap_or(0.0),
        opt: if all_opt { mean(rows.iter().filter_map(|r| r.opt)) } else { None },
        opt_hits: all_opt.then(|| {
            rows.iter()
                .filter(|r| r.opt.is_some_and(|o| (r.ohzeki_score - o).abs() <= 1e-9))
                .count()
        }),
    }
}

fn opt_cell(x: Option<f64>, missing: &str) -> String {
    x.map_or_else(|| missing.to_string(), |v| format!("{v:.6}"))
}

fn time_cell(t: f64, timing: Timing) -> String {
    match timing {
        Timing::Record => format!("{t:.6e}"),
        Timing::Omit => String::new(),
    }
}

pub fn summary_csv(summary: &[SizeSummary], timing: Timing) -> String {
    let mut out = String::from(
        "size,instances,ohzeki_score,ohzeki_time_s,ohzeki_raw_feasible,qubo_feasible,qubo_score,qubo_time_s,opt,opt_hits\n",
    );
    for s in summary {
        writeln!(
            out,
            "{},{},{:.6},{},{},{},{},{},{},{}",
            s.size,
            s.instances,
            s.ohzeki_score,
            time_cell(s.ohzeki_time_s, timing),
            s.ohzeki_raw_feasible,
            s.qubo_feasible,
            opt_cell(s.qubo_score, "infeasible"),
            time_cell(s.qubo_time_s, timing),
            opt_cell(s.opt, ""),
            s.opt_hits.map_or_else(String::new, |h| h.to_string()),
        )
        .unwrap();
    }
    out
}

pub fn instance_csv(rows: &[InstanceRow], timing: Timing) -> String {
    let mut out =
        String::from("size,seed,ohzeki_score,ohzeki_time_s,ohzeki_raw_feasible,qubo_score,qubo_time_s,opt\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{:.6},{},{},{},{},{}",
            r.size,
            r.seed,
            r.ohzeki_score,
            time_cell(r.ohzeki_time_s, timing),
            r.ohzeki_raw_feasible,
            opt_cell(r.qubo_score, "infeasible"),
            time_cell(r.qubo_time_s, timing),
            opt_cell(r.opt, ""),
        )
        .unwrap();
    }
    out
}

/// Parses `5-20`, `5..20`, `5..=20` (all inclusive) or `5,8,12`.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidParameter(format!("cannot parse sizes `{text}`"));
    let range = text
        .split_once("..=")
        .or_else(|| text.split_once(".."))
        .or_else(|| text.split_once('-'));
    let sizes: Vec<usize> = if let Some((a, b)) = range {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        text.split(',')
            .map(|x| x.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(bad());
    }
    Ok(sizes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SolveSettings {
        SolveSettings {
            schedule: ScheduleConfig {
                max_iters: 3,
                ..Default::default()
            },
            sampler: SamplerConfig {
                num_reads: 40,
                sweeps: 10,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::OhzekiBfha, Method::QuboDirect, Method::Exact] {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("annealer".parse::<Method>().is_err());
    }

    #[test]
    fn single_item_methods_agree() {
        let inst = generate_instance(1, 3, &GeneratorConfig::default()).unwrap();
        let scores: Vec<Option<f64>> = [Method::OhzekiBfha, Method::QuboDirect, Method::Exact]
            .into_iter()
            .map(|m| solve(&inst, m, &quick()).unwrap().0.score)
            .collect();
        assert!(scores.iter().all(|s| *s == Some(-inst.sales()[0][0])));
    }

    #[test]
    fn exact_respects_size_guard() {
        let inst = generate_instance(11, 3, &GeneratorConfig::default()).unwrap();
        assert!(matches!(
            solve(&inst, Method::Exact, &quick()),
            Err(Error::SizeLimit { n: 11, limit: 10 })
        ));
    }

    #[test]
    fn report_json_schema() {
        let inst = generate_instance(3, 3, &GeneratorConfig::default()).unwrap();
        let (report, trace) = solve(&inst, Method::OhzekiBfha, &quick()).unwrap();
        assert!(trace.is_some());
        let v: serde_json::Value = serde_json::to_value(&report).unwrap();
        for key in ["method", "score", "feasible", "time_s", "solution"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["method"], "ohzeki-bfha");
        assert_eq!(v["feasible"], true);
        assert_eq!(v["solution"]["n"], 3);
    }

    #[test]
    fn infeasible_samples_are_infeasible() {
        let inst = generate_instance(4, 1, &GeneratorConfig::default()).unwrap();
        let s = quick();
        let qs = infeasible_samples(&inst, &s.schedule, &s.sampler, 2, 100).unwrap();
        assert_eq!(qs.len(), 100);
        assert!(qs.iter().all(|q| !is_feasible(q)));
    }

    #[test]
    fn histogram_sums_to_reads() {
        let inst = generate_instance(4, 1, &GeneratorConfig::default()).unwrap();
        let s = quick();
        let h = violations(&inst, &s.schedule, &s.sampler, 1).unwrap();
        assert_eq!(h.len(), 9);
        assert_eq!(h.iter().sum::<usize>(), 40);
        assert!(histogram_csv(&h).starts_with("violations,count\n0,"));
    }

    #[test]
    fn bench_rows_per_size() {
        let cfg = BenchRepairConfig {
            sizes: vec![3, 4],
            samples_per_size: 50,
            sampler: quick().sampler,
            ..Default::default()
        };
        let rows = bench_repair(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        let csv = bench_repair_csv(&rows, Timing::Omit);
        assert_eq!(csv.lines().count(), 3);
        assert!(rows.iter().all(|(_, r)| r.gap_percent >= 0.0));
        assert_eq!(csv, bench_repair_csv(&bench_repair(&cfg).unwrap(), Timing::Omit));
    }

    #[test]
    fn small_report() {
        let cfg = ExperimentConfig {
            sizes: vec![3],
            instances_per_size: 2,
            settings: quick(),
            ..Default::default()
        };
        let (rows, summary) = run_report(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(summary.len(), 1);
        assert!(summary[0].opt.is_some());
        let csv = summary_csv(&summary, Timing::Omit);
        assert_eq!(csv.lines().count(), 2);
        let again = run_report(&cfg).unwrap();
        assert_eq!(instance_csv(&rows, Timing::Omit), instance_csv(&again.0, Timing::Omit));
    }

    #[test]
    fn size_parsing() {
        assert_eq!(parse_sizes("5-8").unwrap(), vec![5, 6, 7, 8]);
        assert_eq!(parse_sizes("5..=6").unwrap(), vec![5, 6]);
        assert_eq!(parse_sizes("3,9").unwrap(), vec![3, 9]);
        assert!(parse_sizes("0-3").is_err());
        assert!(parse_sizes("x").is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(0, 5, 1), derive_seed(0, 5, 2));
        assert_ne!(derive_seed(0, 5, 1), derive_seed(0, 6, 1));
        assert_eq!(derive_seed(7, 5, 1), derive_seed(7, 5, 1));
    }
}
