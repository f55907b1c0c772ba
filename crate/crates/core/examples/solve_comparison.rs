//! Solve one instance with the multiplier method, the penalty QUBO and brute force.

use sparse_qap::exact::brute_force_opt;
use sparse_qap::instance::generate_instance;
use sparse_qap::ohzeki::{run_algorithm2, run_qubo_baseline, SolveOptions};
use sparse_qap::qubo::default_lambda;
use sparse_qap::{GeneratorConfig, SamplerConfig, ScheduleConfig};

fn main() -> sparse_qap::Result<()> {
    let n = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(6);
    let inst = generate_instance(n, 2024, &GeneratorConfig::default())?;
    let sampler = SamplerConfig { seed: 5, ..SamplerConfig::default() };

    let run = run_algorithm2(&inst, &ScheduleConfig::default(), &sampler, &SolveOptions::default())?;
    println!("multipliers + BFHA: {:.6}  ({:.2}s)", run.score, run.time_s);
    for r in run.trace.records.iter().step_by(5) {
        println!("  t = {:2}  eta = {:.4}  best = {:.6}", r.t, r.eta, r.best_score);
    }

    let base = run_qubo_baseline(&inst, default_lambda(&inst), &sampler)?;
    match base.score {
        Some(s) => println!("penalty QUBO:       {s:.6}  ({} feasible samples)", base.feasible_samples),
        None => println!("penalty QUBO:       infeasible"),
    }

    if n <= 10 {
        let opt = brute_force_opt(&inst, 10)?;
        println!("optimum:            {:.6}  ({} permutations)", opt.score, opt.enumerated);
    }
    Ok(())
}
