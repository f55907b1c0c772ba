//! Repair gap on infeasible samples drawn from relaxed-QUBO rounds.

use sparse_qap::harness::{bench_repair, bench_repair_csv, BenchRepairConfig, Timing};

fn main() -> sparse_qap::Result<()> {
    let cfg = BenchRepairConfig {
        sizes: vec![5, 8, 12],
        samples_per_size: 200,
        ..BenchRepairConfig::default()
    };
    print!("{}", bench_repair_csv(&bench_repair(&cfg)?, Timing::Record));
    Ok(())
}
