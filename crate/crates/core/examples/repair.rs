//! Repair infeasible assignments with BFHA and the Hungarian method.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use sparse_qap::exact::brute_force_min_hamming;
use sparse_qap::instance::is_feasible;
use sparse_qap::repair::{bfha_repair, hungarian_repair, repair_gap};
use sparse_qap::Assignment;

fn main() -> sparse_qap::Result<()> {
    let q = Assignment::from_rows(&[vec![1, 1, 0], vec![0, 0, 0], vec![0, 1, 1]])?;
    let b = bfha_repair(&q);
    let h = hungarian_repair(&q);
    println!("input      {:?}", q.rows());
    println!("bfha       {:?}  distance {}", b.repaired.rows(), b.hamming);
    println!("hungarian  {:?}  distance {}", h.repaired.rows(), h.hamming);
    println!("exhaustive minimum       {}", brute_force_min_hamming(&q, 8)?);

    let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
    let n = 12;
    let batch: Vec<Assignment> = (0..500)
        .map(|_| {
            let bits = (0..n * n).map(|_| rng.gen_bool(1.0 / n as f64) as u8).collect();
            Assignment::from_flat(n, bits).unwrap()
        })
        .filter(|q| !is_feasible(q))
        .collect();
    let report = repair_gap(&batch)?;
    println!(
        "n = {n}, {} sparse random matrices: bfha {:.3}, hungarian {:.3}, gap {:.2}%",
        report.samples, report.mean_bfha_distance, report.mean_min_distance, report.gap_percent
    );
    Ok(())
}
