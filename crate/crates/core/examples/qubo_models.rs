//! Penalty vs. multiplier-relaxed QUBO: sparsity, energies, Ising form.

use sparse_qap::instance::{generate_instance, objective};
use sparse_qap::qubo::{build_penalty_qubo, build_relaxed_qubo, default_lambda, qubo_to_ising};
use sparse_qap::{Assignment, GeneratorConfig};

fn main() -> sparse_qap::Result<()> {
    for n in [5, 10, 20] {
        let inst = generate_instance(n, 0, &GeneratorConfig::default())?;
        let penalty = build_penalty_qubo(&inst, default_lambda(&inst))?;
        let relaxed = build_relaxed_qubo(&inst, &vec![0.3; 2 * n])?;
        println!(
            "n = {n:2}: penalty {:6} quadratic terms, relaxed {:5}",
            penalty.quadratic_count(),
            relaxed.quadratic_count()
        );
    }

    // On a permutation the penalty vanishes and each multiplier term is -v.
    let inst = generate_instance(4, 3, &GeneratorConfig::default())?;
    let q = Assignment::from_permutation(&[1, 3, 0, 2]);
    let penalty = build_penalty_qubo(&inst, 2.0)?;
    let relaxed = build_relaxed_qubo(&inst, &[0.5; 8])?;
    println!("f0          = {:.6}", objective(&inst, &q)?);
    println!("penalty E   = {:.6}", penalty.energy(q.as_flat())?);
    println!("relaxed E   = {:.6} (f0 - 8 * 0.5)", relaxed.energy(q.as_flat())?);

    let ising = qubo_to_ising(&penalty);
    let spins: Vec<i8> = q.as_flat().iter().map(|&b| 2 * b as i8 - 1).collect();
    println!("ising E     = {:.6}", ising.energy(&spins)?);
    Ok(())
}
