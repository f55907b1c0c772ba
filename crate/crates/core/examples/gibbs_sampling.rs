//! Sample a two-variable QUBO and compare state frequencies with Boltzmann weights.

use sparse_qap::{GibbsSampler, Qubo, Sampler, SamplerConfig};

fn main() -> sparse_qap::Result<()> {
    let mut qubo = Qubo::new(2);
    qubo.add(0, 0, -1.0);
    qubo.add(1, 1, 0.5);
    qubo.add(0, 1, 1.5);

    for beta in [0.5, 1.0, 2.0] {
        let cfg = SamplerConfig {
            num_reads: 20_000,
            sweeps: 20,
            beta_initial: beta,
            beta_final: beta,
            seed: 42,
        };
        let batch = GibbsSampler::new(cfg)?.sample(&qubo)?;
        let mut counts = [0usize; 4];
        for s in &batch.samples {
            counts[(s[0] as usize) << 1 | s[1] as usize] += 1;
        }
        let weights: Vec<f64> = (0..4)
            .map(|k| (-beta * qubo.energy(&[(k >> 1) as u8, (k & 1) as u8]).unwrap()).exp())
            .collect();
        let z: f64 = weights.iter().sum();
        println!("beta = {beta}");
        for k in 0..4 {
            println!(
                "  q = {:02b}: empirical {:.4}  exact {:.4}",
                k,
                counts[k] as f64 / batch.len() as f64,
                weights[k] / z
            );
        }
    }
    Ok(())
}
