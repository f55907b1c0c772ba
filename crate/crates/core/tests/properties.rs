use proptest::prelude::*;

use sparse_qap::exact::brute_force_opt;
use sparse_qap::instance::{count_violations, generate_instance, is_feasible, objective};
use sparse_qap::qubo::{build_penalty_qubo, build_relaxed_qubo, ising_to_qubo, qubo_to_ising};
use sparse_qap::sampler::estimate_constraint_expectations;
use sparse_qap::{Assignment, ConstraintSystem, GeneratorConfig, Qubo, SampleBatch, SamplerConfig};

fn all_assignments(n: usize) -> impl Iterator<Item = Assignment> {
    (0u32..1 << (n * n)).map(move |code| {
        Assignment::from_flat(n, (0..n * n).map(|b| (code >> b & 1) as u8).collect()).unwrap()
    })
}

#[test]
fn violations_vanish_exactly_on_permutations() {
    for n in [2, 3] {
        let mut feasible = 0;
        for q in all_assignments(n) {
            assert_eq!(count_violations(&q) == 0, is_feasible(&q));
            assert_eq!(is_feasible(&q), q.to_permutation().is_some());
            feasible += is_feasible(&q) as usize;
        }
        assert_eq!(feasible, if n == 2 { 2 } else { 6 });
    }
}

#[test]
fn penalty_minimum_is_the_optimal_permutation() {
    let inst = generate_instance(3, 17, &GeneratorConfig::default()).unwrap();
    let qubo = build_penalty_qubo(&inst, 10.0).unwrap();
    let best = all_assignments(3)
        .min_by(|a, b| {
            let ea = qubo.energy(a.as_flat()).unwrap();
            let eb = qubo.energy(b.as_flat()).unwrap();
            ea.partial_cmp(&eb).unwrap()
        })
        .unwrap();
    let opt = brute_force_opt(&inst, 10).unwrap();
    assert!(is_feasible(&best));
    assert_eq!(best, opt.best);
}

#[test]
fn relaxed_energy_is_affine_in_multipliers() {
    let inst = generate_instance(3, 4, &GeneratorConfig::default()).unwrap();
    let cs = ConstraintSystem::new(3);
    let q = Assignment::from_rows(&[vec![1, 1, 0], vec![0, 0, 0], vec![0, 0, 1]]).unwrap();
    let f = cs.evaluate(q.as_flat()).unwrap();
    let base = build_relaxed_qubo(&inst, &[0.0; 6]).unwrap().energy(q.as_flat()).unwrap();
    for k in 0..6 {
        let mut v = [0.0; 6];
        v[k] = 0.5;
        let e = build_relaxed_qubo(&inst, &v).unwrap().energy(q.as_flat()).unwrap();
        assert!((base - e - 0.5 * f[k] as f64).abs() < 1e-12);
    }
}

fn batch_of(samples: Vec<Vec<u8>>) -> SampleBatch {
    let energies = vec![0.0; samples.len()];
    SampleBatch { samples, energies, config: SamplerConfig::default(), qubo_fingerprint: 0 }
}

fn arb_instance() -> impl Strategy<Value = (usize, u64)> {
    (1usize..7, any::<u64>())
}

proptest! {
    #[test]
    fn objective_of_permutation_matches_general_form((n, seed) in arb_instance(), shuffle in any::<u64>()) {
        let inst = generate_instance(n, seed, &GeneratorConfig::default()).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut x = shuffle;
        for i in (1..n).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (x >> 33) as usize % (i + 1));
        }
        let q = Assignment::from_permutation(&perm);
        let a = objective(&inst, &q).unwrap();
        prop_assert!((a - inst.permutation_objective(&perm)).abs() < 1e-9);
    }

    #[test]
    fn ising_round_trip_is_exact(l in 1usize..=10, terms in prop::collection::vec((0usize..10, 0usize..10, -16i32..=16), 0..30)) {
        let mut qubo = Qubo::new(l);
        for (a, b, c) in terms {
            qubo.add(a % l, b % l, c as f64 / 8.0);
        }
        prop_assert_eq!(ising_to_qubo(&qubo_to_ising(&qubo)), qubo);
    }

    #[test]
    fn expectations_are_linear_in_batch_union(
        a in prop::collection::vec(prop::collection::vec(0u8..2, 9), 1..20),
        b in prop::collection::vec(prop::collection::vec(0u8..2, 9), 1..20),
    ) {
        let cs = ConstraintSystem::new(3);
        let ea = estimate_constraint_expectations(&batch_of(a.clone()), &cs).unwrap();
        let eb = estimate_constraint_expectations(&batch_of(b.clone()), &cs).unwrap();
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let joined: Vec<Vec<u8>> = a.into_iter().chain(b).collect();
        let e = estimate_constraint_expectations(&batch_of(joined), &cs).unwrap();
        for k in 0..6 {
            prop_assert!((e[k] - (na * ea[k] + nb * eb[k]) / (na + nb)).abs() < 1e-12);
        }
    }
}
