//! Generate an instance, evaluate a few assignments, round-trip through JSON.

use sparse_qap::instance::{count_violations, generate_instance, is_feasible, objective};
use sparse_qap::{Assignment, GeneratorConfig, QapInstance};

fn main() -> sparse_qap::Result<()> {
    let inst = generate_instance(4, 7, &GeneratorConfig::default())?;
    println!("n = {}, w = {}", inst.n(), inst.w());

    let id = Assignment::identity(4);
    println!("identity: f0 = {:.4}, feasible = {}", objective(&inst, &id)?, is_feasible(&id));

    let perm = [2, 0, 3, 1];
    let q = Assignment::from_permutation(&perm);
    println!("{perm:?}: f0 = {:.4}", inst.permutation_objective(&perm));
    assert!((objective(&inst, &q)? - inst.permutation_objective(&perm)).abs() < 1e-12);

    let mut broken = q.clone();
    broken.set(0, 0, true);
    println!("extra bit: {} violated constraints", count_violations(&broken));

    let text = inst.to_json_string()?;
    let back = QapInstance::from_json_str(&text)?;
    assert_eq!(back, inst);
    println!("json: {} bytes", text.len());
    Ok(())
}
