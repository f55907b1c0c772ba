//! How many one-hot constraints raw relaxed samples break.

use sparse_qap::harness::{histogram_csv, violations};
use sparse_qap::instance::generate_instance;
use sparse_qap::{GeneratorConfig, SamplerConfig, ScheduleConfig};

fn main() -> sparse_qap::Result<()> {
    let inst = generate_instance(8, 0, &GeneratorConfig::default())?;
    let hist = violations(&inst, &ScheduleConfig::default(), &SamplerConfig::default(), 0)?;
    print!("{}", histogram_csv(&hist));
    Ok(())
}
