//! Sparse quadratic assignment solving with relaxed one-hot constraints.
//!
//! The pipeline replaces the dense quadratic penalty of the `2n` one-hot
//! constraints of a QAP with per-constraint linear multipliers, draws
//! approximately Boltzmann-distributed samples of the resulting sparse QUBO,
//! repairs every sample into a permutation matrix with a bit-flip heuristic,
//! and updates the multipliers from sampled constraint averages.
//!
//! Modules:
//! - [`instance`]: problem data, objective and feasibility queries.
//! - [`qubo`]: penalty and relaxed QUBO builders, Ising conversion.
//! - [`sampler`]: Gibbs sampling backend and constraint expectations.
//! - [`ohzeki`]: multiplier schedule and the full optimization loop.
//! - [`repair`]: bit-flip repair, exact Hungarian repair, gap metrics.
//! - [`exact`]: enumeration oracles.
//! - [`harness`]: experiment drivers behind the command-line tool.

pub mod error;
pub mod exact;
pub mod harness;
pub mod instance;
pub mod lap;
pub mod ohzeki;
pub mod qubo;
pub mod repair;
pub mod sampler;

pub use error::{Error, Result};
pub use instance::{Assignment, GeneratorConfig, QapInstance};
pub use ohzeki::{MultiplierState, OptimizationTrace, ScheduleConfig};
pub use qubo::{ConstraintSystem, IsingModel, Qubo};
pub use repair::{RepairResult, ViolationMatrix};
pub use sampler::{GibbsSampler, SampleBatch, Sampler, SamplerConfig};
