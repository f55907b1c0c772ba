use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sparse_qap::exact::DEFAULT_OPT_LIMIT;
use sparse_qap::harness::{
    bench_repair, bench_repair_csv, histogram_csv, instance_csv, parse_sizes, run_report, solve,
    summary_csv, violations, BenchRepairConfig, ExperimentConfig, Method, SolveSettings, Timing,
};
use sparse_qap::instance::{generate_instance, GeneratorConfig, QapInstance};
use sparse_qap::{Error, ScheduleConfig, SamplerConfig};

#[derive(Parser)]
#[command(name = "sparse-qap", version, about = "QAP solving with multiplier-relaxed QUBO sampling")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a random instance as JSON.
    Generate {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        w: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance with one method and print the result JSON.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "ohzeki-bfha")]
        method: Method,
        #[command(flatten)]
        tuning: Tuning,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-iteration trace (JSON lines), ohzeki-bfha only.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        omit_timing: bool,
    },
    /// Compare BFHA with Hungarian repair on sampled infeasible assignments.
    BenchRepair {
        #[arg(long, default_value = "5-20")]
        sizes: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Multiplier updates before the sampled round.
        #[arg(long, default_value_t = 5)]
        warmup: usize,
        #[command(flatten)]
        tuning: Tuning,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        omit_timing: bool,
    },
    /// Histogram of violated constraints over one relaxed sampling round.
    Violations {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        warmup: usize,
        #[command(flatten)]
        tuning: Tuning,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run all methods over seeded instances and write summary CSVs.
    Report {
        #[arg(long, default_value = "5-20")]
        sizes: String,
        #[arg(long, default_value_t = 10)]
        instances: usize,
        #[command(flatten)]
        tuning: Tuning,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_OPT_LIMIT)]
        exact_limit: usize,
        /// Directory for summary.csv and instances.csv; summary goes to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        omit_timing: bool,
    },
}

#[derive(Args)]
struct Tuning {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    num_reads: usize,
    #[arg(long, default_value_t = 100)]
    sweeps: usize,
    #[arg(long, default_value_t = 0.1)]
    beta_initial: f64,
    #[arg(long, default_value_t = 3.0)]
    beta_final: f64,
    #[arg(long, default_value_t = 30)]
    max_iters: usize,
    #[arg(long, default_value_t = 0.1)]
    eta0: f64,
    #[arg(long, default_value_t = 0.92)]
    decay: f64,
}

impl Tuning {
    fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            num_reads: self.num_reads,
            sweeps: self.sweeps,
            beta_initial: self.beta_initial,
            beta_final: self.beta_final,
            seed: self.seed,
        }
    }

    fn schedule(&self) -> ScheduleConfig {
        ScheduleConfig {
            eta0: self.eta0,
            decay: self.decay,
            max_iters: self.max_iters,
            ..ScheduleConfig::default()
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn timing(omit: bool) -> Timing {
    if omit {
        Timing::Omit
    } else {
        Timing::Record
    }
}

fn run(cmd: Cmd) -> Result<(), Error> {
    match cmd {
        Cmd::Generate { n, seed, w, out } => {
            let cfg = GeneratorConfig { w, ..GeneratorConfig::default() };
            let inst = generate_instance(n as usize, seed, &cfg)?;
            emit(out.as_deref(), &(inst.to_json_string()? + "\n"))
        }
        Cmd::Solve { instance, method, tuning, lambda, out, trace, omit_timing } => {
            let inst = QapInstance::load(&instance)?;
            let settings = SolveSettings {
                schedule: tuning.schedule(),
                sampler: tuning.sampler(),
                lambda,
                exact_limit: DEFAULT_OPT_LIMIT,
            };
            let (mut report, tr) = solve(&inst, method, &settings)?;
            if omit_timing {
                report.time_s = None;
            }
            if let (Some(path), Some(tr)) = (trace, tr) {
                fs::write(path, tr.to_jsonl()?)?;
            }
            emit(out.as_deref(), &(serde_json::to_string(&report)? + "\n"))
        }
        Cmd::BenchRepair { sizes, samples, warmup, tuning, out, omit_timing } => {
            let cfg = BenchRepairConfig {
                sizes: parse_sizes(&sizes)?,
                samples_per_size: samples,
                seed: tuning.seed,
                warmup,
                schedule: tuning.schedule(),
                sampler: tuning.sampler(),
            };
            let rows = bench_repair(&cfg)?;
            emit(out.as_deref(), &bench_repair_csv(&rows, timing(omit_timing)))
        }
        Cmd::Violations { instance, warmup, tuning, out } => {
            let inst = QapInstance::load(&instance)?;
            let hist = violations(&inst, &tuning.schedule(), &tuning.sampler(), warmup)?;
            emit(out.as_deref(), &histogram_csv(&hist))
        }
        Cmd::Report { sizes, instances, tuning, lambda, exact_limit, out, omit_timing } => {
            let cfg = ExperimentConfig {
                sizes: parse_sizes(&sizes)?,
                instances_per_size: instances,
                base_seed: tuning.seed,
                settings: SolveSettings {
                    schedule: tuning.schedule(),
                    sampler: tuning.sampler(),
                    lambda,
                    exact_limit,
                },
                output_dir: out.clone(),
            };
            let (rows, summary) = run_report(&cfg)?;
            let t = timing(omit_timing);
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    fs::write(dir.join("summary.csv"), summary_csv(&summary, t))?;
                    fs::write(dir.join("instances.csv"), instance_csv(&rows, t))?;
                    Ok(())
                }
                None => emit(None, &summary_csv(&summary, t)),
            }
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::SizeLimit { .. } => 3,
        Error::Io(_) | Error::Json(_) | Error::InvalidInstance(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
