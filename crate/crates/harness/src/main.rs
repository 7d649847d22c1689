use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use subspace_bo::benchmarks::BenchmarkFamily;
use subspace_bo::bounds::{BoundParams, GammaProxy};
use subspace_bo_harness::config::ExperimentConfig;
use subspace_bo_harness::experiment::{emit_bounds, run_experiment, RunStatus};
use subspace_bo_harness::validate;

#[derive(Parser)]
#[command(
    name = "subspace-bo",
    about = "Benchmark runner and bound-curve exporter for subspace-pool Bayesian optimization",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded experiment from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (overrides config and SUBSPACE_BO_WORKERS).
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory (overrides the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export a theoretical regret-bound curve as CSV.
    Bounds {
        #[arg(long = "D")]
        big_dim: usize,
        #[arg(long = "d")]
        low_dim: usize,
        #[arg(long)]
        alpha: u32,
        #[arg(long, default_value_t = 1)]
        n0: usize,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long = "T")]
        horizon: usize,
        /// Information-gain proxy: se | matern.
        #[arg(long, default_value = "matern")]
        kernel: String,
        #[arg(long, default_value_t = 0.01)]
        sigma2: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the benchmark families and their known optima.
    BenchInfo,
    /// Run the invariant self-test suite.
    Validate,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 1;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            workers,
            out,
        } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read config {}: {e}", config.display());
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            let exp: ExperimentConfig = match toml::from_str(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: invalid config: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            if let Err(e) = exp.validate() {
                eprintln!("error: invalid config: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
            let out_dir = out
                .or_else(|| exp.output_dir.clone().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            let workers = exp.workers(workers);
            match run_experiment(&exp, &text, &out_dir, workers) {
                Ok(output) => {
                    let mut failed = 0;
                    for o in &output.outcomes {
                        if let RunStatus::Failed(reason) = &o.status {
                            eprintln!("run {} seed {} failed: {reason}", o.optimizer, o.seed);
                            failed += 1;
                        }
                    }
                    println!(
                        "wrote {} raw files, {} and {} to {}",
                        output.outcomes.len() - failed,
                        output.summary_path.file_name().unwrap().to_string_lossy(),
                        output.manifest_path.file_name().unwrap().to_string_lossy(),
                        output.out_dir.display()
                    );
                    if failed > 0 {
                        ExitCode::from(EXIT_RUNTIME)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_RUNTIME)
                }
            }
        }
        Command::Bounds {
            big_dim,
            low_dim,
            alpha,
            n0,
            delta,
            horizon,
            kernel,
            sigma2,
            out,
        } => {
            let gamma_proxy = match kernel.as_str() {
                "se" => GammaProxy::SquaredExponential { dim: big_dim },
                "matern" => GammaProxy::Matern {
                    dim: big_dim,
                    nu: 2.5,
                },
                other => {
                    eprintln!("error: unknown kernel '{other}' (expected se | matern)");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            let params = BoundParams {
                big_dim,
                low_dim,
                n0,
                alpha,
                delta,
                a_const: 1.0,
                b_const: 1.0,
                sigma2,
                gamma_proxy,
            };
            if let Err(e) = params.validate() {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
            match emit_bounds(&params, horizon, &out) {
                Ok(()) => {
                    println!("wrote {}", out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_RUNTIME)
                }
            }
        }
        Command::BenchInfo => {
            println!("family              dims      known optimum (maximization)");
            for family in BenchmarkFamily::ALL {
                let dims = match family {
                    BenchmarkFamily::CamelbackAugmented => ">= 2",
                    _ => ">= 1",
                };
                println!(
                    "{:<19} {:<9} {:.15}",
                    family.name(),
                    dims,
                    0.0 - family.native_minimum()
                );
            }
            ExitCode::SUCCESS
        }
        Command::Validate => {
            let reports = validate::run_all();
            let mut ok = true;
            for r in &reports {
                println!(
                    "{} {:<28} {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                );
                ok &= r.passed;
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_RUNTIME)
            }
        }
    }
}
