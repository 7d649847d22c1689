//! Seeded batch execution: fan repeats out to a bounded worker pool,
//! persist one raw CSV per (optimizer, repeat), then reduce to a summary
//! table and a manifest.

use crate::config::{to_core_config, ExperimentConfig, OptimizerConfig, OptimizerKind};
use sha2::{Digest, Sha256};
use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use subspace_bo::optimizer::{
    initial_design, log_distance, run_gpucb, run_line_baseline, run_msucb, run_random_search,
    Objective, RunRecord,
};

pub const RAW_HEADER: &str =
    "t,best_observed,best_true,log_dist,r_t,R_t,pool_size,acq_evals,elapsed_s";

/// 17-significant-digit float serialization: exact f64 round-trips, so
/// the recomputation oracle can rebuild aggregates bit-exactly.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn run_one(
    exp: &ExperimentConfig,
    opt: &OptimizerConfig,
    obj: &Objective,
    seed: u64,
    init: Vec<Vec<f64>>,
) -> anyhow::Result<RunRecord> {
    let mut cfg = to_core_config(exp, opt, seed)?;
    cfg.init_design = Some(init);
    let rec = match opt.kind {
        OptimizerKind::Msucb => run_msucb(obj, &cfg),
        OptimizerKind::Gpucb => run_gpucb(obj, &cfg),
        OptimizerKind::Line => run_line_baseline(obj, &cfg),
        OptimizerKind::Random => run_random_search(obj, &cfg),
    };
    rec.map_err(|e| anyhow::anyhow!("{e}"))
}

/// Render one run as the raw CSV (LF endings).
pub fn raw_csv(rec: &RunRecord, optimum: f64, record_timings: bool) -> String {
    let mut out = String::with_capacity(rec.rows.len() * 160);
    out.push_str(RAW_HEADER);
    out.push('\n');
    for row in &rec.rows {
        let elapsed = if record_timings { row.elapsed_s } else { 0.0 };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.t,
            fmt_float(row.best_observed),
            fmt_float(row.best_true),
            fmt_float(log_distance(optimum, row.best_true)),
            fmt_float(row.regret.unwrap_or(f64::NAN)),
            fmt_float(row.cum_regret.unwrap_or(f64::NAN)),
            row.pool_size,
            row.acq_evals,
            fmt_float(elapsed),
        ));
    }
    out
}

/// One parsed raw run, as the summary reducer sees it.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub optimizer: String,
    pub repeat: usize,
    pub seed: u64,
    pub file: String,
    pub status: RunStatus,
    /// `log_dist` per t (empty on failure).
    pub log_dist: Vec<f64>,
    /// Final cumulative regret, if the run produced rows.
    pub final_cum_regret: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    Incomplete,
    Failed(String),
}

impl RunStatus {
    pub fn label(&self) -> &str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Incomplete => "incomplete",
            RunStatus::Failed(_) => "failed",
        }
    }
}

pub struct ExperimentOutput {
    pub out_dir: PathBuf,
    pub outcomes: Vec<RunOutcome>,
    pub summary_path: PathBuf,
    pub manifest_path: PathBuf,
}

/// Execute every (optimizer, repeat) job and persist raw CSVs, the
/// summary, and the manifest. Repeats share the initial design per seed
/// across optimizers. Jobs fan out to `workers` threads; each output file
/// is written exactly once by the worker that owns the job, so parallel
/// and sequential execution emit identical bytes.
pub fn run_experiment(
    config: &ExperimentConfig,
    config_text: &str,
    out_dir: &Path,
    workers: usize,
) -> anyhow::Result<ExperimentOutput> {
    config.validate()?;
    std::fs::create_dir_all(out_dir)?;
    // Fail before any run starts if the directory is not writable.
    let probe = out_dir.join(".write-probe");
    std::fs::write(&probe, b"probe")
        .map_err(|e| anyhow::anyhow!("output dir {} not writable: {e}", out_dir.display()))?;
    std::fs::remove_file(&probe).ok();

    let spec = config.benchmark_spec()?;
    let optimum = -spec.family.native_minimum();

    // Job list in deterministic order: optimizer-major, repeat-minor.
    struct Job {
        index: usize,
        opt: OptimizerConfig,
        repeat: usize,
        seed: u64,
    }
    let mut jobs = VecDeque::new();
    let mut index = 0;
    for opt in &config.optimizers {
        for repeat in 0..config.repeats {
            jobs.push_back(Job {
                index,
                opt: opt.clone(),
                repeat,
                seed: config.base_seed + repeat as u64,
            });
            index += 1;
        }
    }
    let total = jobs.len();
    let queue = Mutex::new(jobs);
    let results: Mutex<Vec<Option<RunOutcome>>> = Mutex::new(vec![None; total]);

    let init_points = config
        .optimizers
        .iter()
        .map(|o| o.init_points)
        .max()
        .unwrap_or(20);

    std::thread::scope(|scope| {
        for _ in 0..workers.max(1) {
            scope.spawn(|| loop {
                let job = match queue.lock().unwrap().pop_front() {
                    Some(j) => j,
                    None => break,
                };
                let spec = spec.clone();
                let obj =
                    subspace_bo::benchmarks::make_benchmark(spec).with_noise_std(config.noise_std);
                // Shared init design per seed: every optimizer at this
                // repeat starts from the same points.
                let init = initial_design(config.benchmark.dim, init_points, job.seed);
                let init = init[..job.opt.init_points.min(init.len())].to_vec();
                let label = job.opt.label();
                let file = format!("{}_seed{}.csv", label, job.seed);
                let outcome = match run_one(config, &job.opt, &obj, job.seed, init) {
                    Ok(rec) => {
                        let csv = raw_csv(&rec, optimum, config.record_timings);
                        match std::fs::write(out_dir.join(&file), csv) {
                            Ok(()) => RunOutcome {
                                optimizer: label,
                                repeat: job.repeat,
                                seed: job.seed,
                                file,
                                status: if rec.incomplete {
                                    RunStatus::Incomplete
                                } else {
                                    RunStatus::Ok
                                },
                                log_dist: rec
                                    .rows
                                    .iter()
                                    .map(|r| log_distance(optimum, r.best_true))
                                    .collect(),
                                final_cum_regret: rec.rows.last().and_then(|r| r.cum_regret),
                            },
                            Err(e) => RunOutcome {
                                optimizer: label,
                                repeat: job.repeat,
                                seed: job.seed,
                                file,
                                status: RunStatus::Failed(format!("write failed: {e}")),
                                log_dist: Vec::new(),
                                final_cum_regret: None,
                            },
                        }
                    }
                    Err(e) => RunOutcome {
                        optimizer: label,
                        repeat: job.repeat,
                        seed: job.seed,
                        file,
                        status: RunStatus::Failed(e.to_string()),
                        log_dist: Vec::new(),
                        final_cum_regret: None,
                    },
                };
                results.lock().unwrap()[job.index] = Some(outcome);
            });
        }
    });

    let outcomes: Vec<RunOutcome> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|o| o.expect("every job produced an outcome"))
        .collect();

    let summary_path = out_dir.join("summary.csv");
    std::fs::write(&summary_path, summary_csv(config, &outcomes))?;
    let manifest_path = out_dir.join("manifest.toml");
    std::fs::write(&manifest_path, manifest(config, config_text, &outcomes))?;

    Ok(ExperimentOutput {
        out_dir: out_dir.to_path_buf(),
        outcomes,
        summary_path,
        manifest_path,
    })
}

fn mean_std_median(values: &mut [f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if values.len() % 2 == 1 {
        values[values.len() / 2]
    } else {
        0.5 * (values[values.len() / 2 - 1] + values[values.len() / 2])
    };
    (mean, var.sqrt(), median)
}

/// Per-(optimizer, t) aggregates over completed repeats, plus one final-R_T
/// row per optimizer (t blank). Failed runs are excluded and counted in
/// `n_runs`.
pub fn summary_csv(config: &ExperimentConfig, outcomes: &[RunOutcome]) -> String {
    let mut out = String::new();
    out.push_str("optimizer,t,n_runs,mean_log_dist,std_log_dist,median_log_dist\n");
    for opt in &config.optimizers {
        let label = opt.label();
        let runs: Vec<&RunOutcome> = outcomes
            .iter()
            .filter(|o| o.optimizer == label && !matches!(o.status, RunStatus::Failed(_)))
            .collect();
        for t in 1..=config.horizon {
            let mut vals: Vec<f64> = runs
                .iter()
                .filter_map(|r| r.log_dist.get(t - 1).copied())
                .collect();
            if vals.is_empty() {
                continue;
            }
            let n = vals.len();
            let (mean, std, median) = mean_std_median(&mut vals);
            out.push_str(&format!(
                "{label},{t},{n},{},{},{}\n",
                fmt_float(mean),
                fmt_float(std),
                fmt_float(median)
            ));
        }
        let mut finals: Vec<f64> = runs.iter().filter_map(|r| r.final_cum_regret).collect();
        if !finals.is_empty() {
            let n = finals.len();
            let (mean, std, median) = mean_std_median(&mut finals);
            out.push_str(&format!(
                "{label},final_R,{n},{},{},{}\n",
                fmt_float(mean),
                fmt_float(std),
                fmt_float(median)
            ));
        }
    }
    out
}

fn manifest(config: &ExperimentConfig, config_text: &str, outcomes: &[RunOutcome]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config_text.as_bytes());
    let hash = hex::encode(hasher.finalize());
    let mut out = String::new();
    out.push_str(&format!(
        "library_version = \"{}\"\nconfig_sha256 = \"{hash}\"\nbase_seed = {}\nrepeats = {}\n",
        env!("CARGO_PKG_VERSION"),
        config.base_seed,
        config.repeats
    ));
    let seeds: Vec<String> = (0..config.repeats)
        .map(|r| (config.base_seed + r as u64).to_string())
        .collect();
    out.push_str(&format!("seeds = [{}]\n", seeds.join(", ")));
    for o in outcomes {
        out.push_str(&format!(
            "\n[[run]]\noptimizer = \"{}\"\nrepeat = {}\nseed = {}\nfile = \"{}\"\nstatus = \"{}\"\n",
            o.optimizer,
            o.repeat,
            o.seed,
            o.file,
            o.status.label()
        ));
        if let RunStatus::Failed(reason) = &o.status {
            out.push_str(&format!("reason = {:?}\n", reason));
        }
    }
    out.push_str("\n[config]\n");
    for line in config_text.lines() {
        out.push_str(&format!("# {line}\n"));
    }
    out
}

/// Write the bound curve CSV: `t,B,B_over_t` rows.
pub fn emit_bounds(
    params: &subspace_bo::bounds::BoundParams,
    horizon: usize,
    out: &Path,
) -> anyhow::Result<()> {
    let curve = subspace_bo::bounds::regret_bound_curve(params, horizon)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut text = String::from("t,B,B_over_t\n");
    for t in 1..=horizon {
        let b = curve.value(t);
        text.push_str(&format!(
            "{t},{},{}\n",
            fmt_float(b),
            fmt_float(b / t as f64)
        ));
    }
    std::fs::write(out, text)?;
    Ok(())
}
