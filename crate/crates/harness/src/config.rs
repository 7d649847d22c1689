//! Experiment configuration: a single TOML file with strict schema
//! (unknown keys are errors, not warnings — silent typos in experiment
//! configs are the top reproducibility hazard).

use serde::{Deserialize, Serialize};
use std::path::Path;
use subspace_bo::benchmarks::{BenchmarkFamily, BenchmarkSpec};
use subspace_bo::gp::{KernelConfig, KernelFamily};
use subspace_bo::optimizer::MsUcbConfig;
use subspace_bo::subspace::SplitSpec;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub benchmark: BenchmarkConfig,
    pub horizon: usize,
    pub repeats: usize,
    pub base_seed: u64,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub parallel_workers: Option<usize>,
    /// Wall-clock timings are zeroed by default so reruns of the same
    /// config are byte-identical; set true to record real elapsed times.
    #[serde(default)]
    pub record_timings: bool,
    #[serde(rename = "optimizer")]
    pub optimizers: Vec<OptimizerConfig>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub family: String,
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Msucb,
    Gpucb,
    Line,
    Random,
}

impl OptimizerKind {
    pub fn label(&self) -> &'static str {
        match self {
            OptimizerKind::Msucb => "msucb",
            OptimizerKind::Gpucb => "gpucb",
            OptimizerKind::Line => "line",
            OptimizerKind::Random => "random",
        }
    }
}

fn default_n0() -> usize {
    1
}
fn default_delta() -> f64 {
    0.1
}
fn default_const() -> f64 {
    1.0
}
fn default_init_points() -> usize {
    20
}
fn default_refit_every() -> usize {
    5
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    /// Label used in file names and the summary; defaults to the kind.
    #[serde(default)]
    pub name: Option<String>,
    /// Subspace dimension `d`; required for msucb, fixed to 1 for line,
    /// ignored by gpucb and random.
    #[serde(default)]
    pub low_dim: Option<usize>,
    #[serde(default = "default_n0")]
    pub n0: usize,
    #[serde(default)]
    pub alpha: u32,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_const")]
    pub a_const: f64,
    #[serde(default = "default_const")]
    pub b_const: f64,
    #[serde(default = "default_init_points")]
    pub init_points: usize,
    #[serde(default = "default_refit_every")]
    pub refit_every: usize,
    #[serde(default)]
    pub kernel: Option<KernelConfigToml>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfigToml {
    pub family: String,
    pub lengthscale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl OptimizerConfig {
    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| self.kind.label().to_string())
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let cfg: ExperimentConfig = toml::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.repeats == 0 {
            anyhow::bail!("repeats must be >= 1");
        }
        if self.horizon == 0 {
            anyhow::bail!("horizon must be >= 1");
        }
        if self.optimizers.is_empty() {
            anyhow::bail!("at least one [[optimizer]] table is required");
        }
        if self.noise_std < 0.0 {
            anyhow::bail!("noise_std must be >= 0");
        }
        self.benchmark_spec()?;
        let dim = self.benchmark.dim;
        let mut labels = std::collections::HashSet::new();
        for opt in &self.optimizers {
            if !labels.insert(opt.label()) {
                anyhow::bail!("duplicate optimizer label '{}'", opt.label());
            }
            match opt.kind {
                OptimizerKind::Msucb => {
                    let d = opt
                        .low_dim
                        .ok_or_else(|| anyhow::anyhow!("msucb requires low_dim"))?;
                    SplitSpec::new(dim, d).map_err(|e| anyhow::anyhow!("{e}"))?;
                }
                OptimizerKind::Line | OptimizerKind::Gpucb => {
                    SplitSpec::new(dim, 1).map_err(|e| anyhow::anyhow!("{e}"))?;
                }
                OptimizerKind::Random => {}
            }
            if let Some(k) = &opt.kernel {
                k.to_kernel()?;
            }
        }
        Ok(())
    }

    pub fn benchmark_spec(&self) -> anyhow::Result<BenchmarkSpec> {
        let family =
            BenchmarkFamily::parse(&self.benchmark.family).map_err(|e| anyhow::anyhow!("{e}"))?;
        BenchmarkSpec::new(family, self.benchmark.dim).map_err(|e| anyhow::anyhow!("{e}"))
    }

    /// Worker count: CLI override > config > `SUBSPACE_BO_WORKERS` > 1.
    pub fn workers(&self, cli_override: Option<usize>) -> usize {
        cli_override
            .or(self.parallel_workers)
            .or_else(|| {
                std::env::var("SUBSPACE_BO_WORKERS")
                    .ok()
                    .and_then(|v| v.parse().ok())
            })
            .unwrap_or(1)
            .max(1)
    }
}

impl KernelConfigToml {
    pub fn to_kernel(&self) -> anyhow::Result<KernelConfig> {
        let family = match self.family.as_str() {
            "se" | "squared-exponential" => KernelFamily::SquaredExponential,
            "matern52" | "matern" => KernelFamily::Matern52,
            other => anyhow::bail!("unknown kernel family '{other}'"),
        };
        KernelConfig::new(
            family,
            self.lengthscale,
            self.signal_variance,
            self.noise_variance,
        )
        .map_err(|e| anyhow::anyhow!("{e}"))
    }
}

/// Assemble the core optimizer config for one (optimizer, seed) pair.
pub fn to_core_config(
    exp: &ExperimentConfig,
    opt: &OptimizerConfig,
    seed: u64,
) -> anyhow::Result<MsUcbConfig> {
    let dim = exp.benchmark.dim;
    let d = match opt.kind {
        OptimizerKind::Msucb => opt.low_dim.unwrap_or(1),
        _ => opt.low_dim.unwrap_or(1).min(dim - 1).max(1),
    };
    let split = SplitSpec::new(dim, d).map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut cfg = MsUcbConfig::new(split, exp.horizon, seed);
    cfg.n0 = opt.n0;
    cfg.alpha = opt.alpha;
    cfg.delta = opt.delta;
    cfg.a_const = opt.a_const;
    cfg.b_const = opt.b_const;
    cfg.init_points = opt.init_points;
    cfg.refit_every = opt.refit_every;
    if let Some(k) = &opt.kernel {
        cfg.kernel = k.to_kernel()?;
    }
    Ok(cfg)
}
