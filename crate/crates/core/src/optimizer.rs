//! The outer optimization loops: the subspace-pool UCB optimizer and the
//! three baselines (full-space GP-UCB, single-fresh-line search, random
//! search). All runs share the same bookkeeping: per-iteration rows with
//! incumbents, regret, pool size, and acquisition-evaluation counts, plus a
//! coarse event log.

use crate::acquisition::{
    argmax_over_pool, maximize_full_space, BetaSchedule, BetaVariant, InnerOptBudget,
};
use crate::error::{Error, Result};
use crate::gp::{fit_hyperparameters, Dataset, GpModel, KernelConfig};
use crate::subspace::{SplitSpec, SubspacePool};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

// Independent ChaCha streams derived from one run seed, so changing one
// consumer (e.g. the inner optimizer) cannot shift any other.
const STREAM_INIT: u64 = 0x1d_ea;
const STREAM_NOISE: u64 = 0x40_15e;
const STREAM_INNER: u64 = 0x1_44e5;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; u1 in (0, 1].
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// A maximization target on `[-1,1]^dim` with optional Gaussian
/// observation noise and optional known optimal value (for regret).
pub struct Objective {
    dim: usize,
    noise_std: f64,
    known_optimum: Option<f64>,
    f: ObjectiveFn,
}

type ObjectiveFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

impl Objective {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            dim,
            noise_std: 0.0,
            known_optimum: None,
            f: Box::new(f),
        }
    }

    pub fn with_noise_std(mut self, noise_std: f64) -> Self {
        assert!(noise_std >= 0.0);
        self.noise_std = noise_std;
        self
    }

    pub fn with_known_optimum(mut self, opt: f64) -> Self {
        self.known_optimum = Some(opt);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn known_optimum(&self) -> Option<f64> {
        self.known_optimum
    }

    /// Noise-free function value.
    pub fn eval_true(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// Configuration shared by the GP-based optimizers.
#[derive(Debug, Clone)]
pub struct MsUcbConfig {
    pub split: SplitSpec,
    pub horizon: usize,
    pub seed: u64,
    pub n0: usize,
    pub alpha: u32,
    pub delta: f64,
    pub a_const: f64,
    pub b_const: f64,
    pub init_points: usize,
    pub kernel: KernelConfig,
    /// `None` selects the per-iteration default sized from `d` and the
    /// current pool.
    pub budget: Option<InnerOptBudget>,
    /// Hyperparameters are refit every this many iterations (0 disables).
    pub refit_every: usize,
    /// Marginal-likelihood evaluations allowed per refit.
    pub refit_budget: usize,
    /// Hard cap on the anchor pool, if any.
    pub pool_cap: Option<usize>,
    /// Optional externally supplied initial design (shared-init runs).
    pub init_design: Option<Vec<Vec<f64>>>,
}

impl MsUcbConfig {
    pub fn new(split: SplitSpec, horizon: usize, seed: u64) -> Self {
        Self {
            split,
            horizon,
            seed,
            n0: 1,
            alpha: 0,
            delta: 0.1,
            a_const: 1.0,
            b_const: 1.0,
            init_points: 20,
            kernel: KernelConfig::default(),
            budget: None,
            refit_every: 5,
            refit_budget: 40,
            pool_cap: None,
            init_design: None,
        }
    }

    fn validate(&self, obj: &Objective) -> Result<()> {
        if obj.dim() != self.split.big_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.split.big_dim(),
                got: obj.dim(),
            });
        }
        if self.horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be >= 1".into()));
        }
        if self.init_points == 0 && self.init_design.is_none() {
            return Err(Error::InvalidConfig("init_points must be >= 1".into()));
        }
        if let Some(design) = &self.init_design {
            if design.is_empty() {
                return Err(Error::InvalidConfig("init_design must be non-empty".into()));
            }
            for p in design {
                if p.len() != obj.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: obj.dim(),
                        got: p.len(),
                    });
                }
            }
        }
        self.kernel.validate()
    }
}

/// Per-iteration record.
#[derive(Debug, Clone)]
pub struct IterationRow {
    pub t: usize,
    pub x: Vec<f64>,
    pub observed: f64,
    pub f_true: f64,
    pub best_observed: f64,
    pub best_true: f64,
    pub regret: Option<f64>,
    pub cum_regret: Option<f64>,
    pub pool_size: usize,
    pub acq_evals: usize,
    pub elapsed_s: f64,
}

/// Coarse run events, in order of occurrence.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    InitDesign { points: usize },
    PoolGrown { t: usize, pool_size: usize },
    Proposed { t: usize, acq_value: f64 },
    Observed { t: usize, value: f64 },
    Refit { t: usize, lengthscale: f64 },
    Aborted { t: usize, reason: String },
}

/// Full output of one run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub rows: Vec<IterationRow>,
    pub events: Vec<Event>,
    pub init_design: Vec<Vec<f64>>,
    pub init_best_observed: f64,
    pub init_best_true: f64,
    /// Set when the objective failed mid-run and the record is partial.
    pub incomplete: bool,
}

impl RunRecord {
    pub fn final_best_observed(&self) -> f64 {
        self.rows
            .last()
            .map_or(self.init_best_observed, |r| r.best_observed)
    }

    pub fn final_best_true(&self) -> f64 {
        self.rows
            .last()
            .map_or(self.init_best_true, |r| r.best_true)
    }

    /// `log10` distance of the true incumbent to a known optimum, floored
    /// at 1e-12.
    pub fn final_log_distance(&self, optimum: f64) -> f64 {
        log_distance(optimum, self.final_best_true())
    }
}

/// `log10(max(optimum - best, 1e-12))`.
pub fn log_distance(optimum: f64, best_true: f64) -> f64 {
    (optimum - best_true).max(1e-12).log10()
}

/// Uniform initial design on `[-1,1]^dim`.
pub fn initial_design(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, STREAM_INIT);
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect())
        .collect()
}

fn observe(obj: &Objective, x: &[f64], noise_rng: &mut ChaCha8Rng) -> (f64, f64) {
    let f_true = obj.eval_true(x);
    let noise = if obj.noise_std() > 0.0 {
        obj.noise_std() * standard_normal(noise_rng)
    } else {
        // Keep the noise stream advancing identically so noise_std = 0 is
        // the limit of the same run.
        standard_normal(noise_rng);
        0.0
    };
    (f_true + noise, f_true)
}

enum PoolMode {
    /// Growing pool, `N_t = N0 t^alpha` anchors appended per iteration.
    Accumulate,
    /// Single fresh anchor per iteration (line baseline).
    Fresh,
    /// No pool: maximize over the whole box (GP-UCB baseline).
    FullSpace,
}

fn run_gp_loop(obj: &Objective, cfg: &MsUcbConfig, mode: PoolMode) -> Result<RunRecord> {
    cfg.validate(obj)?;
    let mut noise_rng = stream_rng(cfg.seed, STREAM_NOISE);
    let mut inner_rng = stream_rng(cfg.seed, STREAM_INNER);

    let init_design = match &cfg.init_design {
        Some(d) => d.clone(),
        None => initial_design(obj.dim(), cfg.init_points, cfg.seed),
    };
    let mut events = vec![Event::InitDesign {
        points: init_design.len(),
    }];

    let mut data = Dataset::new(obj.dim());
    let mut best_observed = f64::NEG_INFINITY;
    let mut best_true = f64::NEG_INFINITY;
    for p in &init_design {
        let (u, f_true) = observe(obj, p, &mut noise_rng);
        if !u.is_finite() {
            return Err(Error::ObjectiveFailure(format!(
                "non-finite observation {u} during the initial design"
            )));
        }
        data.push(p.clone(), u)?;
        best_observed = best_observed.max(u);
        best_true = best_true.max(f_true);
    }
    let init_best_observed = best_observed;
    let init_best_true = best_true;

    let mut kernel = cfg.kernel;
    let mut model = GpModel::fit(data.clone(), kernel)?;

    let variant = match mode {
        PoolMode::FullSpace => BetaVariant::GpUcb,
        _ if cfg.split.low_dim() == 0 => BetaVariant::DegenD0,
        _ => BetaVariant::MsUcb,
    };
    let schedule = BetaSchedule::new(
        variant,
        cfg.delta,
        cfg.a_const,
        cfg.b_const,
        cfg.split.big_dim(),
        cfg.split.low_dim(),
    )?;

    let mut pool = match mode {
        PoolMode::FullSpace => None,
        _ => {
            let p = SubspacePool::new(cfg.split.clone(), cfg.n0, cfg.alpha, cfg.seed)?;
            Some(match cfg.pool_cap {
                Some(cap) => p.with_capacity(cap),
                None => p,
            })
        }
    };

    let mut rows = Vec::with_capacity(cfg.horizon);
    let mut cum_regret = 0.0;

    for t in 1..=cfg.horizon {
        let started = Instant::now();
        let beta_t = schedule.beta(t);

        let proposal = match (&mode, pool.as_mut()) {
            (PoolMode::FullSpace, _) => {
                let budget = cfg
                    .budget
                    .unwrap_or_else(|| InnerOptBudget::default_for(obj.dim(), 1));
                maximize_full_space(&model, beta_t, obj.dim(), &budget, &mut inner_rng)?
            }
            (PoolMode::Accumulate, Some(pool)) => {
                pool.grow(t)?;
                events.push(Event::PoolGrown {
                    t,
                    pool_size: pool.len(),
                });
                let budget = cfg.budget.unwrap_or_else(|| {
                    InnerOptBudget::default_for(cfg.split.low_dim(), pool.len())
                });
                argmax_over_pool(&model, beta_t, &cfg.split, pool, &budget, &mut inner_rng)?
            }
            (PoolMode::Fresh, Some(pool)) => {
                pool.replace_with_fresh(t)?;
                events.push(Event::PoolGrown { t, pool_size: 1 });
                let budget = cfg
                    .budget
                    .unwrap_or_else(|| InnerOptBudget::default_for(cfg.split.low_dim(), 1));
                argmax_over_pool(&model, beta_t, &cfg.split, pool, &budget, &mut inner_rng)?
            }
            _ => unreachable!("pool constructed for pooled modes"),
        };
        events.push(Event::Proposed {
            t,
            acq_value: proposal.value,
        });

        let (u, f_true) = observe(obj, &proposal.x, &mut noise_rng);
        if !u.is_finite() || !f_true.is_finite() {
            events.push(Event::Aborted {
                t,
                reason: format!("non-finite observation {u}"),
            });
            return Ok(RunRecord {
                rows,
                events,
                init_design,
                init_best_observed,
                init_best_true,
                incomplete: true,
            });
        }
        events.push(Event::Observed { t, value: u });
        data.push(proposal.x.clone(), u)?;
        best_observed = best_observed.max(u);
        best_true = best_true.max(f_true);

        let (regret, cum) = match obj.known_optimum() {
            Some(opt) => {
                let r = opt - f_true;
                cum_regret += r;
                (Some(r), Some(cum_regret))
            }
            None => (None, None),
        };

        if cfg.refit_every > 0 && t % cfg.refit_every == 0 {
            kernel = fit_hyperparameters(&data, &kernel, cfg.refit_budget)?;
            events.push(Event::Refit {
                t,
                lengthscale: kernel.lengthscale,
            });
        }
        model = GpModel::fit(data.clone(), kernel)?;

        rows.push(IterationRow {
            t,
            x: proposal.x,
            observed: u,
            f_true,
            best_observed,
            best_true,
            regret,
            cum_regret: cum,
            pool_size: pool.as_ref().map_or(0, |p| p.len()),
            acq_evals: proposal.acq_evals,
            elapsed_s: started.elapsed().as_secs_f64(),
        });
    }

    Ok(RunRecord {
        rows,
        events,
        init_design,
        init_best_observed,
        init_best_true,
        incomplete: false,
    })
}

/// The subspace-pool optimizer: grow the anchor pool each iteration,
/// maximize UCB over every subspace, observe, and refit.
pub fn run_msucb(obj: &Objective, cfg: &MsUcbConfig) -> Result<RunRecord> {
    run_gp_loop(obj, cfg, PoolMode::Accumulate)
}

/// Full-space GP-UCB baseline: same GP and schedule family but the
/// acquisition is maximized over the whole `[-1,1]^D` box.
pub fn run_gpucb(obj: &Objective, cfg: &MsUcbConfig) -> Result<RunRecord> {
    run_gp_loop(obj, cfg, PoolMode::FullSpace)
}

/// Line baseline: one fresh random one-dimensional subspace per iteration,
/// no pool accumulation. Forces `d = 1`.
pub fn run_line_baseline(obj: &Objective, cfg: &MsUcbConfig) -> Result<RunRecord> {
    let mut cfg = cfg.clone();
    cfg.split = SplitSpec::new(cfg.split.big_dim(), 1)?;
    run_gp_loop(obj, &cfg, PoolMode::Fresh)
}

/// Random search consuming the same number of objective evaluations as a
/// GP run with the same config (initial design plus one per iteration).
pub fn run_random_search(obj: &Objective, cfg: &MsUcbConfig) -> Result<RunRecord> {
    cfg.validate(obj)?;
    let mut noise_rng = stream_rng(cfg.seed, STREAM_NOISE);
    let mut search_rng = stream_rng(cfg.seed, STREAM_INNER);

    let init_design = match &cfg.init_design {
        Some(d) => d.clone(),
        None => initial_design(obj.dim(), cfg.init_points, cfg.seed),
    };
    let mut events = vec![Event::InitDesign {
        points: init_design.len(),
    }];
    let mut best_observed = f64::NEG_INFINITY;
    let mut best_true = f64::NEG_INFINITY;
    for p in &init_design {
        let (u, f_true) = observe(obj, p, &mut noise_rng);
        if !u.is_finite() {
            return Err(Error::ObjectiveFailure(format!(
                "non-finite observation {u} during the initial design"
            )));
        }
        best_observed = best_observed.max(u);
        best_true = best_true.max(f_true);
    }
    let init_best_observed = best_observed;
    let init_best_true = best_true;

    let mut rows = Vec::with_capacity(cfg.horizon);
    let mut cum_regret = 0.0;
    for t in 1..=cfg.horizon {
        let started = Instant::now();
        let x: Vec<f64> = (0..obj.dim())
            .map(|_| search_rng.gen_range(-1.0..=1.0))
            .collect();
        let (u, f_true) = observe(obj, &x, &mut noise_rng);
        if !u.is_finite() || !f_true.is_finite() {
            events.push(Event::Aborted {
                t,
                reason: format!("non-finite observation {u}"),
            });
            return Ok(RunRecord {
                rows,
                events,
                init_design,
                init_best_observed,
                init_best_true,
                incomplete: true,
            });
        }
        events.push(Event::Observed { t, value: u });
        best_observed = best_observed.max(u);
        best_true = best_true.max(f_true);
        let (regret, cum) = match obj.known_optimum() {
            Some(opt) => {
                let r = opt - f_true;
                cum_regret += r;
                (Some(r), Some(cum_regret))
            }
            None => (None, None),
        };
        rows.push(IterationRow {
            t,
            x,
            observed: u,
            f_true,
            best_observed,
            best_true,
            regret,
            cum_regret: cum,
            pool_size: 0,
            acq_evals: 0,
            elapsed_s: started.elapsed().as_secs_f64(),
        });
    }
    Ok(RunRecord {
        rows,
        events,
        init_design,
        init_best_observed,
        init_best_true,
        incomplete: false,
    })
}
