//! UCB acquisition values, the iteration-dependent beta schedules, and
//! budgeted maximization of the acquisition over a pool of subspaces.
//!
//! The inner optimizer is a multi-start box-constrained quasi-Newton ascent
//! with central-difference gradients, so it stays kernel-agnostic. Every
//! acquisition evaluation is counted against an explicit budget and the
//! count is reported back for cost accounting.

use crate::error::{Error, Result};
use crate::gp::GpModel;
use crate::subspace::{Anchor, SplitSpec, SubspacePool};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaVariant {
    /// Subspace schedule: depends on `D` only through `sqrt(log D)`.
    MsUcb,
    /// Full-dimensional analogue used by the GP-UCB baseline.
    GpUcb,
    /// The `d = 0` modification: pool points are plain discrete arms.
    DegenD0,
}

/// Exploration-weight schedule `beta_t`.
#[derive(Debug, Clone, Copy)]
pub struct BetaSchedule {
    pub variant: BetaVariant,
    pub delta: f64,
    pub a_const: f64,
    pub b_const: f64,
    pub big_dim: usize,
    pub low_dim: usize,
}

impl BetaSchedule {
    pub fn new(
        variant: BetaVariant,
        delta: f64,
        a_const: f64,
        b_const: f64,
        big_dim: usize,
        low_dim: usize,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidConfig("delta must lie in (0, 1)".into()));
        }
        if !(a_const > 0.0 && b_const > 0.0) {
            return Err(Error::InvalidConfig(
                "a_const and b_const must be > 0".into(),
            ));
        }
        if variant == BetaVariant::MsUcb && low_dim == 0 {
            return Err(Error::InvalidConfig(
                "MsUcb requires d >= 1; use DegenD0 for d = 0".into(),
            ));
        }
        let s = Self {
            variant,
            delta,
            a_const,
            b_const,
            big_dim,
            low_dim,
        };
        // The log arguments must be positive at t = 1 so that beta_1 is
        // well defined and the schedule starts positive.
        let b1 = s.beta(1);
        if !b1.is_finite() || b1 <= 0.0 {
            return Err(Error::InvalidConfig(
                "beta_1 is not positive and finite for these parameters".into(),
            ));
        }
        Ok(s)
    }

    /// Schedule matching the optimizer: `MsUcb` when `d >= 1`, `DegenD0`
    /// when `d = 0`.
    pub fn for_split(delta: f64, a_const: f64, b_const: f64, spec: &SplitSpec) -> Result<Self> {
        let variant = if spec.low_dim() == 0 {
            BetaVariant::DegenD0
        } else {
            BetaVariant::MsUcb
        };
        Self::new(
            variant,
            delta,
            a_const,
            b_const,
            spec.big_dim(),
            spec.low_dim(),
        )
    }

    pub fn beta(&self, t: usize) -> f64 {
        assert!(t >= 1, "beta is defined for t >= 1");
        let t2 = (t as f64) * (t as f64);
        let (d_big, delta, a, b) = (self.big_dim as f64, self.delta, self.a_const, self.b_const);
        match self.variant {
            BetaVariant::MsUcb => {
                let d = self.low_dim as f64;
                2.0 * (PI * PI * t2 / delta).ln()
                    + 2.0 * d * (2.0 * b * d * (6.0 * d_big * a / delta).ln().sqrt() * t2).ln()
            }
            BetaVariant::GpUcb => {
                2.0 * (PI * PI * t2 / (3.0 * delta)).ln()
                    + 2.0
                        * d_big
                        * (2.0 * b * d_big * (2.0 * d_big * a / delta).ln().sqrt() * t2).ln()
            }
            BetaVariant::DegenD0 => 4.0 * (PI * PI * t2 / (2.0 * delta)).ln(),
        }
    }
}

/// Evaluation budget for the inner acquisition maximization.
#[derive(Debug, Clone, Copy)]
pub struct InnerOptBudget {
    pub restarts_per_subspace: usize,
    pub max_evals_per_restart: usize,
    pub total_eval_cap: usize,
}

impl InnerOptBudget {
    pub fn new(
        restarts_per_subspace: usize,
        max_evals_per_restart: usize,
        total_eval_cap: usize,
    ) -> Result<Self> {
        if restarts_per_subspace == 0 || max_evals_per_restart == 0 || total_eval_cap == 0 {
            return Err(Error::InvalidConfig(
                "budget fields must be positive".into(),
            ));
        }
        if total_eval_cap < restarts_per_subspace {
            return Err(Error::InvalidConfig(
                "total_eval_cap must cover at least one eval per restart".into(),
            ));
        }
        Ok(Self {
            restarts_per_subspace,
            max_evals_per_restart,
            total_eval_cap,
        })
    }

    /// Default restart count tracks a `10 * d` total-starts budget divided
    /// across the pool, never below 2 per subspace.
    pub fn default_for(low_dim: usize, pool_size: usize) -> Self {
        let pool = pool_size.max(1);
        let restarts = (10 * low_dim.max(1)).div_ceil(pool).max(2);
        let max_evals = 30 * (2 * low_dim + 2);
        Self {
            restarts_per_subspace: restarts,
            max_evals_per_restart: max_evals,
            total_eval_cap: 5000,
        }
    }
}

/// `mu(x) + sqrt(beta) * sigma(x)`.
pub fn ucb(model: &GpModel, beta_t: f64, x: &[f64]) -> Result<f64> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN as well as non-positive
    if !(beta_t > 0.0) {
        return Err(Error::InvalidArgument("beta_t must be > 0".into()));
    }
    let (mean, std) = model.posterior(x)?;
    Ok(mean + beta_t.sqrt() * std)
}

/// Result of maximizing the acquisition within one subspace.
#[derive(Debug, Clone)]
pub struct SubspaceMax {
    pub y: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Pool-wide acquisition argmax.
#[derive(Debug, Clone)]
pub struct PoolArgmax {
    pub x: Vec<f64>,
    pub value: f64,
    pub anchor_index: usize,
    pub acq_evals: usize,
}

struct EvalBudget {
    used: usize,
    cap: usize,
}

impl EvalBudget {
    fn spend(&mut self) -> bool {
        if self.used >= self.cap {
            return false;
        }
        self.used += 1;
        true
    }
}

/// Multi-start projected quasi-Newton ascent of `objective` over
/// `[-1,1]^dim`. Tracks the best point over every evaluation made, so the
/// result dominates each probed start. Returns `None` if the budget was
/// exhausted before a single evaluation.
fn multistart_box_max<F: Fn(&[f64]) -> f64>(
    objective: F,
    dim: usize,
    restarts: usize,
    max_evals_per_restart: usize,
    global: &mut EvalBudget,
    rng: &mut ChaCha8Rng,
) -> Option<(Vec<f64>, f64)> {
    let mut best: Option<(Vec<f64>, f64)> = None;

    for _ in 0..restarts {
        if global.used >= global.cap {
            break;
        }
        let y0: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let mut restart_left = max_evals_per_restart;
        let probe = |y: &[f64],
                     best: &mut Option<(Vec<f64>, f64)>,
                     restart_left: &mut usize,
                     global: &mut EvalBudget|
         -> Option<f64> {
            if *restart_left == 0 || !global.spend() {
                return None;
            }
            *restart_left -= 1;
            let v = objective(y);
            if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
                *best = Some((y.to_vec(), v));
            }
            Some(v)
        };

        let Some(mut f_cur) = probe(&y0, &mut best, &mut restart_left, global) else {
            break;
        };
        let mut y = y0;
        let mut inv_hess = DMatrix::<f64>::identity(dim, dim);
        let mut prev: Option<(DVector<f64>, DVector<f64>)> = None; // (point, grad)
        let grad_step = 1e-6;

        loop {
            // Central differences with boundary-aware probe points.
            let mut grad = DVector::zeros(dim);
            let mut exhausted = false;
            for i in 0..dim {
                let hi = (y[i] + grad_step).min(1.0);
                let lo = (y[i] - grad_step).max(-1.0);
                let mut yp = y.clone();
                yp[i] = hi;
                let mut ym = y.clone();
                ym[i] = lo;
                let (Some(fp), Some(fm)) = (
                    probe(&yp, &mut best, &mut restart_left, global),
                    probe(&ym, &mut best, &mut restart_left, global),
                ) else {
                    exhausted = true;
                    break;
                };
                grad[i] = (fp - fm) / (hi - lo);
            }
            if exhausted {
                break;
            }
            // Drop components pushing against an active bound.
            for i in 0..dim {
                if (y[i] >= 1.0 && grad[i] > 0.0) || (y[i] <= -1.0 && grad[i] < 0.0) {
                    grad[i] = 0.0;
                }
            }
            if grad.norm() < 1e-10 {
                break;
            }
            // Damped BFGS update on the negated objective's gradients.
            if let Some((py, pg)) = prev.take() {
                let s = DVector::from_iterator(dim, y.iter().zip(py.iter()).map(|(a, b)| a - b));
                let yv = &pg - &grad;
                let sy = s.dot(&yv);
                if sy > 1e-12 {
                    let rho = 1.0 / sy;
                    let i_mat = DMatrix::<f64>::identity(dim, dim);
                    let left = &i_mat - rho * &s * yv.transpose();
                    let right = &i_mat - rho * &yv * s.transpose();
                    inv_hess = &left * inv_hess * &right + rho * &s * s.transpose();
                }
            }
            let mut dir = &inv_hess * &grad;
            if dir.dot(&grad) <= 0.0 {
                inv_hess = DMatrix::identity(dim, dim);
                dir = grad.clone();
            }
            prev = Some((DVector::from_vec(y.clone()), grad.clone()));

            // Backtracking line search with box projection.
            let mut step = 1.0;
            let mut advanced = false;
            for _ in 0..8 {
                let cand: Vec<f64> = y
                    .iter()
                    .zip(dir.iter())
                    .map(|(yi, di)| (yi + step * di).clamp(-1.0, 1.0))
                    .collect();
                if cand == y {
                    step *= 0.5;
                    continue;
                }
                let gain: f64 = cand
                    .iter()
                    .zip(y.iter())
                    .zip(grad.iter())
                    .map(|((c, yi), g)| (c - yi) * g)
                    .sum();
                match probe(&cand, &mut best, &mut restart_left, global) {
                    Some(fc) if fc > f_cur + 1e-4 * gain.max(0.0) => {
                        y = cand;
                        f_cur = fc;
                        advanced = true;
                        break;
                    }
                    Some(_) => step *= 0.5,
                    None => break,
                }
            }
            if !advanced {
                break;
            }
        }
    }

    best
}

/// Maximize the acquisition on `S(A, z)` over `y` in `[-1,1]^d`.
pub fn maximize_on_subspace(
    model: &GpModel,
    beta_t: f64,
    spec: &SplitSpec,
    anchor: &Anchor,
    budget: &InnerOptBudget,
    rng: &mut ChaCha8Rng,
) -> Result<SubspaceMax> {
    if spec.low_dim() == 0 {
        return Err(Error::InvalidArgument(
            "maximize_on_subspace requires d >= 1".into(),
        ));
    }
    let mut global = EvalBudget {
        used: 0,
        cap: budget.total_eval_cap,
    };
    let out = multistart_box_max(
        |y| {
            let x = spec.embed(y, &anchor.z).expect("y, z in box");
            ucb(model, beta_t, &x).expect("dims consistent")
        },
        spec.low_dim(),
        budget.restarts_per_subspace,
        budget.max_evals_per_restart,
        &mut global,
        rng,
    );
    let (y, value) = out.ok_or_else(|| {
        Error::InvalidState("inner-optimizer budget exhausted before any evaluation".into())
    })?;
    Ok(SubspaceMax {
        y,
        value,
        evals: global.used,
    })
}

/// Maximize the acquisition over the whole `[-1,1]^D` box (GP-UCB
/// baseline path; no subspace restriction).
pub fn maximize_full_space(
    model: &GpModel,
    beta_t: f64,
    dim: usize,
    budget: &InnerOptBudget,
    rng: &mut ChaCha8Rng,
) -> Result<PoolArgmax> {
    let mut global = EvalBudget {
        used: 0,
        cap: budget.total_eval_cap,
    };
    let out = multistart_box_max(
        |x| ucb(model, beta_t, x).expect("dims consistent"),
        dim,
        budget.restarts_per_subspace,
        budget.max_evals_per_restart,
        &mut global,
        rng,
    );
    let (x, value) = out.ok_or_else(|| {
        Error::InvalidState("inner-optimizer budget exhausted before any evaluation".into())
    })?;
    Ok(PoolArgmax {
        x,
        value,
        anchor_index: 0,
        acq_evals: global.used,
    })
}

/// Maximize the acquisition separately on each subspace in the pool and
/// return the overall maximizer. For `d = 0` each anchor is a single point
/// and the argmax is direct enumeration. Exact value ties break toward the
/// lowest anchor index.
pub fn argmax_over_pool(
    model: &GpModel,
    beta_t: f64,
    spec: &SplitSpec,
    pool: &SubspacePool,
    budget: &InnerOptBudget,
    rng: &mut ChaCha8Rng,
) -> Result<PoolArgmax> {
    if pool.is_empty() {
        return Err(Error::InvalidState("anchor pool is empty".into()));
    }
    let mut global = EvalBudget {
        used: 0,
        cap: budget.total_eval_cap,
    };
    let mut best: Option<PoolArgmax> = None;

    for (idx, anchor) in pool.anchors().iter().enumerate() {
        if global.used >= global.cap {
            break;
        }
        if spec.low_dim() == 0 {
            if !global.spend() {
                break;
            }
            let x = spec.embed(&[], &anchor.z)?;
            let value = ucb(model, beta_t, &x)?;
            if best.as_ref().is_none_or(|b| value > b.value) {
                best = Some(PoolArgmax {
                    x,
                    value,
                    anchor_index: idx,
                    acq_evals: 0,
                });
            }
        } else {
            let out = multistart_box_max(
                |y| {
                    let x = spec.embed(y, &anchor.z).expect("y, z in box");
                    ucb(model, beta_t, &x).expect("dims consistent")
                },
                spec.low_dim(),
                budget.restarts_per_subspace,
                budget.max_evals_per_restart,
                &mut global,
                rng,
            );
            if let Some((y, value)) = out {
                if best.as_ref().is_none_or(|b| value > b.value) {
                    best = Some(PoolArgmax {
                        x: spec.embed(&y, &anchor.z)?,
                        value,
                        anchor_index: idx,
                        acq_evals: 0,
                    });
                }
            }
        }
    }

    let mut out = best.ok_or_else(|| {
        Error::InvalidState("budget exhausted before evaluating any anchor".into())
    })?;
    out.acq_evals = global.used;
    Ok(out)
}
