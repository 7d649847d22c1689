//! Gaussian-process regression: kernels, Cholesky-factorized posterior
//! predictive mean/variance, and marginal-likelihood hyperparameter fitting.
//!
//! The prior mean is zero; observed values are centered by their empirical
//! mean before fitting and the offset is added back at prediction.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Matern52,
    SquaredExponential,
}

/// Isotropic kernel with observation-noise variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    pub family: KernelFamily,
    pub lengthscale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl KernelConfig {
    pub fn new(
        family: KernelFamily,
        lengthscale: f64,
        signal_variance: f64,
        noise_variance: f64,
    ) -> Result<Self> {
        let cfg = Self {
            family,
            lengthscale,
            signal_variance,
            noise_variance,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN as well as non-positive
        if !(self.lengthscale > 0.0) {
            return Err(Error::InvalidConfig("lengthscale must be > 0".into()));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN as well as non-positive
        if !(self.signal_variance > 0.0) {
            return Err(Error::InvalidConfig("signal_variance must be > 0".into()));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
        if !(self.noise_variance >= 0.0) {
            return Err(Error::InvalidConfig("noise_variance must be >= 0".into()));
        }
        Ok(())
    }
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            family: KernelFamily::Matern52,
            lengthscale: 0.5,
            signal_variance: 1.0,
            noise_variance: 1e-4,
        }
    }
}

/// Evaluate `k(x, x2)`.
pub fn kernel_eval(config: &KernelConfig, x: &[f64], x2: &[f64]) -> Result<f64> {
    if x.len() != x2.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: x2.len(),
        });
    }
    let r2: f64 = x.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(kernel_from_r2(config, r2))
}

fn kernel_from_r2(config: &KernelConfig, r2: f64) -> f64 {
    let ell = config.lengthscale;
    match config.family {
        KernelFamily::SquaredExponential => {
            config.signal_variance * (-r2 / (2.0 * ell * ell)).exp()
        }
        KernelFamily::Matern52 => {
            let s = (5.0 * r2).sqrt() / ell;
            config.signal_variance * (1.0 + s + s * s / 3.0) * (-s).exp()
        }
    }
}

/// Observations on `[-1,1]^D`.
#[derive(Debug, Clone)]
pub struct Dataset {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    dim: usize,
}

impl Dataset {
    pub fn new(dim: usize) -> Self {
        Self {
            points: Vec::new(),
            values: Vec::new(),
            dim,
        }
    }

    pub fn push(&mut self, point: Vec<f64>, value: f64) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        for &c in &point {
            if !(-1.0..=1.0).contains(&c) {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {c} outside [-1, 1]"
                )));
            }
        }
        self.points.push(point);
        self.values.push(value);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Fitted GP with cached Cholesky factor of `K + sigma^2 I` and the solved
/// vector `alpha = (K + sigma^2 I)^{-1} (u - mean(u))`.
#[derive(Debug, Clone)]
pub struct GpModel {
    config: KernelConfig,
    data: Dataset,
    chol_l: DMatrix<f64>,
    alpha: DVector<f64>,
    offset: f64,
    jitter: f64,
}

impl GpModel {
    /// Fit in O(t^3); jitter starts at `1e-10 * signal_variance` and
    /// escalates tenfold up to `1e-4 * signal_variance` before failing.
    pub fn fit(data: Dataset, config: KernelConfig) -> Result<Self> {
        config.validate()?;
        if data.is_empty() {
            return Err(Error::InvalidArgument("dataset is empty".into()));
        }
        let n = data.len();
        let offset = data.values.iter().sum::<f64>() / n as f64;
        let centered = DVector::from_iterator(n, data.values.iter().map(|v| v - offset));

        let mut gram = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let k = kernel_eval(&config, &data.points[i], &data.points[j])?;
                gram[(i, j)] = k;
                gram[(j, i)] = k;
            }
        }
        for i in 0..n {
            gram[(i, i)] += config.noise_variance;
        }

        let mut jitter = 1e-10 * config.signal_variance;
        let max_jitter = 1e-4 * config.signal_variance;
        loop {
            let mut m = gram.clone();
            for i in 0..n {
                m[(i, i)] += jitter;
            }
            if let Some(chol) = m.cholesky() {
                let alpha = chol.solve(&centered);
                return Ok(Self {
                    config,
                    data,
                    chol_l: chol.unpack(),
                    alpha,
                    offset,
                    jitter,
                });
            }
            jitter *= 10.0;
            if jitter > max_jitter {
                return Err(Error::Factorization);
            }
        }
    }

    pub fn config(&self) -> &KernelConfig {
        &self.config
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Lower-triangular Cholesky factor of `K + sigma^2 I` (plus jitter).
    pub fn chol_l(&self) -> &DMatrix<f64> {
        &self.chol_l
    }

    /// Predictive `(mean, std)` at `x`; variance is clamped at zero before
    /// the square root.
    pub fn posterior(&self, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.data.dim {
            return Err(Error::DimensionMismatch {
                expected: self.data.dim,
                got: x.len(),
            });
        }
        let n = self.data.len();
        let k = DVector::from_iterator(
            n,
            self.data
                .points
                .iter()
                .map(|p| kernel_eval(&self.config, x, p).expect("dims checked")),
        );
        let mean = k.dot(&self.alpha) + self.offset;
        let v = self
            .chol_l
            .solve_lower_triangular(&k)
            .expect("factor is nonsingular");
        let var = (self.config.signal_variance - v.norm_squared()).max(0.0);
        Ok((mean, var.sqrt()))
    }

    /// Log marginal likelihood of the (centered) observations.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.data.len();
        let centered = DVector::from_iterator(n, self.data.values.iter().map(|v| v - self.offset));
        let log_det: f64 = (0..n).map(|i| self.chol_l[(i, i)].ln()).sum();
        -0.5 * centered.dot(&self.alpha)
            - log_det
            - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln()
    }
}

const LOG_BOUNDS: [(f64, f64); 3] = [
    (1e-3, 1e3), // lengthscale
    (1e-8, 1e8), // signal variance
    (1e-8, 1.0), // noise variance
];

/// Multi-start coordinate search on log-parameters, maximizing the log
/// marginal likelihood. `budget` counts likelihood evaluations (each a fit);
/// zero budget returns `init` unchanged. The result is never worse than
/// `init`.
pub fn fit_hyperparameters(
    data: &Dataset,
    init: &KernelConfig,
    budget: usize,
) -> Result<KernelConfig> {
    init.validate()?;
    if data.len() < 2 {
        return Err(Error::InvalidArgument(
            "hyperparameter fitting needs >= 2 points".into(),
        ));
    }
    if budget == 0 {
        return Ok(*init);
    }

    let mut evals_left = budget;
    let score = |theta: &[f64; 3], evals_left: &mut usize| -> f64 {
        if *evals_left == 0 {
            return f64::NEG_INFINITY;
        }
        *evals_left -= 1;
        let cfg = config_from_log(init.family, theta);
        match GpModel::fit(data.clone(), cfg) {
            Ok(m) => m.log_marginal_likelihood(),
            Err(_) => f64::NEG_INFINITY,
        }
    };

    let init_theta = log_params(init);
    let mut best_theta = init_theta;
    let mut best_lml = score(&init_theta, &mut evals_left);
    // The exact init config is the fallback: if nothing scores above it
    // (including the case where its own fit failed), return it verbatim.
    let mut improved = false;

    let mut rng = ChaCha8Rng::seed_from_u64(0x9f_17);
    let perturb = Uniform::new(-1.0f64, 1.0);
    let n_starts = 3usize;

    for s in 0..n_starts {
        if evals_left == 0 {
            break;
        }
        let mut theta = if s == 0 {
            init_theta
        } else {
            let mut t = init_theta;
            for (i, v) in t.iter_mut().enumerate() {
                *v = clamp_log(i, *v + perturb.sample(&mut rng));
            }
            t
        };
        let mut cur = if s == 0 {
            best_lml
        } else {
            score(&theta, &mut evals_left)
        };
        let mut step = 0.6f64;
        while step > 0.02 && evals_left > 0 {
            let mut moved = false;
            for i in 0..3 {
                for dir in [1.0, -1.0] {
                    if evals_left == 0 {
                        break;
                    }
                    let mut cand = theta;
                    cand[i] = clamp_log(i, cand[i] + dir * step);
                    if cand[i] == theta[i] {
                        continue;
                    }
                    let val = score(&cand, &mut evals_left);
                    if val > cur {
                        theta = cand;
                        cur = val;
                        moved = true;
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        if cur > best_lml {
            best_lml = cur;
            best_theta = theta;
            improved = true;
        }
    }

    if improved {
        Ok(config_from_log(init.family, &best_theta))
    } else {
        Ok(*init)
    }
}

fn log_params(cfg: &KernelConfig) -> [f64; 3] {
    [
        cfg.lengthscale.ln(),
        cfg.signal_variance.ln(),
        cfg.noise_variance.max(LOG_BOUNDS[2].0).ln(),
    ]
}

fn clamp_log(i: usize, v: f64) -> f64 {
    v.clamp(LOG_BOUNDS[i].0.ln(), LOG_BOUNDS[i].1.ln())
}

fn config_from_log(family: KernelFamily, theta: &[f64; 3]) -> KernelConfig {
    KernelConfig {
        family,
        lengthscale: theta[0].exp(),
        signal_variance: theta[1].exp(),
        noise_variance: theta[2].exp(),
    }
}
