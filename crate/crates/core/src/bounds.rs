//! Closed-form regret-bound curves and the p-series utilities they rest
//! on, for descriptive comparison against empirical runs.
//!
//! Nothing here is a guarantee checker: the Lipschitz constants `a`, `b`
//! and the information-gain proxy are user inputs, so the curves are for
//! plotting next to measured regret, not for validating it.

use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

/// Closed-form upper bound on the partial sum `s_n = sum_{k<=n} k^{-p}`,
/// by the regime of `p`:
///
/// * `p > 1`: `1/(p-1) + 1` (the converged tail bound),
/// * `p = 1`: `1 + ln n`,
/// * `0 <= p < 1`: `1 + (n^{1-p} - 1)/(1-p)`,
/// * `p < 0`: `((n+1)^{1-p} - 1)/(1-p)`.
pub fn p_series_upper(p: f64, n: u64) -> f64 {
    assert!(n >= 1, "p_series_upper needs n >= 1");
    let nf = n as f64;
    if p > 1.0 {
        1.0 / (p - 1.0) + 1.0
    } else if p == 1.0 {
        1.0 + nf.ln()
    } else if p >= 0.0 {
        1.0 + (nf.powf(1.0 - p) - 1.0) / (1.0 - p)
    } else {
        ((nf + 1.0).powf(1.0 - p) - 1.0) / (1.0 - p)
    }
}

/// Exact partial sum by direct accumulation (test oracle, exported for
/// the validation suite).
pub fn p_series_exact(p: f64, n: u64) -> f64 {
    (1..=n).map(|k| (k as f64).powf(-p)).sum()
}

/// Maximum-information-gain proxy `T -> gamma_T`.
#[derive(Debug, Clone, Copy)]
pub enum GammaProxy {
    /// `(ln T)^(D+1)` — squared-exponential rate.
    SquaredExponential { dim: usize },
    /// `T^kappa ln T` with `kappa = D(D+1)/(2 nu + D(D+1))` — Matérn rate.
    Matern { dim: usize, nu: f64 },
    /// Any user-supplied nondecreasing curve.
    Custom(fn(usize) -> f64),
}

impl GammaProxy {
    pub fn value(&self, t: usize) -> f64 {
        let tf = t as f64;
        match *self {
            GammaProxy::SquaredExponential { dim } => tf.ln().powi(dim as i32 + 1),
            GammaProxy::Matern { dim, nu } => {
                let d = dim as f64;
                let kappa = d * (d + 1.0) / (2.0 * nu + d * (d + 1.0));
                tf.powf(kappa) * tf.ln()
            }
            GammaProxy::Custom(f) => f(t),
        }
    }
}

/// The alpha regimes of the explicit cumulative-regret bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaRegime {
    /// `alpha >= 2m`: constant additive term.
    Saturated,
    /// `m - 1 <= alpha < 2m`: `(1 + ln T)` additive term.
    Logarithmic,
    /// `0 <= alpha < m - 1`: polynomial `T^{1 - (alpha+1)/m}` additive term.
    Polynomial,
}

/// Exhaustive, mutually exclusive regime selection for pool exponent
/// `alpha` and decay dimension `m` (`D - d`, or `d_e` in the
/// effective-dimension variant).
pub fn alpha_regime(alpha: u32, m: usize) -> AlphaRegime {
    let (a, m) = (alpha as i64, m as i64);
    if a >= 2 * m {
        AlphaRegime::Saturated
    } else if a >= m - 1 {
        AlphaRegime::Logarithmic
    } else {
        AlphaRegime::Polynomial
    }
}

/// The §5-style cost-saving window on `alpha`: strictly below `2m - 1`.
/// Differs from the logarithmic-regime right edge (`2m`) by one; both
/// predicates are exposed deliberately.
pub fn in_cost_saving_window(alpha: u32, m: usize) -> bool {
    (alpha as i64) < 2 * (m as i64) - 1
}

/// Inputs of the bound calculator.
#[derive(Debug, Clone)]
pub struct BoundParams {
    pub big_dim: usize,
    pub low_dim: usize,
    pub n0: usize,
    pub alpha: u32,
    pub delta: f64,
    pub a_const: f64,
    pub b_const: f64,
    pub sigma2: f64,
    pub gamma_proxy: GammaProxy,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        if self.low_dim >= self.big_dim {
            return Err(Error::InvalidConfig("need 0 <= d < D".into()));
        }
        if self.n0 == 0 {
            return Err(Error::InvalidConfig("n0 must be >= 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig("delta must lie in (0, 1)".into()));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN as well as non-positive
        if !(self.a_const > 0.0 && self.b_const > 0.0) {
            return Err(Error::InvalidConfig("a_const, b_const must be > 0".into()));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN as well as non-positive
        if !(self.sigma2 > 0.0) {
            return Err(Error::InvalidConfig("sigma2 must be > 0".into()));
        }
        Ok(())
    }

    /// `C1 = 8 / ln(1 + sigma^2)`.
    pub fn c1(&self) -> f64 {
        8.0 / (1.0 + self.sigma2).ln()
    }

    /// `v0 = b sqrt(ln(2Da/delta)) ((D-d+1)!)^{1/(D-d)}`, via log-gamma so
    /// large `D - d` cannot overflow.
    pub fn v0(&self) -> f64 {
        let m = (self.big_dim - self.low_dim) as f64;
        self.b_const
            * (2.0 * self.big_dim as f64 * self.a_const / self.delta)
                .ln()
                .sqrt()
            * (ln_gamma(m + 2.0) / m).exp()
    }

    /// Effective-dimension analogue `v_d` with `(d_e + 1)!` decay.
    pub fn v_effective(&self, d_e: usize) -> f64 {
        let m = d_e as f64;
        self.b_const
            * (2.0 * self.big_dim as f64 * self.a_const / self.delta)
                .ln()
                .sqrt()
            * (ln_gamma(m + 2.0) / m).exp()
    }

    /// The exploration weight entering the bound: the subspace schedule
    /// for `d >= 1`, the degenerate `d = 0` schedule otherwise.
    fn beta(&self, t: usize) -> f64 {
        let t2 = (t * t) as f64;
        if self.low_dim == 0 {
            4.0 * (PI * PI * t2 / (2.0 * self.delta)).ln()
        } else {
            let d = self.low_dim as f64;
            let big = self.big_dim as f64;
            2.0 * (PI * PI * t2 / self.delta).ln()
                + 2.0
                    * d
                    * (2.0
                        * self.b_const
                        * d
                        * (6.0 * big * self.a_const / self.delta).ln().sqrt()
                        * t2)
                        .ln()
        }
    }
}

/// `B(1..=horizon)` for one parameter set.
#[derive(Debug, Clone)]
pub struct BoundCurve {
    pub regime: AlphaRegime,
    /// `values[t-1] = B(t)`.
    pub values: Vec<f64>,
}

impl BoundCurve {
    pub fn value(&self, t: usize) -> f64 {
        self.values[t - 1]
    }
}

fn bound_curve_with(params: &BoundParams, m: usize, v: f64, horizon: usize) -> Result<BoundCurve> {
    params.validate()?;
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    let regime = alpha_regime(params.alpha, m);
    let mf = m as f64;
    let alpha = params.alpha as f64;
    let c1 = params.c1();
    let scale = ((6.0 / params.delta).ln() / params.n0 as f64).powf(1.0 / mf);
    let values = (1..=horizon)
        .map(|t| {
            let tf = t as f64;
            let additive = match regime {
                AlphaRegime::Saturated => 2.0 * v * scale,
                AlphaRegime::Logarithmic => 2.0 * v * scale * (1.0 + tf.ln()),
                AlphaRegime::Polynomial => {
                    2.0 * v * (mf / (mf - alpha - 1.0)) * scale * tf.powf(1.0 - (alpha + 1.0) / mf)
                }
            };
            (params.beta(t) * c1 * tf * params.gamma_proxy.value(t)).sqrt()
                + additive
                + PI * PI / 6.0
        })
        .collect();
    Ok(BoundCurve { regime, values })
}

/// The explicit cumulative-regret bound `B(T)`, per alpha regime:
/// `sqrt(beta_T C1 T gamma_T)` plus the regime additive term plus
/// `pi^2/6`.
pub fn regret_bound_curve(params: &BoundParams, horizon: usize) -> Result<BoundCurve> {
    bound_curve_with(
        params,
        params.big_dim - params.low_dim,
        params.v0(),
        horizon,
    )
}

/// Variant for objectives with a `d_e`-dimensional effective subspace:
/// the anchor-decay dimension `D - d` is replaced by `d_e` throughout.
pub fn effective_dim_bound_curve(
    params: &BoundParams,
    d_e: usize,
    horizon: usize,
) -> Result<BoundCurve> {
    if d_e == 0 || d_e > params.big_dim {
        return Err(Error::InvalidArgument("need 1 <= d_e <= D".into()));
    }
    bound_curve_with(params, d_e, params.v_effective(d_e), horizon)
}

/// Acquisition-call cost model held in log10 so huge `zeta^{-D}` terms
/// stay representable.
#[derive(Debug, Clone, Copy)]
pub struct AcqCostModel {
    pub msucb_log10: f64,
    pub fullspace_log10: f64,
}

impl AcqCostModel {
    pub fn msucb_calls(&self) -> f64 {
        10f64.powf(self.msucb_log10)
    }

    pub fn fullspace_calls(&self) -> f64 {
        10f64.powf(self.fullspace_log10)
    }

    pub fn msucb_is_cheaper(&self) -> bool {
        self.msucb_log10 < self.fullspace_log10
    }
}

/// Total acquisition calls to accuracy `zeta_acc` over horizon `T`:
/// `N0 (T+1)^{alpha+1}/(alpha+1) * zeta^{-d}` for the pooled optimizer vs
/// `zeta^{-D}` for full-space maximization.
pub fn acq_cost_model(
    big_dim: usize,
    low_dim: usize,
    alpha: u32,
    n0: usize,
    horizon: usize,
    zeta_acc: f64,
) -> Result<AcqCostModel> {
    if !(zeta_acc > 0.0 && zeta_acc < 1.0) {
        return Err(Error::InvalidArgument("zeta_acc must lie in (0, 1)".into()));
    }
    if low_dim > big_dim || n0 == 0 || horizon == 0 {
        return Err(Error::InvalidArgument(
            "need d <= D, n0 >= 1, horizon >= 1".into(),
        ));
    }
    let ln10 = std::f64::consts::LN_10;
    let log_zeta = zeta_acc.log10();
    let pool = (n0 as f64).ln() / ln10 + (alpha as f64 + 1.0) * ((horizon + 1) as f64).log10()
        - (alpha as f64 + 1.0).log10();
    Ok(AcqCostModel {
        msucb_log10: pool - low_dim as f64 * log_zeta,
        fullspace_log10: -(big_dim as f64) * log_zeta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(alpha: u32) -> BoundParams {
        BoundParams {
            big_dim: 20,
            low_dim: 5,
            n0: 1,
            alpha,
            delta: 0.1,
            a_const: 1.0,
            b_const: 1.0,
            sigma2: 0.01,
            gamma_proxy: GammaProxy::Matern { dim: 20, nu: 2.5 },
        }
    }

    #[test]
    fn p_series_examples() {
        assert_relative_eq!(p_series_upper(2.0, 1000), 2.0);
        assert!(p_series_exact(2.0, 100_000) < PI * PI / 6.0 + 1e-9);
        assert!(p_series_exact(2.0, 100_000) < 2.0);

        // n = round(e^2) = 7 with p = 1: bound 1 + ln 7 < 3, exact below.
        let n = std::f64::consts::E.powi(2).round() as u64;
        assert_eq!(n, 7);
        assert!(p_series_exact(1.0, n) < p_series_upper(1.0, n));
        assert!(p_series_upper(1.0, n) < 3.0 + 1e-12);

        assert_relative_eq!(p_series_upper(0.5, 100), 19.0);
        let exact = p_series_exact(0.5, 100);
        assert!(exact < 19.0 && exact > 18.5);
    }

    #[test]
    fn p_series_dominates_exact_sums() {
        // 10^4 random (p, n) pairs per regime; strict domination needs
        // n >= 2 since the p = 1 and 0 <= p < 1 bounds are tight at n = 1.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let regimes: [(f64, f64); 4] = [
            (1.0 + 1e-6, 6.0),
            (1.0, 1.0),
            (0.0, 1.0 - 1e-9),
            (-4.0, -1e-9),
        ];
        for (lo, hi) in regimes {
            for _ in 0..10_000 {
                let p = if lo == hi { lo } else { rng.gen_range(lo..hi) };
                let n = rng.gen_range(2u64..500);
                let exact = p_series_exact(p, n);
                let bound = p_series_upper(p, n);
                assert!(exact < bound, "p={p} n={n}: {exact} !< {bound}");
            }
        }
    }

    #[test]
    fn p_series_lower_bound_in_negative_regime() {
        // The same proposition also gives the lower bound used by the
        // pool-size argument: 1 + (n^{1-p}-1)/(1-p) < s_n for p < 0.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let p = rng.gen_range(-4.0..-1e-9);
            let n = rng.gen_range(2u64..500);
            let lower = 1.0 + ((n as f64).powf(1.0 - p) - 1.0) / (1.0 - p);
            assert!(lower < p_series_exact(p, n), "p={p} n={n}");
        }
    }

    #[test]
    fn regime_selection_exhaustive_and_boundary() {
        let m = 15;
        for alpha in 0..=40u32 {
            let r = alpha_regime(alpha, m);
            if alpha >= 30 {
                assert_eq!(r, AlphaRegime::Saturated);
            } else if alpha >= 14 {
                assert_eq!(r, AlphaRegime::Logarithmic);
            } else {
                assert_eq!(r, AlphaRegime::Polynomial);
            }
        }
        // m - 1 lands in the logarithmic (middle) regime.
        assert_eq!(alpha_regime(14, 15), AlphaRegime::Logarithmic);
    }

    #[test]
    fn saturated_regime_additive_term_is_constant() {
        let p = params(2 * 15);
        let curve = regret_bound_curve(&p, 200).unwrap();
        assert_eq!(curve.regime, AlphaRegime::Saturated);
        let c1 = p.c1();
        // Strip the sqrt term and pi^2/6: the remainder must not vary.
        let additive: Vec<f64> = (1..=200)
            .map(|t| {
                curve.value(t)
                    - (p.beta(t) * c1 * t as f64 * p.gamma_proxy.value(t)).sqrt()
                    - PI * PI / 6.0
            })
            .collect();
        for w in additive.windows(2) {
            assert_relative_eq!(w[0], w[1], epsilon = 1e-8);
        }
        assert_relative_eq!(
            additive[0],
            2.0 * p.v0() * (6.0f64 / 0.1).ln().powf(1.0 / 15.0),
            max_relative = 1e-12
        );
    }

    #[test]
    fn bound_curves_nondecreasing() {
        for alpha in [0, 14, 30] {
            for proxy in [
                GammaProxy::SquaredExponential { dim: 20 },
                GammaProxy::Matern { dim: 20, nu: 2.5 },
            ] {
                let mut p = params(alpha);
                p.gamma_proxy = proxy;
                let curve = regret_bound_curve(&p, 500).unwrap();
                for t in 2..=500 {
                    assert!(curve.value(t) >= curve.value(t - 1), "alpha={alpha} t={t}");
                }
            }
        }
    }

    #[test]
    fn gamma_proxies_nondecreasing() {
        for proxy in [
            GammaProxy::SquaredExponential { dim: 10 },
            GammaProxy::Matern { dim: 10, nu: 2.5 },
        ] {
            let mut prev = proxy.value(2);
            for t in 3..=10_000 {
                let v = proxy.value(t);
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn v0_matches_factorial_form_and_survives_large_m() {
        let p = params(0);
        // m = 15: (16!)^{1/15}.
        let direct = (2..=16).map(f64::from).product::<f64>().powf(1.0 / 15.0);
        assert_relative_eq!(
            p.v0(),
            (2.0 * 20.0 / 0.1f64).ln().sqrt() * direct,
            max_relative = 1e-12
        );
        // Would overflow a naive factorial: D - d = 400.
        let mut big = params(0);
        big.big_dim = 405;
        big.low_dim = 5;
        assert!(big.v0().is_finite() && big.v0() > 0.0);
    }

    #[test]
    fn effective_dim_matches_full_curve_shape() {
        let p = params(0);
        let full = regret_bound_curve(&p, 100).unwrap();
        let eff = effective_dim_bound_curve(&p, 15, 100).unwrap();
        // Same m: the curves differ only through v0 vs v_effective, which
        // coincide at d_e = D - d.
        for t in 1..=100 {
            assert_relative_eq!(full.value(t), eff.value(t), max_relative = 1e-12);
        }
    }

    #[test]
    fn effective_dim_alpha_at_least_de_minus_1_is_logarithmic() {
        let mut p = params(14);
        p.alpha = 14;
        let curve = effective_dim_bound_curve(&p, 15, 10).unwrap();
        assert_eq!(curve.regime, AlphaRegime::Logarithmic);
        let curve2 = effective_dim_bound_curve(&p, 5, 10).unwrap();
        assert_eq!(curve2.regime, AlphaRegime::Saturated);
    }

    #[test]
    fn smaller_effective_dim_smaller_additive_term() {
        let p = params(0);
        let t = 1000;
        let mut prev = f64::INFINITY;
        for d_e in [10usize, 5, 2] {
            let curve = effective_dim_bound_curve(&p, d_e, t).unwrap();
            let sqrt_term = (p.beta(t) * p.c1() * t as f64 * p.gamma_proxy.value(t)).sqrt();
            let additive = curve.value(t) - sqrt_term - PI * PI / 6.0;
            assert!(additive < prev, "d_e={d_e}: {additive} !< {prev}");
            prev = additive;
        }
    }

    #[test]
    fn cost_model_window() {
        // zeta = 1/(T+1)^2, N0 = 1: cheaper exactly in the alpha window.
        for (big, low) in [(20usize, 5usize), (100, 10)] {
            for horizon in [50usize, 100] {
                let zeta = 1.0 / ((horizon + 1) as f64).powi(2);
                let m = big - low;
                for alpha in 0..=(2 * m as u32 + 2) {
                    let c = acq_cost_model(big, low, alpha, 1, horizon, zeta).unwrap();
                    if in_cost_saving_window(alpha, m) {
                        assert!(
                            c.msucb_is_cheaper(),
                            "D={big} d={low} alpha={alpha} T={horizon}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn cost_model_no_savings_without_split() {
        let c = acq_cost_model(10, 10, 0, 1, 100, 1e-3).unwrap();
        // msucb = (T+1) * zeta^{-D} >= zeta^{-D}.
        assert!(c.msucb_log10 >= c.fullspace_log10);
        assert_relative_eq!(
            c.msucb_log10 - c.fullspace_log10,
            101f64.log10(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn cost_model_log_space_survives_extremes() {
        // zeta^{-D} for D = 100, zeta = 1/101^2 overflows f64; the log10
        // fields stay finite and ordered.
        let c = acq_cost_model(100, 10, 14, 1, 100, 1.0 / 101.0f64.powi(2)).unwrap();
        assert!(c.msucb_log10.is_finite() && c.fullspace_log10.is_finite());
        assert!(c.fullspace_calls().is_infinite());
        assert!(c.msucb_is_cheaper());
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = params(0);
        p.delta = 0.0;
        assert!(regret_bound_curve(&p, 10).is_err());
        assert!(acq_cost_model(10, 2, 0, 1, 100, 1.5).is_err());
        assert!(effective_dim_bound_curve(&params(0), 0, 10).is_err());
    }
}
