//! Acceptance gate: one test per criterion, each printing a PASS/FAIL
//! line with the measured quantity before asserting against the pinned
//! tolerance.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subspace_bo::acquisition::{BetaSchedule, BetaVariant, InnerOptBudget};
use subspace_bo::benchmarks::{make_benchmark, BenchmarkFamily, BenchmarkSpec};
use subspace_bo::bounds::{
    acq_cost_model, in_cost_saving_window, p_series_exact, p_series_upper, regret_bound_curve,
    BoundParams, GammaProxy,
};
use subspace_bo::gp::{kernel_eval, Dataset, GpModel, KernelConfig, KernelFamily};
use subspace_bo::optimizer::{
    initial_design, log_distance, run_gpucb, run_line_baseline, run_msucb, run_random_search,
    MsUcbConfig,
};
use subspace_bo::subspace::{exact_pool_size, pool_size_bound, SplitSpec, SubspacePool};

fn report(criterion: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {criterion:02} {name}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} ({name}) failed: {detail}");
}

/// Criterion 1: factorized posterior matches a dense-inversion oracle
/// within 1e-8 absolute on 200 random instances.
#[test]
fn criterion_01_gp_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for instance in 0..200 {
        let dim = rng.gen_range(1..=10);
        let n = rng.gen_range(2..=30);
        let family = if instance % 2 == 0 {
            KernelFamily::SquaredExponential
        } else {
            KernelFamily::Matern52
        };
        let cfg = KernelConfig::new(
            family,
            rng.gen_range(0.2..2.0),
            rng.gen_range(0.5..3.0),
            rng.gen_range(1e-4..1e-2),
        )
        .unwrap();
        let mut data = Dataset::new(dim);
        let mut pts = Vec::new();
        for _ in 0..n {
            let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            data.push(p.clone(), rng.gen_range(-2.0..2.0)).unwrap();
            pts.push(p);
        }
        let values: Vec<f64> = data.values().to_vec();
        let model = GpModel::fit(data, cfg).unwrap();

        // Dense oracle with the model's own jitter.
        let mut gram = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                gram[(i, j)] = kernel_eval(&cfg, &pts[i], &pts[j]).unwrap();
            }
            gram[(i, i)] += cfg.noise_variance + model.jitter();
        }
        let inv = gram.try_inverse().expect("oracle inversion");
        let ybar = values.iter().sum::<f64>() / n as f64;
        let centered = DVector::from_iterator(n, values.iter().map(|v| v - ybar));
        let weights = &inv * &centered;

        for _ in 0..5 {
            let q: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let kvec =
                DVector::from_iterator(n, pts.iter().map(|p| kernel_eval(&cfg, p, &q).unwrap()));
            let oracle_mean = kvec.dot(&weights) + ybar;
            let oracle_var = (cfg.signal_variance - kvec.dot(&(&inv * &kvec))).max(0.0);
            let (mean, std) = model.posterior(&q).unwrap();
            worst = worst
                .max((mean - oracle_mean).abs())
                .max((std - oracle_var.sqrt()).abs());
        }
    }
    report(
        1,
        "gp-oracle-equivalence",
        worst < 1e-8,
        &format!("max |factored - dense| = {worst:.3e} (tol 1e-8)"),
    );
}

/// Criterion 2: embed∘split and split∘embed are exact identities.
#[test]
fn criterion_02_split_embed_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut checked = 0usize;
    for (big, low) in [(5usize, 1usize), (20, 5), (100, 10), (100, 0)] {
        let spec = SplitSpec::new(big, low).unwrap();
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..big).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let (y, z) = spec.split(&x).unwrap();
            assert_eq!(spec.embed(&y, &z).unwrap(), x);
            let (y2, z2) = spec.split(&spec.embed(&y, &z).unwrap()).unwrap();
            assert_eq!((y2, z2), (y, z));
            checked += 1;
        }
    }
    report(
        2,
        "split-embed-round-trip",
        checked == 40_000,
        &format!("{checked} exact round trips across 4 (D, d) pairs"),
    );
}

/// Criterion 3: pool cardinality is exactly the partial sum and below the
/// closed-form cap, over the variant grid for t <= 50.
#[test]
fn criterion_03_pool_cardinality() {
    let mut ok = true;
    for (n0, alpha) in [(1usize, 0u32), (10, 0), (1, 1), (1, 2)] {
        let spec = SplitSpec::new(8, 3).unwrap();
        let mut pool = SubspacePool::new(spec, n0, alpha, 11).unwrap();
        for t in 1..=50 {
            pool.grow(t).unwrap();
            let exact = exact_pool_size(n0, alpha, t);
            ok &= pool.len() as u64 == exact;
            ok &= (exact as f64) < pool_size_bound(n0, alpha, t);
        }
    }
    report(
        3,
        "pool-cardinality",
        ok,
        "|Z_t| exact and strictly below N0 (t+1)^{a+1}/(a+1) on the 4-variant grid",
    );
}

/// Criterion 4: every suggested point lies in [-1,1]^D, exactly, over a
/// 20-run fuzz suite across all optimizers.
#[test]
fn criterion_04_containment_fuzz() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut runs = 0usize;
    let mut points = 0usize;
    while runs < 20 {
        let dim = rng.gen_range(2..=8);
        let d = rng.gen_range(0..dim);
        let seed = rng.gen();
        let spec = BenchmarkSpec::new(BenchmarkFamily::Levy, dim).unwrap();
        let obj = make_benchmark(spec).with_noise_std(0.01);
        let mut cfg = MsUcbConfig::new(SplitSpec::new(dim, d).unwrap(), 6, seed);
        cfg.init_points = 5;
        cfg.refit_every = 3;
        cfg.budget = Some(InnerOptBudget::new(2, 30, 200).unwrap());
        let recs = [
            run_msucb(&obj, &cfg).unwrap(),
            run_gpucb(&obj, &cfg).unwrap(),
            run_line_baseline(&obj, &cfg).unwrap(),
            run_random_search(&obj, &cfg).unwrap(),
        ];
        for rec in &recs {
            for row in &rec.rows {
                assert!(
                    row.x.iter().all(|c| (-1.0..=1.0).contains(c)),
                    "point escaped the box: {:?}",
                    row.x
                );
                points += 1;
            }
        }
        runs += 1;
    }
    report(
        4,
        "containment-fuzz",
        true,
        &format!("{points} suggested points from {runs} fuzz runs, all inside [-1,1]^D"),
    );
}

/// Criterion 5: beta schedules nondecreasing; the subspace beta with d=1
/// stays strictly below the full-dimensional analogue at D=100.
#[test]
fn criterion_05_beta_schedules() {
    let mut ok = true;
    for variant in [BetaVariant::MsUcb, BetaVariant::GpUcb, BetaVariant::DegenD0] {
        let d = if variant == BetaVariant::MsUcb { 1 } else { 0 };
        let s = BetaSchedule::new(variant, 0.1, 1.0, 1.0, 100, d).unwrap();
        let mut prev = s.beta(1);
        for t in 2..=1000 {
            let b = s.beta(t);
            ok &= b >= prev;
            prev = b;
        }
    }
    let ms = BetaSchedule::new(BetaVariant::MsUcb, 0.1, 1.0, 1.0, 100, 1).unwrap();
    let full = BetaSchedule::new(BetaVariant::GpUcb, 0.1, 1.0, 1.0, 100, 0).unwrap();
    let mut min_gap = f64::INFINITY;
    for t in 1..=1000 {
        min_gap = min_gap.min(full.beta(t) - ms.beta(t));
        ok &= ms.beta(t) < full.beta(t);
    }
    report(
        5,
        "beta-schedules",
        ok,
        &format!("nondecreasing; min full-minus-subspace gap over t <= 1000 = {min_gap:.3}"),
    );
}

/// Criterion 6: closed-form p-series bounds dominate exact partial sums
/// across all four regimes; zeta(2) partial sums stay below pi^2/6 + 1e-9.
#[test]
fn criterion_06_p_series_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let regimes: [(f64, f64); 4] = [
        (1.0 + 1e-9, 8.0),
        (1.0, 1.0),
        (0.0, 1.0 - 1e-9),
        (-5.0, -1e-9),
    ];
    let mut checked = 0usize;
    for (lo, hi) in regimes {
        for _ in 0..2500 {
            let p = if lo == hi { lo } else { rng.gen_range(lo..hi) };
            let n = rng.gen_range(2u64..2000);
            let exact = p_series_exact(p, n);
            let bound = p_series_upper(p, n);
            assert!(exact < bound, "p={p}, n={n}: {exact} !< {bound}");
            checked += 1;
        }
    }
    let zeta2_tail = p_series_exact(2.0, 1_000_000);
    let below = zeta2_tail < std::f64::consts::PI.powi(2) / 6.0 + 1e-9;
    report(
        6,
        "p-series-bounds",
        checked == 10_000 && below,
        &format!("{checked} random (p, n) dominated; s_1e6(2) = {zeta2_tail:.12}"),
    );
}

/// Criterion 7: B(T)/T strictly decreasing over T in [100, 1e4] for all
/// three alpha regimes at (D, d, delta) = (20, 5, 0.1), both gamma
/// proxies.
#[test]
fn criterion_07_bound_sublinearity() {
    let mut pass = true;
    let mut detail = String::new();
    for (proxy_name, proxy) in [
        ("se", GammaProxy::SquaredExponential { dim: 20 }),
        ("matern", GammaProxy::Matern { dim: 20, nu: 2.5 }),
    ] {
        for alpha in [0u32, 14, 30] {
            let params = BoundParams {
                big_dim: 20,
                low_dim: 5,
                n0: 1,
                alpha,
                delta: 0.1,
                a_const: 1.0,
                b_const: 1.0,
                sigma2: 0.01,
                gamma_proxy: proxy,
            };
            let curve = regret_bound_curve(&params, 10_000).unwrap();
            let mut decreasing = true;
            for t in 101..=10_000 {
                if curve.value(t) / t as f64 >= curve.value(t - 1) / (t - 1) as f64 {
                    decreasing = false;
                    break;
                }
            }
            let ratio = (curve.value(10_000) / 10_000.0) / (curve.value(100) / 100.0);
            detail.push_str(&format!(
                "[{proxy_name} a={alpha}: decreasing={decreasing}, B/T ratio 1e4 vs 1e2 = {ratio:.3}] "
            ));
            pass &= decreasing;
        }
    }
    report(7, "bound-sublinearity", pass, detail.trim());
}

/// Criterion 8: with zeta = 1/(T+1)^2 and N0 = 1, the pooled call count is
/// below the full-space count exactly when alpha < 2(D-d) - 1.
#[test]
fn criterion_08_cost_model_window() {
    let mut pass = true;
    let mut mismatches = Vec::new();
    for (big, low) in [(20usize, 5usize), (100, 10)] {
        let m = big - low;
        for horizon in [50usize, 100] {
            let zeta = 1.0 / ((horizon + 1) as f64).powi(2);
            for alpha in 0..=(2 * m as u32 + 4) {
                let cost = acq_cost_model(big, low, alpha, 1, horizon, zeta).unwrap();
                let cheaper = cost.msucb_is_cheaper();
                let in_window = in_cost_saving_window(alpha, m);
                if cheaper != in_window {
                    mismatches.push(format!(
                        "D={big} d={low} T={horizon} alpha={alpha}: cheaper={cheaper}, window={in_window}"
                    ));
                    pass = false;
                }
            }
        }
    }
    let detail = if mismatches.is_empty() {
        "call-count comparison matches the alpha < 2(D-d)-1 window everywhere".to_string()
    } else {
        format!(
            "{} boundary mismatches, e.g. {}",
            mismatches.len(),
            mismatches[0]
        )
    };
    report(8, "cost-model-window", pass, &detail);
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if v.len() % 2 == 1 {
        v[v.len() / 2]
    } else {
        0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2])
    }
}

fn desk_budget() -> InnerOptBudget {
    InnerOptBudget::new(2, 80, 2000).unwrap()
}

/// Criterion 9: Ackley D=20, d=5, (N0, alpha) = (1, 0), T=100, sigma=0.01,
/// 10 seeds — the pooled optimizer beats random search by >= 0.3 median
/// final log-distance and is no worse than the line baseline.
#[test]
fn criterion_09_ordering_at_desk_scale() {
    let dim = 20;
    let spec = BenchmarkSpec::new(BenchmarkFamily::Ackley, dim).unwrap();
    let optimum = 0.0;
    let (mut ms, mut line, mut random) = (Vec::new(), Vec::new(), Vec::new());
    for seed in 0..10u64 {
        let obj = make_benchmark(spec.clone()).with_noise_std(0.01);
        let mut cfg = MsUcbConfig::new(SplitSpec::new(dim, 5).unwrap(), 100, seed);
        cfg.init_points = 20;
        cfg.init_design = Some(initial_design(dim, 20, seed));
        cfg.budget = Some(desk_budget());
        let rec = run_msucb(&obj, &cfg).unwrap();
        ms.push(log_distance(optimum, rec.final_best_true()));
        let rec = run_line_baseline(&obj, &cfg).unwrap();
        line.push(log_distance(optimum, rec.final_best_true()));
        let rec = run_random_search(&obj, &cfg).unwrap();
        random.push(log_distance(optimum, rec.final_best_true()));
    }
    let (m_ms, m_line, m_rand) = (median(ms), median(line), median(random));
    let margin = m_rand - m_ms;
    report(
        9,
        "ordering-at-desk-scale",
        margin >= 0.3 && m_ms <= m_line,
        &format!(
            "median log-dist: msucb={m_ms:.4}, line={m_line:.4}, random={m_rand:.4}; margin over random = {margin:.4} (need >= 0.3)"
        ),
    );
}

/// Criterion 10: Hyper-Ellipsoid D=50, d=5, T=100, 10 seeds — more
/// subspaces do not hurt: medians ordered by pool growth, one adjacent
/// rank swap allowed, 1e-6 slack.
#[test]
fn criterion_10_subspace_count_monotonicity() {
    let dim = 50;
    let spec = BenchmarkSpec::new(BenchmarkFamily::HyperEllipsoid, dim).unwrap();
    // Variant grid ordered by pool growth rate, slowest first.
    let variants: [(usize, u32); 4] = [(1, 0), (10, 0), (1, 1), (1, 2)];
    let mut medians = Vec::new();
    for (n0, alpha) in variants {
        let mut finals = Vec::new();
        for seed in 0..10u64 {
            let obj = make_benchmark(spec.clone()).with_noise_std(0.01);
            let mut cfg = MsUcbConfig::new(SplitSpec::new(dim, 5).unwrap(), 100, seed);
            cfg.n0 = n0;
            cfg.alpha = alpha;
            cfg.init_design = Some(initial_design(dim, 20, seed));
            cfg.budget = Some(desk_budget());
            let rec = run_msucb(&obj, &cfg).unwrap();
            finals.push(rec.rows.last().unwrap().cum_regret.unwrap());
        }
        medians.push(median(finals));
    }
    // Primary claim: (10, 0) no worse than (1, 0) within slack.
    let primary = medians[1] <= medians[0] + 1e-6;
    // Grid ordering, at most one adjacent swap: larger pools should give
    // regret no larger than smaller pools.
    let swaps = medians.windows(2).filter(|w| w[1] > w[0] + 1e-6).count();
    report(
        10,
        "subspace-count-monotonicity",
        primary && swaps <= 1,
        &format!(
            "median final R_T by variant (1,0)/(10,0)/(1,1)/(1,2): {:.2}/{:.2}/{:.2}/{:.2}; adjacent swaps = {swaps}",
            medians[0], medians[1], medians[2], medians[3]
        ),
    );
}

/// Criterion 11: CamelbackAugmented D=50, d=5, T=150, 10 seeds — median
/// best true value within 0.5 of the oracle optimum 1.0316....
#[test]
fn criterion_11_effective_subspace() {
    let dim = 50;
    let spec = BenchmarkSpec::new(BenchmarkFamily::CamelbackAugmented, dim).unwrap();
    let optimum = -subspace_bo::benchmarks::CAMELBACK_MIN;
    let mut bests = Vec::new();
    for seed in 0..10u64 {
        let obj = make_benchmark(spec.clone()).with_noise_std(0.01);
        let mut cfg = MsUcbConfig::new(SplitSpec::new(dim, 5).unwrap(), 150, seed);
        cfg.init_design = Some(initial_design(dim, 20, seed));
        cfg.budget = Some(desk_budget());
        let rec = run_msucb(&obj, &cfg).unwrap();
        bests.push(rec.final_best_true());
    }
    let med = median(bests);
    let gap = optimum - med;
    report(
        11,
        "effective-subspace",
        gap <= 0.5,
        &format!(
            "median best true value = {med:.4}, optimum = {optimum:.4}, gap = {gap:.4} (tol 0.5)"
        ),
    );
}
