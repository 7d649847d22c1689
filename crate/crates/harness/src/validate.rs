//! The `validate` subcommand: a fast invariant self-test suite over the
//! core library, meant as a smoke check on a fresh build or install.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subspace_bo::benchmarks::{make_benchmark, BenchmarkFamily, BenchmarkSpec};
use subspace_bo::bounds::{p_series_exact, p_series_upper};
use subspace_bo::gp::{Dataset, GpModel, KernelConfig, KernelFamily};
use subspace_bo::subspace::{exact_pool_size, pool_size_bound, SplitSpec, SubspacePool};

pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(), String>) -> CheckReport {
    match f() {
        Ok(()) => CheckReport {
            name,
            passed: true,
            detail: "ok".into(),
        },
        Err(detail) => CheckReport {
            name,
            passed: false,
            detail,
        },
    }
}

/// Run every self-test; the caller maps failures to the exit code.
pub fn run_all() -> Vec<CheckReport> {
    vec![
        check("split-embed-round-trip", || {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for (big, low) in [(5usize, 1usize), (20, 5), (100, 10), (100, 0)] {
                let spec = SplitSpec::new(big, low).map_err(|e| e.to_string())?;
                for _ in 0..1000 {
                    let x: Vec<f64> = (0..big).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                    let (y, z) = spec.split(&x).map_err(|e| e.to_string())?;
                    let back = spec.embed(&y, &z).map_err(|e| e.to_string())?;
                    if back != x {
                        return Err(format!("round trip broke at (D,d)=({big},{low})"));
                    }
                }
            }
            Ok(())
        }),
        check("pool-cardinality", || {
            for (n0, alpha) in [(1usize, 0u32), (10, 0), (1, 1), (1, 2)] {
                let spec = SplitSpec::new(6, 2).map_err(|e| e.to_string())?;
                let mut pool = SubspacePool::new(spec, n0, alpha, 3).map_err(|e| e.to_string())?;
                for t in 1..=50 {
                    pool.grow(t).map_err(|e| e.to_string())?;
                    let exact = exact_pool_size(n0, alpha, t);
                    if pool.len() as u64 != exact {
                        return Err(format!("|Z_{t}| != {exact} for (N0,a)=({n0},{alpha})"));
                    }
                    if (exact as f64) >= pool_size_bound(n0, alpha, t) {
                        return Err(format!("bound violated at t={t}"));
                    }
                }
            }
            Ok(())
        }),
        check("p-series-domination", || {
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            for _ in 0..2000 {
                let p = rng.gen_range(-3.0..4.0);
                let n = rng.gen_range(2u64..200);
                if p_series_exact(p, n) >= p_series_upper(p, n) {
                    return Err(format!("no domination at p={p}, n={n}"));
                }
            }
            Ok(())
        }),
        check("gp-interpolation", || {
            for family in [KernelFamily::SquaredExponential, KernelFamily::Matern52] {
                let mut data = Dataset::new(2);
                let pts = [[-0.5, 0.2], [0.3, -0.7], [0.1, 0.8]];
                for (i, p) in pts.iter().enumerate() {
                    data.push(p.to_vec(), i as f64).map_err(|e| e.to_string())?;
                }
                let cfg = KernelConfig::new(family, 0.7, 1.0, 1e-9).map_err(|e| e.to_string())?;
                let model = GpModel::fit(data, cfg).map_err(|e| e.to_string())?;
                for (i, p) in pts.iter().enumerate() {
                    let (mean, std) = model.posterior(p).map_err(|e| e.to_string())?;
                    if (mean - i as f64).abs() > 1e-4 || std > 1e-2 {
                        return Err(format!(
                            "{family:?} fails to interpolate: mean {mean}, std {std}"
                        ));
                    }
                }
            }
            Ok(())
        }),
        check("benchmark-optima", || {
            for family in BenchmarkFamily::ALL {
                let spec = BenchmarkSpec::new(family, 4).map_err(|e| e.to_string())?;
                let obj = make_benchmark(spec);
                let opt = obj
                    .known_optimum()
                    .ok_or_else(|| "missing known optimum".to_string())?;
                let probe = match family {
                    BenchmarkFamily::Levy => vec![2.0 / 11.0 - 1.0 + 0.2; 4],
                    _ => vec![0.5; 4],
                };
                if obj.eval_true(&probe) > opt {
                    return Err(format!("{} value above its optimum", family.name()));
                }
            }
            Ok(())
        }),
    ]
}
