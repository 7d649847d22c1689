//! The benchmark function families and their wiring into `Objective`.
//!
//! All functions are conventionally minimized on their native boxes; here
//! they are exposed negated over `[-1,1]^D` (the core always maximizes).
//! `x` maps affinely onto the native box per coordinate.

use crate::error::{Error, Result};
use crate::optimizer::Objective;
use std::f64::consts::PI;

/// Six-hump Camelback global minimum (native, minimization), frozen from a
/// dense-grid + local-refinement oracle over its 2-D domain.
pub const CAMELBACK_MIN: f64 = -1.031628453489877;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkFamily {
    Ackley,
    Levy,
    HyperEllipsoid,
    /// Six-hump Camelback on the first two coordinates; all further
    /// coordinates are inert padding.
    CamelbackAugmented,
}

impl BenchmarkFamily {
    pub const ALL: [BenchmarkFamily; 4] = [
        BenchmarkFamily::Ackley,
        BenchmarkFamily::Levy,
        BenchmarkFamily::HyperEllipsoid,
        BenchmarkFamily::CamelbackAugmented,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BenchmarkFamily::Ackley => "ackley",
            BenchmarkFamily::Levy => "levy",
            BenchmarkFamily::HyperEllipsoid => "hyper-ellipsoid",
            BenchmarkFamily::CamelbackAugmented => "camelback-augmented",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ackley" => Ok(BenchmarkFamily::Ackley),
            "levy" => Ok(BenchmarkFamily::Levy),
            "hyper-ellipsoid" => Ok(BenchmarkFamily::HyperEllipsoid),
            "camelback-augmented" => Ok(BenchmarkFamily::CamelbackAugmented),
            other => Err(Error::InvalidConfig(format!(
                "unknown benchmark family '{other}'"
            ))),
        }
    }

    /// Native minimum value (minimization convention).
    pub fn native_minimum(&self) -> f64 {
        match self {
            BenchmarkFamily::CamelbackAugmented => CAMELBACK_MIN,
            _ => 0.0,
        }
    }

    /// Number of coordinates the value actually depends on, if fewer than
    /// the full dimension.
    pub fn effective_dims(&self) -> Option<usize> {
        match self {
            BenchmarkFamily::CamelbackAugmented => Some(2),
            _ => None,
        }
    }
}

/// A benchmark family instantiated at a dimension, with its native box.
#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub family: BenchmarkFamily,
    pub dim: usize,
}

impl BenchmarkSpec {
    pub fn new(family: BenchmarkFamily, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("benchmark dim must be >= 1".into()));
        }
        if family == BenchmarkFamily::CamelbackAugmented && dim < 2 {
            return Err(Error::InvalidConfig(
                "camelback-augmented requires dim >= 2".into(),
            ));
        }
        Ok(Self { family, dim })
    }

    /// Native `(lo, hi)` bounds of coordinate `i`.
    pub fn native_bounds(&self, i: usize) -> (f64, f64) {
        match self.family {
            BenchmarkFamily::Ackley => (-32.768, 32.768),
            BenchmarkFamily::Levy => (-10.0, 10.0),
            BenchmarkFamily::HyperEllipsoid => (-5.12, 5.12),
            BenchmarkFamily::CamelbackAugmented => match i {
                0 => (-3.0, 3.0),
                1 => (-2.0, 2.0),
                _ => (-1.0, 1.0),
            },
        }
    }

    /// Map a point from `[-1,1]^D` onto the native box.
    pub fn to_native(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(x.iter()
            .enumerate()
            .map(|(i, &c)| {
                let (lo, hi) = self.native_bounds(i);
                lo + (c + 1.0) * 0.5 * (hi - lo)
            })
            .collect())
    }

    /// Native function value (minimization convention).
    pub fn eval_native(&self, native: &[f64]) -> f64 {
        match self.family {
            BenchmarkFamily::Ackley => ackley(native),
            BenchmarkFamily::Levy => levy(native),
            BenchmarkFamily::HyperEllipsoid => hyper_ellipsoid(native),
            BenchmarkFamily::CamelbackAugmented => camelback(native[0], native[1]),
        }
    }
}

/// Build the maximization objective over `[-1,1]^D`: the negated native
/// function with the known optimum attached.
pub fn make_benchmark(spec: BenchmarkSpec) -> Objective {
    let dim = spec.dim;
    let optimum = -spec.family.native_minimum();
    Objective::new(dim, move |x| {
        let native = spec.to_native(x).expect("dimension checked by caller");
        -spec.eval_native(&native)
    })
    .with_known_optimum(optimum)
}

/// Ackley with `a = 20`, `b = 0.2`, `c = 2 pi`; minimum 0 at the origin.
pub fn ackley(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (a, b, c) = (20.0, 0.2, 2.0 * PI);
    let sq = x.iter().map(|v| v * v).sum::<f64>() / n;
    let cs = x.iter().map(|v| (c * v).cos()).sum::<f64>() / n;
    -a * (-b * sq.sqrt()).exp() - cs.exp() + a + std::f64::consts::E
}

/// Levy in its `w`-transformed form; minimum 0 at all ones.
pub fn levy(x: &[f64]) -> f64 {
    let w: Vec<f64> = x.iter().map(|v| 1.0 + (v - 1.0) / 4.0).collect();
    let n = w.len();
    let mut sum = (PI * w[0]).sin().powi(2);
    for wi in &w[..n - 1] {
        sum += (wi - 1.0).powi(2) * (1.0 + 10.0 * (PI * wi + 1.0).sin().powi(2));
    }
    sum + (w[n - 1] - 1.0).powi(2) * (1.0 + (2.0 * PI * w[n - 1]).sin().powi(2))
}

/// Axis-weighted sphere `sum i * x_i^2` (1-based weights); minimum 0 at
/// the origin.
pub fn hyper_ellipsoid(x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, v)| (i + 1) as f64 * v * v)
        .sum()
}

/// Six-hump Camelback on `x1 in [-3,3]`, `x2 in [-2,2]`.
pub fn camelback(x1: f64, x2: f64) -> f64 {
    (4.0 - 2.1 * x1 * x1 + x1.powi(4) / 3.0) * x1 * x1 + x1 * x2 + (-4.0 + 4.0 * x2 * x2) * x2 * x2
}
