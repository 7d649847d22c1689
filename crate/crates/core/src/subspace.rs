//! Dimension-splitting embedding subspaces.
//!
//! A point `x` in `[-1,1]^D` splits into its last `d` coordinates `y` and
//! first `D-d` coordinates `z`, so that `x = Ay + Bz` with the axis-aligned
//! selector matrices `A = [0, I]^T` and `B = [I, 0]^T`. The selectors are
//! never materialized; split/embed are coordinate slices. A `SubspacePool`
//! holds the anchors `z` accumulated over iterations, growing by
//! `N_t = N0 * t^alpha` per iteration.

use crate::error::{Error, Result};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The `(D, d)` dimension split. `d = D` is excluded: that limit is plain
/// full-space GP-UCB and is handled by its own optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    big_dim: usize,
    low_dim: usize,
    /// Optional coordinate permutation applied before the slice split;
    /// `perm[i]` is the original index routed to slot `i`. Default off.
    permutation: Option<Vec<usize>>,
}

impl SplitSpec {
    pub fn new(big_dim: usize, low_dim: usize) -> Result<Self> {
        if big_dim < 2 {
            return Err(Error::InvalidConfig(format!(
                "big_dim must be >= 2, got {big_dim}"
            )));
        }
        if low_dim >= big_dim {
            return Err(Error::InvalidConfig(format!(
                "low_dim must satisfy 0 <= d < D, got d={low_dim}, D={big_dim}"
            )));
        }
        Ok(Self {
            big_dim,
            low_dim,
            permutation: None,
        })
    }

    /// Route coordinates through a permutation before splitting.
    pub fn with_permutation(mut self, perm: Vec<usize>) -> Result<Self> {
        if perm.len() != self.big_dim {
            return Err(Error::DimensionMismatch {
                expected: self.big_dim,
                got: perm.len(),
            });
        }
        let mut seen = vec![false; self.big_dim];
        for &i in &perm {
            if i >= self.big_dim || seen[i] {
                return Err(Error::InvalidArgument(
                    "permutation must be a bijection on 0..D".into(),
                ));
            }
            seen[i] = true;
        }
        self.permutation = Some(perm);
        Ok(self)
    }

    pub fn big_dim(&self) -> usize {
        self.big_dim
    }

    pub fn low_dim(&self) -> usize {
        self.low_dim
    }

    /// Dimension of the anchor space, `D - d`.
    pub fn anchor_dim(&self) -> usize {
        self.big_dim - self.low_dim
    }

    /// Split `x` into `(y, z)`: `y` the last `d` coordinates, `z` the first
    /// `D-d`.
    pub fn split(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if x.len() != self.big_dim {
            return Err(Error::DimensionMismatch {
                expected: self.big_dim,
                got: x.len(),
            });
        }
        check_box(x)?;
        let routed: Vec<f64> = match &self.permutation {
            Some(perm) => perm.iter().map(|&i| x[i]).collect(),
            None => x.to_vec(),
        };
        let (z, y) = routed.split_at(self.anchor_dim());
        Ok((y.to_vec(), z.to_vec()))
    }

    /// Assemble `x = Ay + Bz`: first `D-d` coordinates from `z`, last `d`
    /// from `y`.
    pub fn embed(&self, y: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.low_dim {
            return Err(Error::DimensionMismatch {
                expected: self.low_dim,
                got: y.len(),
            });
        }
        if z.len() != self.anchor_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.anchor_dim(),
                got: z.len(),
            });
        }
        check_box(y)?;
        check_box(z)?;
        let mut routed = Vec::with_capacity(self.big_dim);
        routed.extend_from_slice(z);
        routed.extend_from_slice(y);
        Ok(match &self.permutation {
            Some(perm) => {
                let mut x = vec![0.0; self.big_dim];
                for (slot, &orig) in perm.iter().enumerate() {
                    x[orig] = routed[slot];
                }
                x
            }
            None => routed,
        })
    }
}

fn check_box(v: &[f64]) -> Result<()> {
    for &c in v {
        if !(-1.0..=1.0).contains(&c) {
            return Err(Error::InvalidArgument(format!(
                "coordinate {c} outside [-1, 1]"
            )));
        }
    }
    Ok(())
}

/// One sampled anchor vector, pinning a subspace `S(A, z)`.
#[derive(Debug, Clone)]
pub struct Anchor {
    pub z: Vec<f64>,
    /// Iteration at which the anchor was sampled.
    pub birth_iter: usize,
}

/// The growing anchor set `Z_t`. Anchors are retained forever; the optional
/// capacity raises an error instead of evicting.
#[derive(Debug, Clone)]
pub struct SubspacePool {
    spec: SplitSpec,
    anchors: Vec<Anchor>,
    n0: usize,
    alpha: u32,
    rng: ChaCha8Rng,
    grown_through: usize,
    cap: Option<usize>,
}

impl SubspacePool {
    pub fn new(spec: SplitSpec, n0: usize, alpha: u32, seed: u64) -> Result<Self> {
        if n0 < 1 {
            return Err(Error::InvalidConfig("n0 must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Dedicated stream so pool growth stays independent of any other
        // consumer seeded from the same value.
        rng.set_stream(0x5b_a11c);
        Ok(Self {
            spec,
            anchors: Vec::new(),
            n0,
            alpha,
            rng,
            grown_through: 0,
            cap: None,
        })
    }

    pub fn with_capacity(mut self, cap: usize) -> Self {
        self.cap = Some(cap);
        self
    }

    pub fn spec(&self) -> &SplitSpec {
        &self.spec
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    /// Append the iteration-`t` batch of `N0 * t^alpha` anchors, sampled
    /// i.i.d. uniformly on `[-1,1]^{D-d}`.
    pub fn grow(&mut self, t: usize) -> Result<()> {
        if t != self.grown_through + 1 {
            return Err(Error::InvalidState(format!(
                "pool grown through t={}, cannot grow at t={t}",
                self.grown_through
            )));
        }
        let batch = self.n0 * (t as u64).pow(self.alpha) as usize;
        if let Some(cap) = self.cap {
            if self.anchors.len() + batch > cap {
                return Err(Error::PoolCapacity {
                    cap,
                    requested: self.anchors.len() + batch,
                });
            }
        }
        let dist = Uniform::new_inclusive(-1.0, 1.0);
        let zdim = self.spec.anchor_dim();
        for _ in 0..batch {
            let z: Vec<f64> = (0..zdim).map(|_| dist.sample(&mut self.rng)).collect();
            self.anchors.push(Anchor { z, birth_iter: t });
        }
        self.grown_through = t;
        Ok(())
    }

    /// Replace the whole pool with a single fresh anchor (line-baseline
    /// semantics: no accumulation).
    pub fn replace_with_fresh(&mut self, t: usize) -> Result<()> {
        if t != self.grown_through + 1 {
            return Err(Error::InvalidState(format!(
                "pool grown through t={}, cannot grow at t={t}",
                self.grown_through
            )));
        }
        let dist = Uniform::new_inclusive(-1.0, 1.0);
        let zdim = self.spec.anchor_dim();
        let z: Vec<f64> = (0..zdim).map(|_| dist.sample(&mut self.rng)).collect();
        self.anchors.clear();
        self.anchors.push(Anchor { z, birth_iter: t });
        self.grown_through = t;
        Ok(())
    }
}

/// Exact `|Z_t| = sum_{k<=t} N0 * k^alpha`.
pub fn exact_pool_size(n0: usize, alpha: u32, t: usize) -> u64 {
    (1..=t as u64).map(|k| n0 as u64 * k.pow(alpha)).sum()
}

/// The closed-form cap `N0 (t+1)^{alpha+1} / (alpha+1)`; the exact pool size
/// is strictly below it.
pub fn pool_size_bound(n0: usize, alpha: u32, t: usize) -> f64 {
    n0 as f64 * ((t + 1) as f64).powi(alpha as i32 + 1) / (alpha as f64 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(d_big: usize, d_low: usize) -> SplitSpec {
        SplitSpec::new(d_big, d_low).unwrap()
    }

    #[test]
    fn split_takes_last_d_coordinates() {
        let x: Vec<f64> = [1.0, 2.0, 3.0, 4.0, 5.0].iter().map(|v| v / 5.0).collect();
        let (y, z) = spec(5, 2).split(&x).unwrap();
        assert_eq!(y, vec![4.0 / 5.0, 5.0 / 5.0]);
        assert_eq!(z, vec![1.0 / 5.0, 2.0 / 5.0, 3.0 / 5.0]);
    }

    #[test]
    fn split_d0_is_degenerate() {
        let x = vec![0.1, -0.2, 0.3];
        let (y, z) = spec(3, 0).split(&x).unwrap();
        assert!(y.is_empty());
        assert_eq!(z, x);
    }

    #[test]
    fn embed_concatenates() {
        let x = spec(4, 1).embed(&[0.5], &[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(x, vec![-1.0, 0.0, 1.0, 0.5]);
    }

    #[test]
    fn embed_zero_vectors() {
        let x = spec(4, 2).embed(&[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(x, vec![0.0; 4]);
    }

    #[test]
    fn dimension_mismatch_errors() {
        assert!(spec(4, 1).split(&[0.0; 3]).is_err());
        assert!(spec(4, 1).embed(&[0.0, 0.0], &[0.0; 3]).is_err());
        assert!(spec(4, 1).embed(&[2.0], &[0.0; 3]).is_err());
    }

    #[test]
    fn invalid_split_spec() {
        assert!(SplitSpec::new(1, 0).is_err());
        assert!(SplitSpec::new(5, 5).is_err());
        assert!(SplitSpec::new(5, 6).is_err());
    }

    #[test]
    fn permutation_round_trip() {
        let s = spec(4, 2).with_permutation(vec![2, 0, 3, 1]).unwrap();
        let x = vec![0.1, 0.2, 0.3, 0.4];
        let (y, z) = s.split(&x).unwrap();
        assert_eq!(s.embed(&y, &z).unwrap(), x);
    }

    #[test]
    fn pool_growth_counts() {
        let mut p = SubspacePool::new(spec(5, 2), 1, 0, 7).unwrap();
        for t in 1..=7 {
            p.grow(t).unwrap();
        }
        assert_eq!(p.len(), 7);

        let mut p = SubspacePool::new(spec(5, 2), 1, 1, 7).unwrap();
        for t in 1..=4 {
            p.grow(t).unwrap();
        }
        assert_eq!(p.len(), 10);

        let mut p = SubspacePool::new(spec(5, 2), 2, 2, 7).unwrap();
        p.grow(1).unwrap();
        p.grow(2).unwrap();
        let before = p.len();
        p.grow(3).unwrap();
        assert_eq!(p.len() - before, 18);
    }

    #[test]
    fn pool_growth_out_of_order_errors() {
        let mut p = SubspacePool::new(spec(5, 2), 1, 0, 7).unwrap();
        assert!(p.grow(2).is_err());
        p.grow(1).unwrap();
        assert!(p.grow(1).is_err());
    }

    #[test]
    fn pool_capacity_errors_instead_of_evicting() {
        let mut p = SubspacePool::new(spec(5, 2), 1, 0, 7)
            .unwrap()
            .with_capacity(2);
        p.grow(1).unwrap();
        p.grow(2).unwrap();
        assert!(matches!(p.grow(3), Err(Error::PoolCapacity { .. })));
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn pool_size_bound_examples() {
        assert_eq!(pool_size_bound(1, 0, 4), 5.0);
        assert_eq!(exact_pool_size(1, 0, 4), 4);
        assert_eq!(pool_size_bound(1, 1, 4), 12.5);
        assert_eq!(exact_pool_size(1, 1, 4), 10);
    }

    #[test]
    fn pool_size_bound_dominates_exact_sum() {
        for alpha in 0..=3u32 {
            for &t in &[1usize, 2, 10, 100, 1000, 10_000] {
                let exact = exact_pool_size(1, alpha, t) as f64;
                assert!(exact < pool_size_bound(1, alpha, t), "alpha={alpha} t={t}");
            }
        }
    }

    #[test]
    fn anchor_coordinates_uniform() {
        let mut p = SubspacePool::new(spec(11, 1), 1, 0, 123).unwrap();
        let mut coords = Vec::new();
        let mut t = 0;
        while coords.len() < 100_000 {
            t += 1;
            p.grow(t).unwrap();
            coords.extend(p.anchors().last().unwrap().z.iter().copied());
        }
        let n = coords.len() as f64;
        let mean = coords.iter().sum::<f64>() / n;
        let var = coords.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / n;
        assert!(mean.abs() < 0.02, "mean={mean}");
        assert!((var - 1.0 / 3.0).abs() < 0.02, "var={var}");
    }

    #[test]
    fn identical_seeds_identical_anchors() {
        let mut a = SubspacePool::new(spec(10, 3), 2, 1, 99).unwrap();
        let mut b = SubspacePool::new(spec(10, 3), 2, 1, 99).unwrap();
        for t in 1..=5 {
            a.grow(t).unwrap();
            b.grow(t).unwrap();
        }
        for (x, y) in a.anchors().iter().zip(b.anchors()) {
            assert_eq!(x.z, y.z);
        }
    }

    proptest! {
        #[test]
        fn round_trip_identity(
            coords in proptest::collection::vec(-1.0f64..=1.0, 20),
            d in 0usize..20,
        ) {
            let s = spec(20, d);
            let (y, z) = s.split(&coords).unwrap();
            let back = s.embed(&y, &z).unwrap();
            prop_assert_eq!(back, coords);
        }

        #[test]
        fn embed_stays_in_box(
            y in proptest::collection::vec(-1.0f64..=1.0, 3),
            z in proptest::collection::vec(-1.0f64..=1.0, 7),
        ) {
            let s = spec(10, 3);
            let x = s.embed(&y, &z).unwrap();
            prop_assert!(x.iter().all(|c| (-1.0..=1.0).contains(c)));
            let (y2, z2) = s.split(&x).unwrap();
            prop_assert_eq!(y2, y);
            prop_assert_eq!(z2, z);
        }
    }
}
