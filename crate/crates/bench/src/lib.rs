//! Fixtures shared by the benchmarks.

use ergocube::generate::{cyclic_rotations, random_commuting, RandomWeights};
use ergocube::{Caps, FiniteSystem, Observable, Scalar};

/// `Z/q` with `T_i x = x + i + 1`, one step per generator.
pub fn rotations<S: Scalar>(q: usize, d: usize) -> FiniteSystem<S> {
    let steps: Vec<i64> = (1..=d as i64).collect();
    cyclic_rotations(q, &steps, &Caps::default()).expect("valid rotations")
}

/// A seeded random commuting family with uniform weights.
pub fn random<S: Scalar>(seed: u64, m: usize, d: usize) -> FiniteSystem<S> {
    random_commuting(seed, m, d, RandomWeights::Uniform, &Caps::default()).expect("valid random system")
}

/// `x ↦ (-1)^x`.
pub fn alternating<S: Scalar>(m: usize) -> Observable<S> {
    Observable((0..m).map(|x| S::from_int(if x % 2 == 0 { 1 } else { -1 })).collect())
}
