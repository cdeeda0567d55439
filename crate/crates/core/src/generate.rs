//! Example systems: rotations, powers of one permutation, skew products,
//! products, and seeded random commuting families, plus a fixed corpus.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::perm::Permutation;
use crate::scalar::Scalar;
use crate::system::{product_system, uniform_weights, Caps, FiniteSystem, SystemError};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GenerateError {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("bad parameter `{name}`: {reason}")]
    BadParameter { name: &'static str, reason: String },
    #[error(transparent)]
    System(#[from] SystemError),
}

fn positive(name: &'static str, value: usize) -> Result<(), GenerateError> {
    if value == 0 {
        return Err(GenerateError::BadParameter {
            name,
            reason: "must be positive".into(),
        });
    }
    Ok(())
}

fn build<S: Scalar>(weights: Vec<S>, ts: Vec<Permutation>, caps: &Caps) -> Result<FiniteSystem<S>, GenerateError> {
    Ok(FiniteSystem::from_permutations(weights, ts, caps)?)
}

/// `Z/q` with `T_i x = x + steps[i]`, uniform measure.
pub fn cyclic_rotations<S: Scalar>(q: usize, steps: &[i64], caps: &Caps) -> Result<FiniteSystem<S>, GenerateError> {
    positive("q", q)?;
    let ts = steps.iter().map(|&s| Permutation::rotation(q, s)).collect();
    build(uniform_weights(q), ts, caps)
}

/// `Z/q` with `T_i = T^{a_i}` for `T x = x + step`.
pub fn power_system<S: Scalar>(q: usize, a: &[i64], step: i64, caps: &Caps) -> Result<FiniteSystem<S>, GenerateError> {
    positive("q", q)?;
    let t = Permutation::rotation(q, step);
    build(uniform_weights(q), a.iter().map(|&e| t.pow(e)).collect(), caps)
}

/// `(Z/q)^2` with `T_i = S^{powers[i]}` for `S(x, y) = (x + a, y + x)`.
/// Point `(x, y)` has index `x q + y`.
pub fn skew_product<S: Scalar>(q: usize, a: i64, powers: &[i64], caps: &Caps) -> Result<FiniteSystem<S>, GenerateError> {
    positive("q", q)?;
    let qi = q as i64;
    let images = (0..q * q)
        .map(|p| {
            let (x, y) = ((p / q) as i64, (p % q) as i64);
            ((x + a).rem_euclid(qi) * qi + (y + x).rem_euclid(qi)) as usize
        })
        .collect();
    let s = Permutation::from_images(images).expect("skew map is a bijection");
    build(uniform_weights(q * q), powers.iter().map(|&e| s.pow(e)).collect(), caps)
}

/// Product of the factors; shorter factors are padded with identities.
pub fn product_of<S: Scalar>(factors: &[FiniteSystem<S>], caps: &Caps) -> Result<FiniteSystem<S>, GenerateError> {
    let Some(first) = factors.first() else {
        return Err(GenerateError::BadParameter {
            name: "factors",
            reason: "at least one factor is required".into(),
        });
    };
    let d = factors.iter().map(FiniteSystem::d).max().unwrap_or(0);
    let mut acc = first.pad_identity(d);
    for f in &factors[1..] {
        acc = product_system(&acc, &f.pad_identity(d))?;
    }
    build(acc.weights().to_vec(), acc.transforms().to_vec(), caps)
}

/// How [`random_commuting`] assigns mass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandomWeights {
    Uniform,
    /// An integer weight in `0..=3` per cycle of the common permutation,
    /// normalized; some cycles may be null.
    PerCycle,
}

/// `T_i = P^{a_i}` for a seeded random permutation `P` of `0..m` and
/// exponents `a_i ∈ 0..m`.
pub fn random_commuting<S: Scalar>(
    seed: u64,
    m: usize,
    d: usize,
    weights: RandomWeights,
    caps: &Caps,
) -> Result<FiniteSystem<S>, GenerateError> {
    positive("m", m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images: Vec<usize> = (0..m).collect();
    images.shuffle(&mut rng);
    let p = Permutation::from_images(images).expect("a shuffle is a bijection");
    let ts = (0..d).map(|_| p.pow(rng.gen_range(0..m as i64))).collect();
    let w = match weights {
        RandomWeights::Uniform => uniform_weights(m),
        RandomWeights::PerCycle => {
            let mut cw: Vec<i64> = p.cycles().iter().map(|_| rng.gen_range(0..=3)).collect();
            if cw.iter().all(|&w| w == 0) {
                cw[0] = 1;
            }
            let total: i64 = p.cycles().iter().zip(&cw).map(|(c, w)| c.len() as i64 * w).sum();
            let mut out = vec![S::zero(); m];
            for (c, &w) in p.cycles().iter().zip(&cw) {
                for &x in c {
                    out[x] = S::from_ratio(w, total);
                }
            }
            out
        }
    };
    build(w, ts, caps)
}

/// `count` observables with independent seeded values in `{−1, 1}`.
pub fn random_signs<S: Scalar>(seed: u64, m: usize, count: usize) -> Vec<crate::system::Observable<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            crate::system::Observable(
                (0..m)
                    .map(|_| S::from_int(if rng.gen_bool(0.5) { 1 } else { -1 }))
                    .collect(),
            )
        })
        .collect()
}

/// A named corpus entry.
#[derive(Clone, Debug)]
pub struct CorpusEntry<S> {
    pub name: String,
    pub system: FiniteSystem<S>,
}

/// Seed of the shipped corpus.
pub const CORPUS_SEED: u64 = 20_240_601;

/// `count` seeded systems with at most 12 points and 3 generators, cycling
/// through every generator family.
pub fn corpus<S: Scalar>(seed: u64, count: usize) -> Vec<CorpusEntry<S>> {
    let caps = Caps::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut i = 0usize;
    while out.len() < count {
        let d = rng.gen_range(1..=3usize);
        let steps = |rng: &mut ChaCha8Rng, q: usize| -> Vec<i64> {
            (0..d).map(|_| rng.gen_range(0..q as i64)).collect()
        };
        let (name, sys) = match i % 5 {
            0 => {
                let q = rng.gen_range(2..=12);
                let s = steps(&mut rng, q);
                (format!("cyclic_rotations q={q} steps={s:?}"), cyclic_rotations(q, &s, &caps))
            }
            1 => {
                let q = rng.gen_range(2..=12);
                let a = steps(&mut rng, q);
                (format!("power_system q={q} a={a:?}"), power_system(q, &a, 1, &caps))
            }
            2 => {
                let q = rng.gen_range(2..=3);
                let a = rng.gen_range(1..q as i64);
                let p = steps(&mut rng, q * q);
                (format!("skew_product q={q} a={a} powers={p:?}"), skew_product(q, a, &p, &caps))
            }
            3 => {
                let (q1, q2) = [(2, 2), (2, 3), (3, 2), (2, 4), (3, 3), (2, 5), (2, 6), (3, 4)][rng.gen_range(0..8)];
                let (s1, s2) = (steps(&mut rng, q1), steps(&mut rng, q2));
                let name = format!("product_of [rotations q={q1} steps={s1:?}, rotations q={q2} steps={s2:?}]");
                let sys = cyclic_rotations(q1, &s1, &caps)
                    .and_then(|a| Ok((a, cyclic_rotations(q2, &s2, &caps)?)))
                    .and_then(|(a, b)| product_of(&[a, b], &caps));
                (name, sys)
            }
            _ => {
                let m = rng.gen_range(2..=12);
                let s = rng.gen::<u32>() as u64;
                let w = if rng.gen_bool(0.5) {
                    RandomWeights::Uniform
                } else {
                    RandomWeights::PerCycle
                };
                (format!("random_commuting seed={s} m={m} d={d} weights={w:?}"), random_commuting(s, m, d, w, &caps))
            }
        };
        out.push(CorpusEntry {
            name,
            system: sys.expect("corpus parameters are valid"),
        });
        i += 1;
    }
    out
}
