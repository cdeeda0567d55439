//! Permutations of `{0, .., m-1}` with a precomputed cycle table.

use std::fmt;

/// A bijection of `{0, .., m-1}` stored as its image vector, together with its
/// cycle decomposition so that arbitrary (including negative) powers can be
/// applied to a point in constant time.
#[derive(Clone)]
pub struct Permutation {
    images: Vec<usize>,
    cycle_of: Vec<usize>,
    position: Vec<usize>,
    cycles: Vec<Vec<usize>>,
}

impl PartialEq for Permutation {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images
    }
}

impl Eq for Permutation {}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Permutation").field(&self.images).finish()
    }
}

/// Reasons an image vector is not a permutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NotBijection {
    OutOfRange { point: usize, image: usize },
    Repeated { image: usize },
}

impl Permutation {
    pub fn identity(m: usize) -> Self {
        Self::from_images_unchecked((0..m).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self, NotBijection> {
        let m = images.len();
        let mut seen = vec![false; m];
        for (point, &image) in images.iter().enumerate() {
            if image >= m {
                return Err(NotBijection::OutOfRange { point, image });
            }
            if std::mem::replace(&mut seen[image], true) {
                return Err(NotBijection::Repeated { image });
            }
        }
        Ok(Self::from_images_unchecked(images))
    }

    fn from_images_unchecked(images: Vec<usize>) -> Self {
        let m = images.len();
        let mut cycle_of = vec![usize::MAX; m];
        let mut position = vec![0; m];
        let mut cycles = Vec::new();
        for start in 0..m {
            if cycle_of[start] != usize::MAX {
                continue;
            }
            let id = cycles.len();
            let mut cycle = Vec::new();
            let mut x = start;
            loop {
                cycle_of[x] = id;
                position[x] = cycle.len();
                cycle.push(x);
                x = images[x];
                if x == start {
                    break;
                }
            }
            cycles.push(cycle);
        }
        Permutation {
            images,
            cycle_of,
            position,
            cycles,
        }
    }

    /// Rotation `x -> x + step (mod m)`.
    pub fn rotation(m: usize, step: i64) -> Self {
        let m_i = m as i64;
        Self::from_images_unchecked(
            (0..m).map(|x| (x as i64 + step).rem_euclid(m_i) as usize).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    /// `T^n(x)` for any integer `n`.
    #[inline]
    pub fn apply_pow(&self, x: usize, n: i64) -> usize {
        let cycle = &self.cycles[self.cycle_of[x]];
        let len = cycle.len() as i64;
        let pos = (self.position[x] as i64 + n.rem_euclid(len)) % len;
        cycle[pos as usize]
    }

    /// Length of the cycle through `x`.
    pub fn cycle_len(&self, x: usize) -> usize {
        self.cycles[self.cycle_of[x]].len()
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(x, &y)| x == y)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (x, &y) in self.images.iter().enumerate() {
            inv[y] = x;
        }
        Self::from_images_unchecked(inv)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "composing permutations of different sizes");
        Self::from_images_unchecked(other.images.iter().map(|&x| self.images[x]).collect())
    }

    pub fn pow(&self, n: i64) -> Self {
        Self::from_images_unchecked((0..self.len()).map(|x| self.apply_pow(x, n)).collect())
    }

    /// Order of the permutation restricted to the points accepted by `keep`.
    pub fn order_on(&self, keep: impl Fn(usize) -> bool) -> u64 {
        self.cycles
            .iter()
            .filter(|c| keep(c[0]))
            .fold(1u64, |acc, c| num_integer::lcm(acc, c.len() as u64))
    }
}
