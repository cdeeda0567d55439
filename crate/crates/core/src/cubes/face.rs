use super::{CubeError, CubeIndex, SparseJoining};
use crate::perm::Permutation;
use crate::scalar::Scalar;

/// A product map `(x_c)_c ↦ (P_c x_c)_c` acting coordinatewise on tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateMap {
    perms: Vec<Permutation>,
}

impl CoordinateMap {
    pub fn new(perms: Vec<Permutation>) -> Self {
        assert!(!perms.is_empty(), "coordinate map needs at least one coordinate");
        CoordinateMap { perms }
    }

    /// `T × T × .. × T` on `arity` coordinates.
    pub fn diagonal(arity: usize, t: &Permutation) -> Self {
        Self::new(vec![t.clone(); arity])
    }

    pub fn identity(arity: usize, points: usize) -> Self {
        Self::diagonal(arity, &Permutation::identity(points))
    }

    pub fn arity(&self) -> usize {
        self.perms.len()
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn apply(&self, tuple: &[usize]) -> Vec<usize> {
        tuple.iter().zip(&self.perms).map(|(&x, p)| p.apply(x)).collect()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self::new(
            self.perms
                .iter()
                .zip(&other.perms)
                .map(|(a, b)| a.compose(b))
                .collect(),
        )
    }

    pub fn inverse(&self) -> Self {
        Self::new(self.perms.iter().map(Permutation::inverse).collect())
    }

    pub fn pushforward<S: Scalar>(&self, j: &SparseJoining<S>) -> SparseJoining<S> {
        assert_eq!(j.arity(), self.arity(), "map arity must match joining arity");
        j.pushforward(j.arity(), |t| self.apply(t))
    }

    /// `self_* j == j`.
    pub fn preserves<S: Scalar>(&self, j: &SparseJoining<S>) -> bool {
        self.arity() == j.arity() && self.pushforward(j) == *j
    }
}

/// Face transformation on `X^{[k]}`: applies `t` to the coordinates `ε` with
/// `ε_{axis+1} = side` and leaves the others fixed. `side = 1` is the upper
/// face `F^1`, `side = 0` the lower face `F^0`.
pub fn face_transformation(
    k: usize,
    axis: usize,
    side: bool,
    t: &Permutation,
) -> Result<CoordinateMap, CubeError> {
    if axis >= k {
        return Err(CubeError::AxisOutOfRange { axis, k });
    }
    let id = Permutation::identity(t.len());
    Ok(CoordinateMap::new(
        CubeIndex::vertices(k)
            .map(|e| if e.bit(axis) == side { t.clone() } else { id.clone() })
            .collect(),
    ))
}
