//! Finite measure-preserving systems with `d` commuting permutations.
//!
//! Points are `0..m`. Generators are indexed from zero in the API; error
//! messages print them as `T1, T2, ..` to match the usual notation.

use thiserror::Error;

use crate::perm::{NotBijection, Permutation};
use crate::scalar::{Scalar, EQ_TOL};

/// Resource limits applied to user-provided systems and derived supports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub max_points: usize,
    pub max_generators: usize,
    /// Largest support (tuple count) any joining may reach.
    pub max_support: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_points: 64,
            max_generators: 4,
            max_support: 5_000_000,
        }
    }
}

impl Caps {
    /// Caps for systems built internally (cube extensions, products), where
    /// only the support limit is meaningful.
    pub fn derived(&self) -> Self {
        Caps {
            max_points: self.max_support,
            max_generators: usize::MAX,
            max_support: self.max_support,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SystemError {
    #[error("transform T{} is not a permutation of 0..{m}: {reason}", .axis + 1)]
    NotPermutation { axis: usize, m: usize, reason: String },
    #[error("weights have length {weights} but transform T{} has length {len}", .axis + 1)]
    LengthMismatch { axis: usize, weights: usize, len: usize },
    #[error("T{}∘T{} ≠ T{}∘T{} at point {point}", .i + 1, .j + 1, .j + 1, .i + 1)]
    CommutationViolation { i: usize, j: usize, point: usize },
    #[error("T{} does not preserve the measure at point {point}", .axis + 1)]
    MeasureNotPreserved { axis: usize, point: usize },
    #[error("bad weights: {0}")]
    BadWeights(String),
    #[error("dimension mismatch: {left} vs {right} generators")]
    DimensionMismatch { left: usize, right: usize },
    #[error("{what} = {value} exceeds cap {cap}")]
    CapExceeded { what: &'static str, value: usize, cap: usize },
    #[error("system has no points")]
    Empty,
}

/// A real-valued function on the points of a system.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable<S>(pub Vec<S>);

impl<S: Scalar> Observable<S> {
    pub fn new(values: Vec<S>) -> Self {
        Observable(values)
    }

    pub fn constant(m: usize, c: S) -> Self {
        Observable(vec![c; m])
    }

    pub fn indicator(m: usize, points: &[usize]) -> Self {
        let mut values = vec![S::zero(); m];
        for &p in points {
            values[p] = S::one();
        }
        Observable(values)
    }

    pub fn from_ints(values: &[i64]) -> Self {
        Observable(values.iter().map(|&v| S::from_int(v)).collect())
    }

    pub fn values(&self) -> &[S] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn at(&self, x: usize) -> &S {
        &self.0[x]
    }

    /// Sup norm.
    pub fn sup_norm(&self) -> S {
        self.0
            .iter()
            .map(|v| v.abs())
            .fold(S::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn scaled(&self, c: &S) -> Self {
        Observable(self.0.iter().map(|v| v.mul_ref(c)).collect())
    }

    pub fn compose(&self, map: &[usize]) -> Self {
        Observable(map.iter().map(|&p| self.0[p].clone()).collect())
    }

    pub fn to_float(&self) -> Observable<f64> {
        Observable(self.0.iter().map(Scalar::to_f64).collect())
    }
}

/// Exponent tuple `(n_1, .., n_d)` naming the group element `Π T_i^{n_i}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TransformWord(pub Vec<i64>);

impl TransformWord {
    pub fn zero(d: usize) -> Self {
        TransformWord(vec![0; d])
    }

    pub fn add(&self, other: &Self) -> Self {
        TransformWord(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// `(X, μ, T_1, .., T_d)` on `m` points. Immutable once validated.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSystem<S> {
    weights: Vec<S>,
    transforms: Vec<Permutation>,
}

impl<S: Scalar> FiniteSystem<S> {
    /// Validates raw arrays against the default [`Caps`].
    pub fn validate(weights: Vec<S>, transforms: Vec<Vec<usize>>) -> Result<Self, SystemError> {
        Self::validate_with(weights, transforms, &Caps::default())
    }

    pub fn validate_with(
        weights: Vec<S>,
        transforms: Vec<Vec<usize>>,
        caps: &Caps,
    ) -> Result<Self, SystemError> {
        let m = weights.len();
        let mut perms = Vec::with_capacity(transforms.len());
        for (axis, images) in transforms.into_iter().enumerate() {
            if images.len() != m {
                return Err(SystemError::LengthMismatch {
                    axis,
                    weights: m,
                    len: images.len(),
                });
            }
            let perm = Permutation::from_images(images).map_err(|e| SystemError::NotPermutation {
                axis,
                m,
                reason: match e {
                    NotBijection::OutOfRange { point, image } => {
                        format!("point {point} maps to {image}")
                    }
                    NotBijection::Repeated { image } => format!("{image} is hit twice"),
                },
            })?;
            perms.push(perm);
        }
        Self::from_permutations(weights, perms, caps)
    }

    /// Validates a system whose transforms are already permutations.
    pub fn from_permutations(
        weights: Vec<S>,
        transforms: Vec<Permutation>,
        caps: &Caps,
    ) -> Result<Self, SystemError> {
        let m = weights.len();
        if m == 0 {
            return Err(SystemError::Empty);
        }
        if m > caps.max_points {
            return Err(SystemError::CapExceeded {
                what: "point count",
                value: m,
                cap: caps.max_points,
            });
        }
        if transforms.len() > caps.max_generators {
            return Err(SystemError::CapExceeded {
                what: "generator count",
                value: transforms.len(),
                cap: caps.max_generators,
            });
        }
        for (axis, t) in transforms.iter().enumerate() {
            if t.len() != m {
                return Err(SystemError::LengthMismatch {
                    axis,
                    weights: m,
                    len: t.len(),
                });
            }
        }
        if let Some(p) = weights.iter().position(|w| *w < S::zero()) {
            return Err(SystemError::BadWeights(format!(
                "weight of point {p} is negative ({})",
                weights[p].to_text()
            )));
        }
        let total = crate::scalar::sum(weights.iter().cloned());
        if !total.approx_eq(&S::one(), EQ_TOL) {
            return Err(SystemError::BadWeights(format!(
                "weights sum to {} instead of 1",
                total.to_text()
            )));
        }
        for (axis, t) in transforms.iter().enumerate() {
            if let Some(point) = (0..m).find(|&x| weights[t.apply(x)] != weights[x]) {
                return Err(SystemError::MeasureNotPreserved { axis, point });
            }
        }
        for i in 0..transforms.len() {
            for j in i + 1..transforms.len() {
                let (ti, tj) = (&transforms[i], &transforms[j]);
                if let Some(point) = (0..m).find(|&x| ti.apply(tj.apply(x)) != tj.apply(ti.apply(x)))
                {
                    return Err(SystemError::CommutationViolation { i, j, point });
                }
            }
        }
        Ok(FiniteSystem {
            weights,
            transforms,
        })
    }

    /// Number of points `m`.
    pub fn m(&self) -> usize {
        self.weights.len()
    }

    /// Number of generators `d`.
    pub fn d(&self) -> usize {
        self.transforms.len()
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn weight(&self, x: usize) -> &S {
        &self.weights[x]
    }

    pub fn transforms(&self) -> &[Permutation] {
        &self.transforms
    }

    pub fn transform(&self, axis: usize) -> &Permutation {
        &self.transforms[axis]
    }

    #[inline]
    pub fn in_support(&self, x: usize) -> bool {
        !self.weights[x].is_zero()
    }

    /// Points of positive mass, increasing.
    pub fn support(&self) -> Vec<usize> {
        (0..self.m()).filter(|&x| self.in_support(x)).collect()
    }

    /// `Π_i T_i^{n_i}(x)`.
    pub fn apply_word(&self, word: &TransformWord, x: usize) -> usize {
        assert_eq!(word.0.len(), self.d(), "word length must equal d");
        word.0
            .iter()
            .zip(&self.transforms)
            .fold(x, |p, (&n, t)| t.apply_pow(p, n))
    }

    /// For each axis in `subset`, the least `L > 0` with `T^L = id` on the
    /// positive-mass support.
    pub fn joint_period(&self, subset: &[usize]) -> Vec<u64> {
        subset
            .iter()
            .map(|&i| self.transforms[i].order_on(|x| self.in_support(x)))
            .collect()
    }

    /// Same points and transforms, different invariant measure.
    pub fn with_weights(&self, weights: Vec<S>) -> Result<Self, SystemError> {
        Self::from_permutations(weights, self.transforms.clone(), &Caps::default().derived())
    }

    /// Same points and measure with a different generator list (which must
    /// still commute and preserve the measure).
    pub fn with_transforms(&self, transforms: Vec<Permutation>) -> Result<Self, SystemError> {
        Self::from_permutations(self.weights.clone(), transforms, &Caps::default().derived())
    }

    /// Appends identity generators until there are `d` of them.
    pub fn pad_identity(&self, d: usize) -> Self {
        let mut transforms = self.transforms.clone();
        while transforms.len() < d {
            transforms.push(Permutation::identity(self.m()));
        }
        FiniteSystem {
            weights: self.weights.clone(),
            transforms,
        }
    }

    pub fn to_float(&self) -> FiniteSystem<f64> {
        FiniteSystem {
            weights: self.weights.iter().map(Scalar::to_f64).collect(),
            transforms: self.transforms.clone(),
        }
    }
}

/// Product system on `a × b`; point `(i, j)` has index `i * b.m() + j`.
pub fn product_system<S: Scalar>(
    a: &FiniteSystem<S>,
    b: &FiniteSystem<S>,
) -> Result<FiniteSystem<S>, SystemError> {
    if a.d() != b.d() {
        return Err(SystemError::DimensionMismatch {
            left: a.d(),
            right: b.d(),
        });
    }
    let (ma, mb) = (a.m(), b.m());
    let mut weights = Vec::with_capacity(ma * mb);
    for i in 0..ma {
        for j in 0..mb {
            weights.push(a.weight(i).mul_ref(b.weight(j)));
        }
    }
    let transforms = a
        .transforms()
        .iter()
        .zip(b.transforms())
        .map(|(ta, tb)| {
            let images = (0..ma * mb)
                .map(|p| ta.apply(p / mb) * mb + tb.apply(p % mb))
                .collect();
            Permutation::from_images(images).expect("product of permutations is a permutation")
        })
        .collect();
    FiniteSystem::from_permutations(weights, transforms, &Caps::default().derived())
}

/// Uniform probability vector of length `m`.
pub fn uniform_weights<S: Scalar>(m: usize) -> Vec<S> {
    vec![S::from_ratio(1, m as i64); m]
}

/// One-point system with `d` identity generators.
pub fn trivial_system<S: Scalar>(d: usize) -> FiniteSystem<S> {
    FiniteSystem {
        weights: vec![S::one()],
        transforms: vec![Permutation::identity(1); d],
    }
}

impl<S: Scalar> FiniteSystem<S> {
    /// Total mass, which validation pins to one.
    pub fn total_mass(&self) -> S {
        crate::scalar::sum(self.weights.iter().cloned())
    }

    /// Pushforward of `μ` under generator `axis`.
    pub fn pushforward(&self, axis: usize) -> Vec<S> {
        let mut out = vec![S::zero(); self.m()];
        for x in 0..self.m() {
            out[self.transforms[axis].apply(x)] += &self.weights[x];
        }
        out
    }

    /// `T_i^{-1}` substituted for each flagged axis.
    pub fn inverted(&self, flags: &[bool]) -> Self {
        FiniteSystem {
            weights: self.weights.clone(),
            transforms: self
                .transforms
                .iter()
                .zip(flags)
                .map(|(t, &inv)| if inv { t.inverse() } else { t.clone() })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use crate::scalar::Rational;
    use proptest::prelude::*;

    fn e1() -> FiniteSystem<Rational> {
        FiniteSystem::validate(uniform_weights(2), vec![vec![1, 0]]).unwrap()
    }

    fn e3() -> FiniteSystem<Rational> {
        FiniteSystem::validate(uniform_weights(4), vec![vec![1, 2, 3, 0], vec![2, 3, 0, 1]])
            .unwrap()
    }

    #[test]
    fn e1_is_valid() {
        let s = e1();
        assert_eq!((s.m(), s.d()), (2, 1));
        assert_eq!(s.pushforward(0), s.weights().to_vec());
    }

    #[test]
    fn non_commuting_pair_is_rejected() {
        let err = FiniteSystem::<Rational>::validate(
            uniform_weights(3),
            vec![vec![1, 0, 2], vec![1, 2, 0]],
        )
        .unwrap_err();
        assert!(matches!(err, SystemError::CommutationViolation { i: 0, j: 1, point: 0 }));
        assert!(err.to_string().contains("point 0"));
    }

    #[test]
    fn unbalanced_swap_is_not_measure_preserving() {
        let w = vec![Rational::from_ratio(3, 4), Rational::from_ratio(1, 4)];
        let err = FiniteSystem::validate(w, vec![vec![1, 0]]).unwrap_err();
        assert_eq!(err, SystemError::MeasureNotPreserved { axis: 0, point: 0 });
    }

    #[test]
    fn bad_weights_are_rejected() {
        let w = vec![Rational::from_ratio(3, 4), Rational::from_ratio(1, 2)];
        assert!(matches!(
            FiniteSystem::validate(w, vec![vec![0, 1]]),
            Err(SystemError::BadWeights(_))
        ));
        let w = vec![Rational::from_int(2), Rational::from_int(-1)];
        assert!(matches!(
            FiniteSystem::validate(w, vec![vec![0, 1]]),
            Err(SystemError::BadWeights(_))
        ));
        // float mode accepts rounding noise
        let w = vec![0.1f64, 0.2, 0.7 + 1e-12];
        assert!(FiniteSystem::validate(w, vec![vec![0, 1, 2]]).is_ok());
    }

    #[test]
    fn caps_are_enforced() {
        let caps = Caps {
            max_points: 3,
            ..Caps::default()
        };
        let err = FiniteSystem::<Rational>::validate_with(
            uniform_weights(4),
            vec![vec![0, 1, 2, 3]],
            &caps,
        )
        .unwrap_err();
        assert!(matches!(err, SystemError::CapExceeded { value: 4, cap: 3, .. }));
        let too_many = vec![vec![0, 1]; 5];
        assert!(matches!(
            FiniteSystem::<Rational>::validate(uniform_weights(2), too_many),
            Err(SystemError::CapExceeded { what: "generator count", .. })
        ));
    }

    #[test]
    fn apply_word_examples() {
        assert_eq!(e1().apply_word(&TransformWord(vec![1]), 0), 1);
        assert_eq!(e1().apply_word(&TransformWord(vec![2]), 0), 0);
        assert_eq!(e3().apply_word(&TransformWord(vec![1, 1]), 0), 3);
        assert_eq!(e3().apply_word(&TransformWord(vec![-1, 0]), 0), 3);
    }

    #[test]
    fn joint_period_examples() {
        assert_eq!(e1().joint_period(&[0]), vec![2]);
        assert_eq!(e3().joint_period(&[0, 1]), vec![4, 2]);
        let id = FiniteSystem::<Rational>::validate(uniform_weights(3), vec![vec![0, 1, 2]])
            .unwrap();
        assert_eq!(id.joint_period(&[0]), vec![1]);
    }

    #[test]
    fn joint_period_ignores_null_points() {
        // a 3-cycle carrying no mass next to a fixed point carrying all of it
        let w = vec![Rational::from_int(1), Rational::zero(), Rational::zero(), Rational::zero()];
        let s = FiniteSystem::validate(w, vec![vec![0, 2, 3, 1]]).unwrap();
        assert_eq!(s.joint_period(&[0]), vec![1]);
        assert_eq!(s.support(), vec![0]);
    }

    #[test]
    fn product_examples() {
        let sq = product_system(&e1(), &e1()).unwrap();
        assert_eq!(sq.m(), 4);
        assert!(sq.weights().iter().all(|w| *w == Rational::from_ratio(1, 4)));
        assert_eq!(sq.transform(0).images(), &[3, 2, 1, 0]);

        let triv = trivial_system::<Rational>(1);
        let copy = product_system(&e1(), &triv).unwrap();
        assert_eq!(copy, e1());

        assert!(matches!(
            product_system(&e1(), &e3()),
            Err(SystemError::DimensionMismatch { left: 1, right: 2 })
        ));
        let p = product_system(&e1().pad_identity(2), &e3()).unwrap();
        assert_eq!((p.m(), p.d()), (8, 2));
    }

    fn arb_rotation_system() -> impl Strategy<Value = (FiniteSystem<Rational>, Vec<i64>)> {
        (2usize..9, prop::collection::vec(-5i64..6, 1..4)).prop_map(|(q, steps)| {
            let t = steps.iter().map(|&s| Permutation::rotation(q, s)).collect();
            (
                FiniteSystem::from_permutations(uniform_weights(q), t, &Caps::default()).unwrap(),
                steps,
            )
        })
    }

    proptest! {
        #[test]
        fn words_act_additively(
            (sys, _) in arb_rotation_system(),
            a in prop::collection::vec(-7i64..8, 3),
            b in prop::collection::vec(-7i64..8, 3),
        ) {
            let d = sys.d();
            let wa = TransformWord(a[..d].to_vec());
            let wb = TransformWord(b[..d].to_vec());
            for x in 0..sys.m() {
                prop_assert_eq!(
                    sys.apply_word(&wa.add(&wb), x),
                    sys.apply_word(&wa, sys.apply_word(&wb, x))
                );
                // reversed generator order gives the same point
                let rev = wa.0.iter().zip(sys.transforms()).rev()
                    .fold(x, |p, (&n, t)| t.apply_pow(p, n));
                prop_assert_eq!(rev, sys.apply_word(&wa, x));
            }
            for axis in 0..d {
                prop_assert_eq!(sys.pushforward(axis), sys.weights().to_vec());
            }
        }
    }
}
