use num_traits::Zero;

use super::{CubeError, SparseJoining};
use crate::dsu::DisjointSets;
use crate::perm::Permutation;
use crate::scalar::{Scalar, ZERO_TOL};
use crate::sigma::{invariant_partition, Partition};
use crate::system::{Caps, FiniteSystem, Observable};

/// A generator of the system or its inverse, as an entry of a Host-measure
/// transform list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gen {
    pub axis: usize,
    pub inverse: bool,
}

impl Gen {
    pub fn new(axis: usize) -> Self {
        Gen {
            axis,
            inverse: false,
        }
    }

    pub fn inv(axis: usize) -> Self {
        Gen {
            axis,
            inverse: true,
        }
    }

    fn resolve<S: Scalar>(&self, sys: &FiniteSystem<S>) -> Result<Permutation, CubeError> {
        if self.axis >= sys.d() {
            return Err(CubeError::GeneratorOutOfRange {
                axis: self.axis,
                d: sys.d(),
            });
        }
        let t = sys.transform(self.axis);
        Ok(if self.inverse { t.inverse() } else { t.clone() })
    }
}

/// The transform list `T_{a_1}, .., T_{a_k}` for a subset of generators.
pub fn gens(subset: &[usize]) -> Vec<Gen> {
    subset.iter().map(|&a| Gen::new(a)).collect()
}

/// Orbit partition of the support of `j` under the diagonal action of `t`
/// on every coordinate. Fails if `t` does not preserve the support.
pub fn diagonal_invariant_partition<S: Scalar>(
    j: &SparseJoining<S>,
    t: &Permutation,
) -> Result<Partition, CubeError> {
    let mut dsu = DisjointSets::new(j.len());
    let mut image = vec![0; j.arity()];
    for i in 0..j.len() {
        for (slot, &x) in image.iter_mut().zip(j.tuple(i)) {
            *slot = t.apply(x);
        }
        let target = j.find(&image).ok_or(CubeError::NotInvariant)?;
        dsu.union(i, target);
    }
    let (labels, count) = dsu.labels(|_| true);
    Ok(Partition::from_labels(&labels, count))
}

fn atom_masses<S: Scalar>(j: &SparseJoining<S>, p: &Partition) -> Result<Vec<S>, CubeError> {
    if p.ground_len() != j.len() || (0..j.len()).any(|i| !p.covers(i)) {
        return Err(CubeError::PartitionMismatch);
    }
    let masses = p.atom_masses(j.masses());
    if masses.iter().any(Zero::is_zero) {
        return Err(CubeError::ZeroMassAtom);
    }
    Ok(masses)
}

/// `m ×_P m`: the coupling of two copies of `m` that is independent given
/// the atom of `P`. Tuples are concatenated, first copy first.
pub fn relatively_independent_product<S: Scalar>(
    j: &SparseJoining<S>,
    p: &Partition,
) -> Result<SparseJoining<S>, CubeError> {
    relatively_independent_product_capped(j, p, Caps::default().max_support)
}

pub fn relatively_independent_product_capped<S: Scalar>(
    j: &SparseJoining<S>,
    p: &Partition,
    cap: usize,
) -> Result<SparseJoining<S>, CubeError> {
    let masses = atom_masses(j, p)?;
    let size = product_support_len(p);
    if size > cap {
        return Err(CubeError::SupportExplosion { size, cap });
    }
    let arity = j.arity();
    let mut tuples = Vec::with_capacity(size * 2 * arity);
    let mut out = Vec::with_capacity(size);
    for u in 0..j.len() {
        let a = p.atom_of(u).expect("covered");
        let ratio = j.mass(u).div_ref(&masses[a]);
        for &v in &p.atoms()[a] {
            tuples.extend_from_slice(j.tuple(u));
            tuples.extend_from_slice(j.tuple(v));
            out.push(ratio.mul_ref(j.mass(v)));
        }
    }
    Ok(SparseJoining::from_sorted(2 * arity, j.points(), tuples, out))
}

fn product_support_len(p: &Partition) -> usize {
    p.atoms().iter().map(|a| a.len() * a.len()).sum()
}

/// `μ_{T_1, .., T_k}` kept in factored form: the measure one level down and
/// the invariant partition used for the last relatively independent product.
/// Integrals are computed from this form; the full support is only built
/// on request.
///
/// The measure depends on the order of the transform list. Seminorms do not.
#[derive(Clone, Debug)]
pub struct HostMeasure<S> {
    ts: Vec<Gen>,
    base: SparseJoining<S>,
    atoms: Partition,
    atom_mass: Vec<S>,
    support_len: usize,
    cap: usize,
    ergodic_input: bool,
}

pub fn host_measure<S: Scalar>(
    sys: &FiniteSystem<S>,
    ts: &[Gen],
) -> Result<HostMeasure<S>, CubeError> {
    host_measure_capped(sys, ts, Caps::default().max_support)
}

pub fn host_measure_capped<S: Scalar>(
    sys: &FiniteSystem<S>,
    ts: &[Gen],
    cap: usize,
) -> Result<HostMeasure<S>, CubeError> {
    if ts.is_empty() {
        return Err(CubeError::EmptyTransformList);
    }
    let perms = ts
        .iter()
        .map(|g| g.resolve(sys))
        .collect::<Result<Vec<_>, _>>()?;
    let all: Vec<usize> = (0..sys.d()).collect();
    let ergodic_input = invariant_partition(sys, &all).map_or(true, |p| p.len() == 1);

    let mut level = SparseJoining::from_weights(sys.weights());
    for t in &perms[..perms.len() - 1] {
        let p = diagonal_invariant_partition(&level, t)?;
        level = relatively_independent_product_capped(&level, &p, cap)?;
    }
    let atoms = diagonal_invariant_partition(&level, perms.last().expect("nonempty"))?;
    let atom_mass = atom_masses(&level, &atoms)?;
    let support_len = product_support_len(&atoms);
    if support_len > cap {
        return Err(CubeError::SupportExplosion {
            size: support_len,
            cap,
        });
    }
    Ok(HostMeasure {
        ts: ts.to_vec(),
        base: level,
        atoms,
        atom_mass,
        support_len,
        cap,
        ergodic_input,
    })
}

impl<S: Scalar> HostMeasure<S> {
    /// Number of transforms `k`; the measure lives on `X^{2^k}`.
    pub fn k(&self) -> usize {
        self.ts.len()
    }

    pub fn ts(&self) -> &[Gen] {
        &self.ts
    }

    /// `μ_{T_1..T_{k-1}}` (or `μ` itself when `k = 1`).
    pub fn base(&self) -> &SparseJoining<S> {
        &self.base
    }

    /// `I_{T_k^{[k-1]}}` as a partition of the base support indices.
    pub fn base_partition(&self) -> &Partition {
        &self.atoms
    }

    pub fn support_len(&self) -> usize {
        self.support_len
    }

    /// False when `μ` was not ergodic for the full generator set; the
    /// construction is still well defined.
    pub fn ergodic_input(&self) -> bool {
        self.ergodic_input
    }

    /// The full measure on `X^{[k]}`.
    pub fn joining(&self) -> Result<SparseJoining<S>, CubeError> {
        relatively_independent_product_capped(&self.base, &self.atoms, self.cap)
    }

    /// `∫ ⊗_ε f_ε dμ_{T_1..T_k}`, with `fs` in coordinate order.
    ///
    /// Computed one level down: for each atom `A` of the last invariant
    /// partition, the lower and upper half-products are summed over `A` and
    /// combined as `s_0 s_1 / μ(A)`.
    pub fn integrate(&self, fs: &[&Observable<S>]) -> Result<S, CubeError> {
        let n = 1usize << self.k();
        if fs.len() != n {
            return Err(CubeError::ArityMismatch {
                expected: n,
                got: fs.len(),
            });
        }
        let half = n / 2;
        let (lower, upper) = fs.split_at(half);
        let symmetric = lower
            .iter()
            .zip(upper)
            .all(|(a, b)| std::ptr::eq(*a, *b) || a == b);
        let mut total = S::zero();
        for (atom, mass) in self.atoms.atoms().iter().zip(&self.atom_mass) {
            let s0 = self.atom_sum(atom, lower);
            if s0.is_zero() {
                continue;
            }
            let s1 = if symmetric {
                s0.clone()
            } else {
                self.atom_sum(atom, upper)
            };
            let mut term = s0;
            term *= &s1;
            term /= mass;
            total += &term;
        }
        Ok(total)
    }

    fn atom_sum(&self, atom: &[usize], fs: &[&Observable<S>]) -> S {
        let mut acc = S::zero();
        'tuples: for &u in atom {
            let t = self.base.tuple(u);
            let mut prod = self.base.mass(u).clone();
            for (f, &x) in fs.iter().zip(t) {
                let v = f.at(x);
                if v.is_zero() {
                    continue 'tuples;
                }
                prod *= v;
            }
            acc += &prod;
        }
        acc
    }

    /// Pre-root seminorm integral of `f` placed at every vertex.
    pub fn seminorm(&self, f: &Observable<S>) -> Seminorm<S> {
        let fs = vec![f; 1 << self.k()];
        let integral = self.integrate(&fs).expect("arity matches by construction");
        Seminorm::new(integral, self.k())
    }

    /// `E(F | I_{T_k^{[k-1]}})` for a function `F` on the base support.
    pub fn base_cond_expectation(&self, values: &[S]) -> Vec<S> {
        crate::sigma::cond_expectation_weighted(self.base.masses(), values, &self.atoms).0
    }

    /// Scales the mass of one base support tuple, leaving every other entry
    /// and the partition unchanged. The result is no longer a Host measure;
    /// this exists to inject faults into property checkers.
    pub fn perturb_base_mass(mut self, index: usize, factor: &S) -> Self {
        let mut masses = self.base.masses().to_vec();
        masses[index] *= factor;
        let tuples = (0..self.base.len()).flat_map(|i| self.base.tuple(i).to_vec()).collect();
        self.base = SparseJoining::from_sorted(self.base.arity(), self.base.points(), tuples, masses);
        self.atom_mass = self.atoms.atom_masses(self.base.masses());
        self
    }
}

/// `|||f|||^{2^k}` kept exactly, with the root taken only for display.
#[derive(Clone, Debug, PartialEq)]
pub struct Seminorm<S> {
    /// `∫ ⊗f dμ_{T_1..T_k}`, clamped to zero when negative within tolerance.
    pub integral: S,
    pub k: usize,
}

impl<S: Scalar> Seminorm<S> {
    pub fn new(integral: S, k: usize) -> Self {
        let integral = if integral < S::zero() && integral.negligible(ZERO_TOL) {
            S::zero()
        } else {
            integral
        };
        Seminorm { integral, k }
    }

    /// `|||f|||` as a float.
    pub fn value(&self) -> f64 {
        self.integral.to_f64().max(0.0).powf(1.0 / (1u64 << self.k) as f64)
    }

    /// Zero test on the pre-root integral.
    pub fn is_zero(&self) -> bool {
        self.integral.negligible(ZERO_TOL)
    }
}

/// `|||f|||_{μ, ts}`.
pub fn host_seminorm<S: Scalar>(
    sys: &FiniteSystem<S>,
    f: &Observable<S>,
    ts: &[Gen],
) -> Result<Seminorm<S>, CubeError> {
    Ok(host_measure(sys, ts)?.seminorm(f))
}

/// `Σ_tuples mass · Π_c f_c(tuple_c)` over an explicit support.
pub fn integrate_tensor<S: Scalar>(
    j: &SparseJoining<S>,
    fs: &[&Observable<S>],
) -> Result<S, CubeError> {
    if fs.len() != j.arity() {
        return Err(CubeError::ArityMismatch {
            expected: j.arity(),
            got: fs.len(),
        });
    }
    let mut total = S::zero();
    'tuples: for (t, m) in j.iter() {
        let mut prod = m.clone();
        for (f, &x) in fs.iter().zip(t) {
            let v = f.at(x);
            if v.is_zero() {
                continue 'tuples;
            }
            prod *= v;
        }
        total += &prod;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use crate::cubes::face_transformation;
    use crate::scalar::Rational;
    use crate::system::uniform_weights;
    use proptest::prelude::*;

    type Q = Rational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn rotations(m: usize, steps: &[i64]) -> FiniteSystem<Q> {
        let ts = steps
            .iter()
            .map(|&s| Permutation::rotation(m, s).images().to_vec())
            .collect();
        FiniteSystem::validate(uniform_weights(m), ts).unwrap()
    }

    fn obs(v: &[i64]) -> Observable<Q> {
        Observable::from_ints(v)
    }

    #[test]
    fn relative_products_of_small_examples() {
        let z2 = SparseJoining::<Q>::from_weights(&uniform_weights(2));
        let full = relatively_independent_product(&z2, &Partition::from_atoms(2, vec![vec![0, 1]])).unwrap();
        assert_eq!(full.len(), 4);
        assert!(full.masses().iter().all(|m| *m == q(1, 4)));
        let diag = relatively_independent_product(&z2, &Partition::from_atoms(2, vec![vec![0], vec![1]])).unwrap();
        assert_eq!(diag.mass_of(&[0, 0]), q(1, 2));
        assert_eq!(diag.mass_of(&[1, 1]), q(1, 2));
        assert_eq!(diag.len(), 2);

        let z4 = SparseJoining::<Q>::from_weights(&uniform_weights(4));
        let parity = Partition::from_atoms(4, vec![vec![0, 2], vec![1, 3]]);
        let j = relatively_independent_product(&z4, &parity).unwrap();
        assert_eq!(j.len(), 8);
        for (t, m) in j.iter() {
            assert_eq!((t[0] + t[1]) % 2, 0);
            assert_eq!(*m, q(1, 8));
        }
        assert!(relatively_independent_product(&z4, &Partition::from_atoms(4, vec![vec![0, 2]])).is_err());
    }

    #[test]
    fn host_measure_of_identity_is_diagonal() {
        let sys = rotations(2, &[0]);
        let j = host_measure(&sys, &gens(&[0])).unwrap().joining().unwrap();
        assert_eq!(j.len(), 2);
        assert_eq!(j.mass_of(&[1, 1]), q(1, 2));
    }

    #[test]
    fn host_measure_of_e3_matches_hand_enumeration() {
        let sys = rotations(4, &[1, 2]);
        let j = host_measure(&sys, &gens(&[0, 1])).unwrap().joining().unwrap();
        let mut expected = Vec::new();
        for u0 in 0..4 {
            for u1 in 0..4 {
                for a in 0..2 {
                    expected.push((vec![u0, u1, (u0 + 2 * a) % 4, (u1 + 2 * a) % 4], q(1, 32)));
                }
            }
        }
        assert_eq!(j, SparseJoining::from_entries(4, 4, expected));
    }

    #[test]
    fn integrals_of_spec_examples() {
        let e1 = rotations(2, &[1]);
        let f = obs(&[1, -1]);
        let h = host_measure(&e1, &gens(&[0])).unwrap();
        assert_eq!(h.integrate(&[&f, &f]).unwrap(), Q::zero());
        assert!(h.seminorm(&f).is_zero());

        let e3 = rotations(4, &[1, 2]);
        let f = obs(&[1, 0, -1, 0]);
        let s = host_seminorm(&e3, &f, &gens(&[0, 1])).unwrap();
        assert_eq!(s.integral, q(1, 4));
        assert!((s.value() - 0.5f64.sqrt()).abs() < 1e-12);

        let c = Observable::constant(4, q(3, 2));
        assert_eq!(host_seminorm(&e3, &c, &gens(&[0, 1])).unwrap().value(), 1.5);
        let one = Observable::constant(4, Q::one());
        let h = host_measure(&e3, &gens(&[0, 1])).unwrap();
        assert_eq!(h.integrate(&[&one; 4]).unwrap(), Q::one());
        assert_eq!(
            h.integrate(&[&one; 3]),
            Err(CubeError::ArityMismatch { expected: 4, got: 3 })
        );
    }

    #[test]
    fn face_maps_preserve_e3_measure() {
        let sys = rotations(4, &[1, 2]);
        let j = host_measure(&sys, &gens(&[0, 1])).unwrap().joining().unwrap();
        for axis in 0..2 {
            for side in [false, true] {
                let face = face_transformation(2, axis, side, sys.transform(axis)).unwrap();
                assert!(face.preserves(&j));
            }
        }
    }

    #[test]
    fn empty_list_and_bad_generator_are_rejected() {
        let sys = rotations(3, &[1]);
        assert_eq!(host_measure(&sys, &[]).unwrap_err(), CubeError::EmptyTransformList);
        assert_eq!(
            host_measure(&sys, &gens(&[1])).unwrap_err(),
            CubeError::GeneratorOutOfRange { axis: 1, d: 1 }
        );
        assert!(matches!(
            host_measure_capped(&rotations(8, &[1, 1]), &gens(&[0, 1]), 100),
            Err(CubeError::SupportExplosion { .. })
        ));
    }

    #[test]
    fn non_ergodic_input_is_flagged() {
        let h = host_measure(&rotations(4, &[2]), &gens(&[0])).unwrap();
        assert!(!h.ergodic_input());
        assert!(host_measure(&rotations(4, &[1]), &gens(&[0])).unwrap().ergodic_input());
    }

    fn small_system() -> impl Strategy<Value = (usize, Vec<i64>, Vec<i64>)> {
        (2usize..7, 1usize..4).prop_flat_map(|(m, k)| {
            (
                Just(m),
                proptest::collection::vec(0..m as i64, k),
                proptest::collection::vec(-2i64..3, m),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn contraction_matches_direct_sum_and_marginals((m, steps, vals) in small_system()) {
            let sys = rotations(m, &steps);
            let ts = gens(&(0..steps.len()).collect::<Vec<_>>());
            let h = host_measure(&sys, &ts).unwrap();
            let j = h.joining().unwrap();
            prop_assert_eq!(j.len(), h.support_len());
            prop_assert_eq!(j.total_mass(), Q::one());
            for c in 0..j.arity() {
                prop_assert_eq!(j.marginal(c), sys.weights().to_vec());
            }
            let fs: Vec<Observable<Q>> = (0..j.arity())
                .map(|c| Observable::from_ints(&vals.iter().map(|v| v + c as i64 % 2).collect::<Vec<_>>()))
                .collect();
            let refs: Vec<&Observable<Q>> = fs.iter().collect();
            prop_assert_eq!(h.integrate(&refs).unwrap(), integrate_tensor(&j, &refs).unwrap());
            let f = Observable::from_ints(&vals);
            prop_assert!(h.seminorm(&f).integral >= Q::zero());
        }
    }
}
