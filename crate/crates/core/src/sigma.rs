//! Finite σ-algebras as partitions of the positive-mass support.
//!
//! The invariant σ-algebra of a set of generators is the orbit partition of
//! the subgroup they generate. Null points belong to no atom.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dsu::DisjointSets;
use crate::perm::Permutation;
use crate::scalar::Scalar;
use crate::system::{Caps, FiniteSystem, Observable, SystemError};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SigmaError {
    #[error("generator subset is empty")]
    EmptySubset,
    #[error("generator T{} out of range (d = {d})", .axis + 1)]
    AxisOutOfRange { axis: usize, d: usize },
    #[error("partitions cover different supports")]
    SupportMismatch,
    #[error("partition is not invariant: T{} splits atom {atom}", .axis + 1)]
    NotInvariantPartition { axis: usize, atom: usize },
    #[error(transparent)]
    System(#[from] SystemError),
}

/// Disjoint atoms over a ground set `0..n`. Atoms are sorted internally and
/// ordered by their least element, so equal partitions compare equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    atoms: Vec<Vec<usize>>,
    atom_of: Vec<Option<usize>>,
}

impl Partition {
    /// Builds a partition of a ground set of size `n` from arbitrary atoms.
    /// Panics if atoms overlap or mention elements `>= n`.
    pub fn from_atoms(n: usize, atoms: Vec<Vec<usize>>) -> Self {
        let mut atoms: Vec<Vec<usize>> = atoms
            .into_iter()
            .filter(|a| !a.is_empty())
            .map(|mut a| {
                a.sort_unstable();
                a
            })
            .collect();
        atoms.sort_unstable_by_key(|a| a[0]);
        let mut atom_of = vec![None; n];
        for (id, atom) in atoms.iter().enumerate() {
            for &x in atom {
                assert!(atom_of[x].is_none(), "element {x} appears in two atoms");
                atom_of[x] = Some(id);
            }
        }
        Partition { atoms, atom_of }
    }

    /// Partition from class labels (`None` = not covered).
    pub fn from_labels(labels: &[Option<usize>], count: usize) -> Self {
        let mut atoms = vec![Vec::new(); count];
        for (x, l) in labels.iter().enumerate() {
            if let Some(l) = l {
                atoms[*l].push(x);
            }
        }
        Self::from_atoms(labels.len(), atoms)
    }

    /// Orbit partition of the elements accepted by `keep` under the group
    /// generated by `maps`. The accepted set must be closed under every map.
    pub fn orbits<F>(n: usize, keep: impl Fn(usize) -> bool + Copy, maps: &[F]) -> Self
    where
        F: Fn(usize) -> usize,
    {
        let mut dsu = DisjointSets::new(n);
        for x in (0..n).filter(|&x| keep(x)) {
            for map in maps {
                dsu.union(x, map(x));
            }
        }
        let (labels, count) = dsu.labels(keep);
        Self::from_labels(&labels, count)
    }

    pub fn ground_len(&self) -> usize {
        self.atom_of.len()
    }

    pub fn atoms(&self) -> &[Vec<usize>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    #[inline]
    pub fn atom_of(&self, x: usize) -> Option<usize> {
        self.atom_of[x]
    }

    pub fn covers(&self, x: usize) -> bool {
        self.atom_of[x].is_some()
    }

    /// True if every atom of `self` lies inside an atom of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.atom_of.len() == coarser.atom_of.len()
            && self.atoms.iter().all(|a| {
                let target = coarser.atom_of(a[0]);
                target.is_some() && a.iter().all(|&x| coarser.atom_of(x) == target)
            })
    }

    /// Mass of each atom.
    pub fn atom_masses<S: Scalar>(&self, weights: &[S]) -> Vec<S> {
        self.atoms
            .iter()
            .map(|a| crate::scalar::sum(a.iter().map(|&x| weights[x].clone())))
            .collect()
    }
}

fn check_subset<S: Scalar>(sys: &FiniteSystem<S>, subset: &[usize]) -> Result<(), SigmaError> {
    if subset.is_empty() {
        return Err(SigmaError::EmptySubset);
    }
    match subset.iter().find(|&&a| a >= sys.d()) {
        Some(&axis) => Err(SigmaError::AxisOutOfRange { axis, d: sys.d() }),
        None => Ok(()),
    }
}

/// `I_{T_i : i ∈ subset}`: orbits of the generated subgroup on the support.
pub fn invariant_partition<S: Scalar>(
    sys: &FiniteSystem<S>,
    subset: &[usize],
) -> Result<Partition, SigmaError> {
    check_subset(sys, subset)?;
    let perms: Vec<&Permutation> = subset.iter().map(|&i| sys.transform(i)).collect();
    Ok(orbit_partition(sys, &perms))
}

/// Orbit partition of the support under arbitrary permutations of the points.
pub fn orbit_partition<S: Scalar>(sys: &FiniteSystem<S>, perms: &[&Permutation]) -> Partition {
    let maps: Vec<_> = perms.iter().map(|p| move |x: usize| p.apply(x)).collect();
    Partition::orbits(sys.m(), |x| sys.in_support(x), &maps)
}

/// Common refinement `p ∨ q`.
pub fn join_partitions(p: &Partition, q: &Partition) -> Result<Partition, SigmaError> {
    let n = p.ground_len();
    if n != q.ground_len() || (0..n).any(|x| p.covers(x) != q.covers(x)) {
        return Err(SigmaError::SupportMismatch);
    }
    let mut classes: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for x in 0..n {
        if let (Some(a), Some(b)) = (p.atom_of(x), q.atom_of(x)) {
            classes.entry((a, b)).or_default().push(x);
        }
    }
    Ok(Partition::from_atoms(n, classes.into_values().collect()))
}

/// `Z = ∨_{i ∈ subset} I_{T_i}`.
pub fn join_of_invariants<S: Scalar>(
    sys: &FiniteSystem<S>,
    subset: &[usize],
) -> Result<Partition, SigmaError> {
    check_subset(sys, subset)?;
    let mut acc = invariant_partition(sys, &subset[..1])?;
    for &i in &subset[1..] {
        acc = join_partitions(&acc, &invariant_partition(sys, &[i])?)?;
    }
    Ok(acc)
}

/// `E(f | p)`: atom-wise μ-average; null points get zero.
pub fn cond_expectation<S: Scalar>(
    sys: &FiniteSystem<S>,
    f: &Observable<S>,
    p: &Partition,
) -> Observable<S> {
    cond_expectation_weighted(sys.weights(), f.values(), p)
}

pub(crate) fn cond_expectation_weighted<S: Scalar>(
    weights: &[S],
    values: &[S],
    p: &Partition,
) -> Observable<S> {
    let mut out = vec![S::zero(); values.len()];
    for atom in p.atoms() {
        let mut mass = S::zero();
        let mut total = S::zero();
        for &x in atom {
            mass += &weights[x];
            total += &values[x].mul_ref(&weights[x]);
        }
        if mass.is_zero() {
            continue;
        }
        let mean = total.div_ref(&mass);
        for &x in atom {
            out[x] = mean.clone();
        }
    }
    Observable(out)
}

/// One ergodic component: an orbit, its mass, and the normalized restriction of `μ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Component<S> {
    pub points: Vec<usize>,
    pub weight: S,
    pub measure: Vec<S>,
}

impl<S: Scalar> Component<S> {
    /// The system with this component's measure (same points and generators).
    pub fn system(&self, sys: &FiniteSystem<S>) -> FiniteSystem<S> {
        sys.with_weights(self.measure.clone())
            .expect("a component measure is invariant and normalized")
    }
}

/// Ergodic decomposition of `μ` under the subgroup generated by `subset`.
pub fn ergodic_decomposition<S: Scalar>(
    sys: &FiniteSystem<S>,
    subset: &[usize],
) -> Result<Vec<Component<S>>, SigmaError> {
    let p = invariant_partition(sys, subset)?;
    let masses = p.atom_masses(sys.weights());
    Ok(p
        .atoms()
        .iter()
        .zip(masses)
        .map(|(atom, weight)| {
            let mut measure = vec![S::zero(); sys.m()];
            for &x in atom {
                measure[x] = sys.weight(x).div_ref(&weight);
            }
            Component {
                points: atom.clone(),
                weight,
                measure,
            }
        })
        .collect())
}

/// A factor given by an invariant partition.
#[derive(Clone, Debug, PartialEq)]
pub struct Quotient<S> {
    pub system: FiniteSystem<S>,
    /// Atom index of each point; `None` for null points.
    pub map: Vec<Option<usize>>,
}

impl<S: Scalar> Quotient<S> {
    /// `g ∘ π`, extended by zero on null points.
    pub fn lift(&self, g: &Observable<S>) -> Observable<S> {
        Observable(
            self.map
                .iter()
                .map(|a| a.map_or_else(S::zero, |a| g.at(a).clone()))
                .collect(),
        )
    }
}

/// Factor system on the atoms of a partition invariant under every generator.
pub fn quotient_system<S: Scalar>(
    sys: &FiniteSystem<S>,
    p: &Partition,
) -> Result<Quotient<S>, SigmaError> {
    if p.ground_len() != sys.m() || (0..sys.m()).any(|x| p.covers(x) != sys.in_support(x)) {
        return Err(SigmaError::SupportMismatch);
    }
    let mut transforms = Vec::with_capacity(sys.d());
    for (axis, t) in sys.transforms().iter().enumerate() {
        let mut images = Vec::with_capacity(p.len());
        for (id, atom) in p.atoms().iter().enumerate() {
            let target = p.atom_of(t.apply(atom[0]));
            if atom.iter().any(|&x| p.atom_of(t.apply(x)) != target) {
                return Err(SigmaError::NotInvariantPartition { axis, atom: id });
            }
            images.push(target.expect("support is invariant"));
        }
        transforms.push(
            Permutation::from_images(images)
                .map_err(|_| SigmaError::NotInvariantPartition { axis, atom: 0 })?,
        );
    }
    let weights = p.atom_masses(sys.weights());
    let system = FiniteSystem::from_permutations(weights, transforms, &Caps::default().derived())?;
    let map = (0..sys.m()).map(|x| p.atom_of(x)).collect();
    Ok(Quotient { system, map })
}

/// Checks the partition is a union of orbits for every generator.
pub fn is_invariant<S: Scalar>(sys: &FiniteSystem<S>, p: &Partition) -> bool {
    sys.transforms().iter().all(|t| {
        p.atoms().iter().all(|atom| {
            let target = p.atom_of(t.apply(atom[0]));
            atom.iter().all(|&x| p.atom_of(t.apply(x)) == target)
        })
    })
}

/// Σ_x f(x) μ(x).
pub fn expectation<S: Scalar>(sys: &FiniteSystem<S>, f: &Observable<S>) -> S {
    let mut acc = S::zero();
    for (w, v) in sys.weights().iter().zip(f.values()) {
        if !w.is_zero() {
            acc += &w.mul_ref(v);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use crate::scalar::Rational;
    use crate::system::uniform_weights;
    use proptest::prelude::*;

    type Q = Rational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn rot(m: usize, steps: &[i64]) -> FiniteSystem<Q> {
        let t = steps.iter().map(|&s| Permutation::rotation(m, s)).collect();
        FiniteSystem::from_permutations(uniform_weights(m), t, &Caps::default()).unwrap()
    }

    #[test]
    fn invariant_partition_examples() {
        let e1 = rot(2, &[1]);
        assert_eq!(invariant_partition(&e1, &[0]).unwrap().atoms(), &[vec![0, 1]]);
        let z4 = rot(4, &[2]);
        assert_eq!(
            invariant_partition(&z4, &[0]).unwrap().atoms(),
            &[vec![0, 2], vec![1, 3]]
        );
        let id = rot(3, &[0]);
        assert_eq!(
            invariant_partition(&id, &[0]).unwrap().atoms(),
            &[vec![0], vec![1], vec![2]]
        );
        assert_eq!(invariant_partition(&id, &[]), Err(SigmaError::EmptySubset));
        assert!(matches!(
            invariant_partition(&id, &[3]),
            Err(SigmaError::AxisOutOfRange { axis: 3, d: 1 })
        ));
    }

    #[test]
    fn join_examples() {
        let all = Partition::from_atoms(4, vec![vec![0, 1, 2, 3]]);
        let parity = Partition::from_atoms(4, vec![vec![0, 2], vec![1, 3]]);
        let halves = Partition::from_atoms(4, vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(join_partitions(&all, &parity).unwrap(), parity);
        assert_eq!(join_partitions(&halves, &parity).unwrap().len(), 4);
        assert_eq!(join_partitions(&parity, &parity).unwrap(), parity);
        let partial = Partition::from_atoms(4, vec![vec![0, 2]]);
        assert_eq!(join_partitions(&partial, &parity), Err(SigmaError::SupportMismatch));
    }

    #[test]
    fn cond_expectation_examples() {
        let e1 = rot(2, &[1]);
        let f = Observable::<Q>::from_ints(&[1, -1]);
        let p = invariant_partition(&e1, &[0]).unwrap();
        assert_eq!(cond_expectation(&e1, &f, &p), Observable::from_ints(&[0, 0]));

        let z4 = rot(4, &[1]);
        let f = Observable::<Q>::from_ints(&[1, 0, -1, 0]);
        let parity = Partition::from_atoms(4, vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(cond_expectation(&z4, &f, &parity), Observable::from_ints(&[0, 0, 0, 0]));

        let singles = Partition::from_atoms(4, (0..4).map(|x| vec![x]).collect());
        assert_eq!(cond_expectation(&z4, &f, &singles), f);
    }

    #[test]
    fn null_points_get_zero_expectation() {
        let w = vec![q(1, 2), q(1, 2), Q::zero()];
        let sys = FiniteSystem::validate(w, vec![vec![1, 0, 2]]).unwrap();
        let p = invariant_partition(&sys, &[0]).unwrap();
        assert_eq!(p.atoms(), &[vec![0, 1]]);
        assert!(!p.covers(2));
        let f = Observable::<Q>::from_ints(&[3, 1, 9]);
        assert_eq!(cond_expectation(&sys, &f, &p), Observable::from_ints(&[2, 2, 0]));
    }

    #[test]
    fn ergodic_decomposition_examples() {
        let z4 = rot(4, &[2]);
        let comps = ergodic_decomposition(&z4, &[0]).unwrap();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].weight, q(1, 2));
        assert_eq!(comps[0].measure, vec![q(1, 2), Q::zero(), q(1, 2), Q::zero()]);

        let e3 = rot(4, &[1, 2]);
        let comps = ergodic_decomposition(&e3, &[0, 1]).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].measure, e3.weights().to_vec());

        // (Z/2)^2, T shifts the first coordinate: components indexed by the second
        let t = vec![2, 3, 0, 1];
        let sq = FiniteSystem::<Q>::validate(uniform_weights(4), vec![t]).unwrap();
        let comps = ergodic_decomposition(&sq, &[0]).unwrap();
        let points: Vec<_> = comps.iter().map(|c| c.points.clone()).collect();
        assert_eq!(points, vec![vec![0, 2], vec![1, 3]]);
    }

    #[test]
    fn quotient_examples() {
        let z4 = rot(4, &[1]);
        let parity = Partition::from_atoms(4, vec![vec![0, 2], vec![1, 3]]);
        let qt = quotient_system(&z4, &parity).unwrap();
        assert_eq!(qt.system.m(), 2);
        assert_eq!(qt.system.transform(0).images(), &[1, 0]);
        assert_eq!(qt.map, vec![Some(0), Some(1), Some(0), Some(1)]);
        // equivariance and measure preservation
        for x in 0..4 {
            let lhs = qt.map[z4.transform(0).apply(x)].unwrap();
            assert_eq!(lhs, qt.system.transform(0).apply(qt.map[x].unwrap()));
        }
        assert_eq!(qt.system.weights(), &[q(1, 2), q(1, 2)]);

        let singles = Partition::from_atoms(4, (0..4).map(|x| vec![x]).collect());
        assert_eq!(quotient_system(&z4, &singles).unwrap().system, z4);

        let full = Partition::from_atoms(4, vec![vec![0, 1, 2, 3]]);
        let one = quotient_system(&z4, &full).unwrap();
        assert_eq!(one.system.m(), 1);

        let halves = Partition::from_atoms(4, vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(
            quotient_system(&z4, &halves),
            Err(SigmaError::NotInvariantPartition { axis: 0, atom: 0 })
        );
    }

    fn arb_system() -> impl Strategy<Value = (FiniteSystem<Q>, Vec<i64>)> {
        (2usize..10, prop::collection::vec(-4i64..5, 1..3), prop::collection::vec(-5i64..6, 10))
            .prop_map(|(m, steps, f)| (rot(m, &steps), f[..m].to_vec()))
    }

    proptest! {
        #[test]
        fn cond_expectation_laws((sys, f) in arb_system()) {
            let f = Observable::<Q>::from_ints(&f);
            let p = invariant_partition(&sys, &[0]).unwrap();
            let e = cond_expectation(&sys, &f, &p);
            prop_assert_eq!(cond_expectation(&sys, &e, &p), e.clone());
            prop_assert_eq!(expectation(&sys, &e), expectation(&sys, &f));
            let sq = |g: &Observable<Q>| expectation(&sys, &Observable(g.values().iter().map(|v| v.mul_ref(v)).collect()));
            prop_assert!(sq(&e) <= sq(&f));
        }

        #[test]
        fn bigger_subgroups_have_coarser_orbits((sys, _) in arb_system()) {
            let d = sys.d();
            let all: Vec<usize> = (0..d).collect();
            let big = invariant_partition(&sys, &all).unwrap();
            for i in 0..d {
                prop_assert!(invariant_partition(&sys, &[i]).unwrap().refines(&big));
            }
            let comps = ergodic_decomposition(&sys, &all).unwrap();
            let mut rebuilt = vec![Q::zero(); sys.m()];
            for c in &comps {
                for (x, w) in c.measure.iter().enumerate() {
                    rebuilt[x] += &c.weight.mul_ref(w);
                }
            }
            prop_assert_eq!(rebuilt, sys.weights().to_vec());
        }
    }
}
