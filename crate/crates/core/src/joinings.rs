//! The Furstenberg–Ryzhikov self-joining `μ^F` on `X^d` and its pointwise
//! components `μ^F_x`.
//!
//! For a finite system the Cesàro average defining `μ^F` is periodic in `n`,
//! so `μ^F_x` is the uniform measure on the orbit of `(x, .., x)` under
//! `R = T_1 × .. × T_d` and `μ^F = Σ_x μ(x) μ^F_x`.

use num_integer::Integer;
use rayon::prelude::*;
use thiserror::Error;

use crate::cubes::{CoordinateMap, CubeError, SparseJoining};
use crate::dsu::DisjointSets;
use crate::scalar::Scalar;
use crate::sigma::Partition;
use crate::system::{Caps, FiniteSystem, SystemError};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum JoiningError {
    #[error("point {point} has zero mass")]
    ZeroMassPoint { point: usize },
    #[error("map does not preserve the joining")]
    NotInvariant,
    #[error("the projection identity needs at least two generators")]
    TooFewGenerators,
    #[error(transparent)]
    Cube(#[from] CubeError),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// `R = T_1 × T_2 × .. × T_d`.
pub fn product_map<S: Scalar>(sys: &FiniteSystem<S>) -> CoordinateMap {
    CoordinateMap::new(sys.transforms().to_vec())
}

/// Generators of `H_d`: `R` followed by the diagonals `T_i × .. × T_i`.
pub fn h_d_generators<S: Scalar>(sys: &FiniteSystem<S>) -> Vec<CoordinateMap> {
    let mut out = vec![product_map(sys)];
    out.extend(sys.transforms().iter().map(|t| CoordinateMap::diagonal(sys.d(), t)));
    out
}

/// Least `P > 0` with `T_i^P x = x` for every `i`.
fn diagonal_period<S: Scalar>(sys: &FiniteSystem<S>, x: usize) -> u64 {
    sys.transforms()
        .iter()
        .fold(1u64, |p, t| p.lcm(&(t.cycle_len(x) as u64)))
}

/// The `R`-orbit of `(x, .., x)`, in the order `n = 0, 1, ..`.
fn diagonal_orbit<S: Scalar>(
    sys: &FiniteSystem<S>,
    x: usize,
    cap: usize,
) -> Result<Vec<Vec<usize>>, CubeError> {
    let period = diagonal_period(sys, x);
    if period > cap as u64 {
        return Err(CubeError::SupportExplosion {
            size: period.min(usize::MAX as u64) as usize,
            cap,
        });
    }
    Ok((0..period as i64)
        .map(|n| sys.transforms().iter().map(|t| t.apply_pow(x, n)).collect())
        .collect())
}

pub fn furstenberg_joining<S: Scalar>(sys: &FiniteSystem<S>) -> Result<SparseJoining<S>, JoiningError> {
    furstenberg_joining_capped(sys, Caps::default().max_support)
}

/// `μ^F`, by enumerating one diagonal orbit per support point.
pub fn furstenberg_joining_capped<S: Scalar>(
    sys: &FiniteSystem<S>,
    cap: usize,
) -> Result<SparseJoining<S>, JoiningError> {
    let parts = sys
        .support()
        .into_par_iter()
        .map(|x| {
            let orbit = diagonal_orbit(sys, x, cap)?;
            let mass = sys.weight(x).div_ref(&S::from_int(orbit.len() as i64));
            Ok(orbit.into_iter().map(|t| (t, mass.clone())).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>, CubeError>>()?;
    let size: usize = parts.iter().map(Vec::len).sum();
    if size > cap {
        return Err(CubeError::SupportExplosion { size, cap }.into());
    }
    Ok(SparseJoining::from_entries(sys.d(), sys.m(), parts.into_iter().flatten()))
}

/// `μ^F_x`: uniform on the `R`-orbit of `(x, .., x)`.
pub fn pointwise_joining<S: Scalar>(
    sys: &FiniteSystem<S>,
    x: usize,
) -> Result<SparseJoining<S>, JoiningError> {
    if !sys.in_support(x) {
        return Err(JoiningError::ZeroMassPoint { point: x });
    }
    let orbit = diagonal_orbit(sys, x, Caps::default().max_support)?;
    let mass = S::from_ratio(1, orbit.len() as i64);
    Ok(SparseJoining::from_entries(
        sys.d(),
        sys.m(),
        orbit.into_iter().map(|t| (t, mass.clone())),
    ))
}

/// The family `x ↦ μ^F_x` over the support. Points whose diagonals lie on a
/// common `R`-orbit share one stored measure.
#[derive(Clone, Debug)]
pub struct PointwiseJoinings<S> {
    class_of: Vec<Option<usize>>,
    measures: Vec<SparseJoining<S>>,
}

impl<S: Scalar> PointwiseJoinings<S> {
    pub fn new(sys: &FiniteSystem<S>) -> Result<Self, JoiningError> {
        let mut class_of = vec![None; sys.m()];
        let mut measures = Vec::new();
        for x in sys.support() {
            if class_of[x].is_some() {
                continue;
            }
            let orbit = diagonal_orbit(sys, x, Caps::default().max_support)?;
            for t in &orbit {
                if t.iter().all(|&y| y == t[0]) {
                    class_of[t[0]] = Some(measures.len());
                }
            }
            let mass = S::from_ratio(1, orbit.len() as i64);
            measures.push(SparseJoining::from_entries(
                sys.d(),
                sys.m(),
                orbit.into_iter().map(|t| (t, mass.clone())),
            ));
        }
        Ok(PointwiseJoinings { class_of, measures })
    }

    /// `μ^F_x`, or `None` for null points.
    pub fn get(&self, x: usize) -> Option<&SparseJoining<S>> {
        self.class_of[x].map(|c| &self.measures[c])
    }

    pub fn class_of(&self, x: usize) -> Option<usize> {
        self.class_of[x]
    }

    /// Distinct measures, one per class.
    pub fn measures(&self) -> &[SparseJoining<S>] {
        &self.measures
    }

    /// `Σ_x μ(x) μ^F_x`.
    pub fn mixture(&self, sys: &FiniteSystem<S>) -> SparseJoining<S> {
        let mut class_mass = vec![S::zero(); self.measures.len()];
        for x in sys.support() {
            class_mass[self.class_of[x].expect("support point")] += sys.weight(x);
        }
        SparseJoining::mixture(class_mass.into_iter().zip(&self.measures))
            .expect("all measures have arity d")
    }
}

/// One piece of a disintegration.
#[derive(Clone, Debug, PartialEq)]
pub struct Conditional<S> {
    /// Support indices of the atom.
    pub atom: Vec<usize>,
    pub measure: SparseJoining<S>,
    pub mass: S,
}

/// `j` restricted to each atom of a partition of its support, normalized.
pub fn disintegrate<S: Scalar>(j: &SparseJoining<S>, p: &Partition) -> Vec<Conditional<S>> {
    p.atoms()
        .iter()
        .map(|atom| {
            let (measure, mass) = j.conditional(atom);
            Conditional {
                atom: atom.clone(),
                measure,
                mass,
            }
        })
        .collect()
}

/// `Σ mass · conditional`, which reproduces the disintegrated joining.
pub fn reassemble<S: Scalar>(parts: &[Conditional<S>]) -> Option<SparseJoining<S>> {
    SparseJoining::mixture(parts.iter().map(|c| (c.mass.clone(), &c.measure)))
}

/// Orbits of the group generated by `maps` on the support of `j`, as a
/// partition of support indices.
pub fn orbit_partition_of<S: Scalar>(
    j: &SparseJoining<S>,
    maps: &[CoordinateMap],
) -> Result<Partition, JoiningError> {
    let mut dsu = DisjointSets::new(j.len());
    for map in maps {
        if map.arity() != j.arity() {
            return Err(JoiningError::NotInvariant);
        }
        for i in 0..j.len() {
            let target = j.find(&map.apply(j.tuple(i))).ok_or(JoiningError::NotInvariant)?;
            dsu.union(i, target);
        }
    }
    let (labels, count) = dsu.labels(|_| true);
    Ok(Partition::from_labels(&labels, count))
}

/// Whether the maps preserve `j` and act on its support with one orbit.
pub fn joining_ergodicity<S: Scalar>(
    j: &SparseJoining<S>,
    maps: &[CoordinateMap],
) -> Result<bool, JoiningError> {
    if !maps.iter().all(|m| m.preserves(j)) {
        return Err(JoiningError::NotInvariant);
    }
    Ok(orbit_partition_of(j, maps)?.len() <= 1)
}

/// `(X, μ, T_1^{-1}T_2, .., T_1^{-1}T_d)`.
pub fn relative_system<S: Scalar>(sys: &FiniteSystem<S>) -> Result<FiniteSystem<S>, JoiningError> {
    if sys.d() < 2 {
        return Err(JoiningError::TooFewGenerators);
    }
    let t1_inv = sys.transform(0).inverse();
    let ts = sys.transforms()[1..].iter().map(|t| t1_inv.compose(t)).collect();
    Ok(FiniteSystem::from_permutations(
        sys.weights().to_vec(),
        ts,
        &Caps::default().derived(),
    )?)
}

/// Both sides of the projection identity: `μ^F` pushed onto its last `d − 1`
/// coordinates, and the self-joining of `(T_1^{-1}T_2, .., T_1^{-1}T_d)`.
pub fn projection_identity<S: Scalar>(
    sys: &FiniteSystem<S>,
) -> Result<(SparseJoining<S>, SparseJoining<S>), JoiningError> {
    let rel = relative_system(sys)?;
    let coords: Vec<usize> = (1..sys.d()).collect();
    let projected = furstenberg_joining(sys)?.project(&coords);
    Ok((projected, furstenberg_joining(&rel)?))
}
