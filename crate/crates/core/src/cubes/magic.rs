use super::{face_transformation, gens, host_measure_capped, CubeError, SparseJoining};
use crate::perm::Permutation;
use crate::scalar::Scalar;
use crate::sigma::{join_of_invariants, Partition};
use crate::system::{Caps, FiniteSystem, Observable};

/// `(X^{[k]}, μ_{T_{a_1}..T_{a_k}})` with the upper face maps on the subset
/// axes and diagonal maps on the others.
///
/// Point `p` of the extension is support tuple `p` of [`Self::tuples`].
#[derive(Clone, Debug)]
pub struct CubeExtension<S> {
    pub system: FiniteSystem<S>,
    pub tuples: SparseJoining<S>,
    pub subset: Vec<usize>,
    /// Projection onto the all-ones coordinate.
    pub factor: Vec<usize>,
}

impl<S: Scalar> CubeExtension<S> {
    /// Image of the extension measure under the factor map.
    pub fn factor_pushforward(&self) -> Vec<S> {
        self.tuples.marginal(self.tuples.arity() - 1)
    }

    /// `π ∘ T'_i = T_i ∘ π` for every generator.
    pub fn is_equivariant(&self, base: &FiniteSystem<S>) -> bool {
        (0..base.d()).all(|i| {
            let (t, lifted) = (base.transform(i), self.system.transform(i));
            (0..self.system.m()).all(|p| self.factor[lifted.apply(p)] == t.apply(self.factor[p]))
        })
    }

    /// `g ∘ π` as an observable on the extension.
    pub fn lift(&self, g: &Observable<S>) -> Observable<S> {
        g.compose(&self.factor)
    }
}

pub fn cube_extension<S: Scalar>(
    sys: &FiniteSystem<S>,
    subset: &[usize],
) -> Result<CubeExtension<S>, CubeError> {
    cube_extension_capped(sys, subset, Caps::default().max_support)
}

pub fn cube_extension_capped<S: Scalar>(
    sys: &FiniteSystem<S>,
    subset: &[usize],
    cap: usize,
) -> Result<CubeExtension<S>, CubeError> {
    let tuples = host_measure_capped(sys, &gens(subset), cap)?.joining()?;
    let k = subset.len();
    let arity = tuples.arity();
    let lift = |map: &dyn Fn(&[usize]) -> Vec<usize>| {
        let images = (0..tuples.len())
            .map(|p| tuples.find(&map(tuples.tuple(p))).ok_or(CubeError::NotInvariant))
            .collect::<Result<Vec<_>, _>>()?;
        Permutation::from_images(images).map_err(|_| CubeError::NotInvariant)
    };
    let mut transforms = Vec::with_capacity(sys.d());
    for axis in 0..sys.d() {
        let t = sys.transform(axis);
        let perm = match subset.iter().position(|&a| a == axis) {
            Some(j) => {
                let face = face_transformation(k, j, true, t)?;
                lift(&|u| face.apply(u))?
            }
            None => lift(&|u| u.iter().map(|&x| t.apply(x)).collect())?,
        };
        transforms.push(perm);
    }
    let factor = (0..tuples.len()).map(|p| tuples.tuple(p)[arity - 1]).collect();
    let caps = Caps {
        max_support: cap,
        ..Caps::default()
    }
    .derived();
    let system = FiniteSystem::from_permutations(tuples.masses().to_vec(), transforms, &caps)?;
    Ok(CubeExtension {
        system,
        tuples,
        subset: subset.to_vec(),
        factor,
    })
}

/// A basis of `ker E(· | Z)`: on each atom `{a_0 < a_1 < ..}` the vectors
/// `δ_{a_0} − (μ(a_0)/μ(a_j)) δ_{a_j}`.
pub fn kernel_basis<S: Scalar>(sys: &FiniteSystem<S>, z: &Partition) -> Vec<Observable<S>> {
    let mut out = Vec::new();
    for atom in z.atoms() {
        let a0 = atom[0];
        for &aj in &atom[1..] {
            let mut f = vec![S::zero(); sys.m()];
            f[a0] = S::one();
            f[aj] = -sys.weight(a0).div_ref(sys.weight(aj));
            out.push(Observable(f));
        }
    }
    out
}

/// Outcome of a magic test.
#[derive(Clone, Debug, PartialEq)]
pub struct MagicTest<S> {
    pub magic: bool,
    /// A function with `E(f | Z) = 0` and nonzero seminorm.
    pub witness: Option<Observable<S>>,
    /// Pre-root cube integral of the witness.
    pub witness_integral: Option<S>,
    /// Basis vectors examined.
    pub tested: usize,
}

/// Whether `|||f||| = 0` exactly when `E(f | ∨ I_{T_i}) = 0` for the subset.
///
/// The null space of the seminorm is linear, so it suffices that every
/// vector of a basis of `ker E(· | Z)` has zero cube integral. The converse
/// direction holds for every system.
pub fn is_magic<S: Scalar>(sys: &FiniteSystem<S>, subset: &[usize]) -> Result<MagicTest<S>, CubeError> {
    is_magic_capped(sys, subset, Caps::default().max_support)
}

pub fn is_magic_capped<S: Scalar>(
    sys: &FiniteSystem<S>,
    subset: &[usize],
    cap: usize,
) -> Result<MagicTest<S>, CubeError> {
    let z = join_of_invariants(sys, subset)?;
    let host = host_measure_capped(sys, &gens(subset), cap)?;
    let basis = kernel_basis(sys, &z);
    for (i, f) in basis.into_iter().enumerate() {
        let s = host.seminorm(&f);
        if !s.is_zero() {
            return Ok(MagicTest {
                magic: false,
                witness: Some(f),
                witness_integral: Some(s.integral),
                tested: i + 1,
            });
        }
    }
    let tested = z.atoms().iter().map(|a| a.len() - 1).sum();
    Ok(MagicTest {
        magic: true,
        witness: None,
        witness_integral: None,
        tested,
    })
}
