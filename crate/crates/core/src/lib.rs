//! Exact computations with finite measure-preserving `Z^d`-systems: Host cube
//! measures and seminorms, cube extensions, Furstenberg–Ryzhikov joinings,
//! multiple and cubic ergodic averages with period-box limits, and checkers
//! that bind them into property suites.
//!
//! Every numeric routine is generic over [`Scalar`], implemented for `f64`
//! and for exact [`Rational`] arithmetic.

pub mod averages;
pub mod cubes;
pub mod dsu;
pub mod generate;
pub mod joinings;
pub mod perm;
pub mod scalar;
pub mod sigma;
pub mod system;
pub mod verify;

pub use averages::{
    average, convergence_report, exact_limit, stream_average, Average, AverageError,
    AverageSpec, ConvergenceReport, Horizon,
};
pub use cubes::{
    cube_extension, face_transformation, host_measure, host_seminorm, integrate_tensor,
    is_magic, relatively_independent_product, CubeError, CubeExtension, CubeIndex, Gen,
    HostMeasure, Seminorm, SparseJoining,
};
pub use generate::{corpus, CorpusEntry, GenerateError, CORPUS_SEED};
pub use joinings::{
    furstenberg_joining, joining_ergodicity, pointwise_joining, JoiningError, PointwiseJoinings,
};
pub use perm::Permutation;
pub use scalar::{Mode, Rational, Scalar, EQ_TOL, ZERO_TOL};
pub use sigma::{
    cond_expectation, ergodic_decomposition, invariant_partition, join_partitions,
    quotient_system, Partition, SigmaError,
};
pub use system::{product_system, Caps, FiniteSystem, Observable, SystemError, TransformWord};
pub use verify::{CheckReport, Record, Status, SuiteOptions, Verifier, VerifyError};
