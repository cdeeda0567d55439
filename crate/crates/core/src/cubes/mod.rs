//! Host cube measures, face transformations, seminorms and cube extensions.

mod face;
mod host;
mod index;
mod joining;
mod magic;

use thiserror::Error;

use crate::sigma::SigmaError;
use crate::system::SystemError;

pub use face::{face_transformation, CoordinateMap};
pub use host::{
    diagonal_invariant_partition, gens, host_measure, host_measure_capped, host_seminorm,
    integrate_tensor, relatively_independent_product, relatively_independent_product_capped, Gen,
    HostMeasure, Seminorm,
};
pub use index::CubeIndex;
pub use joining::SparseJoining;
pub use magic::{
    cube_extension, cube_extension_capped, is_magic, is_magic_capped, kernel_basis, CubeExtension,
    MagicTest,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CubeError {
    #[error("transform list is empty")]
    EmptyTransformList,
    #[error("face axis {} outside the {k}-dimensional cube", .axis + 1)]
    AxisOutOfRange { axis: usize, k: usize },
    #[error("generator T{} out of range (d = {d})", .axis + 1)]
    GeneratorOutOfRange { axis: usize, d: usize },
    #[error("support of {size} tuples exceeds cap {cap}")]
    SupportExplosion { size: usize, cap: usize },
    #[error("expected {expected} functions, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("partition atom has zero mass")]
    ZeroMassAtom,
    #[error("partition does not cover the joining support")]
    PartitionMismatch,
    #[error("map does not preserve the joining")]
    NotInvariant,
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Sigma(#[from] SigmaError),
    #[error(transparent)]
    System(#[from] SystemError),
}
