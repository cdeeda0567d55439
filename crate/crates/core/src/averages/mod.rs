//! Multiple, cubic and averaged ergodic averages along finite orbits, their
//! exact Cesàro limits, and convergence diagnostics.

mod engine;
mod stream;

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::cubes::CubeIndex;
use crate::scalar::{Scalar, EQ_TOL};
use crate::system::{FiniteSystem, Observable};

pub use engine::Horizon;
pub use stream::{
    stream_average, AffineMap, StreamAverage, StreamFunction, StreamSystem, DEFAULT_STREAM_GRID,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AverageError {
    #[error("expected {expected} functions, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("function has {got} values but the system has {expected} points")]
    LengthMismatch { expected: usize, got: usize },
    #[error("vertex {vertex} does not belong to the {d}-dimensional cube")]
    BadVertex { vertex: String, d: usize },
    #[error("sigma must have at least one nonzero coordinate")]
    ZeroSigma,
    #[error("base point {point} outside 0..{m}")]
    PointOutOfRange { point: usize, m: usize },
    #[error("N must be at least 1")]
    ZeroN,
    #[error("grid must be nonempty and strictly increasing")]
    BadGrid,
    #[error("stream maps T{} and T{} do not commute at sample {sample}", .i + 1, .j + 1)]
    NonCommutingStream { i: usize, j: usize, sample: usize },
    #[error("stream maps must act on the same torus and have square integer matrices")]
    BadStream,
    #[error("orbit box of {size} evaluations exceeds cap {cap}")]
    BoxTooLarge { size: u128, cap: u128 },
}

/// Which average, with its functions.
#[derive(Clone, Debug, PartialEq)]
pub enum Average<S> {
    /// `(1/N) Σ_n Π_i f_i(T_i^n x)`, one function per generator.
    Multiple(Vec<Observable<S>>),
    /// `(1/N^d) Σ_{n} Π_ε f_ε(Π T_i^{n_i ε_i} x)` over the listed vertices.
    /// The usual cubic average lists every `ε ≠ 0`.
    Cubic(Vec<(CubeIndex, Observable<S>)>),
    /// `(1/N^{d+1}) Σ_{n⃗} Σ_n Π_j f_j(T_j^n Π_i T_i^{n_i} x)`.
    AveragedMultiple(Vec<Observable<S>>),
    /// `(1/N^{2d}) Σ_{m⃗} Σ_{n⃗} Π_{ε ∈ V_d} f_ε(Π T_i^{m_i + n_i ε_i} x)`,
    /// functions listed in vertex order.
    AveragedCubic(Vec<Observable<S>>),
    /// `S_{σ,N}(f, x)`.
    SSigma { f: Observable<S>, sigma: CubeIndex },
}

impl<S: Scalar> Average<S> {
    pub fn kind(&self) -> &'static str {
        match self {
            Average::Multiple(_) => "multiple",
            Average::Cubic(_) => "cubic",
            Average::AveragedMultiple(_) => "averaged_multiple",
            Average::AveragedCubic(_) => "averaged_cubic",
            Average::SSigma { .. } => "s_sigma",
        }
    }

    /// The cubic average with `f_ε` supplied for every `ε ≠ 0`, in vertex order.
    pub fn cubic_nonzero(d: usize, fs: Vec<Observable<S>>) -> Self {
        Average::Cubic(CubeIndex::vertices(d).skip(1).zip(fs).collect())
    }
}

/// An average evaluated at a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct AverageSpec<S> {
    pub average: Average<S>,
    pub x: usize,
}

impl<S: Scalar> AverageSpec<S> {
    pub fn new(average: Average<S>, x: usize) -> Self {
        AverageSpec { average, x }
    }

    pub fn validate(&self, sys: &FiniteSystem<S>) -> Result<(), AverageError> {
        let (m, d) = (sys.m(), sys.d());
        if self.x >= m {
            return Err(AverageError::PointOutOfRange { point: self.x, m });
        }
        let check_len = |f: &Observable<S>| {
            if f.len() == m {
                Ok(())
            } else {
                Err(AverageError::LengthMismatch {
                    expected: m,
                    got: f.len(),
                })
            }
        };
        let check_count = |expected: usize, got: usize| {
            if expected == got {
                Ok(())
            } else {
                Err(AverageError::ArityMismatch { expected, got })
            }
        };
        let check_vertex = |e: &CubeIndex| {
            if e.dim() == d {
                Ok(())
            } else {
                Err(AverageError::BadVertex {
                    vertex: e.to_string(),
                    d,
                })
            }
        };
        match &self.average {
            Average::Multiple(fs) | Average::AveragedMultiple(fs) => {
                check_count(d, fs.len())?;
                fs.iter().try_for_each(check_len)
            }
            Average::AveragedCubic(fs) => {
                check_count(1 << d, fs.len())?;
                fs.iter().try_for_each(check_len)
            }
            Average::Cubic(fs) => fs.iter().try_for_each(|(e, f)| {
                check_vertex(e)?;
                check_len(f)
            }),
            Average::SSigma { f, sigma } => {
                check_vertex(sigma)?;
                if sigma.weight() == 0 {
                    return Err(AverageError::ZeroSigma);
                }
                check_len(f)
            }
        }
    }
}

fn evaluate<S: Scalar>(sys: &FiniteSystem<S>, spec: &AverageSpec<S>, h: Horizon) -> S {
    let x = spec.x;
    let (sum, denom) = match &spec.average {
        Average::Multiple(fs) => engine::multiple_sum(sys, &fs.iter().collect::<Vec<_>>(), x, h),
        Average::Cubic(fs) => {
            let fs: Vec<_> = fs.iter().map(|(e, f)| (e.bits(), f)).collect();
            engine::cubic_sum(sys, &fs, x, h)
        }
        Average::AveragedMultiple(fs) => {
            engine::averaged_multiple_sum(sys, &fs.iter().collect::<Vec<_>>(), x, h)
        }
        Average::AveragedCubic(fs) => {
            let fs: Vec<_> = fs.iter().enumerate().collect();
            engine::averaged_cubic_sum(sys, &fs, x, h)
        }
        Average::SSigma { f, sigma } => engine::s_sigma_sum(sys, f, &sigma.axes(), x, h),
    };
    sum.div_ref(&denom)
}

/// The average at a finite `N`.
pub fn average<S: Scalar>(sys: &FiniteSystem<S>, spec: &AverageSpec<S>, n: u64) -> Result<S, AverageError> {
    spec.validate(sys)?;
    if n == 0 {
        return Err(AverageError::ZeroN);
    }
    Ok(evaluate(sys, spec, Horizon::Finite(n)))
}

/// `lim_{N→∞}` of the average: its mean over one full period box of every
/// summation index. Offsets in the index ranges of `S_{σ,N}` do not affect
/// the limit.
pub fn exact_limit<S: Scalar>(sys: &FiniteSystem<S>, spec: &AverageSpec<S>) -> Result<S, AverageError> {
    spec.validate(sys)?;
    Ok(evaluate(sys, spec, Horizon::Limit))
}

fn functions1<S: Scalar>(fs: &[&Observable<S>]) -> Vec<Observable<S>> {
    fs.iter().map(|f| (*f).clone()).collect()
}

pub fn multiple_average<S: Scalar>(
    sys: &FiniteSystem<S>,
    fs: &[&Observable<S>],
    x: usize,
    n: u64,
) -> Result<S, AverageError> {
    average(sys, &AverageSpec::new(Average::Multiple(functions1(fs)), x), n)
}

/// Cubic average with `fs[j]` attached to the vertex `ε` with bits `j + 1`.
pub fn cubic_average<S: Scalar>(
    sys: &FiniteSystem<S>,
    fs: &[&Observable<S>],
    x: usize,
    n: u64,
) -> Result<S, AverageError> {
    if fs.len() + 1 != 1 << sys.d() {
        return Err(AverageError::ArityMismatch {
            expected: (1 << sys.d()) - 1,
            got: fs.len(),
        });
    }
    average(sys, &AverageSpec::new(Average::cubic_nonzero(sys.d(), functions1(fs)), x), n)
}

pub fn averaged_multiple_average<S: Scalar>(
    sys: &FiniteSystem<S>,
    fs: &[&Observable<S>],
    x: usize,
    n: u64,
) -> Result<S, AverageError> {
    average(sys, &AverageSpec::new(Average::AveragedMultiple(functions1(fs)), x), n)
}

pub fn averaged_cubic_average<S: Scalar>(
    sys: &FiniteSystem<S>,
    fs: &[&Observable<S>],
    x: usize,
    n: u64,
) -> Result<S, AverageError> {
    average(sys, &AverageSpec::new(Average::AveragedCubic(functions1(fs)), x), n)
}

pub fn s_sigma_statistic<S: Scalar>(
    sys: &FiniteSystem<S>,
    f: &Observable<S>,
    sigma: CubeIndex,
    x: usize,
    n: u64,
) -> Result<S, AverageError> {
    let spec = AverageSpec::new(
        Average::SSigma {
            f: f.clone(),
            sigma,
        },
        x,
    );
    average(sys, &spec, n)
}

/// Values of an average along a grid of `N`, with oscillation tails.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport<S> {
    pub grid: Vec<u64>,
    pub values: Vec<S>,
    /// `tail[j] = max − min` of `values[j..]`; non-increasing.
    pub tail: Vec<S>,
    pub exact_limit: Option<S>,
    /// `|values[last] − exact_limit| ≤ 1e−9`; false without an exact limit.
    pub converged: bool,
}

impl<S: Scalar> ConvergenceReport<S> {
    pub fn from_values(grid: Vec<u64>, values: Vec<S>, exact_limit: Option<S>) -> Self {
        let mut tail = vec![S::zero(); values.len()];
        if let Some(last) = values.last() {
            let (mut lo, mut hi) = (last.clone(), last.clone());
            for j in (0..values.len()).rev() {
                if values[j] < lo {
                    lo = values[j].clone();
                }
                if values[j] > hi {
                    hi = values[j].clone();
                }
                tail[j] = hi.sub_ref(&lo);
            }
        }
        let converged = match (values.last(), &exact_limit) {
            (Some(v), Some(l)) => v.approx_eq(l, EQ_TOL),
            _ => false,
        };
        ConvergenceReport {
            grid,
            values,
            tail,
            exact_limit,
            converged,
        }
    }

    /// Columns `N,value,tail,exact_limit`; the last is blank when absent.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,value,tail,exact_limit\n");
        let limit = self
            .exact_limit
            .as_ref()
            .map_or_else(String::new, |l| l.to_f64().to_string());
        for ((n, v), t) in self.grid.iter().zip(&self.values).zip(&self.tail) {
            let _ = writeln!(out, "{n},{},{},{limit}", v.to_f64(), t.to_f64());
        }
        out
    }
}

pub(crate) fn check_grid(grid: &[u64]) -> Result<(), AverageError> {
    if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AverageError::BadGrid);
    }
    Ok(())
}

/// Evaluates the average along `grid` and attaches its exact limit.
pub fn convergence_report<S: Scalar>(
    sys: &FiniteSystem<S>,
    spec: &AverageSpec<S>,
    grid: &[u64],
) -> Result<ConvergenceReport<S>, AverageError> {
    spec.validate(sys)?;
    check_grid(grid)?;
    let values: Vec<S> = grid
        .par_iter()
        .map(|&n| evaluate(sys, spec, Horizon::Finite(n)))
        .collect();
    let limit = evaluate(sys, spec, Horizon::Limit);
    Ok(ConvergenceReport::from_values(grid.to_vec(), values, Some(limit)))
}

#[cfg(test)]
mod tests;
