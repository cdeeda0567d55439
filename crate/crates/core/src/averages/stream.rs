//! Sampled orbits of commuting affine maps of the torus `(R/Z)^D`.
//!
//! Positions are accumulated in `f64` and reduced mod 1 after every step.
//! Reports from this mode never carry an exact limit.

use std::f64::consts::TAU;

use super::{check_grid, AverageError, ConvergenceReport};

/// Grid used when none is given.
pub const DEFAULT_STREAM_GRID: [u64; 7] = [16, 32, 64, 128, 256, 512, 1024];

/// Largest number of summands a cubic stream average may visit.
const MAX_BOX: u128 = 1 << 26;

const COMMUTE_TOL: f64 = 1e-9;

/// `x ↦ Mx + b mod 1` with an integer matrix `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub matrix: Vec<Vec<i64>>,
    pub shift: Vec<f64>,
}

impl AffineMap {
    /// Translation by `shift`.
    pub fn rotation(shift: Vec<f64>) -> Self {
        let dim = shift.len();
        let matrix = (0..dim)
            .map(|i| (0..dim).map(|j| i64::from(i == j)).collect())
            .collect();
        AffineMap { matrix, shift }
    }

    /// `(x, y) ↦ (x + α, y + x)`.
    pub fn skew(alpha: f64) -> Self {
        AffineMap {
            matrix: vec![vec![1, 0], vec![1, 1]],
            shift: vec![alpha, 0.0],
        }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    fn is_well_formed(&self) -> bool {
        self.matrix.len() == self.dim() && self.matrix.iter().all(|row| row.len() == self.dim())
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .zip(&self.shift)
            .map(|(row, b)| {
                let v: f64 = row.iter().zip(p).map(|(&a, x)| a as f64 * x).sum::<f64>() + b;
                v.rem_euclid(1.0)
            })
            .collect()
    }
}

fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Commuting affine maps on one torus.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamSystem {
    maps: Vec<AffineMap>,
}

impl StreamSystem {
    /// Checks dimensions and samples commutation at fixed points.
    pub fn new(maps: Vec<AffineMap>) -> Result<Self, AverageError> {
        let dim = maps.first().map_or(0, AffineMap::dim);
        if maps.is_empty() || dim == 0 || maps.iter().any(|m| m.dim() != dim || !m.is_well_formed()) {
            return Err(AverageError::BadStream);
        }
        let irrationals = [2f64.sqrt(), 3f64.sqrt(), 5f64.sqrt(), 7f64.sqrt()];
        for sample in 1..=32 {
            let p: Vec<f64> = (0..dim)
                .map(|c| (sample as f64 * irrationals[c % 4] * (c + 1) as f64).rem_euclid(1.0))
                .collect();
            for i in 0..maps.len() {
                for j in i + 1..maps.len() {
                    let ab = maps[i].apply(&maps[j].apply(&p));
                    let ba = maps[j].apply(&maps[i].apply(&p));
                    if ab.iter().zip(&ba).any(|(a, b)| circle_distance(*a, *b) > COMMUTE_TOL) {
                        return Err(AverageError::NonCommutingStream { i, j, sample });
                    }
                }
            }
        }
        Ok(StreamSystem { maps })
    }

    pub fn d(&self) -> usize {
        self.maps.len()
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }
}

/// A function on the torus.
#[derive(Clone, Debug, PartialEq)]
pub enum StreamFunction {
    Constant(f64),
    /// `cos(2π k·x)`.
    Cos(Vec<i64>),
    /// `sin(2π k·x)`.
    Sin(Vec<i64>),
    /// Indicator of `lo ≤ x_coord < hi`.
    Indicator { coord: usize, lo: f64, hi: f64 },
}

impl StreamFunction {
    pub fn eval(&self, p: &[f64]) -> f64 {
        let phase = |k: &[i64]| TAU * k.iter().zip(p).map(|(&a, x)| a as f64 * x).sum::<f64>();
        match self {
            StreamFunction::Constant(c) => *c,
            StreamFunction::Cos(k) => phase(k).cos(),
            StreamFunction::Sin(k) => phase(k).sin(),
            StreamFunction::Indicator { coord, lo, hi } => {
                let x = p[*coord];
                if *lo <= x && x < *hi {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Averages available in stream mode.
#[derive(Clone, Debug, PartialEq)]
pub enum StreamAverage {
    /// One function per map.
    Multiple(Vec<StreamFunction>),
    /// One function per vertex `ε ≠ 0`, in vertex order.
    Cubic(Vec<StreamFunction>),
}

/// Evaluates the average along the sampled orbit of `x0` on every grid point.
pub fn stream_average(
    stream: &StreamSystem,
    avg: &StreamAverage,
    x0: &[f64],
    grid: &[u64],
) -> Result<ConvergenceReport<f64>, AverageError> {
    check_grid(grid)?;
    if x0.len() != stream.dim() {
        return Err(AverageError::BadStream);
    }
    let d = stream.d();
    let nmax = *grid.last().expect("checked nonempty");
    let buckets = match avg {
        StreamAverage::Multiple(fs) => {
            if fs.len() != d {
                return Err(AverageError::ArityMismatch {
                    expected: d,
                    got: fs.len(),
                });
            }
            let mut pts = vec![x0.to_vec(); d];
            let mut out = Vec::with_capacity(nmax as usize);
            for _ in 0..nmax {
                out.push(fs.iter().zip(&pts).map(|(f, p)| f.eval(p)).product());
                for (p, t) in pts.iter_mut().zip(stream.maps()) {
                    *p = t.apply(p);
                }
            }
            out
        }
        StreamAverage::Cubic(fs) => {
            if fs.len() + 1 != 1 << d {
                return Err(AverageError::ArityMismatch {
                    expected: (1 << d) - 1,
                    got: fs.len(),
                });
            }
            let size = (nmax as u128).pow(d as u32);
            if size > MAX_BOX {
                return Err(AverageError::BoxTooLarge { size, cap: MAX_BOX });
            }
            let mut buckets = vec![0.0; nmax as usize];
            let mut pts = vec![x0.to_vec(); 1 << d];
            cubic_buckets(stream, fs, 0, nmax, 0, &mut pts, &mut buckets);
            buckets
        }
    };
    let power = match avg {
        StreamAverage::Multiple(_) => 1,
        StreamAverage::Cubic(_) => d as i32,
    };
    let mut values = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    let mut next = 0usize;
    for &n in grid {
        while next < n as usize {
            acc += buckets[next];
            next += 1;
        }
        values.push(acc / (n as f64).powi(power));
    }
    Ok(ConvergenceReport::from_values(grid.to_vec(), values, None))
}

/// Adds each summand of the cubic box to the bucket of its largest index.
fn cubic_buckets(
    stream: &StreamSystem,
    fs: &[StreamFunction],
    level: usize,
    nmax: u64,
    max_index: usize,
    pts: &mut Vec<Vec<f64>>,
    buckets: &mut [f64],
) {
    if level == stream.d() {
        let v: f64 = fs.iter().zip(&pts[1..]).map(|(f, p)| f.eval(p)).product();
        buckets[max_index] += v;
        return;
    }
    let saved = pts.clone();
    let t = &stream.maps()[level];
    for n in 0..nmax as usize {
        cubic_buckets(stream, fs, level + 1, nmax, max_index.max(n), pts, buckets);
        for (e, p) in pts.iter_mut().enumerate() {
            if e >> level & 1 == 1 {
                *p = t.apply(p);
            }
        }
    }
    *pts = saved;
}
