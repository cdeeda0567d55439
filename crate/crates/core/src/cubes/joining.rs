use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;


use super::CubeError;
use crate::scalar::Scalar;

/// A probability measure on `X^arity` stored by its support.
///
/// Tuples are kept sorted lexicographically without duplicates, so two
/// joinings are equal exactly when they are equal as measures.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseJoining<S> {
    arity: usize,
    points: usize,
    tuples: Vec<usize>,
    masses: Vec<S>,
}

impl<S: Scalar> SparseJoining<S> {
    /// Builds a joining from arbitrary `(tuple, mass)` entries: duplicates are
    /// summed and zero masses dropped.
    pub fn from_entries(
        arity: usize,
        points: usize,
        entries: impl IntoIterator<Item = (Vec<usize>, S)>,
    ) -> Self {
        let mut map: BTreeMap<Vec<usize>, S> = BTreeMap::new();
        for (tuple, mass) in entries {
            assert_eq!(tuple.len(), arity, "tuple arity");
            debug_assert!(tuple.iter().all(|&x| x < points));
            match map.get_mut(&tuple) {
                Some(m) => *m += &mass,
                None => {
                    map.insert(tuple, mass);
                }
            }
        }
        let mut tuples = Vec::with_capacity(map.len() * arity);
        let mut masses = Vec::with_capacity(map.len());
        for (t, m) in map {
            if !m.is_zero() {
                tuples.extend_from_slice(&t);
                masses.push(m);
            }
        }
        SparseJoining {
            arity,
            points,
            tuples,
            masses,
        }
    }

    /// Entries that are already sorted, distinct and nonzero.
    pub(crate) fn from_sorted(arity: usize, points: usize, tuples: Vec<usize>, masses: Vec<S>) -> Self {
        debug_assert_eq!(tuples.len(), arity * masses.len());
        SparseJoining {
            arity,
            points,
            tuples,
            masses,
        }
    }

    /// `μ` itself as a measure on `X^1`, restricted to its support.
    pub fn from_weights(weights: &[S]) -> Self {
        let mut tuples = Vec::new();
        let mut masses = Vec::new();
        for (x, w) in weights.iter().enumerate() {
            if !w.is_zero() {
                tuples.push(x);
                masses.push(w.clone());
            }
        }
        Self::from_sorted(1, weights.len(), tuples, masses)
    }

    /// Point mass at one tuple.
    pub fn dirac(points: usize, tuple: Vec<usize>) -> Self {
        Self::from_sorted(tuple.len(), points, tuple, vec![S::one()])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Size of the underlying point set.
    pub fn points(&self) -> usize {
        self.points
    }

    /// Number of support tuples.
    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    #[inline]
    pub fn tuple(&self, i: usize) -> &[usize] {
        &self.tuples[i * self.arity..(i + 1) * self.arity]
    }

    #[inline]
    pub fn mass(&self, i: usize) -> &S {
        &self.masses[i]
    }

    pub fn masses(&self) -> &[S] {
        &self.masses
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize], &S)> + '_ {
        (0..self.len()).map(move |i| (self.tuple(i), &self.masses[i]))
    }

    /// Index of a support tuple.
    pub fn find(&self, tuple: &[usize]) -> Option<usize> {
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.tuple(mid).cmp(tuple) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn mass_of(&self, tuple: &[usize]) -> S {
        self.find(tuple).map_or_else(S::zero, |i| self.masses[i].clone())
    }

    pub fn total_mass(&self) -> S {
        crate::scalar::sum(self.masses.iter().cloned())
    }

    /// Marginal on one coordinate, as a vector over the points.
    pub fn marginal(&self, coord: usize) -> Vec<S> {
        let mut out = vec![S::zero(); self.points];
        for (t, m) in self.iter() {
            out[t[coord]] += m;
        }
        out
    }

    /// Image under the projection onto `coords` (in the given order).
    pub fn project(&self, coords: &[usize]) -> Self {
        Self::from_entries(
            coords.len(),
            self.points,
            self.iter()
                .map(|(t, m)| (coords.iter().map(|&c| t[c]).collect(), m.clone())),
        )
    }

    /// Image under an arbitrary map of tuples into `X^arity'`.
    pub fn pushforward(&self, arity: usize, map: impl Fn(&[usize]) -> Vec<usize>) -> Self {
        Self::from_entries(arity, self.points, self.iter().map(|(t, m)| (map(t), m.clone())))
    }

    /// `Σ_i w_i ν_i` over joinings of equal arity.
    pub fn mixture<'a>(parts: impl IntoIterator<Item = (S, &'a SparseJoining<S>)>) -> Option<Self>
    where
        S: 'a,
    {
        let mut arity = None;
        let mut points = 0;
        let mut entries = Vec::new();
        for (w, j) in parts {
            if *arity.get_or_insert(j.arity) != j.arity {
                return None;
            }
            points = points.max(j.points);
            entries.extend(j.iter().map(|(t, m)| (t.to_vec(), m.mul_ref(&w))));
        }
        Some(Self::from_entries(arity?, points, entries))
    }

    /// Restriction to the support indices in `idx`, renormalized.
    pub fn conditional(&self, idx: &[usize]) -> (Self, S) {
        let mass = crate::scalar::sum(idx.iter().map(|&i| self.masses[i].clone()));
        let entries = idx
            .iter()
            .map(|&i| (self.tuple(i).to_vec(), self.masses[i].div_ref(&mass)));
        (Self::from_entries(self.arity, self.points, entries), mass)
    }

    pub fn to_float(&self) -> SparseJoining<f64> {
        SparseJoining {
            arity: self.arity,
            points: self.points,
            tuples: self.tuples.clone(),
            masses: self.masses.iter().map(Scalar::to_f64).collect(),
        }
    }

    /// Line format: a header comment, then one tuple per line with its
    /// coordinates followed by its mass (`p/q` in exact mode).
    pub fn to_text(&self) -> String {
        let mut out = format!("# arity {} points {}\n", self.arity, self.points);
        for (t, m) in self.iter() {
            for x in t {
                let _ = write!(out, "{x} ");
            }
            out.push_str(&m.to_text());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, CubeError> {
        let mut arity = None;
        let mut points = None;
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(comment) = line.strip_prefix('#') {
                let words: Vec<&str> = comment.split_whitespace().collect();
                for pair in words.windows(2) {
                    match pair[0] {
                        "arity" => arity = pair[1].parse().ok(),
                        "points" => points = pair[1].parse().ok(),
                        _ => {}
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| CubeError::Format {
                line: lineno + 1,
                message: msg.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let (mass, coords) = fields.split_last().ok_or_else(|| bad("empty line"))?;
            let tuple = coords
                .iter()
                .map(|c| c.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad("coordinate is not a point index"))?;
            let arity = *arity.get_or_insert(tuple.len());
            if tuple.len() != arity {
                return Err(bad("tuple arity differs from earlier lines"));
            }
            let mass = S::parse_text(mass).ok_or_else(|| bad("mass is not a number"))?;
            entries.push((tuple, mass));
        }
        let arity = arity.unwrap_or(0);
        let max_point = entries
            .iter()
            .flat_map(|(t, _)| t.iter().copied())
            .max()
            .map_or(0, |x| x + 1);
        let points = points.unwrap_or(max_point).max(max_point);
        Ok(Self::from_entries(arity, points, entries))
    }
}
