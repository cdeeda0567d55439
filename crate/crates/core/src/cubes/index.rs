use std::fmt;

/// A vertex `ε ∈ {0,1}^d` of the discrete cube.
///
/// Bit `i` of `bits` is `ε_{i+1}`, so the integer value of `bits` is also the
/// coordinate of `ε` inside a tuple of `X^{[d]}`. In particular the all-ones
/// vertex is the last coordinate and the vertices with `ε_d = 0` form the
/// first half of the tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CubeIndex {
    d: usize,
    bits: usize,
}

impl CubeIndex {
    pub fn new(d: usize, bits: usize) -> Self {
        assert!(d < usize::BITS as usize && bits < (1 << d), "vertex {bits} outside V_{d}");
        CubeIndex { d, bits }
    }

    /// Vertex with `ε_i = 1` exactly for the listed (zero-based) axes.
    pub fn from_axes(d: usize, axes: &[usize]) -> Self {
        let bits = axes.iter().fold(0, |b, &i| {
            assert!(i < d, "axis {i} outside V_{d}");
            b | (1 << i)
        });
        CubeIndex { d, bits }
    }

    /// Parses `ε_1 ε_2 .. ε_d` written as a 0/1 string such as `"101"`.
    pub fn parse(s: &str) -> Option<Self> {
        let d = s.len();
        let mut bits = 0;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return None,
            }
        }
        Some(CubeIndex { d, bits })
    }

    pub fn zero(d: usize) -> Self {
        CubeIndex { d, bits: 0 }
    }

    pub fn ones(d: usize) -> Self {
        CubeIndex {
            d,
            bits: (1 << d) - 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// `ε_{axis+1}`.
    pub fn bit(&self, axis: usize) -> bool {
        self.bits >> axis & 1 == 1
    }

    /// `|ε|`.
    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Coordinatewise `ε ≤ ε'`.
    pub fn le(&self, other: &Self) -> bool {
        self.bits & !other.bits == 0
    }

    /// `ε ∩ ε'`.
    pub fn meet(&self, other: &Self) -> Self {
        CubeIndex {
            d: self.d,
            bits: self.bits & other.bits,
        }
    }

    /// `I_ε`: the (zero-based) axes with `ε_i = 1`.
    pub fn axes(&self) -> Vec<usize> {
        (0..self.d).filter(|&i| self.bit(i)).collect()
    }

    /// All of `V_d` in coordinate order.
    pub fn vertices(d: usize) -> impl Iterator<Item = CubeIndex> {
        (0..1usize << d).map(move |bits| CubeIndex { d, bits })
    }

    /// `E_k = {ε : |ε| ≤ k}`.
    pub fn up_to(d: usize, k: usize) -> impl Iterator<Item = CubeIndex> {
        Self::vertices(d).filter(move |e| e.weight() <= k)
    }

    /// `D_k = {ε : |ε| = k}`.
    pub fn layer(d: usize, k: usize) -> impl Iterator<Item = CubeIndex> {
        Self::vertices(d).filter(move |e| e.weight() == k)
    }

    /// Vertices `ε ≤ self`.
    pub fn below(&self) -> impl Iterator<Item = CubeIndex> + '_ {
        Self::vertices(self.d).filter(move |e| e.le(self))
    }
}

impl fmt::Display for CubeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.d {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_follow_bits() {
        let e = CubeIndex::parse("101").unwrap();
        assert_eq!(e.bits(), 0b101);
        assert_eq!(e.to_string(), "101");
        assert_eq!(e.axes(), vec![0, 2]);
        assert_eq!(e.weight(), 2);
        assert_eq!(CubeIndex::ones(3).bits(), 7);
        assert_eq!(CubeIndex::from_axes(3, &[1]).to_string(), "010");
        assert!(CubeIndex::parse("12").is_none());
    }

    #[test]
    fn order_and_meet() {
        let a = CubeIndex::parse("100").unwrap();
        let b = CubeIndex::parse("110").unwrap();
        assert!(a.le(&b));
        assert!(!b.le(&a));
        assert_eq!(b.meet(&CubeIndex::parse("011").unwrap()).to_string(), "010");
    }

    #[test]
    fn layers_and_balls() {
        assert_eq!(CubeIndex::layer(3, 2).count(), 3);
        assert_eq!(CubeIndex::up_to(3, 1).count(), 4);
        assert_eq!(CubeIndex::parse("110").unwrap().below().count(), 4);
        assert_eq!(CubeIndex::vertices(2).map(|e| e.to_string()).collect::<Vec<_>>(), [
            "00", "10", "01", "11"
        ]);
    }
}
