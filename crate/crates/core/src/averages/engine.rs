//! Residue-box evaluation of periodic multi-index averages.
//!
//! Every summand below is periodic in each summation index, with period the
//! cycle length of the base point under the matching generator. A sum over
//! `0 ≤ n < N` is therefore a sum over residues `r` weighted by
//! `c(r) = #{n < N : n ≡ r}`, and the Cesàro limit is the plain mean over one
//! period. Both are computed here from the same counts, unnormalized; callers
//! divide by the returned denominator.

use num_integer::Integer;

use crate::scalar::Scalar;
use crate::system::{FiniteSystem, Observable};

/// Finite `N` or the limit `N → ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Horizon {
    Finite(u64),
    Limit,
}

/// Residue weights for one summation index.
pub(crate) struct Counts<S> {
    pub weights: Vec<S>,
    pub total: S,
}

impl<S: Scalar> Counts<S> {
    pub fn new(period: u64, horizon: Horizon) -> Self {
        match horizon {
            Horizon::Limit => Counts {
                weights: vec![S::one(); period as usize],
                total: S::from_int(period as i64),
            },
            Horizon::Finite(n) if period <= n => {
                let (q, rem) = n.div_rem(&period);
                Counts {
                    weights: (0..period)
                        .map(|r| S::from_int((q + u64::from(r < rem)) as i64))
                        .collect(),
                    total: S::from_int(n as i64),
                }
            }
            Horizon::Finite(n) => Counts {
                weights: vec![S::one(); n as usize],
                total: S::from_int(n as i64),
            },
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }
}

fn axis_counts<S: Scalar>(sys: &FiniteSystem<S>, axes: &[usize], x: usize, h: Horizon) -> Vec<Counts<S>> {
    axes.iter()
        .map(|&i| Counts::new(sys.transform(i).cycle_len(x) as u64, h))
        .collect()
}

/// Calls `visit` for each multi-index of the box `Π 0..lens[i]`, last index fastest.
fn for_each_index(lens: &[usize], mut visit: impl FnMut(&[usize])) {
    if lens.contains(&0) {
        return;
    }
    let mut idx = vec![0; lens.len()];
    loop {
        visit(&idx);
        let mut j = lens.len();
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < lens[j] {
                break;
            }
            idx[j] = 0;
        }
    }
}

fn weight_of<S: Scalar>(counts: &[Counts<S>], r: &[usize]) -> S {
    let mut w = S::one();
    for (c, &ri) in counts.iter().zip(r) {
        w *= &c.weights[ri];
    }
    w
}

fn total_of<S: Scalar>(counts: &[Counts<S>]) -> S {
    let mut t = S::one();
    for c in counts {
        t *= &c.total;
    }
    t
}

/// `T^{r·ε} x` for every vertex `ε` of `{0,1}^d`, in vertex order.
fn cube_points<S: Scalar>(sys: &FiniteSystem<S>, x: usize, r: &[usize], pts: &mut [usize]) {
    pts[0] = x;
    for b in 1..pts.len() {
        let i = b.trailing_zeros() as usize;
        pts[b] = sys.transform(i).apply_pow(pts[b & (b - 1)], r[i] as i64);
    }
}

/// `Σ_{n ∈ box} Π_{(ε, f)} f(T^{n·ε} y)` over all `d` axes.
pub(crate) fn cubic_sum<S: Scalar>(
    sys: &FiniteSystem<S>,
    fs: &[(usize, &Observable<S>)],
    y: usize,
    h: Horizon,
) -> (S, S) {
    let axes: Vec<usize> = (0..sys.d()).collect();
    let counts = axis_counts(sys, &axes, y, h);
    let lens: Vec<usize> = counts.iter().map(Counts::len).collect();
    let mut pts = vec![0; 1 << sys.d()];
    let mut total = S::zero();
    for_each_index(&lens, |r| {
        cube_points(sys, y, r, &mut pts);
        if let Some(prod) = product(fs.iter().map(|(e, f)| f.at(pts[*e]))) {
            total += &prod.mul_ref(&weight_of(&counts, r));
        }
    });
    (total, total_of(&counts))
}

/// Product of the factors, or `None` as soon as one is zero.
fn product<'a, S: Scalar>(factors: impl Iterator<Item = &'a S>) -> Option<S> {
    let mut acc = S::one();
    for v in factors {
        if v.is_zero() {
            return None;
        }
        acc *= v;
    }
    Some(acc)
}

/// `Σ_n c(n) Π_j f_j(T_j^n y)` with `n` running modulo the joint period.
pub(crate) fn multiple_sum<S: Scalar>(
    sys: &FiniteSystem<S>,
    fs: &[&Observable<S>],
    y: usize,
    h: Horizon,
) -> (S, S) {
    let period = (0..sys.d()).fold(1u64, |p, i| p.lcm(&(sys.transform(i).cycle_len(y) as u64)));
    let counts = Counts::<S>::new(period, h);
    let mut total = S::zero();
    for (n, w) in counts.weights.iter().enumerate() {
        let factors = fs
            .iter()
            .enumerate()
            .map(|(i, f)| f.at(sys.transform(i).apply_pow(y, n as i64)));
        if let Some(prod) = product(factors) {
            total += &prod.mul_ref(w);
        }
    }
    (total, counts.total)
}

/// `Σ_{m ∈ box} c(m) · inner(T^m x)` with `inner` cached per point.
fn outer_box_sum<S: Scalar>(
    sys: &FiniteSystem<S>,
    x: usize,
    h: Horizon,
    inner: impl Fn(usize) -> (S, S),
) -> (S, S) {
    let axes: Vec<usize> = (0..sys.d()).collect();
    let counts = axis_counts(sys, &axes, x, h);
    let lens: Vec<usize> = counts.iter().map(Counts::len).collect();
    let mut cache: Vec<Option<S>> = vec![None; sys.m()];
    let mut inner_total = None;
    let mut total = S::zero();
    for_each_index(&lens, |r| {
        let y = r
            .iter()
            .enumerate()
            .fold(x, |y, (i, &ri)| sys.transform(i).apply_pow(y, ri as i64));
        let v = cache[y].get_or_insert_with(|| {
            let (v, t) = inner(y);
            inner_total.get_or_insert(t);
            v
        });
        if !v.is_zero() {
            total += &v.mul_ref(&weight_of(&counts, r));
        }
    });
    let inner_total = inner_total.expect("box is nonempty");
    (total, total_of(&counts).mul_ref(&inner_total))
}

/// Averaged multiple average: the multiple average started at each
/// `Π T_i^{n_i} x`, averaged over the box.
pub(crate) fn averaged_multiple_sum<S: Scalar>(
    sys: &FiniteSystem<S>,
    fs: &[&Observable<S>],
    x: usize,
    h: Horizon,
) -> (S, S) {
    outer_box_sum(sys, x, h, |y| multiple_sum(sys, fs, y, h))
}

/// Averaged cubic average: the full cubic average over `V_d` started at each
/// `Π T_i^{m_i} x`, averaged over the box.
pub(crate) fn averaged_cubic_sum<S: Scalar>(
    sys: &FiniteSystem<S>,
    fs: &[(usize, &Observable<S>)],
    x: usize,
    h: Horizon,
) -> (S, S) {
    outer_box_sum(sys, x, h, |y| cubic_sum(sys, fs, y, h))
}

/// `N^{2k} S_{σ,N}(f, x)`, with `p_i = m_i + n_i` substituted so that both
/// `m_i` and `p_i` range over `0..N`. The sum then splits one axis at a time
/// into `Σ_{m,p} c(m)c(p) S'(g_{m,p})` with `g_{m,p} = f∘T^m · f∘T^p`, and the
/// last axis is a square.
pub(crate) fn s_sigma_sum<S: Scalar>(
    sys: &FiniteSystem<S>,
    f: &Observable<S>,
    axes: &[usize],
    x: usize,
    h: Horizon,
) -> (S, S) {
    let counts = axis_counts(sys, axes, x, h);
    let total = total_of(&counts);
    let denom = total.mul_ref(&total);
    (box_square_sum(sys, f.values(), axes, &counts, x), denom)
}

fn box_square_sum<S: Scalar>(
    sys: &FiniteSystem<S>,
    g: &[S],
    axes: &[usize],
    counts: &[Counts<S>],
    x: usize,
) -> S {
    let t = sys.transform(axes[0]);
    let c = &counts[0];
    if axes.len() == 1 {
        let mut s = S::zero();
        for (n, w) in c.weights.iter().enumerate() {
            let v = &g[t.apply_pow(x, n as i64)];
            if !v.is_zero() {
                s += &v.mul_ref(w);
            }
        }
        return s.mul_ref(&s);
    }
    let two = S::from_int(2);
    let mut total = S::zero();
    let mut h = vec![S::zero(); g.len()];
    for m in 0..c.len() {
        for p in m..c.len() {
            let mut any = false;
            for (y, slot) in h.iter_mut().enumerate() {
                let a = &g[t.apply_pow(y, m as i64)];
                *slot = if a.is_zero() {
                    S::zero()
                } else {
                    a.mul_ref(&g[t.apply_pow(y, p as i64)])
                };
                any |= !slot.is_zero();
            }
            if !any {
                continue;
            }
            let inner = box_square_sum(sys, &h, &axes[1..], &counts[1..], x);
            if inner.is_zero() {
                continue;
            }
            let mut w = c.weights[m].mul_ref(&c.weights[p]);
            if p != m {
                w *= &two;
            }
            total += &inner.mul_ref(&w);
        }
    }
    total
}
