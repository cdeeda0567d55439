use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use super::*;
use crate::perm::Permutation;
use crate::scalar::Rational;
use crate::system::uniform_weights;

type Q = Rational;

fn q(n: i64, d: i64) -> Q {
    Q::from_ratio(n, d)
}

fn rotations(m: usize, steps: &[i64]) -> FiniteSystem<Q> {
    let ts = steps
        .iter()
        .map(|&s| Permutation::rotation(m, s).images().to_vec())
        .collect();
    FiniteSystem::validate(uniform_weights(m), ts).unwrap()
}

fn obs(v: &[i64]) -> Observable<Q> {
    Observable::from_ints(v)
}

fn word(sys: &FiniteSystem<Q>, exps: &[i64], x: usize) -> usize {
    exps.iter()
        .enumerate()
        .fold(x, |y, (i, &e)| sys.transform(i).apply_pow(y, e))
}

/// Literal nested sums, one index at a time.
fn boxes(dim: usize, lo: &dyn Fn(usize, &[i64]) -> i64, hi: &dyn Fn(usize, &[i64]) -> i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for level in 0..dim {
        let mut next = Vec::new();
        for prefix in out {
            for v in lo(level, &prefix)..=hi(level, &prefix) {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn brute_multiple(sys: &FiniteSystem<Q>, fs: &[Observable<Q>], x: usize, n: i64) -> Q {
    let mut acc = Q::zero();
    for k in 0..n {
        let mut p = Q::one();
        for (i, f) in fs.iter().enumerate() {
            p *= f.at(sys.transform(i).apply_pow(x, k));
        }
        acc += p;
    }
    acc / Q::from_int(n)
}

fn brute_cubic(sys: &FiniteSystem<Q>, fs: &[(usize, Observable<Q>)], x: usize, n: i64) -> Q {
    let d = sys.d();
    let mut acc = Q::zero();
    for ns in boxes(d, &|_, _| 0, &|_, _| n - 1) {
        let mut p = Q::one();
        for (e, f) in fs {
            let exps: Vec<i64> = (0..d).map(|i| if e >> i & 1 == 1 { ns[i] } else { 0 }).collect();
            p *= f.at(word(sys, &exps, x));
        }
        acc += p;
    }
    acc / Q::from_int(n).powu(d as u32)
}

fn brute_averaged_multiple(sys: &FiniteSystem<Q>, fs: &[Observable<Q>], x: usize, n: i64) -> Q {
    let d = sys.d();
    let mut acc = Q::zero();
    for ns in boxes(d, &|_, _| 0, &|_, _| n - 1) {
        let y = word(sys, &ns, x);
        acc += brute_multiple(sys, fs, y, n);
    }
    acc / Q::from_int(n).powu(d as u32)
}

fn brute_averaged_cubic(sys: &FiniteSystem<Q>, fs: &[Observable<Q>], x: usize, n: i64) -> Q {
    let d = sys.d();
    let mut acc = Q::zero();
    for ms in boxes(d, &|_, _| 0, &|_, _| n - 1) {
        for ns in boxes(d, &|_, _| 0, &|_, _| n - 1) {
            let mut p = Q::one();
            for (e, f) in fs.iter().enumerate() {
                let exps: Vec<i64> = (0..d)
                    .map(|i| ms[i] + if e >> i & 1 == 1 { ns[i] } else { 0 })
                    .collect();
                p *= f.at(word(sys, &exps, x));
            }
            acc += p;
        }
    }
    acc / Q::from_int(n).powu(2 * d as u32)
}

/// `S_{σ,N}` exactly as defined, with `n_i ∈ [−m_i, N−1−m_i]`.
fn brute_s_sigma(sys: &FiniteSystem<Q>, f: &Observable<Q>, sigma: CubeIndex, x: usize, n: i64) -> Q {
    let axes = sigma.axes();
    let k = axes.len();
    let mut acc = Q::zero();
    for ms in boxes(k, &|_, _| 0, &|_, _| n - 1) {
        let ns_all = boxes(k, &|i, _| -ms[i], &|i, _| n - 1 - ms[i]);
        for ns in ns_all {
            let mut p = Q::one();
            for e in sigma.below() {
                let mut exps = vec![0; sys.d()];
                for (j, &a) in axes.iter().enumerate() {
                    exps[a] = ms[j] + if e.bit(a) { ns[j] } else { 0 };
                }
                p *= f.at(word(sys, &exps, x));
            }
            acc += p;
        }
    }
    acc / Q::from_int(n).powu(2 * k as u32)
}

fn joint_period(sys: &FiniteSystem<Q>, x: usize) -> i64 {
    use num_integer::Integer;
    (0..sys.d()).fold(1i64, |p, i| p.lcm(&(sys.transform(i).cycle_len(x) as i64)))
}

#[test]
fn spec_examples_for_finite_averages() {
    let e1 = rotations(2, &[1]);
    let e3 = rotations(4, &[1, 2]);
    let e4 = rotations(4, &[1, 3]);
    let one4 = Observable::constant(4, Q::one());
    let ind0 = Observable::<Q>::indicator(4, &[0]);

    assert_eq!(multiple_average(&e4, &[&one4, &one4], 1, 7).unwrap(), Q::one());
    assert_eq!(multiple_average(&e4, &[&ind0, &ind0], 0, 4).unwrap(), q(1, 4));
    assert_eq!(cubic_average(&e1, &[&obs(&[1, -1])], 0, 2).unwrap(), Q::zero());
    let spec = AverageSpec::new(Average::AveragedMultiple(vec![ind0.clone(), ind0.clone()]), 0);
    assert_eq!(exact_limit(&e4, &spec).unwrap(), q(1, 8));

    let f = obs(&[1, 0, -1, 0]);
    let spec = AverageSpec::new(Average::AveragedCubic(vec![f.clone(); 4]), 0);
    assert_eq!(exact_limit(&e3, &spec).unwrap(), q(1, 4));
    let g = obs(&[1, -1]);
    let spec = AverageSpec::new(Average::AveragedCubic(vec![g.clone(); 2]), 0);
    assert_eq!(exact_limit(&e1, &spec).unwrap(), Q::zero());

    let s = |n| s_sigma_statistic(&e1, &g, CubeIndex::ones(1), 0, n).unwrap();
    assert_eq!(s(2), Q::zero());
    assert_eq!(s(3), q(1, 9));
    assert_eq!(s_sigma_statistic(&e1, &Observable::constant(2, Q::one()), CubeIndex::ones(1), 1, 5).unwrap(), Q::one());

    let spec = AverageSpec::new(Average::Multiple(vec![g.clone()]), 0);
    assert_eq!(exact_limit(&e1, &spec).unwrap(), Q::zero());
}

#[test]
fn validation_errors() {
    let e1 = rotations(2, &[1]);
    let g = obs(&[1, -1]);
    assert_eq!(
        multiple_average(&e1, &[&g, &g], 0, 1),
        Err(AverageError::ArityMismatch { expected: 1, got: 2 })
    );
    assert_eq!(multiple_average(&e1, &[&g], 0, 0), Err(AverageError::ZeroN));
    assert_eq!(
        multiple_average(&e1, &[&g], 2, 1),
        Err(AverageError::PointOutOfRange { point: 2, m: 2 })
    );
    assert_eq!(
        s_sigma_statistic(&e1, &g, CubeIndex::zero(1), 0, 1),
        Err(AverageError::ZeroSigma)
    );
    let spec = AverageSpec::new(Average::Multiple(vec![g]), 0);
    assert_eq!(convergence_report(&e1, &spec, &[4, 2]), Err(AverageError::BadGrid));
}

#[test]
fn convergence_report_reaches_zero_tail_on_period_multiples() {
    let e4 = rotations(4, &[1, 3]);
    let ind0 = Observable::<Q>::indicator(4, &[0]);
    let spec = AverageSpec::new(Average::AveragedMultiple(vec![ind0.clone(), ind0]), 0);
    let grid: Vec<u64> = (1..=16).map(|k| 4 * k).collect();
    let report = convergence_report(&e4, &spec, &grid).unwrap();
    assert!(report.converged);
    assert!(report.tail.iter().all(Zero::is_zero));
    assert_eq!(report.exact_limit, Some(q(1, 8)));
    let csv = report.to_csv();
    assert!(csv.starts_with("N,value,tail,exact_limit\n4,0.125,0,0.125\n"));

    let grid: Vec<u64> = (1..=12).collect();
    let report = convergence_report(&e4, &spec, &grid).unwrap();
    assert!(report.tail.windows(2).all(|w| w[0] >= w[1]));
    assert!(!report.tail[0].is_zero());
}

#[test]
fn constant_observables_give_flat_reports() {
    let sys = rotations(5, &[1, 2]);
    let c = Observable::constant(5, q(2, 3));
    let spec = AverageSpec::new(Average::Multiple(vec![c.clone(), c]), 3);
    let r = convergence_report(&sys, &spec, &[1, 2, 3, 10]).unwrap();
    assert!(r.values.iter().all(|v| *v == q(4, 9)));
}

#[test]
fn averaged_multiple_matches_diagonal_joining_for_equal_transforms() {
    let sys = rotations(5, &[2, 2]);
    let f = obs(&[1, 2, 0, -1, 3]);
    let g = obs(&[0, 1, 1, 2, -2]);
    let spec = AverageSpec::new(Average::AveragedMultiple(vec![f.clone(), g.clone()]), 0);
    let direct: Q = (0..5).map(|x| f.at(x) * g.at(x)).sum::<Q>() / Q::from_int(5);
    assert_eq!(exact_limit(&sys, &spec).unwrap(), direct);
}

fn system_and_functions() -> impl Strategy<Value = (usize, Vec<i64>, Vec<Vec<i64>>, usize)> {
    (2usize..6, 1usize..3).prop_flat_map(|(m, d)| {
        (
            Just(m),
            proptest::collection::vec(0..m as i64, d),
            proptest::collection::vec(proptest::collection::vec(-2i64..3, m), 4),
            0..m,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn residue_sums_match_literal_definitions(
        (m, steps, vals, x) in system_and_functions(),
        n in 1i64..6,
    ) {
        let sys = rotations(m, &steps);
        let d = sys.d();
        let fs: Vec<Observable<Q>> = vals.iter().map(|v| obs(v)).collect();
        let nu = n as u64;

        let mult = AverageSpec::new(Average::Multiple(fs[..d].to_vec()), x);
        prop_assert_eq!(average(&sys, &mult, nu).unwrap(), brute_multiple(&sys, &fs[..d], x, n));

        let verts: Vec<(usize, Observable<Q>)> = (1..1 << d).map(|e| (e, fs[e % 4].clone())).collect();
        let cubic = Average::cubic_nonzero(d, verts.iter().map(|(_, f)| f.clone()).collect());
        prop_assert_eq!(
            average(&sys, &AverageSpec::new(cubic, x), nu).unwrap(),
            brute_cubic(&sys, &verts, x, n)
        );

        let am = AverageSpec::new(Average::AveragedMultiple(fs[..d].to_vec()), x);
        prop_assert_eq!(average(&sys, &am, nu).unwrap(), brute_averaged_multiple(&sys, &fs[..d], x, n));

        let all: Vec<Observable<Q>> = (0..1 << d).map(|e| fs[e % 4].clone()).collect();
        let ac = AverageSpec::new(Average::AveragedCubic(all.clone()), x);
        prop_assert_eq!(average(&sys, &ac, nu).unwrap(), brute_averaged_cubic(&sys, &all, x, n));

        for sigma in CubeIndex::vertices(d).skip(1) {
            let s = s_sigma_statistic(&sys, &fs[0], sigma, x, nu).unwrap();
            prop_assert_eq!(s.clone(), brute_s_sigma(&sys, &fs[0], sigma, x, n));
            prop_assert!(s >= Q::zero());
        }
    }

    #[test]
    fn exact_limits_equal_averages_at_the_joint_period(
        (m, steps, vals, x) in system_and_functions(),
    ) {
        let sys = rotations(m, &steps);
        let d = sys.d();
        let fs: Vec<Observable<Q>> = vals.iter().map(|v| obs(v)).collect();
        let p = joint_period(&sys, x);
        let specs = vec![
            Average::Multiple(fs[..d].to_vec()),
            Average::AveragedMultiple(fs[..d].to_vec()),
            Average::cubic_nonzero(d, (1..1 << d).map(|e| fs[e % 4].clone()).collect()),
            Average::SSigma { f: fs[0].clone(), sigma: CubeIndex::ones(d) },
        ];
        for a in specs {
            let spec = AverageSpec::new(a, x);
            let limit = exact_limit(&sys, &spec).unwrap();
            let brute = match &spec.average {
                Average::Multiple(f) => brute_multiple(&sys, f, x, p),
                Average::AveragedMultiple(f) => brute_averaged_multiple(&sys, f, x, p),
                Average::Cubic(f) => brute_cubic(&sys, &f.iter().map(|(e, g)| (e.bits(), g.clone())).collect::<Vec<_>>(), x, p),
                Average::SSigma { f, sigma } => brute_s_sigma(&sys, f, *sigma, x, p),
                Average::AveragedCubic(_) => unreachable!(),
            };
            prop_assert_eq!(limit, brute);
        }
    }

    #[test]
    fn multiple_average_is_lipschitz_in_each_function(
        (m, steps, vals, x) in system_and_functions(),
        other in proptest::collection::vec(proptest::collection::vec(-2i64..3, 6), 2),
        n in 1u64..20,
    ) {
        let sys = rotations(m, &steps);
        let d = sys.d();
        let half = |v: &[i64]| Observable::new(v[..m].iter().map(|&a| q(a, 2)).collect::<Vec<Q>>());
        let fs: Vec<Observable<Q>> = vals[..d].iter().map(|v| half(v)).collect();
        let gs: Vec<Observable<Q>> = other[..d].iter().map(|v| half(v)).collect();
        let fr: Vec<&Observable<Q>> = fs.iter().collect();
        let gr: Vec<&Observable<Q>> = gs.iter().collect();
        let lhs = (multiple_average(&sys, &fr, x, n).unwrap() - multiple_average(&sys, &gr, x, n).unwrap()).abs();
        let mut rhs = Q::zero();
        for i in 0..d {
            for k in 0..n as i64 {
                let y = sys.transform(i).apply_pow(x, k);
                rhs += (fs[i].at(y) - gs[i].at(y)).abs();
            }
        }
        rhs /= Q::from_int(n as i64);
        prop_assert!(lhs <= rhs);
    }
}

#[test]
fn van_der_corput_bound_on_e3_with_signs() {
    let e3 = rotations(4, &[1, 2]);
    let fs: Vec<Observable<Q>> = [[1, -1, -1, 1], [1, 1, -1, 1], [-1, 1, 1, 1], [1, -1, 1, -1]]
        .iter()
        .map(|v| obs(v))
        .collect();
    for k in 1..=2 {
        for sigma in CubeIndex::layer(2, k) {
            for n in 1..=16 {
                let verts: Vec<(CubeIndex, Observable<Q>)> =
                    CubeIndex::up_to(2, k).map(|e| (e, fs[e.bits()].clone())).collect();
                let lhs = average(&e3, &AverageSpec::new(Average::Cubic(verts), 0), n).unwrap();
                let s = s_sigma_statistic(&e3, &fs[sigma.bits()], sigma, 0, n).unwrap();
                assert!(lhs.powu(1 << k) <= s);
            }
        }
    }
}

mod stream_mode {
    use super::*;

    fn rotation(alpha: f64) -> StreamSystem {
        StreamSystem::new(vec![AffineMap::rotation(vec![alpha])]).unwrap()
    }

    #[test]
    fn irrational_rotation_of_cosine_tends_to_zero() {
        let s = rotation(0.618034);
        let avg = StreamAverage::Multiple(vec![StreamFunction::Cos(vec![1])]);
        let r = stream_average(&s, &avg, &[0.0], &DEFAULT_STREAM_GRID).unwrap();
        assert!(r.values.last().unwrap().abs() < 0.01);
        assert!(r.exact_limit.is_none() && !r.converged);
        assert!(r.tail.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rational_rotation_matches_cyclic_system() {
        let (p, qd) = (3i64, 7usize);
        let s = rotation(p as f64 / qd as f64);
        let f = StreamFunction::Cos(vec![1]);
        let g = StreamFunction::Indicator { coord: 0, lo: 0.2, hi: 0.6 };
        let grid: Vec<u64> = (1..=6).map(|k| 7 * k).collect();
        let sys = FiniteSystem::<f64>::validate(uniform_weights(qd), vec![Permutation::rotation(qd, p).images().to_vec()]).unwrap();
        for func in [f, g] {
            let r = stream_average(&s, &StreamAverage::Multiple(vec![func.clone()]), &[0.0], &grid).unwrap();
            let sampled = Observable::new((0..qd).map(|k| func.eval(&[k as f64 / qd as f64])).collect());
            let spec = AverageSpec::new(Average::Multiple(vec![sampled]), 0);
            let exact = exact_limit(&sys, &spec).unwrap();
            for v in &r.values {
                assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
            }
        }
    }

    #[test]
    fn cubic_stream_on_two_rotations() {
        let s = StreamSystem::new(vec![
            AffineMap::rotation(vec![0.5f64.sqrt(), 0.0]),
            AffineMap::rotation(vec![0.0, 3f64.sqrt() - 1.0]),
        ])
        .unwrap();
        let cos0 = StreamFunction::Cos(vec![1, 0]);
        let avg = StreamAverage::Cubic(vec![cos0.clone(), StreamFunction::Constant(1.0), cos0]);
        let r = stream_average(&s, &avg, &[0.0, 0.0], &[8, 16, 32, 64]).unwrap();
        assert!(r.tail.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn non_commuting_maps_are_rejected() {
        let err = StreamSystem::new(vec![AffineMap::skew(0.3), AffineMap::rotation(vec![0.0, 0.25])]);
        assert!(err.is_ok());
        let err = StreamSystem::new(vec![AffineMap::skew(0.3), AffineMap::rotation(vec![0.1, 0.0])]);
        assert!(matches!(err, Err(AverageError::NonCommutingStream { i: 0, j: 1, .. })));
    }
}
