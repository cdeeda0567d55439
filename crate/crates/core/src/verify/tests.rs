use super::*;
use crate::cubes::{cube_extension, host_measure};
use crate::generate::{cyclic_rotations, random_commuting, RandomWeights};
use crate::scalar::Rational;
use crate::system::trivial_system;
use proptest::prelude::*;

type Q = Rational;

fn rot(m: usize, steps: &[i64]) -> FiniteSystem<Q> {
    cyclic_rotations(m, steps, &Caps::default()).unwrap()
}

fn e1() -> FiniteSystem<Q> {
    rot(2, &[1])
}

fn e3() -> FiniteSystem<Q> {
    rot(4, &[1, 2])
}

fn e4() -> FiniteSystem<Q> {
    rot(4, &[1, 3])
}

fn obs(v: &[i64]) -> Observable<Q> {
    Observable::from_ints(v)
}

fn q(n: i64, d: i64) -> Q {
    Q::from_ratio(n, d)
}

fn assert_pass(r: &CheckReport<Q>) {
    let bad: Vec<_> = r.failures().collect();
    assert!(bad.is_empty() && r.status == Status::Pass, "{}: {:?}", r.name, bad);
}

fn e3_family() -> Vec<Observable<Q>> {
    let mut fam = vec![obs(&[1, 0, -1, 0])];
    fam.extend((0..4).map(|x| Observable::indicator(4, &[x])));
    fam.push(Observable::constant(4, Q::from_int(1)));
    fam.push(Observable::constant(4, q(-1, 2)));
    fam
}

#[test]
fn seminorm_properties_hold_on_e3() {
    let r = check_seminorm_properties(&e3(), &e3_family(), &[0, 1]).unwrap();
    assert_pass(&r);
    for tag in ["(1)", "(2)", "(3)", "(5)", "(6)"] {
        assert!(r.records.iter().any(|x| x.assertion.starts_with(tag)), "missing {tag}");
    }
}

#[test]
fn zero_seminorm_forces_zero_conditional_expectation() {
    let sys = rot(5, &[1]);
    let fam = default_family(&sys, &[0]).unwrap();
    let r = check_seminorm_properties(&sys, &fam, &[0]).unwrap();
    assert_pass(&r);
    assert_eq!(r.records.iter().filter(|x| x.assertion.starts_with("(4)")).count(), 4);
}

#[test]
fn seminorm_properties_with_constants_only() {
    let fam = vec![Observable::constant(4, Q::from_int(3))];
    assert_pass(&check_seminorm_properties(&e3(), &fam, &[0, 1]).unwrap());
}

#[test]
fn corrupted_seminorm_is_caught() {
    let corrupt = |s: &FiniteSystem<Q>, ts: &[Gen]| -> Result<HostMeasure<Q>, CubeError> {
        let h = host_measure(s, ts)?;
        let i = h.base().len() / 3;
        Ok(h.perturb_base_mass(i, &Q::from_int(2)))
    };
    let r = Verifier::default()
        .seminorm_properties_with(&e3(), &e3_family(), &[0, 1], &corrupt)
        .unwrap();
    assert_eq!(r.status, Status::Fail);
    assert!(r.witness.is_some());
    assert!(r.failures().any(|x| x.residual.to_f64() > 1e-9));
}

#[test]
fn seminorm_properties_on_non_ergodic_system() {
    // Two invariant copies of Z/2 with unequal mass.
    let sys = FiniteSystem::validate(
        vec![q(1, 8), q(1, 8), q(3, 8), q(3, 8)],
        vec![vec![1, 0, 3, 2], vec![0, 1, 3, 2]],
    )
    .unwrap();
    let fam = default_family(&sys, &[0, 1]).unwrap();
    assert_pass(&check_seminorm_properties(&sys, &fam, &[0, 1]).unwrap());
}

#[test]
fn van_der_corput_on_e3_with_random_signs() {
    let fs = random_signs::<Q>(11, 4, 4);
    let r = check_van_der_corput(&e3(), &fs, CubeIndex::ones(2), 0, 64).unwrap();
    assert_pass(&r);
    assert_eq!(r.records.len(), 128);
}

#[test]
fn van_der_corput_with_constant_one_is_tight() {
    let fs = vec![Observable::constant(4, Q::from_int(1)); 4];
    let r = check_van_der_corput(&e3(), &fs, CubeIndex::ones(2), 1, 10).unwrap();
    assert_pass(&r);
    for rec in r.records.iter().step_by(2) {
        assert_eq!((&rec.lhs, &rec.rhs), (&Q::from_int(1), &Q::from_int(1)));
    }
}

#[test]
fn van_der_corput_on_e1_tends_to_zero() {
    let f = obs(&[1, -1]);
    let r = check_van_der_corput(&e1(), &[f.clone(), f], CubeIndex::ones(1), 0, 40).unwrap();
    assert_pass(&r);
    let last = &r.records.last().unwrap().rhs;
    assert!(last.to_f64() < 1e-3);
}

#[test]
fn van_der_corput_rescales_large_functions() {
    let fs = vec![obs(&[4, -2, 0, 1]); 4];
    let r = check_van_der_corput(&e3(), &fs, CubeIndex::new(2, 1), 0, 8).unwrap();
    assert_pass(&r);
    assert_eq!(r.notes.len(), 4);
}

#[test]
fn magic_extension_of_e3() {
    let r = check_magic_extension(&e3(), &[0, 1]).unwrap();
    assert_pass(&r);
    let base = r.records.iter().find(|x| x.status == Status::Report).unwrap();
    assert!(base.assertion.contains("not magic"));
    assert_eq!(base.lhs, q(1, 4));
    assert!(r.notes.iter().any(|n| n.contains("(1, 0, -1, 0)")));
}

#[test]
fn magic_extension_of_ergodic_rotation_and_point() {
    let r = check_magic_extension(&rot(5, &[2]), &[0]).unwrap();
    assert_pass(&r);
    assert!(r.records.iter().any(|x| x.assertion.starts_with("base system magic")));
    assert_pass(&check_magic_extension(&trivial_system::<Q>(2), &[0, 1]).unwrap());
}

#[test]
fn averaged_multiple_on_e4() {
    let f = Observable::indicator(4, &[0]);
    let r = check_averaged_multiple(&e4(), &[f.clone(), f]).unwrap();
    assert_pass(&r);
    assert!(r.records.iter().all(|x| x.lhs == q(1, 8)));
    assert_eq!(r.records.len(), 4);
}

#[test]
fn averaged_multiple_on_constants_and_non_ergodic() {
    let one = Observable::constant(4, Q::from_int(1));
    let r = check_averaged_multiple(&e4(), &[one.clone(), one]).unwrap();
    assert!(r.records.iter().all(|x| x.lhs == Q::from_int(1)));
    let sys = rot(4, &[2, 2]);
    let r = check_averaged_multiple(&sys, &[obs(&[1, 2, 0, -1]), obs(&[0, 1, 1, 3])]).unwrap();
    assert_pass(&r);
    assert!(r.notes[0].contains("2 components"));
}

#[test]
fn limit_formula_examples() {
    let fs = vec![obs(&[1, 2, 0, -1]), obs(&[0, 1, 1, 3])];
    assert_pass(&check_limit_formula(&e4(), &fs).unwrap());

    let id = rot(3, &[0, 0]);
    let fs3 = vec![obs(&[1, 2, 3]), obs(&[2, 0, 5])];
    let r = check_limit_formula(&id, &fs3).unwrap();
    assert_pass(&r);
    let limits: Vec<Q> = r.records.iter().step_by(2).take(3).map(|x| x.lhs.clone()).collect();
    assert_eq!(limits, vec![Q::from_int(2), Q::from_int(0), Q::from_int(15)]);

    assert_pass(&check_limit_formula(&rot(3, &[1, 1]), &fs3).unwrap());
}

#[test]
fn seminorm_limit_examples() {
    let r = check_seminorm_limit(&e1(), &obs(&[1, -1]), &[0]).unwrap();
    assert_pass(&r);
    assert!(r.records.iter().all(|x| x.rhs == Q::from_int(0)));

    let c = Observable::constant(4, q(1, 2));
    let r = check_seminorm_limit(&e3(), &c, &[0, 1]).unwrap();
    assert!(r.records.iter().all(|x| x.rhs == q(1, 16)));

    let r = check_seminorm_limit(&e3(), &obs(&[1, 0, -1, 0]), &[0, 1]).unwrap();
    assert_pass(&r);
    assert!(r.records.iter().all(|x| x.lhs == q(1, 4) && x.rhs == q(1, 4)));
}

#[test]
fn relative_independence_reports() {
    let ext = cube_extension(&e3(), &[0, 1]).unwrap();
    let fam = default_family(&ext.system, &[0, 1]).unwrap();
    let r = report_relative_independence(&ext.system, &[0, 1], &fam[fam.len() - 8..]).unwrap();
    assert_eq!(r.status, Status::Report);
    assert!(r
        .records
        .iter()
        .filter(|x| x.assertion.starts_with("cube"))
        .all(|x| x.residual == Q::from_int(0)));

    let r = report_relative_independence(&e3(), &[0, 1], &[obs(&[1, 0, -1, 0])]).unwrap();
    assert_eq!(r.records[0].residual, q(1, 4));

    let one = vec![Observable::constant(4, Q::from_int(1))];
    let r = report_relative_independence(&e3(), &[0, 1], &one).unwrap();
    assert!(r.records.iter().all(|x| x.residual == Q::from_int(0)));
}

#[test]
fn measurability_examples() {
    let ext = cube_extension(&e1(), &[0]).unwrap();
    let fam = default_family(&ext.system, &[0]).unwrap();
    assert_pass(&check_cube_invariant_measurability(&ext.system, &[0], &fam).unwrap());

    let one = vec![Observable::constant(4, Q::from_int(1))];
    let one5 = vec![Observable::constant(5, Q::from_int(1))];
    assert_pass(&check_cube_invariant_measurability(&rot(5, &[1]), &[0], &one5).unwrap());
    let r = check_cube_invariant_measurability(&e4(), &[0, 1], &one).unwrap();
    assert_eq!(r.status, Status::Report);
    assert!(r.records.iter().all(|x| x.residual == Q::from_int(0)));

    let r = check_cube_invariant_measurability(&e3(), &[0, 1], &default_family(&e3(), &[0, 1]).unwrap()).unwrap();
    assert_eq!(r.status, Status::Report);
    assert!(r.notes[0].contains("not magic"));
}

#[test]
fn suite_on_e3_passes_and_serializes() {
    let reports = Verifier::default().suite(&e3(), &SuiteOptions::default()).unwrap();
    assert_eq!(reports.len(), 8);
    assert!(reports.iter().all(CheckReport::passed), "{reports:#?}");
    let csv = to_csv(&reports);
    assert!(csv.starts_with(CSV_HEADER));
    assert!(csv.contains("magic_extension,summary,,,,pass"));
    assert!(csv.contains("cube_invariant_measurability,summary witness=(1 0 -1 0),,,,report-only"));
}

#[test]
fn cap_errors_propagate() {
    let err = Verifier::new(10).magic_extension(&e3(), &[0, 1]).unwrap_err();
    assert!(err.is_cap());
}

#[test]
fn permutations_are_sorted_and_complete() {
    let p = permutations(3);
    assert_eq!(p.len(), 6);
    assert_eq!(p[0], vec![0, 1, 2]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn suite_passes_on_random_small_systems(seed in 0u64..1000, m in 1usize..7, d in 1usize..3, per_cycle: bool) {
        let w = if per_cycle { RandomWeights::PerCycle } else { RandomWeights::Uniform };
        let sys = random_commuting::<Q>(seed, m, d, w, &Caps::default()).unwrap();
        let opts = SuiteOptions { seed, nmax: 6, ..SuiteOptions::default() };
        let reports = Verifier::default().suite(&sys, &opts).unwrap();
        for r in &reports {
            prop_assert!(r.passed(), "{}: {:?}", r.name, r.failures().collect::<Vec<_>>());
        }
    }
}
