//! Executable checkers. Each check produces a [`CheckReport`] with one
//! [`Record`] per assertion; rational mode decides every verdict exactly.
//!
//! Claims that need satedness hypotheses are computed and reported, never
//! asserted.

use std::fmt;
use std::fmt::Write as _;

use num_traits::Signed;
use rayon::prelude::*;
use thiserror::Error;

use crate::averages::{exact_limit, s_sigma_statistic, Average, AverageError, AverageSpec};
use crate::cubes::{
    cube_extension_capped, gens, host_measure_capped, integrate_tensor, is_magic_capped,
    kernel_basis, CubeError, CubeIndex, Gen, HostMeasure, SparseJoining,
};
use crate::generate::random_signs;
use crate::joinings::{
    furstenberg_joining_capped, joining_ergodicity, product_map, projection_identity,
    JoiningError, PointwiseJoinings,
};
use crate::perm::Permutation;
use crate::scalar::{Scalar, EQ_TOL};
use crate::sigma::{
    cond_expectation, ergodic_decomposition, invariant_partition, join_of_invariants,
    join_partitions, orbit_partition, quotient_system, Partition, SigmaError,
};
use crate::system::{product_system, uniform_weights, Caps, FiniteSystem, Observable};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum VerifyError {
    #[error(transparent)]
    Cube(#[from] CubeError),
    #[error(transparent)]
    Joining(#[from] JoiningError),
    #[error(transparent)]
    Average(#[from] AverageError),
    #[error(transparent)]
    Sigma(#[from] SigmaError),
}

impl VerifyError {
    /// True for resource-limit failures.
    pub fn is_cap(&self) -> bool {
        matches!(
            self,
            VerifyError::Cube(CubeError::SupportExplosion { .. })
                | VerifyError::Joining(JoiningError::Cube(CubeError::SupportExplosion { .. }))
                | VerifyError::Average(AverageError::BoxTooLarge { .. })
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Fail,
    /// Computed for information; never fails a suite.
    Report,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Report => "report-only",
        })
    }
}

/// One assertion `lhs = rhs` or `lhs ≤ rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Record<S> {
    pub assertion: String,
    pub lhs: S,
    pub rhs: S,
    /// `|lhs − rhs|` for equalities, `max(lhs − rhs, 0)` for inequalities.
    pub residual: S,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport<S> {
    pub name: String,
    pub status: Status,
    pub records: Vec<Record<S>>,
    /// Present whenever `status` is `Fail`; may also accompany reports.
    pub witness: Option<Observable<S>>,
    pub notes: Vec<String>,
}

impl<S: Scalar> CheckReport<S> {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record<S>> {
        self.records.iter().filter(|r| r.status == Status::Fail)
    }

    /// Largest residual among asserted records, as a float.
    pub fn max_residual(&self) -> f64 {
        self.records
            .iter()
            .filter(|r| r.status != Status::Report)
            .map(|r| r.residual.to_f64())
            .fold(0.0, f64::max)
    }
}

/// Header of [`to_csv`].
pub const CSV_HEADER: &str = "check,assertion,lhs,rhs,residual,status";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Check records, one line per assertion, followed by a summary line per check.
pub fn to_csv<S: Scalar>(reports: &[CheckReport<S>]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in reports {
        for rec in &r.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                csv_field(&r.name),
                csv_field(&rec.assertion),
                rec.lhs.to_text(),
                rec.rhs.to_text(),
                rec.residual.to_text(),
                rec.status
            );
        }
        let witness = r.witness.as_ref().map_or_else(String::new, |w| {
            let vals: Vec<String> = w.values().iter().map(Scalar::to_text).collect();
            format!(" witness=({})", vals.join(" "))
        });
        let _ = writeln!(
            out,
            "{},{},,,,{}",
            csv_field(&r.name),
            csv_field(&format!("summary{witness}")),
            r.status
        );
    }
    out
}

struct Checker<S> {
    report: CheckReport<S>,
    report_only: bool,
}

impl<S: Scalar> Checker<S> {
    fn new(name: &str, report_only: bool) -> Self {
        Checker {
            report: CheckReport {
                name: name.to_string(),
                status: Status::Pass,
                records: Vec::new(),
                witness: None,
                notes: Vec::new(),
            },
            report_only,
        }
    }

    fn push(&mut self, assertion: String, lhs: S, rhs: S, residual: S, ok: bool, witness: impl FnOnce() -> Observable<S>) {
        let status = if self.report_only {
            Status::Report
        } else if ok {
            Status::Pass
        } else {
            if self.report.witness.is_none() {
                self.report.witness = Some(witness());
            }
            Status::Fail
        };
        self.report.records.push(Record {
            assertion,
            lhs,
            rhs,
            residual,
            status,
        });
    }

    fn equal(&mut self, assertion: String, lhs: S, rhs: S, witness: impl FnOnce() -> Observable<S>) {
        let residual = lhs.sub_ref(&rhs).abs();
        let ok = lhs.approx_eq(&rhs, EQ_TOL);
        self.push(assertion, lhs, rhs, residual, ok, witness);
    }

    fn at_most(&mut self, assertion: String, lhs: S, rhs: S, witness: impl FnOnce() -> Observable<S>) {
        let diff = lhs.sub_ref(&rhs);
        let residual = if diff > S::zero() { diff } else { S::zero() };
        let ok = lhs.approx_le(&rhs, EQ_TOL);
        self.push(assertion, lhs, rhs, residual, ok, witness);
    }

    fn holds(&mut self, assertion: String, ok: bool, witness: impl FnOnce() -> Observable<S>) {
        let lhs = S::from_int(i64::from(ok));
        self.push(assertion, lhs, S::one(), S::from_int(i64::from(!ok)), ok, witness);
    }

    fn note(&mut self, note: String) {
        self.report.notes.push(note);
    }

    fn finish(mut self) -> CheckReport<S> {
        self.report.status = if self.report_only {
            Status::Report
        } else if self.report.records.iter().any(|r| r.status == Status::Fail) {
            Status::Fail
        } else {
            Status::Pass
        };
        self.report
    }
}

/// Indicators of the support points, then a basis of `ker E(· | Z)` for
/// `Z = ∨_{i ∈ subset} I_{T_i}`, then the constant `1`.
pub fn default_family<S: Scalar>(sys: &FiniteSystem<S>, subset: &[usize]) -> Result<Vec<Observable<S>>, SigmaError> {
    let z = join_of_invariants(sys, subset)?;
    let mut out: Vec<Observable<S>> = sys.support().iter().map(|&x| Observable::indicator(sys.m(), &[x])).collect();
    out.extend(kernel_basis(sys, &z));
    out.push(Observable::constant(sys.m(), S::one()));
    Ok(out)
}

/// Index tuples `(j, j+1, .., j+arity−1) mod n` for `j < n`: every family
/// member appears at every slot.
pub fn mixed_tuples(n: usize, arity: usize) -> Vec<Vec<usize>> {
    (0..n).map(|j| (0..arity).map(|e| (j + e) % n).collect()).collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

fn gens_text(ts: &[Gen]) -> String {
    let parts: Vec<String> = ts
        .iter()
        .map(|g| format!("T{}{}", g.axis + 1, if g.inverse { "^-1" } else { "" }))
        .collect();
    parts.join(" ")
}

/// `Σ |a(t) − b(t)|` over the union of supports.
pub fn total_variation<S: Scalar>(a: &SparseJoining<S>, b: &SparseJoining<S>) -> S {
    let mut acc = S::zero();
    for (t, m) in a.iter() {
        acc += &m.sub_ref(&b.mass_of(t)).abs();
    }
    for (t, m) in b.iter() {
        if a.find(t).is_none() {
            acc += &m.abs();
        }
    }
    acc
}

fn prod<S: Scalar>(values: impl Iterator<Item = S>) -> S {
    let mut acc = S::one();
    for v in values {
        acc *= &v;
    }
    acc
}

fn sup_abs<S: Scalar>(values: &[S]) -> S {
    values.iter().map(Signed::abs).fold(S::zero(), |a, b| if b > a { b } else { a })
}


/// Builds a (possibly corrupted) Host measure; used to inject faults.
pub type MeasureFn<'a, S> = dyn Fn(&FiniteSystem<S>, &[Gen]) -> Result<HostMeasure<S>, CubeError> + Sync + 'a;

/// Runs every check with one support cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Verifier {
    pub cap: usize,
}

impl Default for Verifier {
    fn default() -> Self {
        Verifier {
            cap: Caps::default().max_support,
        }
    }
}

impl Verifier {
    pub fn new(cap: usize) -> Self {
        Verifier { cap }
    }

    /// Properties (1)–(6) of the Host seminorms over `family`:
    /// Cauchy–Schwarz–Gowers, single-inverse invariance, order invariance,
    /// zero seminorm ⇒ `E(f | Z) = 0`, factor compatibility, and the
    /// ergodic-decomposition identity. Also asserts nonnegativity.
    pub fn seminorm_properties<S: Scalar>(
        &self,
        sys: &FiniteSystem<S>,
        family: &[Observable<S>],
        subset: &[usize],
    ) -> Result<CheckReport<S>, VerifyError> {
        let cap = self.cap;
        self.seminorm_properties_with(sys, family, subset, &move |s: &FiniteSystem<S>, ts: &[Gen]| {
            host_measure_capped(s, ts, cap)
        })
    }

    pub fn seminorm_properties_with<S: Scalar>(
        &self,
        sys: &FiniteSystem<S>,
        family: &[Observable<S>],
        subset: &[usize],
        measure: &MeasureFn<'_, S>,
    ) -> Result<CheckReport<S>, VerifyError> {
        let mut c = Checker::new("seminorm_properties", false);
        if subset.is_empty() {
            return Err(SigmaError::EmptySubset.into());
        }
        let ts = gens(subset);
        let k = ts.len();
        let host = measure(sys, &ts)?;
        let integral = |h: &HostMeasure<S>, f: &Observable<S>| -> Result<S, CubeError> {
            h.integrate(&vec![f; 1 << h.k()])
        };
        let s: Vec<S> = family.iter().map(|f| integral(&host, f)).collect::<Result<_, _>>()?;

        for (j, v) in s.iter().enumerate() {
            c.at_most(format!("nonnegativity f{j}"), S::zero(), v.clone(), || family[j].clone());
        }

        let power = 1u32 << k;
        for t in mixed_tuples(family.len(), 1 << k) {
            let fs: Vec<&Observable<S>> = t.iter().map(|&j| &family[j]).collect();
            let lhs = host.integrate(&fs)?.abs().powu(power);
            let rhs = prod(t.iter().map(|&j| s[j].clone()));
            c.at_most(
                format!("(1) |∫⊗f|^{power} <= Π seminorm^{power} for f{t:?}"),
                lhs,
                rhs,
                || family[t[0]].clone(),
            );
        }

        for i in 0..k {
            let mut inv = ts.clone();
            inv[i].inverse = !inv[i].inverse;
            let h = measure(sys, &inv)?;
            for (j, f) in family.iter().enumerate() {
                c.equal(
                    format!("(2) seminorm f{j} with [{}]", gens_text(&inv)),
                    integral(&h, f)?,
                    s[j].clone(),
                    || f.clone(),
                );
            }
        }

        for p in permutations(k).into_iter().skip(1) {
            let reordered: Vec<Gen> = p.iter().map(|&i| ts[i]).collect();
            let h = measure(sys, &reordered)?;
            for (j, f) in family.iter().enumerate() {
                c.equal(
                    format!("(3) seminorm f{j} with [{}]", gens_text(&reordered)),
                    integral(&h, f)?,
                    s[j].clone(),
                    || f.clone(),
                );
            }
        }

        let z = join_of_invariants(sys, subset)?;
        for (j, f) in family.iter().enumerate() {
            if s[j].negligible(crate::scalar::ZERO_TOL) {
                let e = cond_expectation(sys, f, &z);
                c.equal(
                    format!("(4) seminorm f{j} = 0 => sup|E(f|Z)| = 0"),
                    sup_abs(e.values()),
                    S::zero(),
                    || f.clone(),
                );
            }
        }

        let mut factors: Vec<(String, Partition)> = (0..sys.d())
            .map(|i| Ok((format!("I_T{}", i + 1), invariant_partition(sys, &[i])?)))
            .collect::<Result<_, SigmaError>>()?;
        factors.push(("Z".to_string(), z));
        for (label, p) in &factors {
            let q = quotient_system(sys, p)?;
            let hq = measure(&q.system, &ts)?;
            for a in 0..q.system.m() {
                let g = Observable::indicator(q.system.m(), &[a]);
                let lifted = q.lift(&g);
                c.equal(
                    format!("(5) seminorm on X/{label} of atom {a} = seminorm of its lift"),
                    integral(&hq, &g)?,
                    integral(&host, &lifted)?,
                    || lifted.clone(),
                );
            }
        }
        // X is also a factor of X × Z/2, with the rotation on the first subset axis.
        if sys.m() <= 6 {
            let mut flip = vec![Permutation::identity(2); sys.d()];
            flip[subset[0]] = Permutation::rotation(2, 1);
            let two = FiniteSystem::from_permutations(uniform_weights(2), flip, &Caps::default())
                .expect("rotation of Z/2 is valid");
            let big = product_system(sys, &two).map_err(CubeError::from)?;
            let hb = measure(&big, &ts)?;
            let proj: Vec<usize> = (0..big.m()).map(|p| p / 2).collect();
            for (j, f) in family.iter().enumerate() {
                c.equal(
                    format!("(5) seminorm f{j} = seminorm of f{j} lifted to X x Z/2"),
                    integral(&hb, &f.compose(&proj))?,
                    s[j].clone(),
                    || f.clone(),
                );
            }
        }

        let comps = ergodic_decomposition(sys, subset)?;
        let comp_hosts = comps
            .iter()
            .map(|cp| measure(&cp.system(sys), &ts))
            .collect::<Result<Vec<_>, _>>()?;
        for (j, f) in family.iter().enumerate() {
            let mut rhs = S::zero();
            for (cp, h) in comps.iter().zip(&comp_hosts) {
                rhs += &cp.weight.mul_ref(&integral(h, f)?);
            }
            c.equal(
                format!("(6) seminorm f{j} = Σ weight x component seminorm ({} components)", comps.len()),
                s[j].clone(),
                rhs,
                || f.clone(),
            );
        }
        Ok(c.finish())
    }

    /// `(cubic average over E_k)^{2^k} ≤ S_{σ,N}(f_σ, x)` and
    /// `S_{σ,N}(f_σ, x) ≥ 0` for `N = 1..=nmax`. `fs` lists one function per
    /// vertex of `V_d`; functions with sup norm above one are rescaled.
    pub fn van_der_corput<S: Scalar>(
        &self,
        sys: &FiniteSystem<S>,
        fs: &[Observable<S>],
        sigma: CubeIndex,
        x: usize,
        nmax: u64,
    ) -> Result<CheckReport<S>, VerifyError> {
        let mut c = Checker::new("van_der_corput", false);
        let d = sys.d();
        if fs.len() != 1 << d {
            return Err(AverageError::ArityMismatch {
                expected: 1 << d,
                got: fs.len(),
            }
            .into());
        }
        if sigma.dim() != d {
            return Err(AverageError::BadVertex {
                vertex: sigma.to_string(),
                d,
            }
            .into());
        }
        let k = sigma.weight();
        if k == 0 {
            return Err(AverageError::ZeroSigma.into());
        }
        let fs: Vec<Observable<S>> = fs
            .iter()
            .enumerate()
            .map(|(e, f)| {
                let sup = f.sup_norm();
                if sup > S::one() {
                    c.note(format!("f_{} rescaled by 1/{}", CubeIndex::new(d, e), sup.to_text()));
                    f.scaled(&S::one().div_ref(&sup))
                } else {
                    f.clone()
                }
            })
            .collect();
        let cubic = Average::Cubic(CubeIndex::up_to(d, k).map(|e| (e, fs[e.bits()].clone())).collect());
        let spec = AverageSpec::new(cubic, x);
        let f_sigma = &fs[sigma.bits()];
        let power = 1u32 << k;
        for n in 1..=nmax {
            let avg = crate::averages::average(sys, &spec, n)?;
            let s = s_sigma_statistic(sys, f_sigma, sigma, x, n)?;
            c.at_most(
                format!("N={n}: (cubic average over E_{k})^{power} <= S_sigma"),
                avg.powu(power),
                s.clone(),
                || f_sigma.clone(),
            );
            c.at_most(format!("N={n}: S_sigma >= 0"), S::zero(), s, || f_sigma.clone());
        }
        Ok(c.finish())
    }

    /// The cube extension over `subset` is magic for its face maps, and its
    /// factor map is measure-preserving and equivariant. The base system's
    /// magic test is reported.
    pub fn magic_extension<S: Scalar>(&self, sys: &FiniteSystem<S>, subset: &[usize]) -> Result<CheckReport<S>, VerifyError> {
        let mut c = Checker::new("magic_extension", false);
        let ext = cube_extension_capped(sys, subset, self.cap)?;
        c.note(format!("extension has {} points", ext.system.m()));
        let mt = is_magic_capped(&ext.system, subset, self.cap)?;
        c.equal(
            format!("extension magic: pre-root integrals over {} kernel vectors vanish", mt.tested),
            mt.witness_integral.clone().unwrap_or_else(S::zero),
            S::zero(),
            || mt.witness.clone().expect("failure carries a witness"),
        );
        let pushed = ext.factor_pushforward();
        for (x, mass) in pushed.into_iter().enumerate() {
            c.equal(
                format!("factor pushes the extension measure to mu at point {x}"),
                mass,
                sys.weight(x).clone(),
                || Observable::indicator(sys.m(), &[x]),
            );
        }
        c.holds("factor map is equivariant".into(), ext.is_equivariant(sys), || {
            Observable::constant(ext.system.m(), S::one())
        });

        let base = is_magic_capped(sys, subset, self.cap)?;
        let status = if base.magic { "magic" } else { "not magic" };
        c.report.records.push(Record {
            assertion: format!("base system {status}: witness pre-root integral"),
            lhs: base.witness_integral.clone().unwrap_or_else(S::zero),
            rhs: S::zero(),
            residual: base.witness_integral.clone().unwrap_or_else(S::zero).abs(),
            status: Status::Report,
        });
        if let Some(w) = &base.witness {
            let vals: Vec<String> = w.values().iter().map(Scalar::to_text).collect();
            c.note(format!(
                "base witness ({}) with seminorm {}",
                vals.join(", "),
                crate::cubes::Seminorm::new(base.witness_integral.clone().expect("paired"), subset.len()).value()
            ));
        }
        Ok(c.finish())
    }

    /// The averaged multiple average at every support point converges to
    /// `∫ ⊗f dμ^F` of its ergodic component.
    pub fn averaged_multiple<S: Scalar>(&self, sys: &FiniteSystem<S>, fs: &[Observable<S>]) -> Result<CheckReport<S>, VerifyError> {
        let mut c = Checker::new("averaged_multiple", false);
        let all: Vec<usize> = (0..sys.d()).collect();
        let comps = ergodic_decomposition(sys, &all)?;
        if comps.len() > 1 {
            c.note(format!("not ergodic: checked on {} components", comps.len()));
        }
        let refs: Vec<&Observable<S>> = fs.iter().collect();
        for (ci, cp) in comps.iter().enumerate() {
            let jf = furstenberg_joining_capped(&cp.system(sys), self.cap)?;
            let rhs = integrate_tensor(&jf, &refs)?;
            for &x in &cp.points {
                let spec = AverageSpec::new(Average::AveragedMultiple(fs.to_vec()), x);
                c.equal(
                    format!("component {ci}, x={x}: limit = ∫⊗f dmu^F"),
                    exact_limit(sys, &spec)?,
                    rhs.clone(),
                    || Observable::indicator(sys.m(), &[x]),
                );
            }
        }
        Ok(c.finish())
    }

    /// Pointwise limits of multiple averages are integrals against `μ^F_x`,
    /// each `μ^F_x` is ergodic for `R`, `Σ μ(x) μ^F_x = μ^F`, and (for
    /// `d ≥ 2`) the projection identity holds.
    pub fn limit_formula<S: Scalar>(&self, sys: &FiniteSystem<S>, fs: &[Observable<S>]) -> Result<CheckReport<S>, VerifyError> {
        let mut c = Checker::new("limit_formula", false);
        let pj = PointwiseJoinings::new(sys)?;
        let r = product_map(sys);
        let refs: Vec<&Observable<S>> = fs.iter().collect();
        for x in sys.support() {
            let mx = pj.get(x).expect("support point");
            let spec = AverageSpec::new(Average::Multiple(fs.to_vec()), x);
            c.equal(
                format!("x={x}: limit = ∫⊗f dmu^F_x"),
                exact_limit(sys, &spec)?,
                integrate_tensor(mx, &refs)?,
                || Observable::indicator(sys.m(), &[x]),
            );
            c.holds(
                format!("x={x}: mu^F_x is ergodic for R"),
                joining_ergodicity(mx, std::slice::from_ref(&r))?,
                || Observable::indicator(sys.m(), &[x]),
            );
        }
        let whole = furstenberg_joining_capped(sys, self.cap)?;
        c.equal(
            "mixture Σ mu(x) mu^F_x = mu^F (total variation)".into(),
            total_variation(&pj.mixture(sys), &whole),
            S::zero(),
            || Observable::constant(sys.m(), S::one()),
        );
        if sys.d() >= 2 {
            let (projected, rel) = projection_identity(sys)?;
            c.equal(
                "projection of mu^F onto the last d-1 coordinates = relative joining (total variation)".into(),
                total_variation(&projected, &rel),
                S::zero(),
                || Observable::constant(sys.m(), S::one()),
            );
        }
        Ok(c.finish())
    }

    /// `lim S_{σ,N}(f, x) = |||f|||^{2^k}` with `σ` the indicator of `subset`,
    /// on every ergodic component for the subset.
    pub fn seminorm_limit<S: Scalar>(
        &self,
        sys: &FiniteSystem<S>,
        f: &Observable<S>,
        subset: &[usize],
    ) -> Result<CheckReport<S>, VerifyError> {
        let mut c = Checker::new("seminorm_limit", false);
        let comps = ergodic_decomposition(sys, subset)?;
        let sigma = CubeIndex::from_axes(sys.d(), subset);
        let ts = gens(subset);
        for (ci, cp) in comps.iter().enumerate() {
            let h = host_measure_capped(&cp.system(sys), &ts, self.cap)?;
            let rhs = h.integrate(&vec![f; 1 << h.k()])?;
            for &x in &cp.points {
                let spec = AverageSpec::new(
                    Average::SSigma {
                        f: f.clone(),
                        sigma,
                    },
                    x,
                );
                c.equal(
                    format!("component {ci}, x={x}: lim S_sigma = seminorm^{}", 1u32 << ts.len()),
                    exact_limit(sys, &spec)?,
                    rhs.clone(),
                    || f.clone(),
                );
            }
        }
        Ok(c.finish())
    }

    /// Report only: `∫⊗f dμ_cube` against `∫⊗E(f|Z) dμ_cube`, and for each
    /// `i` the `μ^F` integral against the one with `f_i` replaced by
    /// `E(f_i | ∨_{j≠i} I_{T_i^{-1}T_j})`.
    pub fn relative_independence<S: Scalar>(
        &self,
        sys: &FiniteSystem<S>,
        subset: &[usize],
        family: &[Observable<S>],
    ) -> Result<CheckReport<S>, VerifyError> {
        let mut c = Checker::new("relative_independence", true);
        let host = host_measure_capped(sys, &gens(subset), self.cap)?;
        let z = join_of_invariants(sys, subset)?;
        let projected: Vec<Observable<S>> = family.iter().map(|f| cond_expectation(sys, f, &z)).collect();
        for t in mixed_tuples(family.len(), 1 << subset.len()) {
            let fs: Vec<&Observable<S>> = t.iter().map(|&j| &family[j]).collect();
            let es: Vec<&Observable<S>> = t.iter().map(|&j| &projected[j]).collect();
            c.equal(
                format!("cube f{t:?}: ∫⊗f vs ∫⊗E(f|Z)"),
                host.integrate(&fs)?,
                host.integrate(&es)?,
                || family[t[0]].clone(),
            );
        }

        let d = sys.d();
        let jf = furstenberg_joining_capped(sys, self.cap)?;
        let support = sys.support();
        for i in 0..d {
            let ti_inv = sys.transform(i).inverse();
            let mut p = Partition::from_atoms(sys.m(), vec![support.clone()]);
            for j in (0..d).filter(|&j| j != i) {
                let rel = ti_inv.compose(sys.transform(j));
                p = join_partitions(&p, &orbit_partition(sys, &[&rel]))?;
            }
            let projected: Vec<Observable<S>> = family.iter().map(|f| cond_expectation(sys, f, &p)).collect();
            for t in mixed_tuples(family.len(), d) {
                let fs: Vec<&Observable<S>> = t.iter().map(|&j| &family[j]).collect();
                let mut gs = fs.clone();
                gs[i] = &projected[t[i]];
                c.equal(
                    format!("joining f{t:?}: slot {} conditioned on ∨ I(T{}^-1 T_j)", i + 1, i + 1),
                    integrate_tensor(&jf, &fs)?,
                    integrate_tensor(&jf, &gs)?,
                    || family[t[i]].clone(),
                );
            }
        }
        Ok(c.finish())
    }

    /// `E(⊗f_ε | I_{T_k^{[k−1]}}) = E(⊗E(f_ε | Z_k) | I_{T_k^{[k−1]}})` on
    /// `μ_{T_1..T_{k−1}}`. Downgraded to a report when the system is not
    /// magic for the subset.
    pub fn cube_invariant_measurability<S: Scalar>(
        &self,
        sys: &FiniteSystem<S>,
        subset: &[usize],
        family: &[Observable<S>],
    ) -> Result<CheckReport<S>, VerifyError> {
        let mt = is_magic_capped(sys, subset, self.cap)?;
        let mut c = Checker::new("cube_invariant_measurability", !mt.magic);
        if !mt.magic {
            c.note("system is not magic for the subset: report only".into());
            c.report.witness = mt.witness.clone();
        }
        let host = host_measure_capped(sys, &gens(subset), self.cap)?;
        let base = host.base();
        let z = join_of_invariants(sys, subset)?;
        let projected: Vec<Observable<S>> = family.iter().map(|f| cond_expectation(sys, f, &z)).collect();
        let tensor = |fs: &[&Observable<S>]| -> Vec<S> {
            (0..base.len())
                .map(|u| prod(base.tuple(u).iter().zip(fs).map(|(&x, f)| f.at(x).clone())))
                .collect()
        };
        for t in mixed_tuples(family.len(), base.arity()) {
            let fs: Vec<&Observable<S>> = t.iter().map(|&j| &family[j]).collect();
            let es: Vec<&Observable<S>> = t.iter().map(|&j| &projected[j]).collect();
            let lhs = host.base_cond_expectation(&tensor(&fs));
            let rhs = host.base_cond_expectation(&tensor(&es));
            let mut worst = 0;
            let mut worst_gap = S::zero();
            for u in 0..lhs.len() {
                let gap = lhs[u].sub_ref(&rhs[u]).abs();
                if gap > worst_gap {
                    worst_gap = gap;
                    worst = u;
                }
            }
            c.equal(
                format!("f{t:?}: conditional expectations agree (worst base tuple {:?})", base.tuple(worst)),
                lhs[worst].clone(),
                rhs[worst].clone(),
                || family[t[0]].clone(),
            );
        }
        Ok(c.finish())
    }

    /// Every check on one system with default families and seeded `±1`
    /// observables, run in parallel and returned in a fixed order.
    pub fn suite<S: Scalar>(&self, sys: &FiniteSystem<S>, opts: &SuiteOptions) -> Result<Vec<CheckReport<S>>, VerifyError> {
        let d = sys.d();
        let subset = if opts.subset.is_empty() {
            (0..d).collect()
        } else {
            opts.subset.clone()
        };
        let family = default_family(sys, &subset)?;
        let x = sys.support()[0];
        let signs = random_signs::<S>(opts.seed, sys.m(), (1 << d) + d + 1);
        let vertex_fs = signs[..1 << d].to_vec();
        let gen_fs = signs[1 << d..(1 << d) + d].to_vec();
        let single = signs[(1 << d) + d].clone();
        let sigma = CubeIndex::from_axes(d, &subset);

        type Job<'a, S> = Box<dyn Fn() -> Result<CheckReport<S>, VerifyError> + Send + Sync + 'a>;
        let jobs: Vec<Job<'_, S>> = vec![
            Box::new(|| self.seminorm_properties(sys, &family, &subset)),
            Box::new(|| self.van_der_corput(sys, &vertex_fs, sigma, x, opts.nmax)),
            Box::new(|| self.magic_extension(sys, &subset)),
            Box::new(|| self.averaged_multiple(sys, &gen_fs)),
            Box::new(|| self.limit_formula(sys, &gen_fs)),
            Box::new(|| self.seminorm_limit(sys, &single, &subset)),
            Box::new(|| self.relative_independence(sys, &subset, &family)),
            Box::new(|| self.cube_invariant_measurability(sys, &subset, &family)),
        ];
        // Collect every result first so the reported error does not depend on scheduling.
        let results: Vec<_> = jobs.par_iter().map(|job| job()).collect();
        results.into_iter().collect()
    }
}

/// Parameters of [`Verifier::suite`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteOptions {
    /// Axes for the cube checks; empty means all.
    pub subset: Vec<usize>,
    pub seed: u64,
    pub nmax: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            subset: Vec::new(),
            seed: 0,
            nmax: 16,
        }
    }
}

pub fn check_seminorm_properties<S: Scalar>(
    sys: &FiniteSystem<S>,
    family: &[Observable<S>],
    subset: &[usize],
) -> Result<CheckReport<S>, VerifyError> {
    Verifier::default().seminorm_properties(sys, family, subset)
}

pub fn check_van_der_corput<S: Scalar>(
    sys: &FiniteSystem<S>,
    fs: &[Observable<S>],
    sigma: CubeIndex,
    x: usize,
    nmax: u64,
) -> Result<CheckReport<S>, VerifyError> {
    Verifier::default().van_der_corput(sys, fs, sigma, x, nmax)
}

pub fn check_magic_extension<S: Scalar>(sys: &FiniteSystem<S>, subset: &[usize]) -> Result<CheckReport<S>, VerifyError> {
    Verifier::default().magic_extension(sys, subset)
}

pub fn check_averaged_multiple<S: Scalar>(sys: &FiniteSystem<S>, fs: &[Observable<S>]) -> Result<CheckReport<S>, VerifyError> {
    Verifier::default().averaged_multiple(sys, fs)
}

pub fn check_limit_formula<S: Scalar>(sys: &FiniteSystem<S>, fs: &[Observable<S>]) -> Result<CheckReport<S>, VerifyError> {
    Verifier::default().limit_formula(sys, fs)
}

pub fn check_seminorm_limit<S: Scalar>(
    sys: &FiniteSystem<S>,
    f: &Observable<S>,
    subset: &[usize],
) -> Result<CheckReport<S>, VerifyError> {
    Verifier::default().seminorm_limit(sys, f, subset)
}

pub fn report_relative_independence<S: Scalar>(
    sys: &FiniteSystem<S>,
    subset: &[usize],
    family: &[Observable<S>],
) -> Result<CheckReport<S>, VerifyError> {
    Verifier::default().relative_independence(sys, subset, family)
}

pub fn check_cube_invariant_measurability<S: Scalar>(
    sys: &FiniteSystem<S>,
    subset: &[usize],
    family: &[Observable<S>],
) -> Result<CheckReport<S>, VerifyError> {
    Verifier::default().cube_invariant_measurability(sys, subset, family)
}

#[cfg(test)]
mod tests;
