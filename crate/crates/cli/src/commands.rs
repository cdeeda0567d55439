//! Command dispatch. Every command reads a validated config, computes in the
//! selected arithmetic mode and writes one artifact into the output
//! directory.

use std::fmt::{Debug, Write as _};
use std::path::{Path, PathBuf};

use thiserror::Error;

use ergocube::averages::DEFAULT_STREAM_GRID;
use ergocube::cubes::{cube_extension_capped, gens, host_measure_capped};
use ergocube::joinings::furstenberg_joining_capped;
use ergocube::verify::{default_family, to_csv};
use ergocube::{
    convergence_report, ergodic_decomposition, stream_average, Average, AverageError, AverageSpec,
    Caps, CubeError, CubeIndex, FiniteSystem, GenerateError, JoiningError, Observable, Rational,
    Scalar, SigmaError, SuiteOptions, SystemError, Verifier, VerifyError,
};

use crate::config::{AverageKind, BuildFailure, ConfigError, ExperimentConfig, ModeArg};

/// Grid used by `average` when the config gives none.
pub const DEFAULT_GRID: [u64; 7] = [1, 2, 4, 8, 16, 32, 64];

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Check the config and print a summary of the system.
    Validate,
    /// Host seminorms of the listed functions: `seminorm.csv`.
    Seminorm,
    /// Host cube measure: `host_measure.txt`.
    HostMeasure,
    /// Cube extension over the subset: `cube_extension.txt`.
    CubeExtension,
    /// Furstenberg joining: `furstenberg.txt`.
    Furstenberg,
    /// Convergence of an average along the grid: `average.csv`.
    Average,
    /// Property suite: `verify.csv`; exit 5 when an assertion fails.
    Verify,
    /// Built-in examples, no config needed.
    Demo,
}

impl Command {
    pub fn needs_config(self) -> bool {
        self != Command::Demo
    }
}

/// Command-line overrides of config values.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub mode: Option<ModeArg>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub cap: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    /// Human-readable lines for stdout.
    pub summary: String,
    pub files: Vec<PathBuf>,
    /// Some asserted check failed.
    pub checks_failed: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Cap(String),
}

impl CliError {
    /// 1 io, 2 parse, 3 validation, 4 cap or resource.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Usage(_) | CliError::Config(ConfigError::Parse { .. } | ConfigError::UnknownGenerator { .. }) => 2,
            CliError::Validation(_) | CliError::Config(ConfigError::Invalid(_)) => 3,
            CliError::Cap(_) | CliError::Config(ConfigError::CapExceeded(_)) => 4,
        }
    }
}

/// Innermost variant name of a nested error enum, read from its `Debug` form.
fn variant_name(e: &impl Debug) -> String {
    let text = format!("{e:?}");
    let mut rest = text.as_str();
    loop {
        let end = rest.find(|c: char| !c.is_alphanumeric() && c != '_').unwrap_or(rest.len());
        let (name, after) = rest.split_at(end);
        match after.strip_prefix('(') {
            Some(inner) if inner.starts_with(|c: char| c.is_ascii_uppercase()) => rest = inner,
            _ => return name.to_string(),
        }
    }
}

fn validation(e: &(impl Debug + std::fmt::Display)) -> CliError {
    CliError::Validation(format!("{}: {e}", variant_name(e)))
}

fn cap(e: &(impl Debug + std::fmt::Display)) -> CliError {
    CliError::Cap(format!("{}: {e}", variant_name(e)))
}

impl From<SystemError> for CliError {
    fn from(e: SystemError) -> Self {
        match e {
            SystemError::CapExceeded { .. } => cap(&e),
            _ => validation(&e),
        }
    }
}

impl From<SigmaError> for CliError {
    fn from(e: SigmaError) -> Self {
        match e {
            SigmaError::System(s) => s.into(),
            _ => validation(&e),
        }
    }
}

impl From<CubeError> for CliError {
    fn from(e: CubeError) -> Self {
        match e {
            CubeError::SupportExplosion { .. } => cap(&e),
            CubeError::System(s) => s.into(),
            CubeError::Sigma(s) => s.into(),
            _ => validation(&e),
        }
    }
}

impl From<JoiningError> for CliError {
    fn from(e: JoiningError) -> Self {
        match e {
            JoiningError::Cube(c) => c.into(),
            JoiningError::System(s) => s.into(),
            _ => validation(&e),
        }
    }
}

impl From<AverageError> for CliError {
    fn from(e: AverageError) -> Self {
        match e {
            AverageError::BoxTooLarge { .. } => cap(&e),
            _ => validation(&e),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        if e.is_cap() {
            cap(&e)
        } else {
            validation(&e)
        }
    }
}

impl From<GenerateError> for CliError {
    fn from(e: GenerateError) -> Self {
        match e {
            GenerateError::System(s) => s.into(),
            GenerateError::UnknownGenerator(_) => CliError::Usage(format!("UnknownGenerator: {e}")),
            GenerateError::BadParameter { .. } => validation(&e),
        }
    }
}

impl From<BuildFailure> for CliError {
    fn from(e: BuildFailure) -> Self {
        match e {
            BuildFailure::System(s) => s.into(),
            BuildFailure::Generate(g) => g.into(),
            BuildFailure::Average(a) => a.into(),
            BuildFailure::Invalid(m) => CliError::Validation(m),
        }
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    out: PathBuf,
    cap: usize,
    seed: u64,
}

impl Ctx<'_> {
    fn caps(&self) -> Caps {
        Caps {
            max_support: self.cap,
            ..Caps::default()
        }
    }

    fn write(&self, name: &str, contents: &str, outcome: &mut Outcome) -> Result<(), CliError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Io { path, source }
        };
        std::fs::create_dir_all(&self.out).map_err(io(&self.out))?;
        let path = self.out.join(name);
        std::fs::write(&path, contents).map_err(io(&path))?;
        let _ = writeln!(outcome.summary, "wrote {}", path.display());
        outcome.files.push(path);
        Ok(())
    }
}

/// Runs one command. `cfg` may be `None` only for [`Command::Demo`].
pub fn run(cmd: Command, cfg: Option<&ExperimentConfig>, opts: &RunOptions) -> Result<Outcome, CliError> {
    if cmd == Command::Demo {
        return demo(opts);
    }
    let cfg = cfg.ok_or_else(|| CliError::Usage(format!("{cmd:?} needs --config")))?;
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.params.seed = Some(seed);
    }
    let ctx = Ctx {
        cfg: &cfg,
        out: opts
            .out
            .clone()
            .or_else(|| cfg.params.out.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(".")),
        cap: opts.cap.or(cfg.params.cap).unwrap_or(Caps::default().max_support),
        seed: cfg.params.seed.unwrap_or(0),
    };
    if cmd == Command::Average && cfg.stream.is_some() {
        return stream(&ctx);
    }
    match opts.mode.or(cfg.mode).unwrap_or(ModeArg::Rational) {
        ModeArg::Rational => run_in::<Rational>(cmd, &ctx),
        ModeArg::Float => run_in::<f64>(cmd, &ctx),
    }
}

fn run_in<S: Scalar>(cmd: Command, ctx: &Ctx<'_>) -> Result<Outcome, CliError> {
    let sys: FiniteSystem<S> = if cmd == Command::Validate && ctx.cfg.system.is_none() {
        return validate_stream(ctx);
    } else {
        ctx.cfg.build_system(&ctx.caps())?
    };
    let subset = ctx.cfg.subset(sys.d())?;
    let mut outcome = Outcome::default();
    match cmd {
        Command::Validate => validate(ctx, &sys, &mut outcome)?,
        Command::Seminorm => {
            let host = host_measure_capped(&sys, &gens(&subset), ctx.cap)?;
            let mut fs = ctx.cfg.selected_functions::<S>(sys.m())?;
            if fs.is_empty() {
                fs = default_family(&sys, &subset)?
                    .into_iter()
                    .enumerate()
                    .map(|(i, f)| (format!("basis{i}"), f))
                    .collect();
            }
            let mut csv = String::from("function,k,integral,seminorm\n");
            for (name, f) in &fs {
                let s = host.seminorm(f);
                let _ = writeln!(csv, "{name},{},{},{}", s.k, s.integral.to_text(), s.value());
                let _ = writeln!(outcome.summary, "|||{name}||| = {} (integral {})", s.value(), s.integral.to_text());
            }
            ctx.write("seminorm.csv", &csv, &mut outcome)?;
        }
        Command::HostMeasure => {
            let j = host_measure_capped(&sys, &gens(&subset), ctx.cap)?.joining()?;
            let _ = writeln!(outcome.summary, "host measure on {} tuples of arity {}", j.len(), j.arity());
            ctx.write("host_measure.txt", &j.to_text(), &mut outcome)?;
        }
        Command::CubeExtension => {
            let ext = cube_extension_capped(&sys, &subset, ctx.cap)?;
            let mut text = String::new();
            for (i, t) in ext.system.transforms().iter().enumerate() {
                let _ = write!(text, "# T{}", i + 1);
                for x in t.images() {
                    let _ = write!(text, " {x}");
                }
                text.push('\n');
            }
            text.push_str(&ext.tuples.to_text());
            let _ = writeln!(
                outcome.summary,
                "cube extension with {} points, equivariant: {}",
                ext.system.m(),
                ext.is_equivariant(&sys)
            );
            ctx.write("cube_extension.txt", &text, &mut outcome)?;
        }
        Command::Furstenberg => {
            let j = furstenberg_joining_capped(&sys, ctx.cap)?;
            let _ = writeln!(outcome.summary, "Furstenberg joining on {} tuples", j.len());
            ctx.write("furstenberg.txt", &j.to_text(), &mut outcome)?;
        }
        Command::Average => {
            let spec = average_spec(ctx, &sys)?;
            let grid = ctx.cfg.params.grid.clone().unwrap_or_else(|| DEFAULT_GRID.to_vec());
            let report = convergence_report(&sys, &spec, &grid)?;
            if let (Some(v), Some(l)) = (report.values.last(), &report.exact_limit) {
                let _ = writeln!(
                    outcome.summary,
                    "{} average at N = {}: {} (limit {}, converged: {})",
                    spec.average.kind(),
                    grid[grid.len() - 1],
                    v.to_text(),
                    l.to_text(),
                    report.converged
                );
            }
            ctx.write("average.csv", &report.to_csv(), &mut outcome)?;
        }
        Command::Verify => {
            let opts = SuiteOptions {
                subset,
                seed: ctx.seed,
                nmax: ctx.cfg.params.nmax.unwrap_or(SuiteOptions::default().nmax),
            };
            let reports = Verifier::new(ctx.cap).suite(&sys, &opts)?;
            for r in &reports {
                let _ = writeln!(outcome.summary, "{}: {} (max residual {:e})", r.name, r.status, r.max_residual());
            }
            outcome.checks_failed = reports.iter().any(|r| !r.passed());
            ctx.write("verify.csv", &to_csv(&reports), &mut outcome)?;
        }
        Command::Demo => unreachable!("handled by run"),
    }
    Ok(outcome)
}

fn validate<S: Scalar>(ctx: &Ctx<'_>, sys: &FiniteSystem<S>, outcome: &mut Outcome) -> Result<(), CliError> {
    let all: Vec<usize> = (0..sys.d()).collect();
    let components = ergodic_decomposition(sys, &all)?.len();
    let fs = ctx.cfg.selected_functions::<S>(sys.m())?;
    let s = &mut outcome.summary;
    let _ = writeln!(s, "points: {}", sys.m());
    let _ = writeln!(s, "generators: {}", sys.d());
    let _ = writeln!(s, "support: {}", sys.support().len());
    let _ = writeln!(s, "ergodic components: {components}");
    let _ = writeln!(s, "functions: {}", fs.len());
    if ctx.cfg.stream.is_some() {
        validate_stream(ctx)?;
        let _ = writeln!(s, "stream: ok");
    }
    Ok(())
}

fn validate_stream(ctx: &Ctx<'_>) -> Result<Outcome, CliError> {
    let mut outcome = Outcome::default();
    if let Some((system, _, _)) = ctx.cfg.build_stream()? {
        let _ = writeln!(outcome.summary, "stream maps: {} on a {}-torus", system.d(), system.dim());
    }
    Ok(outcome)
}

fn stream(ctx: &Ctx<'_>) -> Result<Outcome, CliError> {
    let (system, avg, x0) = ctx.cfg.build_stream()?.expect("caller checked the stream section");
    let grid = ctx.cfg.params.grid.clone().unwrap_or_else(|| DEFAULT_STREAM_GRID.to_vec());
    let report = stream_average(&system, &avg, &x0, &grid)?;
    let mut outcome = Outcome::default();
    if let (Some(v), Some(t)) = (report.values.last(), report.tail.last()) {
        let _ = writeln!(outcome.summary, "stream average at N = {}: {v} (tail {t})", grid[grid.len() - 1]);
    }
    ctx.write("average.csv", &report.to_csv(), &mut outcome)?;
    Ok(outcome)
}

fn average_spec<S: Scalar>(ctx: &Ctx<'_>, sys: &FiniteSystem<S>) -> Result<AverageSpec<S>, CliError> {
    let p = &ctx.cfg.params;
    let kind = p
        .average
        .ok_or_else(|| CliError::Validation("`average` needs params.average".into()))?;
    let fs: Vec<Observable<S>> = ctx
        .cfg
        .selected_functions::<S>(sys.m())?
        .into_iter()
        .map(|(_, f)| f)
        .collect();
    let d = sys.d();
    let average = match kind {
        AverageKind::Multiple => Average::Multiple(fs),
        AverageKind::AveragedMultiple => Average::AveragedMultiple(fs),
        AverageKind::AveragedCubic => Average::AveragedCubic(fs),
        AverageKind::Cubic => match &p.vertices {
            Some(vs) => {
                if vs.len() != fs.len() {
                    return Err(CliError::Validation(format!(
                        "{} vertices for {} functions",
                        vs.len(),
                        fs.len()
                    )));
                }
                let vs = vs.iter().map(|v| CubeIndex::parse(v).expect("config validated vertices"));
                Average::Cubic(vs.zip(fs).collect())
            }
            None => {
                if fs.len() + 1 != 1 << d {
                    return Err(AverageError::ArityMismatch {
                        expected: (1 << d) - 1,
                        got: fs.len(),
                    }
                    .into());
                }
                Average::cubic_nonzero(d, fs)
            }
        },
        AverageKind::SSigma => {
            let f = fs
                .into_iter()
                .next()
                .ok_or_else(|| CliError::Validation("s_sigma needs one function".into()))?;
            let sigma = match &p.sigma {
                Some(s) => CubeIndex::parse(s).expect("config validated sigma"),
                None => CubeIndex::ones(d),
            };
            Average::SSigma { f, sigma }
        }
    };
    let x = match p.x {
        Some(x) => x,
        None => *sys.support().first().ok_or(SystemError::Empty)?,
    };
    let spec = AverageSpec::new(average, x);
    spec.validate(sys)?;
    Ok(spec)
}

/// E3 through the suite and the averaged multiple average of E4.
fn demo(opts: &RunOptions) -> Result<Outcome, CliError> {
    let e3 = "version = 1\n[system]\ngenerator = \"cyclic_rotations q=4 steps=[1,2]\"\n";
    let e4 = "version = 1\n\
        [system]\ngenerator = \"cyclic_rotations q=4 steps=[1,3]\"\n\
        [[functions]]\nname = \"one_at_zero\"\nkind = \"indicator\"\npoints = [0]\n\
        [params]\naverage = \"averaged_multiple\"\nfunctions = [\"one_at_zero\", \"one_at_zero\"]\n";
    let out = opts.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut outcome = Outcome::default();
    for (name, text, cmd) in [("e3", e3, Command::Verify), ("e4", e4, Command::Average)] {
        let cfg = crate::config::parse_config(text)?;
        let sub = RunOptions {
            out: Some(out.join(name)),
            ..opts.clone()
        };
        let _ = writeln!(outcome.summary, "== {name}: {cmd:?}");
        let o = run(cmd, Some(&cfg), &sub)?;
        outcome.summary.push_str(&o.summary);
        outcome.files.extend(o.files);
        outcome.checks_failed |= o.checks_failed;
    }
    Ok(outcome)
}
