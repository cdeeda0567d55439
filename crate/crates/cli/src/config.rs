//! Experiment configuration: a versioned TOML document.
//!
//! ```toml
//! version = 1
//! mode = "rational"
//!
//! [system]
//! generator = "cyclic_rotations q=4 steps=[1,2]"
//!
//! [[functions]]
//! name = "w"
//! kind = "values"
//! values = ["1", "0", "-1", "0"]
//!
//! [params]
//! subset = [1, 2]
//! ```
//!
//! Axes in `subset` are 1-based.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use ergocube::averages::{AffineMap, StreamAverage, StreamFunction, StreamSystem};
use ergocube::system::uniform_weights;
use ergocube::{Caps, CubeIndex, FiniteSystem, Observable, Scalar, SystemError};

use crate::genspec::{self, BuildError};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Float,
    Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeArg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream: Option<StreamSpec>,
    #[serde(default)]
    pub params: Params,
}

/// Either a generator call or inline arrays.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    /// Rationals such as `"1/4"`; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transforms: Option<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// One rational per point.
    Values { name: String, values: Vec<String> },
    Indicator { name: String, points: Vec<usize> },
    Constant { name: String, value: String },
    /// `cos(2π k x / q)` on `Z/q`; `q` defaults to the point count.
    Character {
        name: String,
        k: i64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<usize>,
    },
    /// Independent `±1` values; the seed defaults to `params.seed`.
    Random {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl FunctionSpec {
    pub fn name(&self) -> &str {
        match self {
            FunctionSpec::Values { name, .. }
            | FunctionSpec::Indicator { name, .. }
            | FunctionSpec::Constant { name, .. }
            | FunctionSpec::Character { name, .. }
            | FunctionSpec::Random { name, .. } => name,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AverageKind {
    Multiple,
    Cubic,
    AveragedMultiple,
    AveragedCubic,
    SSigma,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<usize>>,
    /// Vertex string such as `"11"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub average: Option<AverageKind>,
    /// Names of functions, in the order the average or command uses them.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functions: Option<Vec<String>>,
    /// Vertices for a cubic average, one per listed function.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmax: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamMapSpec {
    pub shift: Vec<f64>,
    /// Identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<i64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StreamFunctionSpec {
    Constant { value: f64 },
    Cos { k: Vec<i64> },
    Sin { k: Vec<i64> },
    Indicator { coord: usize, lo: f64, hi: f64 },
}

/// Sampled orbit of commuting torus maps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamSpec {
    pub maps: Vec<StreamMapSpec>,
    pub x0: Vec<f64>,
    /// `multiple` or `cubic`.
    pub average: AverageKind,
    pub functions: Vec<StreamFunctionSpec>,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unknown generator `{name}` at line {line}, column {column}")]
    UnknownGenerator { name: String, line: usize, column: usize },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
}

/// 1-based line and column of a byte offset.
fn locate(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Offset of the quoted generator string inside the document.
fn generator_offset(text: &str, generator: &str) -> usize {
    for (quote, escaped) in [("\"", generator.replace('\\', "\\\\").replace('"', "\\\"")), ("'", generator.to_string())] {
        let needle = format!("{quote}{escaped}{quote}");
        if let Some(i) = text.find(&needle) {
            return i + 1;
        }
    }
    0
}

/// Parses and validates a configuration: syntax, version, generator calls,
/// references between sections, and point caps.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| locate(text, s.start));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    if cfg.version != CONFIG_VERSION {
        return Err(ConfigError::Invalid(format!(
            "unsupported version {} (expected {CONFIG_VERSION})",
            cfg.version
        )));
    }
    if let Some(sys) = &cfg.system {
        match (&sys.generator, &sys.transforms) {
            (Some(g), None) => {
                if sys.weights.is_some() {
                    return Err(ConfigError::Invalid("`weights` only apply to inline transforms".into()));
                }
                let base = generator_offset(text, g);
                let at = |offset: usize| locate(text, base + offset);
                let call = genspec::parse(g).map_err(|e| {
                    let (line, column) = at(e.offset);
                    ConfigError::Parse {
                        line,
                        column,
                        message: e.message,
                    }
                })?;
                match genspec::build::<ergocube::Rational>(&call, &Caps::default()) {
                    Ok(_) => {}
                    Err(BuildError::UnknownGenerator(name)) => {
                        let (line, column) = at(0);
                        return Err(ConfigError::UnknownGenerator { name, line, column });
                    }
                    Err(BuildError::Param { offset, message }) => {
                        let (line, column) = at(offset);
                        return Err(ConfigError::Parse { line, column, message });
                    }
                    Err(BuildError::Generate(ergocube::GenerateError::System(SystemError::CapExceeded { what, value, cap }))) => {
                        return Err(ConfigError::CapExceeded(format!("{what} = {value} exceeds {cap}")));
                    }
                    // Other system errors surface when the command builds the system.
                    Err(BuildError::Generate(ergocube::GenerateError::BadParameter { name, reason })) => {
                        let (line, column) = at(0);
                        return Err(ConfigError::Parse {
                            line,
                            column,
                            message: format!("`{name}`: {reason}"),
                        });
                    }
                    Err(BuildError::Generate(_)) => {}
                }
            }
            (None, Some(ts)) => {
                let m = sys.weights.as_ref().map_or_else(|| ts.first().map_or(0, Vec::len), Vec::len);
                let caps = Caps::default();
                if m > caps.max_points {
                    return Err(ConfigError::CapExceeded(format!("point count {m} exceeds {}", caps.max_points)));
                }
                if ts.len() > caps.max_generators {
                    return Err(ConfigError::CapExceeded(format!(
                        "generator count {} exceeds {}",
                        ts.len(),
                        caps.max_generators
                    )));
                }
                if let Some(ws) = &sys.weights {
                    if let Some(bad) = ws.iter().find(|w| ergocube::scalar::parse_rational(w).is_none()) {
                        return Err(ConfigError::Invalid(format!("weight `{bad}` is not a rational")));
                    }
                }
            }
            _ => {
                return Err(ConfigError::Invalid(
                    "[system] needs exactly one of `generator` or `transforms`".into(),
                ))
            }
        }
    } else if cfg.stream.is_none() {
        return Err(ConfigError::Invalid("config needs a [system] or [stream] section".into()));
    }

    let mut names: Vec<&str> = Vec::new();
    for f in &cfg.functions {
        if names.contains(&f.name()) {
            return Err(ConfigError::Invalid(format!("function `{}` defined twice", f.name())));
        }
        names.push(f.name());
        let texts: Vec<&String> = match f {
            FunctionSpec::Values { values, .. } => values.iter().collect(),
            FunctionSpec::Constant { value, .. } => vec![value],
            _ => Vec::new(),
        };
        if let Some(bad) = texts.iter().find(|t| ergocube::scalar::parse_rational(t).is_none()) {
            return Err(ConfigError::Invalid(format!("`{bad}` in function `{}` is not a rational", f.name())));
        }
    }
    if let Some(refs) = &cfg.params.functions {
        if let Some(missing) = refs.iter().find(|r| !names.contains(&r.as_str())) {
            return Err(ConfigError::Invalid(format!("unknown function `{missing}`")));
        }
    }
    for v in cfg.params.vertices.iter().flatten().chain(cfg.params.sigma.iter()) {
        if CubeIndex::parse(v).is_none() {
            return Err(ConfigError::Invalid(format!("`{v}` is not a 0/1 vertex")));
        }
    }
    if cfg.params.subset.as_ref().is_some_and(|s| s.contains(&0)) {
        return Err(ConfigError::Invalid("subset axes are 1-based".into()));
    }
    if let Some(s) = &cfg.stream {
        if !matches!(s.average, AverageKind::Multiple | AverageKind::Cubic) {
            return Err(ConfigError::Invalid("stream averages are `multiple` or `cubic`".into()));
        }
    }
    Ok(cfg)
}

pub fn to_toml(cfg: &ExperimentConfig) -> String {
    toml::to_string(cfg).expect("configs serialize")
}

/// Errors raised while turning a parsed config into objects.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum BuildFailure {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Generate(#[from] ergocube::GenerateError),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Average(#[from] ergocube::AverageError),
}

impl ExperimentConfig {
    pub fn build_system<S: Scalar>(&self, caps: &Caps) -> Result<FiniteSystem<S>, BuildFailure> {
        let spec = self
            .system
            .as_ref()
            .ok_or_else(|| BuildFailure::Invalid("this command needs a [system] section".into()))?;
        if let Some(g) = &spec.generator {
            let call = genspec::parse(g).map_err(|e| BuildFailure::Invalid(e.message))?;
            return genspec::build(&call, caps).map_err(|e| match e {
                BuildError::Generate(g) => BuildFailure::Generate(g),
                BuildError::UnknownGenerator(n) => BuildFailure::Invalid(format!("unknown generator `{n}`")),
                BuildError::Param { message, .. } => BuildFailure::Invalid(message),
            });
        }
        let ts = spec.transforms.clone().unwrap_or_default();
        let m = spec.weights.as_ref().map_or_else(|| ts.first().map_or(0, Vec::len), Vec::len);
        let weights = match &spec.weights {
            Some(ws) => ws
                .iter()
                .map(|w| {
                    ergocube::scalar::parse_rational(w)
                        .map(|r| S::from_rational(&r))
                        .ok_or_else(|| BuildFailure::Invalid(format!("weight `{w}` is not a rational")))
                })
                .collect::<Result<_, _>>()?,
            None if m > 0 => uniform_weights(m),
            None => Vec::new(),
        };
        Ok(FiniteSystem::validate_with(weights, ts, caps)?)
    }

    fn function_spec(&self, name: &str) -> Result<&FunctionSpec, BuildFailure> {
        self.functions
            .iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| BuildFailure::Invalid(format!("unknown function `{name}`")))
    }

    pub fn build_function<S: Scalar>(&self, name: &str, m: usize) -> Result<Observable<S>, BuildFailure> {
        let rational = |t: &str| {
            ergocube::scalar::parse_rational(t)
                .map(|r| S::from_rational(&r))
                .ok_or_else(|| BuildFailure::Invalid(format!("`{t}` is not a rational")))
        };
        let f = match self.function_spec(name)? {
            FunctionSpec::Values { values, .. } => {
                if values.len() != m {
                    return Err(BuildFailure::Invalid(format!(
                        "function `{name}` has {} values for {m} points",
                        values.len()
                    )));
                }
                Observable(values.iter().map(|v| rational(v)).collect::<Result<_, _>>()?)
            }
            FunctionSpec::Indicator { points, .. } => {
                if let Some(p) = points.iter().find(|&&p| p >= m) {
                    return Err(BuildFailure::Invalid(format!("point {p} of `{name}` outside 0..{m}")));
                }
                Observable::indicator(m, points)
            }
            FunctionSpec::Constant { value, .. } => Observable::constant(m, rational(value)?),
            FunctionSpec::Character { k, q, .. } => {
                let q = q.unwrap_or(m);
                if q == 0 {
                    return Err(BuildFailure::Invalid(format!("`{name}`: q must be positive")));
                }
                Observable((0..m).map(|x| character_value(*k, x, q)).collect())
            }
            FunctionSpec::Random { seed, .. } => {
                let seed = seed.or(self.params.seed).unwrap_or(0);
                ergocube::generate::random_signs(seed, m, 1).remove(0)
            }
        };
        Ok(f)
    }

    /// Functions named in `params.functions`, or every function when absent.
    pub fn selected_functions<S: Scalar>(&self, m: usize) -> Result<Vec<(String, Observable<S>)>, BuildFailure> {
        let names: Vec<String> = match &self.params.functions {
            Some(list) => list.clone(),
            None => self.functions.iter().map(|f| f.name().to_string()).collect(),
        };
        names
            .into_iter()
            .map(|n| Ok((n.clone(), self.build_function(&n, m)?)))
            .collect()
    }

    /// Zero-based subset, defaulting to every axis.
    pub fn subset(&self, d: usize) -> Result<Vec<usize>, BuildFailure> {
        match &self.params.subset {
            None => Ok((0..d).collect()),
            Some(s) => {
                if let Some(a) = s.iter().find(|&&a| a == 0 || a > d) {
                    return Err(BuildFailure::Invalid(format!("subset axis {a} outside 1..={d}")));
                }
                Ok(s.iter().map(|a| a - 1).collect())
            }
        }
    }

    pub fn build_stream(&self) -> Result<Option<(StreamSystem, StreamAverage, Vec<f64>)>, BuildFailure> {
        let Some(s) = &self.stream else {
            return Ok(None);
        };
        let maps = s
            .maps
            .iter()
            .map(|m| match &m.matrix {
                Some(matrix) => AffineMap {
                    matrix: matrix.clone(),
                    shift: m.shift.clone(),
                },
                None => AffineMap::rotation(m.shift.clone()),
            })
            .collect();
        let system = StreamSystem::new(maps)?;
        let fs = s
            .functions
            .iter()
            .map(|f| match f {
                StreamFunctionSpec::Constant { value } => StreamFunction::Constant(*value),
                StreamFunctionSpec::Cos { k } => StreamFunction::Cos(k.clone()),
                StreamFunctionSpec::Sin { k } => StreamFunction::Sin(k.clone()),
                StreamFunctionSpec::Indicator { coord, lo, hi } => StreamFunction::Indicator {
                    coord: *coord,
                    lo: *lo,
                    hi: *hi,
                },
            })
            .collect();
        let avg = match s.average {
            AverageKind::Cubic => StreamAverage::Cubic(fs),
            _ => StreamAverage::Multiple(fs),
        };
        Ok(Some((system, avg, s.x0.clone())))
    }
}

/// `cos(2π k x / q)`, exact at multiples of a quarter turn.
fn character_value<S: Scalar>(k: i64, x: usize, q: usize) -> S {
    let r = (k * x as i64).rem_euclid(q as i64);
    if (4 * r) % q as i64 == 0 {
        match 4 * r / q as i64 {
            0 => S::one(),
            2 => -S::one(),
            _ => S::zero(),
        }
    } else {
        S::from_f64((std::f64::consts::TAU * r as f64 / q as f64).cos())
    }
}
