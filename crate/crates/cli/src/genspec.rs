//! Generator calls written as `name key=value ..`, e.g.
//! `cyclic_rotations q=4 steps=[1,2]`.

use std::fmt;

use ergocube::generate::{
    cyclic_rotations, power_system, product_of, random_commuting, skew_product, GenerateError,
    RandomWeights,
};
use ergocube::{Caps, FiniteSystem, Scalar};

/// Names accepted by [`build`].
pub const GENERATORS: [&str; 5] = [
    "cyclic_rotations",
    "power_system",
    "skew_product",
    "product_of",
    "random_commuting",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Word(String),
    List(Vec<Value>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Word(w) => f.write_str(w),
            Value::List(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorCall {
    pub name: String,
    /// Parameters with the byte offset of each value.
    pub params: Vec<(String, Value, usize)>,
}

/// A syntax error at a byte offset of the call text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn ident(&mut self) -> Result<&'a str, SyntaxError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a name");
        }
        Ok(&self.text[start..self.pos])
    }

    fn expect(&mut self, c: char) -> Result<(), SyntaxError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn value(&mut self) -> Result<Value, SyntaxError> {
        self.skip_ws();
        match self.peek() {
            Some('[') => {
                self.pos += 1;
                let mut items = Vec::new();
                self.skip_ws();
                if self.peek() == Some(']') {
                    self.pos += 1;
                    return Ok(Value::List(items));
                }
                loop {
                    items.push(self.value()?);
                    self.skip_ws();
                    match self.peek() {
                        Some(',') => self.pos += 1,
                        Some(']') => {
                            self.pos += 1;
                            return Ok(Value::List(items));
                        }
                        _ => return self.err("expected `,` or `]` in list"),
                    }
                }
            }
            Some(c) if c == '-' || c.is_ascii_digit() => {
                let start = self.pos;
                self.pos += 1;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let digits = &self.text[start..self.pos];
                digits.parse().map(Value::Int).map_err(|_| SyntaxError {
                    offset: start,
                    message: format!("bad integer `{digits}`"),
                })
            }
            Some(c) if c.is_ascii_alphabetic() => Ok(Value::Word(self.ident()?.to_string())),
            Some(_) => self.err("expected an integer, a word or a list"),
            None => self.err("missing value"),
        }
    }
}

pub fn parse(text: &str) -> Result<GeneratorCall, SyntaxError> {
    let mut lx = Lexer { text, pos: 0 };
    lx.skip_ws();
    let name = lx.ident()?.to_string();
    let mut params = Vec::new();
    loop {
        lx.skip_ws();
        if lx.peek().is_none() {
            break;
        }
        let key_at = lx.pos;
        let key = lx.ident()?.to_string();
        lx.skip_ws();
        lx.expect('=')?;
        lx.skip_ws();
        let at = lx.pos;
        let value = lx.value()?;
        if params.iter().any(|(k, _, _)| *k == key) {
            return Err(SyntaxError {
                offset: key_at,
                message: format!("parameter `{key}` given twice"),
            });
        }
        params.push((key, value, at));
    }
    Ok(GeneratorCall { name, params })
}

impl fmt::Display for GeneratorCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        for (k, v, _) in &self.params {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BuildError {
    UnknownGenerator(String),
    /// A semantic problem with one parameter, at a byte offset of the call.
    Param { offset: usize, message: String },
    Generate(GenerateError),
}

impl From<GenerateError> for BuildError {
    fn from(e: GenerateError) -> Self {
        BuildError::Generate(e)
    }
}

struct Args<'a> {
    call: &'a GeneratorCall,
    used: Vec<bool>,
}

impl<'a> Args<'a> {
    fn new(call: &'a GeneratorCall) -> Self {
        Args {
            call,
            used: vec![false; call.params.len()],
        }
    }

    fn find(&mut self, key: &str) -> Option<(&'a Value, usize)> {
        let i = self.call.params.iter().position(|(k, _, _)| k == key)?;
        self.used[i] = true;
        Some((&self.call.params[i].1, self.call.params[i].2))
    }

    fn bad<T>(offset: usize, message: String) -> Result<T, BuildError> {
        Err(BuildError::Param { offset, message })
    }

    fn required(&mut self, key: &str) -> Result<(&'a Value, usize), BuildError> {
        self.find(key).ok_or(BuildError::Param {
            offset: self.call.name.len(),
            message: format!("{} needs `{key}=`", self.call.name),
        })
    }

    fn int_of(v: &Value, at: usize, key: &str) -> Result<i64, BuildError> {
        match v {
            Value::Int(n) => Ok(*n),
            _ => Self::bad(at, format!("`{key}` must be an integer")),
        }
    }

    fn int(&mut self, key: &str) -> Result<i64, BuildError> {
        let (v, at) = self.required(key)?;
        Self::int_of(v, at, key)
    }

    fn size(&mut self, key: &str) -> Result<usize, BuildError> {
        let (v, at) = self.required(key)?;
        let n = Self::int_of(v, at, key)?;
        usize::try_from(n).or_else(|_| Self::bad(at, format!("`{key}` must be nonnegative")))
    }

    fn list_of(v: &Value, at: usize, key: &str) -> Result<Vec<i64>, BuildError> {
        match v {
            Value::List(items) => items.iter().map(|x| Self::int_of(x, at, key)).collect(),
            _ => Self::bad(at, format!("`{key}` must be a list of integers")),
        }
    }

    fn list(&mut self, key: &str) -> Result<Vec<i64>, BuildError> {
        let (v, at) = self.required(key)?;
        Self::list_of(v, at, key)
    }

    fn finish(self) -> Result<(), BuildError> {
        match self.used.iter().position(|u| !u) {
            Some(i) => Self::bad(
                self.call.params[i].2,
                format!("{} has no parameter `{}`", self.call.name, self.call.params[i].0),
            ),
            None => Ok(()),
        }
    }
}

/// Builds the named system.
pub fn build<S: Scalar>(call: &GeneratorCall, caps: &Caps) -> Result<FiniteSystem<S>, BuildError> {
    let mut a = Args::new(call);
    let sys = match call.name.as_str() {
        "cyclic_rotations" => {
            let (q, steps) = (a.size("q")?, a.list("steps")?);
            a.finish()?;
            cyclic_rotations(q, &steps, caps)?
        }
        "power_system" => {
            let (q, exps) = (a.size("q")?, a.list("a")?);
            let step = match a.find("step") {
                Some((v, at)) => Args::int_of(v, at, "step")?,
                None => 1,
            };
            a.finish()?;
            power_system(q, &exps, step, caps)?
        }
        "skew_product" => {
            let (q, shift, powers) = (a.size("q")?, a.int("a")?, a.list("powers")?);
            a.finish()?;
            skew_product(q, shift, &powers, caps)?
        }
        "product_of" => {
            let qs = a.list("q")?;
            let (steps, at) = a.required("steps")?;
            let Value::List(rows) = steps else {
                return Args::bad(at, "`steps` must be a list of lists".into());
            };
            if rows.len() != qs.len() {
                return Args::bad(at, format!("{} step lists for {} factors", rows.len(), qs.len()));
            }
            a.finish()?;
            let factors = qs
                .iter()
                .zip(rows)
                .map(|(&q, row)| {
                    let q = usize::try_from(q).or_else(|_| Args::bad(at, "factor sizes must be positive".into()))?;
                    Ok(cyclic_rotations(q, &Args::list_of(row, at, "steps")?, caps)?)
                })
                .collect::<Result<Vec<_>, BuildError>>()?;
            product_of(&factors, caps)?
        }
        "random_commuting" => {
            let seed = a.int("seed")?;
            let (m, d) = (a.size("m")?, a.size("d")?);
            let weights = match a.find("weights") {
                None => RandomWeights::Uniform,
                Some((Value::Word(w), _)) if w == "uniform" => RandomWeights::Uniform,
                Some((Value::Word(w), _)) if w == "per_cycle" => RandomWeights::PerCycle,
                Some((_, at)) => return Args::bad(at, "`weights` must be `uniform` or `per_cycle`".into()),
            };
            a.finish()?;
            random_commuting(seed as u64, m, d, weights, caps)?
        }
        other => return Err(BuildError::UnknownGenerator(other.to_string())),
    };
    Ok(sys)
}
