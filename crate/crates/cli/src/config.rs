//! Flat `key = value` experiment configuration with a typed schema per
//! experiment kind.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Kind {
    OrthoVerify,
    BinomTv,
    Ldlr,
    SymTv,
    CfVerify,
    SubgraphTv,
    Sweep,
}

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::OrthoVerify,
        Kind::BinomTv,
        Kind::Ldlr,
        Kind::SymTv,
        Kind::CfVerify,
        Kind::SubgraphTv,
        Kind::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::OrthoVerify => "ortho-verify",
            Kind::BinomTv => "binom-tv",
            Kind::Ldlr => "ldlr",
            Kind::SymTv => "sym-tv",
            Kind::CfVerify => "cf-verify",
            Kind::SubgraphTv => "subgraph-tv",
            Kind::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ConfigError(format!("unknown experiment kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ty {
    Int,
    Float,
    Ints,
    Floats,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(u64),
    Float(f64),
    Ints(Vec<u64>),
    Floats(Vec<f64>),
    Text(String),
}

impl Value {
    pub fn parse(ty: Ty, raw: &str) -> Result<Value, String> {
        let raw = raw.trim();
        let int = |s: &str| s.trim().parse::<u64>().map_err(|e| format!("`{s}`: {e}"));
        let float = |s: &str| {
            let v = s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("`{s}` is not finite"))
            }
        };
        let list = |s: &str| -> Vec<String> {
            if s.is_empty() {
                Vec::new()
            } else {
                s.split(',').map(str::to_string).collect()
            }
        };
        Ok(match ty {
            Ty::Int => Value::Int(int(raw)?),
            Ty::Float => Value::Float(float(raw)?),
            Ty::Ints => Value::Ints(list(raw).iter().map(|s| int(s)).collect::<Result<_, _>>()?),
            Ty::Floats => Value::Floats(list(raw).iter().map(|s| float(s)).collect::<Result<_, _>>()?),
            Ty::Text => Value::Text(raw.to_string()),
        })
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            // Debug formatting of f64 is the shortest round-tripping form
            Value::Float(v) => write!(f, "{v:?}"),
            Value::Ints(v) => {
                let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                f.write_str(&s.join(","))
            }
            Value::Floats(v) => {
                let s: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                f.write_str(&s.join(","))
            }
            Value::Text(s) => f.write_str(s),
        }
    }
}

pub struct Key {
    pub name: &'static str,
    pub ty: Ty,
    pub default: &'static str,
}

macro_rules! key {
    ($name:expr, $ty:expr, $default:expr) => {
        Key { name: $name, ty: $ty, default: $default }
    };
}

const COMMON: &[Key] = &[
    key!("seed", Ty::Int, "0"),
    key!("threads", Ty::Int, "0"),
    key!("out", Ty::Text, "results"),
];

pub fn schema(kind: Kind) -> &'static [Key] {
    match kind {
        Kind::OrthoVerify => &[
            key!("n", Ty::Ints, "10,20,50,128"),
            key!("gamma", Ty::Floats, "0.3,0.5"),
            key!("kmax", Ty::Int, "12"),
            key!("tol", Ty::Float, "1e-10"),
            key!("bound_constant", Ty::Float, "3.0"),
        ],
        Kind::BinomTv => &[
            key!("n", Ty::Int, "128"),
            key!("gamma", Ty::Float, "0.3"),
            key!("eta", Ty::Float, "0.05"),
            key!("eps", Ty::Floats, "0.1,0.2,0.3,0.5,0.7"),
            key!("degree", Ty::Int, "0"),
        ],
        Kind::Ldlr => &[
            key!("model", Ty::Text, "biased"),
            key!("n", Ty::Int, "100"),
            key!("gamma", Ty::Float, "0.5"),
            key!("eta", Ty::Float, "0.05"),
            key!("weights", Ty::Ints, ""),
            key!("lambda", Ty::Float, "1.0"),
            key!("m", Ty::Int, "3"),
            key!("sparsity", Ty::Int, "4"),
            key!("signs", Ty::Text, "rademacher"),
            key!("degree", Ty::Int, "4"),
            key!("samples", Ty::Int, "20000"),
            key!("budget", Ty::Float, "1e8"),
            key!("family", Ty::Text, "connected"),
        ],
        Kind::SymTv => &[
            key!("model", Ty::Text, "quadrature"),
            key!("n", Ty::Int, "10000"),
            key!("k", Ty::Int, "2"),
            key!("eps", Ty::Float, "0.5"),
            key!("m", Ty::Int, "5"),
            key!("lambda", Ty::Float, "3.0"),
            key!("regular", Ty::Int, "0"),
            key!("samples", Ty::Int, "20000"),
            key!("bins", Ty::Int, "30"),
            key!("radius", Ty::Float, "2.0"),
            key!("directions", Ty::Int, "32"),
            key!("radii", Ty::Int, "64"),
        ],
        Kind::CfVerify => &[
            key!("k", Ty::Int, "4"),
            key!("count", Ty::Int, "1000"),
            key!("var_lo", Ty::Float, "1e-6"),
            key!("var_hi", Ty::Float, "1e6"),
            key!("nodes", Ty::Int, "400"),
            key!("safety", Ty::Float, "0.5"),
        ],
        Kind::SubgraphTv => &[
            key!("n", Ty::Int, "400"),
            key!("lambda", Ty::Float, "0"),
            key!("sparsity", Ty::Int, "0"),
            key!("signs", Ty::Text, "rademacher"),
            key!("eps", Ty::Float, "0.3"),
            key!("patterns", Ty::Text, "edge,2path,triangle"),
            key!("pattern_file", Ty::Text, ""),
            key!("samples", Ty::Int, "5000"),
            key!("bins", Ty::Int, "40"),
        ],
        Kind::Sweep => &[
            key!("n", Ty::Ints, "64,128,256"),
            key!("gamma", Ty::Floats, "0.5"),
            key!("eps", Ty::Floats, "0.05,0.1,0.2,0.3,0.5,0.7,0.9"),
        ],
    }
}

fn find_key(kind: Kind, name: &str) -> Option<&'static Key> {
    schema(kind).iter().chain(COMMON).find(|k| k.name == name)
}

/// A validated configuration: every schema key is present.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub values: BTreeMap<String, Value>,
}

impl ExperimentConfig {
    pub fn defaults(kind: Kind) -> Self {
        let values = schema(kind)
            .iter()
            .chain(COMMON)
            .map(|k| (k.name.to_string(), Value::parse(k.ty, k.default).expect("valid default")))
            .collect();
        ExperimentConfig { kind, values }
    }

    /// Parses `key = value` lines; `#` starts a comment. A `kind` line, if
    /// present, must agree with `expected`.
    pub fn parse(text: &str, expected: Option<Kind>) -> Result<Self, ConfigError> {
        let mut pairs = Vec::new();
        let mut kind = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k == "kind" {
                kind = Some(v.parse::<Kind>()?);
            } else {
                pairs.push((lineno + 1, k.to_string(), v.to_string()));
            }
        }
        let kind = match (kind, expected) {
            (Some(a), Some(b)) if a != b => {
                return Err(ConfigError(format!("config is for `{a}` but `{b}` was requested")))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(ConfigError("missing `kind`".into())),
        };
        let mut cfg = ExperimentConfig::defaults(kind);
        for (lineno, k, v) in pairs {
            cfg.set(&k, &v).map_err(|e| ConfigError(format!("line {lineno}: {}", e.0)))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, name: &str, raw: &str) -> Result<(), ConfigError> {
        let key = find_key(self.kind, name)
            .ok_or_else(|| ConfigError(format!("unknown key `{name}` for `{}`", self.kind)))?;
        let v = Value::parse(key.ty, raw).map_err(|e| ConfigError(format!("key `{name}`: {e}")))?;
        self.values.insert(name.to_string(), v);
        Ok(())
    }

    /// Canonical text: `kind` first, then keys in sorted order.
    pub fn serialize(&self) -> String {
        let mut out = format!("kind = {}\n", self.kind);
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    fn get(&self, name: &str) -> &Value {
        self.values
            .get(name)
            .unwrap_or_else(|| panic!("schema key `{name}` missing"))
    }

    pub fn int(&self, name: &str) -> u64 {
        match self.get(name) {
            Value::Int(v) => *v,
            v => panic!("`{name}` is not an integer: {v:?}"),
        }
    }

    pub fn usize(&self, name: &str) -> usize {
        self.int(name) as usize
    }

    pub fn float(&self, name: &str) -> f64 {
        match self.get(name) {
            Value::Float(v) => *v,
            v => panic!("`{name}` is not a float: {v:?}"),
        }
    }

    pub fn ints(&self, name: &str) -> Vec<usize> {
        match self.get(name) {
            Value::Ints(v) => v.iter().map(|&x| x as usize).collect(),
            v => panic!("`{name}` is not an integer list: {v:?}"),
        }
    }

    pub fn floats(&self, name: &str) -> Vec<f64> {
        match self.get(name) {
            Value::Floats(v) => v.clone(),
            v => panic!("`{name}` is not a float list: {v:?}"),
        }
    }

    pub fn text(&self, name: &str) -> &str {
        match self.get(name) {
            Value::Text(v) => v,
            v => panic!("`{name}` is not text: {v:?}"),
        }
    }

    pub fn seed(&self) -> u64 {
        self.int("seed")
    }

    pub fn threads(&self) -> Option<usize> {
        match self.usize("threads") {
            0 => None,
            t => Some(t),
        }
    }
}
