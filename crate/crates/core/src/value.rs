//! Attribute values, attribute schemas and model parameters.
//!
//! Every inspectable quantity in a simulation is a [`Value`]. Each entity kind
//! declares a fixed list of [`AttrSpec`]s when the model is loaded, and every
//! write is checked against it.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// A tagged scalar. Serializes untagged: JSON `true`, `3`, `3.0`, `"label"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
    Symbol(String),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Real(_) => "real",
            Value::Symbol(_) => "symbol",
        }
    }

    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            Value::Int(i) => *i != 0,
            Value::Real(r) => *r != 0.0,
            Value::Symbol(_) => false,
        }
    }

    pub fn as_real(&self) -> f64 {
        match self {
            Value::Bool(b) => f64::from(u8::from(*b)),
            Value::Int(i) => *i as f64,
            Value::Real(r) => *r,
            Value::Symbol(_) => f64::NAN,
        }
    }

    pub fn as_int(&self) -> i64 {
        match self {
            Value::Bool(b) => i64::from(*b),
            Value::Int(i) => *i,
            Value::Real(r) => *r as i64,
            Value::Symbol(_) => 0,
        }
    }

    pub fn as_symbol(&self) -> &str {
        match self {
            Value::Symbol(s) => s,
            _ => "",
        }
    }

    /// Converts a JSON scalar into a value; arrays, objects and null are rejected.
    pub fn from_json(v: &serde_json::Value) -> Option<Value> {
        match v {
            serde_json::Value::Bool(b) => Some(Value::Bool(*b)),
            serde_json::Value::Number(n) => n
                .as_i64()
                .map(Value::Int)
                .or_else(|| n.as_f64().map(Value::Real)),
            serde_json::Value::String(s) => Some(Value::Symbol(s.clone())),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r}"),
            Value::Symbol(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrType {
    Bool,
    Int,
    Real,
    /// Enumerated label, or free text when no choices are declared.
    Symbol,
}

impl AttrType {
    pub fn name(self) -> &'static str {
        match self {
            AttrType::Bool => "bool",
            AttrType::Int => "int",
            AttrType::Real => "real",
            AttrType::Symbol => "symbol",
        }
    }
}

/// Declared type and bounds of one attribute or parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AttrSpec {
    pub name: String,
    pub ty: AttrType,
    pub default: Value,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub choices: Vec<String>,
    pub doc: &'static str,
}

impl AttrSpec {
    pub fn boolean(name: impl Into<String>, default: bool) -> Self {
        Self::new(name, AttrType::Bool, Value::Bool(default))
    }

    pub fn int(name: impl Into<String>, default: i64) -> Self {
        Self::new(name, AttrType::Int, Value::Int(default))
    }

    pub fn real(name: impl Into<String>, default: f64) -> Self {
        Self::new(name, AttrType::Real, Value::Real(default))
    }

    pub fn symbol(name: impl Into<String>, default: &str, choices: &[&str]) -> Self {
        let mut spec = Self::new(name, AttrType::Symbol, Value::Symbol(default.to_owned()));
        spec.choices = choices.iter().map(|c| (*c).to_owned()).collect();
        spec
    }

    fn new(name: impl Into<String>, ty: AttrType, default: Value) -> Self {
        AttrSpec {
            name: name.into(),
            ty,
            default,
            min: None,
            max: None,
            choices: Vec::new(),
            doc: "",
        }
    }

    pub fn range(mut self, min: f64, max: f64) -> Self {
        self.min = Some(min);
        self.max = Some(max);
        self
    }

    pub fn at_least(mut self, min: f64) -> Self {
        self.min = Some(min);
        self
    }

    pub fn doc(mut self, doc: &'static str) -> Self {
        self.doc = doc;
        self
    }

    /// Checks `value` against this spec, returning the stored form.
    /// Integers are accepted for real-valued attributes.
    pub fn check(&self, value: &Value) -> Result<Value> {
        let coerced = match (self.ty, value) {
            (AttrType::Bool, Value::Bool(_))
            | (AttrType::Int, Value::Int(_))
            | (AttrType::Real, Value::Real(_))
            | (AttrType::Symbol, Value::Symbol(_)) => value.clone(),
            (AttrType::Real, Value::Int(i)) => Value::Real(*i as f64),
            _ => {
                return Err(SimError::TypeMismatch {
                    attr: self.name.clone(),
                    expected: self.ty.name(),
                    got: value.type_name(),
                })
            }
        };
        match &coerced {
            Value::Int(_) | Value::Real(_) => {
                let x = coerced.as_real();
                let min = self.min.unwrap_or(f64::NEG_INFINITY);
                let max = self.max.unwrap_or(f64::INFINITY);
                if !x.is_finite() || x < min || x > max {
                    return Err(SimError::OutOfRange {
                        attr: self.name.clone(),
                        value: x,
                        min,
                        max,
                    });
                }
            }
            Value::Symbol(s) if !self.choices.is_empty() && !self.choices.contains(s) => {
                return Err(SimError::BadParameter {
                    name: self.name.clone(),
                    reason: format!("`{s}` is not one of {}", self.choices.join("|")),
                });
            }
            _ => {}
        }
        Ok(coerced)
    }

    /// Parses a command-line string (`k=v` right-hand side) according to the declared type.
    pub fn parse(&self, text: &str) -> Result<Value> {
        let bad = |reason: String| SimError::BadParameter {
            name: self.name.clone(),
            reason,
        };
        let v = match self.ty {
            AttrType::Bool => match text.to_ascii_lowercase().as_str() {
                "true" | "1" | "yes" => Value::Bool(true),
                "false" | "0" | "no" => Value::Bool(false),
                _ => return Err(bad(format!("`{text}` is not a boolean"))),
            },
            AttrType::Int => Value::Int(
                text.parse()
                    .map_err(|_| bad(format!("`{text}` is not an integer")))?,
            ),
            AttrType::Real => Value::Real(
                text.parse()
                    .map_err(|_| bad(format!("`{text}` is not a number")))?,
            ),
            AttrType::Symbol => Value::Symbol(text.to_owned()),
        };
        self.check(&v)
    }
}

/// Resolved model parameters, keyed by name.
pub type Params = BTreeMap<String, Value>;

/// Starts from the declared defaults and applies `overrides`, rejecting unknown
/// names and invalid values.
pub fn resolve_params(specs: &[AttrSpec], overrides: &Params) -> Result<Params> {
    let mut params: Params = specs
        .iter()
        .map(|s| (s.name.clone(), s.default.clone()))
        .collect();
    for (name, value) in overrides {
        let spec = specs
            .iter()
            .find(|s| &s.name == name)
            .ok_or_else(|| SimError::UnknownParameter(name.clone()))?;
        let checked = spec.check(value).map_err(|e| match e {
            SimError::BadParameter { .. } => e,
            other => SimError::BadParameter {
                name: name.clone(),
                reason: other.to_string(),
            },
        })?;
        params.insert(name.clone(), checked);
    }
    Ok(params)
}

/// Typed accessors used by model code. Missing keys fall back to zero values,
/// which cannot happen for params produced by [`resolve_params`].
pub trait ParamsExt {
    fn real(&self, name: &str) -> f64;
    fn int(&self, name: &str) -> i64;
    fn symbol(&self, name: &str) -> &str;
}

impl ParamsExt for Params {
    fn real(&self, name: &str) -> f64 {
        self.get(name).map_or(0.0, Value::as_real)
    }

    fn int(&self, name: &str) -> i64 {
        self.get(name).map_or(0, Value::as_int)
    }

    fn symbol(&self, name: &str) -> &str {
        self.get(name).map_or("", Value::as_symbol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn untagged_json_keeps_int_real_distinction() {
        let vals = vec![
            Value::Bool(true),
            Value::Int(3),
            Value::Real(3.0),
            Value::Real(0.1 + 0.2),
            Value::Symbol("torus".into()),
        ];
        let text = serde_json::to_string(&vals).unwrap();
        assert_eq!(text, r#"[true,3,3.0,0.30000000000000004,"torus"]"#);
        let back: Vec<Value> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vals);
    }

    #[test]
    fn check_coerces_int_to_real_and_enforces_range() {
        let spec = AttrSpec::real("humidity", 0.0).range(0.0, 1.0);
        assert_eq!(spec.check(&Value::Int(1)).unwrap(), Value::Real(1.0));
        assert!(matches!(
            spec.check(&Value::Real(1.5)),
            Err(SimError::OutOfRange { .. })
        ));
        assert!(matches!(
            spec.check(&Value::Real(f64::NAN)),
            Err(SimError::OutOfRange { .. })
        ));
        assert!(matches!(
            spec.check(&Value::Bool(true)),
            Err(SimError::TypeMismatch { .. })
        ));
    }

    #[test]
    fn resolve_rejects_unknown_and_applies_overrides() {
        let specs = vec![
            AttrSpec::int("width", 4).at_least(1.0),
            AttrSpec::symbol("topology", "torus", &["bounded", "torus"]),
        ];
        let mut o = Params::new();
        o.insert("width".into(), Value::Int(9));
        let p = resolve_params(&specs, &o).unwrap();
        assert_eq!(p.int("width"), 9);
        assert_eq!(p.symbol("topology"), "torus");

        o.insert("depth".into(), Value::Int(1));
        assert_eq!(
            resolve_params(&specs, &o),
            Err(SimError::UnknownParameter("depth".into()))
        );

        let mut o = Params::new();
        o.insert("topology".into(), Value::Symbol("sphere".into()));
        assert!(matches!(
            resolve_params(&specs, &o),
            Err(SimError::BadParameter { .. })
        ));
    }

    #[test]
    fn parse_follows_declared_type() {
        assert_eq!(
            AttrSpec::boolean("a", false).parse("TRUE").unwrap(),
            Value::Bool(true)
        );
        assert_eq!(
            AttrSpec::real("r", 0.0).parse("0.25").unwrap(),
            Value::Real(0.25)
        );
        assert!(AttrSpec::int("n", 0).parse("x").is_err());
    }
}
