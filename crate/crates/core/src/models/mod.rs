//! Reference models and the name registry.

pub mod gol;
pub mod institutions;
pub mod pastoral;

use std::sync::Arc;

use crate::error::{Result, SimError};
use crate::kernel::{Model, ModelDefinition};
use crate::value::{Params, Value};

pub use gol::GameOfLife;
pub use institutions::Institutions;
pub use pastoral::Pastoral;

pub fn registry() -> Vec<Arc<dyn Model>> {
    vec![Arc::new(GameOfLife), Arc::new(Pastoral), Arc::new(Institutions)]
}

pub fn names() -> Vec<&'static str> {
    registry().iter().map(|m| m.name()).collect()
}

pub fn lookup(name: &str) -> Result<Arc<dyn Model>> {
    let canonical = match name {
        "game-of-life" | "life" => "gol",
        other => other,
    };
    registry()
        .into_iter()
        .find(|m| m.name() == canonical)
        .ok_or_else(|| SimError::UnknownModel(name.to_owned()))
}

pub fn definition(name: &str, overrides: &Params) -> Result<ModelDefinition> {
    ModelDefinition::new(lookup(name)?, overrides)
}

/// Converts a JSON object of parameter overrides into typed values.
pub fn params_from_json(obj: &serde_json::Map<String, serde_json::Value>) -> Result<Params> {
    obj.iter()
        .map(|(k, v)| {
            Value::from_json(v)
                .map(|val| (k.clone(), val))
                .ok_or_else(|| SimError::BadParameter {
                    name: k.clone(),
                    reason: "expected a boolean, number or string".into(),
                })
        })
        .collect()
}

/// Parses `key=value` pairs using the model's declared parameter types.
pub fn params_from_pairs(model: &dyn Model, pairs: &[String]) -> Result<Params> {
    let specs = model.param_specs();
    let mut out = Params::new();
    for pair in pairs {
        let (k, v) = pair.split_once('=').ok_or_else(|| SimError::BadParameter {
            name: pair.clone(),
            reason: "expected key=value".into(),
        })?;
        let spec = specs
            .iter()
            .find(|s| s.name == k)
            .ok_or_else(|| SimError::UnknownParameter(k.to_owned()))?;
        out.insert(k.to_owned(), spec.parse(v)?);
    }
    Ok(out)
}

/// Parameter file contents: the declared parameters with their defaults, as
/// one JSON object in declaration order.
pub fn default_params_json(model: &dyn Model) -> String {
    let mut out = String::from("{\n");
    let specs = model.param_specs();
    for (i, s) in specs.iter().enumerate() {
        let v = serde_json::to_string(&s.default).unwrap_or_default();
        out.push_str(&format!("  \"{}\": {}", s.name, v));
        out.push_str(if i + 1 < specs.len() { ",\n" } else { "\n" });
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_names_and_aliases() {
        assert_eq!(names(), vec!["gol", "pastoral", "institutions"]);
        assert_eq!(lookup("game-of-life").unwrap().name(), "gol");
        assert_eq!(lookup("chess").err(), Some(SimError::UnknownModel("chess".into())));
    }

    #[test]
    fn pairs_follow_declared_types() {
        let m = lookup("pastoral").unwrap();
        let p = params_from_pairs(m.as_ref(), &["rain=0".into(), "width=8".into()]).unwrap();
        assert_eq!(p["rain"], Value::Real(0.0));
        assert_eq!(p["width"], Value::Int(8));
        assert!(params_from_pairs(m.as_ref(), &["nope=1".into()]).is_err());
        assert!(params_from_pairs(m.as_ref(), &["rain".into()]).is_err());
    }

    #[test]
    fn default_param_files_parse_back() {
        for m in registry() {
            let text = default_params_json(m.as_ref());
            let obj: serde_json::Map<String, serde_json::Value> = serde_json::from_str(&text).unwrap();
            let p = params_from_json(&obj).unwrap();
            let def = ModelDefinition::new(m.clone(), &p).unwrap();
            let defaults = ModelDefinition::new(m, &Params::new()).unwrap();
            assert_eq!(def.params, defaults.params);
        }
    }
}
