use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::space::Cell;
use crate::value::{AttrSpec, Value};

use super::{AgentId, EntityId, ModelDefinition, SimulationState};

/// Read-only view of one entity: its declared attributes plus its location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inspection {
    pub entity: EntityId,
    pub cell: Cell,
    /// In schema order.
    pub attrs: Vec<(String, Value)>,
}

enum Target<'s> {
    Patch(usize),
    Agent(&'s [AttrSpec], AgentId),
}

fn resolve<'d>(def: &'d ModelDefinition, state: &SimulationState, id: &EntityId) -> Result<Target<'d>> {
    let unknown = || SimError::UnknownEntity(id.clone());
    if id.is_patch() {
        let i = usize::try_from(id.index).map_err(|_| unknown())?;
        if i >= state.grid.len() {
            return Err(unknown());
        }
        return Ok(Target::Patch(i));
    }
    let aid = AgentId(id.index);
    let agent = state
        .agent(aid)
        .filter(|a| a.alive && a.class == id.kind)
        .ok_or_else(unknown)?;
    let class = def.agent_class(&agent.class).ok_or_else(unknown)?;
    Ok(Target::Agent(&class.attrs, aid))
}

fn slot_of<'a>(specs: &'a [AttrSpec], kind: &str, name: &str) -> Result<(usize, &'a AttrSpec)> {
    specs
        .iter()
        .enumerate()
        .find(|(_, s)| s.name == name)
        .ok_or_else(|| SimError::UnknownAttribute {
            kind: kind.to_owned(),
            attr: name.to_owned(),
        })
}

pub fn get_attribute(def: &ModelDefinition, state: &SimulationState, id: &EntityId, name: &str) -> Result<Value> {
    match resolve(def, state, id)? {
        Target::Patch(i) => {
            let (slot, _) = slot_of(&def.schema.patch, &id.kind, name)?;
            Ok(state.grid.cells[i][slot].clone())
        }
        Target::Agent(specs, aid) => {
            let (slot, _) = slot_of(specs, &id.kind, name)?;
            Ok(state.agent(aid).map(|a| a.attrs[slot].clone()).unwrap_or(Value::Bool(false)))
        }
    }
}

/// Returns a copy of `state` with one attribute replaced. The tick is unchanged.
pub fn set_attribute(
    def: &ModelDefinition,
    state: &SimulationState,
    id: &EntityId,
    name: &str,
    value: Value,
) -> Result<SimulationState> {
    let target = resolve(def, state, id)?;
    let mut next = state.clone();
    match target {
        Target::Patch(i) => {
            let (slot, spec) = slot_of(&def.schema.patch, &id.kind, name)?;
            next.grid.cells[i][slot] = spec.check(&value)?;
        }
        Target::Agent(specs, aid) => {
            let (slot, spec) = slot_of(specs, &id.kind, name)?;
            let v = spec.check(&value)?;
            if let Some(a) = next.agent_mut(aid) {
                a.attrs[slot] = v;
            }
        }
    }
    Ok(next)
}

pub fn inspect_entity(def: &ModelDefinition, state: &SimulationState, id: &EntityId) -> Result<Inspection> {
    let (specs, cell, values): (&[AttrSpec], Cell, &[Value]) = match resolve(def, state, id)? {
        Target::Patch(i) => (&def.schema.patch, state.grid.cell_at(i), &state.grid.cells[i]),
        Target::Agent(specs, aid) => {
            let a = state.agent(aid).ok_or_else(|| SimError::UnknownEntity(id.clone()))?;
            (specs, a.cell, &a.attrs)
        }
    };
    Ok(Inspection {
        entity: id.clone(),
        cell,
        attrs: specs
            .iter()
            .zip(values)
            .map(|(s, v)| (s.name.clone(), v.clone()))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{init_simulation, step};
    use crate::models;
    use crate::observation::sample_probes;
    use crate::value::Params;

    fn gol_def() -> ModelDefinition {
        let mut p = Params::new();
        p.insert("width".into(), Value::Int(5));
        p.insert("height".into(), Value::Int(5));
        p.insert("topology".into(), Value::Symbol("bounded".into()));
        models::definition("gol", &p).unwrap()
    }

    fn probe(def: &ModelDefinition, s: &SimulationState, name: &str) -> f64 {
        sample_probes(s, &def.probes)
            .into_iter()
            .find(|r| r.name == name)
            .unwrap()
            .value
            .unwrap()
    }

    #[test]
    fn get_and_set_on_cells() {
        let def = gol_def();
        let s = init_simulation(&def, 1).unwrap();
        let cell = EntityId::patch(12);
        assert_eq!(get_attribute(&def, &s, &cell, "alive").unwrap(), Value::Bool(false));
        let s2 = set_attribute(&def, &s, &cell, "alive", Value::Bool(true)).unwrap();
        assert_eq!(get_attribute(&def, &s2, &cell, "alive").unwrap(), Value::Bool(true));
        assert_eq!(s2.tick, s.tick);
        assert_eq!(probe(&def, &s2, "alive"), probe(&def, &s, "alive") + 1.0);
        // nothing else changed
        let mut restored = s2.clone();
        restored.grid.cells[12][0] = Value::Bool(false);
        assert_eq!(restored.to_canonical_bytes(), s.to_canonical_bytes());
    }

    #[test]
    fn errors_for_unknown_things() {
        let def = gol_def();
        let s = init_simulation(&def, 1).unwrap();
        assert!(matches!(
            get_attribute(&def, &s, &EntityId::patch(25), "alive"),
            Err(SimError::UnknownEntity(_))
        ));
        assert!(matches!(
            get_attribute(&def, &s, &EntityId::patch(0), "colour"),
            Err(SimError::UnknownAttribute { .. })
        ));
        assert!(matches!(
            set_attribute(&def, &s, &EntityId::patch(0), "alive", Value::Real(1.0)),
            Err(SimError::TypeMismatch { .. })
        ));
        assert!(matches!(
            inspect_entity(&def, &s, &EntityId::agent("cow", AgentId(0))),
            Err(SimError::UnknownEntity(_))
        ));
    }

    #[test]
    fn pastoral_patch_and_cow_inspection() {
        let def = models::definition("pastoral", &Params::new()).unwrap();
        let s = init_simulation(&def, 7).unwrap();
        let h = get_attribute(&def, &s, &EntityId::patch(0), "humidity").unwrap().as_real();
        assert!((0.0..=1.0).contains(&h));
        assert!(matches!(
            set_attribute(&def, &s, &EntityId::patch(0), "humidity", Value::Real(1.5)),
            Err(SimError::OutOfRange { .. })
        ));

        let cow = s.agents.iter().find(|a| a.class == "cow").unwrap();
        let rec = inspect_entity(&def, &s, &cow.entity()).unwrap();
        assert_eq!(rec.cell, cow.cell);
        assert_eq!(rec.attrs[0].0, "energy");

        let text = serde_json::to_string(&rec).unwrap();
        let back: Inspection = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn removed_agent_becomes_unknown() {
        let mut p = Params::new();
        p.insert("grass_growth".into(), Value::Real(0.0));
        let def = models::definition("pastoral", &p).unwrap();
        let s = init_simulation(&def, 7).unwrap();
        let cow = s.agents.iter().find(|a| a.class == "cow").unwrap().entity();
        let starving = set_attribute(&def, &s, &cow, "energy", Value::Real(0.0001)).unwrap();
        // Make every patch barren so the cow cannot eat.
        let mut barren = starving.clone();
        for rec in &mut barren.grid.cells {
            rec[1] = Value::Real(0.0);
            rec[2] = Value::Real(0.0);
        }
        let next = step(&def, &barren);
        assert!(matches!(
            get_attribute(&def, &next, &cow, "energy"),
            Err(SimError::UnknownEntity(_))
        ));
    }
}
