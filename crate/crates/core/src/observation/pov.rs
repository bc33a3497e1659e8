use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, SimError};
use crate::kernel::{Agent, ModelDefinition, SimulationState};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const BLACK: Rgb = Rgb(0, 0, 0);
    pub const WHITE: Rgb = Rgb(255, 255, 255);
    pub const GREEN: Rgb = Rgb(0, 255, 0);
    pub const BLUE: Rgb = Rgb(0, 0, 255);
    pub const YELLOW: Rgb = Rgb(255, 255, 0);
    pub const RED: Rgb = Rgb(255, 0, 0);
    pub const PINK: Rgb = Rgb(255, 105, 180);
    pub const GREY: Rgb = Rgb(128, 128, 128);
}

/// Linear interpolation from `from` (t = 0) to `to` (t = 1); `t` is clamped
/// and channels are rounded half away from zero.
pub fn ramp(from: Rgb, to: Rgb, t: f64) -> Rgb {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let mix = |a: u8, b: u8| (f64::from(a) + (f64::from(b) - f64::from(a)) * t).round() as u8;
    Rgb(mix(from.0, to.0), mix(from.1, to.1), mix(from.2, to.2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// Fills the whole cell.
    Cell,
    Circle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisualAttrs {
    pub color: Rgb,
    pub shape: Shape,
    /// Fraction of the cell, in (0, 1].
    pub size: f64,
}

impl VisualAttrs {
    pub fn circle(color: Rgb, size: f64) -> Self {
        VisualAttrs {
            color,
            shape: Shape::Circle,
            size,
        }
    }
}

type PatchPaint = dyn Fn(&[Value]) -> Rgb + Send + Sync;
type AgentPaint = dyn Fn(&Agent) -> VisualAttrs + Send + Sync;

/// A named mapping from entity state to visuals. Patches always render as a
/// full-cell fill, so their mapping yields only a color.
#[derive(Clone)]
pub struct PointOfView {
    pub name: String,
    patch: Arc<PatchPaint>,
    agents: Vec<(String, Arc<AgentPaint>)>,
}

impl fmt::Debug for PointOfView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointOfView")
            .field("name", &self.name)
            .field("agents", &self.agents.iter().map(|a| &a.0).collect::<Vec<_>>())
            .finish()
    }
}

impl PointOfView {
    pub fn new(name: &str, patch: impl Fn(&[Value]) -> Rgb + Send + Sync + 'static) -> Self {
        PointOfView {
            name: name.to_owned(),
            patch: Arc::new(patch),
            agents: Vec::new(),
        }
    }

    pub fn agent(mut self, class: &str, paint: impl Fn(&Agent) -> VisualAttrs + Send + Sync + 'static) -> Self {
        self.agents.push((class.to_owned(), Arc::new(paint)));
        self
    }

    pub fn agent_classes(&self) -> impl Iterator<Item = &str> {
        self.agents.iter().map(|a| a.0.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentGlyph {
    pub id: u64,
    pub row: u32,
    pub col: u32,
    pub color: Rgb,
    pub shape: Shape,
    pub size: f64,
}

/// One rendered view. Wire form:
/// `{"width","height","cells":[r,g,b,r,g,b,...],"agents":[...]}` with cells
/// row-major and agents in ascending id (later entries draw on top).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderFrame {
    pub width: u32,
    pub height: u32,
    #[serde(serialize_with = "flat_rgb", deserialize_with = "unflat_rgb")]
    pub cells: Vec<Rgb>,
    pub agents: Vec<AgentGlyph>,
}

fn flat_rgb<S: Serializer>(cells: &[Rgb], s: S) -> std::result::Result<S::Ok, S::Error> {
    let flat: Vec<u8> = cells.iter().flat_map(|c| [c.0, c.1, c.2]).collect();
    flat.serialize(s)
}

fn unflat_rgb<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rgb>, D::Error> {
    let flat = Vec::<u8>::deserialize(d)?;
    if flat.len() % 3 != 0 {
        return Err(serde::de::Error::custom("cell color array length is not a multiple of 3"));
    }
    Ok(flat.chunks(3).map(|c| Rgb(c[0], c[1], c[2])).collect())
}

/// Renders `state` through `pov`. Pure; the state is only read.
pub fn render_pov(def: &ModelDefinition, state: &SimulationState, pov: &PointOfView) -> Result<RenderFrame> {
    for class in pov.agent_classes() {
        if def.agent_class(class).is_none() {
            return Err(SimError::PovKind {
                pov: pov.name.clone(),
                kind: class.to_owned(),
            });
        }
    }
    let cells = state.grid.cells.iter().map(|rec| (pov.patch)(rec)).collect();
    let mut agents = Vec::with_capacity(state.agents.len());
    for a in state.live_agents() {
        let paint = pov
            .agents
            .iter()
            .find(|(c, _)| *c == a.class)
            .map(|(_, p)| p)
            .ok_or_else(|| SimError::PovKind {
                pov: pov.name.clone(),
                kind: a.class.clone(),
            })?;
        let v = paint(a);
        agents.push(AgentGlyph {
            id: a.id.0,
            row: a.cell.row,
            col: a.cell.col,
            color: v.color,
            shape: v.shape,
            size: v.size,
        });
    }
    Ok(RenderFrame {
        width: state.grid.width,
        height: state.grid.height,
        cells,
        agents,
    })
}
