use std::fmt;
use std::sync::Arc;

use crate::comms::{self, Message};
use crate::error::{Result, SimError};
use crate::observation::{PointOfView, ProbeDef};
use crate::rng::SimRng;
use crate::space::{neighbors, Cell, Grid, Neighborhood, Topology};
use crate::value::{resolve_params, AttrSpec, Params, Value};

use super::{AgentId, SimulationState};

#[derive(Debug, Clone, PartialEq)]
pub struct AgentClass {
    pub name: String,
    pub attrs: Vec<AttrSpec>,
}

/// Attribute schemas, fixed once parameters are resolved.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schema {
    pub patch: Vec<AttrSpec>,
    pub agents: Vec<AgentClass>,
}

/// A model is a rule set. All of its state lives in [`SimulationState`];
/// implementations must not keep mutable state of their own.
pub trait Model: Send + Sync {
    fn name(&self) -> &'static str;

    fn param_specs(&self) -> Vec<AttrSpec>;

    /// Checks constraints spanning several parameters.
    fn validate(&self, _params: &Params) -> Result<()> {
        Ok(())
    }

    fn schema(&self, params: &Params) -> Schema;

    /// Grid width, height and topology for these parameters.
    fn grid_shape(&self, params: &Params) -> (i64, i64, Topology);

    /// Fills a fresh tick-0 state (patches at schema defaults, no agents).
    fn populate(&self, def: &ModelDefinition, state: &mut SimulationState) -> Result<()>;

    /// Synchronous patch update. `prev` is the state entering the tick (after
    /// message delivery); `next` starts as a copy of its grid.
    fn patch_phase(&self, _prev: &SimulationState, _next: &mut Grid) {}

    /// One agent's turn in the agent phase.
    fn agent_step(&self, _ctx: &mut AgentCtx<'_>) {}

    fn probes(&self, params: &Params) -> Vec<ProbeDef>;

    fn povs(&self, params: &Params) -> Vec<PointOfView>;
}

/// A model bound to validated parameters, with its schema, probes and
/// points of view resolved.
#[derive(Clone)]
pub struct ModelDefinition {
    model: Arc<dyn Model>,
    pub params: Params,
    pub schema: Schema,
    pub probes: Vec<ProbeDef>,
    pub povs: Vec<PointOfView>,
}

impl fmt::Debug for ModelDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelDefinition")
            .field("model", &self.model.name())
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl ModelDefinition {
    pub fn new(model: Arc<dyn Model>, overrides: &Params) -> Result<Self> {
        let params = resolve_params(&model.param_specs(), overrides)?;
        model.validate(&params)?;
        let (w, h, _) = model.grid_shape(&params);
        if w < 1 || h < 1 {
            return Err(SimError::BadDimensions { width: w, height: h });
        }
        let schema = model.schema(&params);
        let probes = model.probes(&params);
        let povs = model.povs(&params);
        Ok(ModelDefinition {
            model,
            params,
            schema,
            probes,
            povs,
        })
    }

    pub fn name(&self) -> &'static str {
        self.model.name()
    }

    pub fn model(&self) -> &dyn Model {
        self.model.as_ref()
    }

    pub fn patch_attr(&self, name: &str) -> Option<(usize, &AttrSpec)> {
        self.schema.patch.iter().enumerate().find(|(_, s)| s.name == name)
    }

    pub fn agent_class(&self, class: &str) -> Option<&AgentClass> {
        self.schema.agents.iter().find(|c| c.name == class)
    }

    pub fn agent_attr(&self, class: &str, name: &str) -> Option<(usize, &AttrSpec)> {
        self.agent_class(class)?
            .attrs
            .iter()
            .enumerate()
            .find(|(_, s)| s.name == name)
    }

    pub fn pov(&self, name: &str) -> Option<&PointOfView> {
        self.povs.iter().find(|p| p.name == name)
    }

    pub fn pov_names(&self) -> Vec<String> {
        self.povs.iter().map(|p| p.name.clone()).collect()
    }

    pub fn probe_names(&self) -> Vec<String> {
        self.probes.iter().map(|p| p.name.clone()).collect()
    }

    /// Default record for a freshly created patch.
    pub fn default_patch(&self) -> Vec<Value> {
        self.schema.patch.iter().map(|s| s.default.clone()).collect()
    }

    /// Default record for an agent of `class`; empty if the class is unknown.
    pub fn default_agent(&self, class: &str) -> Vec<Value> {
        self.agent_class(class)
            .map(|c| c.attrs.iter().map(|s| s.default.clone()).collect())
            .unwrap_or_default()
    }
}

/// What an agent can see and do during its turn. Reads observe the tick in
/// progress: patches are already updated and earlier agents' moves applied.
pub struct AgentCtx<'a> {
    pub(super) def: &'a ModelDefinition,
    pub(super) state: &'a mut SimulationState,
    pub(super) me: AgentId,
}

impl<'a> AgentCtx<'a> {
    pub fn id(&self) -> AgentId {
        self.me
    }

    pub fn def(&self) -> &ModelDefinition {
        self.def
    }

    pub fn params(&self) -> &Params {
        &self.state.params
    }

    /// The tick being executed.
    pub fn tick(&self) -> u64 {
        self.state.tick
    }

    pub fn state(&self) -> &SimulationState {
        self.state
    }

    pub fn class(&self) -> &str {
        &self.me_ref().class
    }

    pub fn cell(&self) -> Cell {
        self.me_ref().cell
    }

    pub fn attr(&self, slot: usize) -> &Value {
        &self.me_ref().attrs[slot]
    }

    pub fn set_attr(&mut self, slot: usize, value: Value) {
        if let Some(a) = self.state.agent_mut(self.me) {
            a.attrs[slot] = value;
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.state.grid
    }

    pub fn patch(&self, cell: Cell) -> &[Value] {
        self.state.grid.patch(cell)
    }

    pub fn patch_mut(&mut self, cell: Cell) -> &mut Vec<Value> {
        self.state.grid.patch_mut(cell)
    }

    pub fn neighbors(&self, nb: Neighborhood) -> Vec<Cell> {
        neighbors(&self.state.grid, self.cell(), nb).unwrap_or_default()
    }

    pub fn move_to(&mut self, cell: Cell) -> Result<()> {
        self.state
            .relocate(self.me, i64::from(cell.row), i64::from(cell.col))
    }

    pub fn rng(&mut self) -> &mut SimRng {
        &mut self.state.rng
    }

    /// Messages readable this tick.
    pub fn inbox(&self) -> Vec<Message> {
        self.me_ref().mailbox.inbox.clone()
    }

    /// Sends over the channel to `to`; returns whether the message survived
    /// the channel's loss draw.
    pub fn send(&mut self, to: AgentId, topic: &str, payload: Value) -> Result<bool> {
        let msg = Message {
            from: self.me,
            to,
            topic: topic.to_owned(),
            payload,
            send_tick: self.state.tick,
        };
        comms::send_in_place(self.state, msg)
    }

    pub fn broadcast(&mut self, topic: &str, payload: Value) -> usize {
        comms::broadcast_in_place(self.state, self.me, topic, &payload)
    }

    /// Marks this agent dead; it is removed at the end of the tick.
    pub fn die(&mut self) {
        if let Some(a) = self.state.agent_mut(self.me) {
            a.alive = false;
        }
    }

    fn me_ref(&self) -> &super::Agent {
        self.state
            .agent(self.me)
            .expect("acting agent exists for the whole turn")
    }
}
