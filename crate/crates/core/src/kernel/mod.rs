//! Entity model, simulation state, and the deterministic step function.
//!
//! A [`SimulationState`] is a complete, serializable world at one tick: the
//! patch grid, agents with their mailboxes, communication channels, the
//! random stream and the resolved parameters. Stepping never mutates its
//! input; every successor is a new value.
//!
//! The state labelled `t` is the world *before* tick `t` executes. Stepping it
//! executes tick `t` in five phases and yields the state labelled `t + 1`:
//!
//! 1. deliver messages sent during tick `t - 1` into inboxes,
//! 2. patch phase, computed synchronously from the previous grid,
//! 3. agent phase, in a seeded shuffle of the live agents,
//! 4. removal of dead agents together with their mail and channels,
//! 5. probe sampling (done by the caller on the returned state, see
//!    [`crate::observation::sample_probes`]).

mod inspect;
mod model;
mod step;

pub use inspect::{get_attribute, inspect_entity, set_attribute, Inspection};
pub use model::{AgentClass, AgentCtx, Model, ModelDefinition, Schema};
pub use step::{activation_order, init_simulation, run, step};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::comms::{Channel, Mailbox};
use crate::error::{Result, SimError};
use crate::rng::SimRng;
use crate::space::{Cell, Grid};
use crate::value::{Params, Value};

pub const PATCH_KIND: &str = "patch";

/// Agent identifier. Assigned in increasing order and never reused in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u64);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Addresses any entity: `kind` is `"patch"` (index = row-major cell index) or
/// an agent class name (index = agent id).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityId {
    pub kind: String,
    pub index: u64,
}

impl EntityId {
    pub fn patch(index: u64) -> Self {
        EntityId {
            kind: PATCH_KIND.to_owned(),
            index,
        }
    }

    pub fn agent(class: &str, id: AgentId) -> Self {
        EntityId {
            kind: class.to_owned(),
            index: id.0,
        }
    }

    pub fn is_patch(&self) -> bool {
        self.kind == PATCH_KIND
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.kind, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub class: String,
    pub cell: Cell,
    pub alive: bool,
    /// Values in the order of the class schema.
    pub attrs: Vec<Value>,
    pub mailbox: Mailbox,
}

impl Agent {
    pub fn entity(&self) -> EntityId {
        EntityId::agent(&self.class, self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "StateRepr")]
pub struct SimulationState {
    pub model: String,
    pub tick: u64,
    pub params: Params,
    pub grid: Grid,
    /// Sorted by id.
    pub agents: Vec<Agent>,
    pub next_agent_id: u64,
    /// In creation order.
    pub channels: Vec<Channel>,
    pub rng: SimRng,
    /// Agent ids per cell, ascending. Derived from `agents`; not serialized.
    #[serde(skip)]
    occupancy: Vec<Vec<AgentId>>,
}

#[derive(Deserialize)]
struct StateRepr {
    model: String,
    tick: u64,
    params: Params,
    grid: Grid,
    agents: Vec<Agent>,
    next_agent_id: u64,
    channels: Vec<Channel>,
    rng: SimRng,
}

impl From<StateRepr> for SimulationState {
    fn from(r: StateRepr) -> Self {
        let mut s = SimulationState {
            model: r.model,
            tick: r.tick,
            params: r.params,
            grid: r.grid,
            agents: r.agents,
            next_agent_id: r.next_agent_id,
            channels: r.channels,
            rng: r.rng,
            occupancy: Vec::new(),
        };
        s.rebuild_occupancy();
        s
    }
}

impl SimulationState {
    pub(crate) fn new(model: &str, params: Params, grid: Grid, seed: u64) -> Self {
        let occupancy = vec![Vec::new(); grid.len()];
        SimulationState {
            model: model.to_owned(),
            tick: 0,
            params,
            grid,
            agents: Vec::new(),
            next_agent_id: 0,
            channels: Vec::new(),
            rng: SimRng::from_seed(seed),
            occupancy,
        }
    }

    /// Byte-stable encoding used for snapshots, hashing and determinism checks.
    pub fn to_canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("state is always serializable")
    }

    pub fn from_canonical_bytes(bytes: &[u8]) -> Result<SimulationState> {
        serde_json::from_slice(bytes).map_err(|e| SimError::Decode(e.to_string()))
    }

    /// XXH3-64 of the canonical encoding.
    pub fn digest(&self) -> u64 {
        xxhash_rust::xxh3::xxh3_64(&self.to_canonical_bytes())
    }

    pub fn agent(&self, id: AgentId) -> Option<&Agent> {
        self.agents
            .binary_search_by_key(&id, |a| a.id)
            .ok()
            .map(|i| &self.agents[i])
    }

    pub fn agent_mut(&mut self, id: AgentId) -> Option<&mut Agent> {
        match self.agents.binary_search_by_key(&id, |a| a.id) {
            Ok(i) => Some(&mut self.agents[i]),
            Err(_) => None,
        }
    }

    pub fn live_agents(&self) -> impl Iterator<Item = &Agent> {
        self.agents.iter().filter(|a| a.alive)
    }

    /// Ids of agents standing on `cell`, ascending.
    pub fn occupants(&self, cell: Cell) -> &[AgentId] {
        &self.occupancy[self.grid.index(cell)]
    }

    /// Adds an agent without schema checks; model code is trusted to pass
    /// a record matching its class.
    pub fn spawn_agent(&mut self, class: &str, cell: Cell, attrs: Vec<Value>) -> AgentId {
        let id = AgentId(self.next_agent_id);
        self.next_agent_id += 1;
        self.agents.push(Agent {
            id,
            class: class.to_owned(),
            cell,
            alive: true,
            attrs,
            mailbox: Mailbox::default(),
        });
        let idx = self.grid.index(cell);
        self.occupancy[idx].push(id);
        id
    }

    /// Moves an agent in place. `row`/`col` wrap on a torus; off-grid on a
    /// bounded grid is an error.
    pub fn relocate(&mut self, id: AgentId, row: i64, col: i64) -> Result<()> {
        let dest = self.grid.resolve(row, col).ok_or(SimError::OutOfBounds {
            row,
            col,
            width: self.grid.width,
            height: self.grid.height,
        })?;
        let agent = self
            .agent(id)
            .filter(|a| a.alive)
            .ok_or_else(|| SimError::UnknownEntity(EntityId::agent("agent", id)))?;
        let from = agent.cell;
        if from == dest {
            return Ok(());
        }
        let (fi, ti) = (self.grid.index(from), self.grid.index(dest));
        self.occupancy[fi].retain(|a| *a != id);
        let slot = &mut self.occupancy[ti];
        let pos = slot.binary_search(&id).unwrap_or_else(|p| p);
        slot.insert(pos, id);
        if let Some(a) = self.agent_mut(id) {
            a.cell = dest;
        }
        Ok(())
    }

    pub(crate) fn rebuild_occupancy(&mut self) {
        let mut occ = vec![Vec::new(); self.grid.len()];
        for a in &self.agents {
            occ[self.grid.index(a.cell)].push(a.id);
        }
        self.occupancy = occ;
    }

    /// Recomputes the occupancy index from the agent list; used to audit the
    /// incrementally maintained one.
    pub fn occupancy_from_scratch(&self) -> Vec<Vec<AgentId>> {
        let mut occ = vec![Vec::new(); self.grid.len()];
        for a in &self.agents {
            occ[self.grid.index(a.cell)].push(a.id);
        }
        occ
    }

    pub fn occupancy(&self) -> &[Vec<AgentId>] {
        &self.occupancy
    }

    /// Drops agents whose `alive` flag is cleared, their mail, any message
    /// they sent that is still queued elsewhere, and channels touching them.
    pub(crate) fn remove_dead(&mut self) {
        if self.agents.iter().all(|a| a.alive) {
            return;
        }
        let dead: Vec<AgentId> = self.agents.iter().filter(|a| !a.alive).map(|a| a.id).collect();
        let is_dead = |id: &AgentId| dead.binary_search(id).is_ok();
        self.agents.retain(|a| a.alive);
        for a in &mut self.agents {
            a.mailbox.pending.retain(|m| !is_dead(&m.from));
            a.mailbox.inbox.retain(|m| !is_dead(&m.from));
        }
        self.channels.retain(|c| !is_dead(&c.from) && !is_dead(&c.to));
        for slot in &mut self.occupancy {
            slot.retain(|id| !is_dead(id));
        }
    }
}

/// Pure form of [`SimulationState::relocate`].
pub fn move_agent(state: &SimulationState, id: AgentId, row: i64, col: i64) -> Result<SimulationState> {
    let mut next = state.clone();
    next.relocate(id, row, col)?;
    Ok(next)
}
