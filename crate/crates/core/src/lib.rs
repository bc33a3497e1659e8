//! Deterministic agent-based simulation engine.
//!
//! A [`ModelDefinition`] binds a rule set to parameters; [`init_simulation`]
//! and [`step`] turn it into a sequence of [`SimulationState`] values, each a
//! pure function of its predecessor. [`Timeline`] keeps those states for
//! rewinding and branching, [`observation`] renders and measures them, and
//! [`server`] exposes a running session over a JSON message protocol.

pub mod cli;
pub mod comms;
pub mod error;
pub mod kernel;
pub mod models;
pub mod observation;
pub mod rng;
pub mod server;
pub mod space;
pub mod timetravel;
pub mod value;

pub use error::{Result, SimError};
pub use kernel::{
    init_simulation, run, step, Agent, AgentCtx, AgentId, EntityId, Model, ModelDefinition,
    SimulationState,
};
pub use timetravel::{Snapshot, Timeline};
pub use value::{Params, Value};
