//! Directed channels and per-agent mailboxes.
//!
//! A message sent while tick `t` executes waits in the recipient's `pending`
//! queue and is moved to its `inbox` at the start of tick `t + 1`. Every send
//! over a channel consumes exactly one draw from the state's random stream,
//! delivered or not, so lossy and lossless runs stay draw-aligned.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::kernel::{AgentId, SimulationState};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub from: AgentId,
    pub to: AgentId,
    pub reliability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub from: AgentId,
    pub to: AgentId,
    pub topic: String,
    pub payload: Value,
    pub send_tick: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Mailbox {
    /// In transit; becomes readable next tick.
    pub pending: Vec<Message>,
    /// Readable during the current tick.
    pub inbox: Vec<Message>,
}

fn alive(state: &SimulationState, id: AgentId) -> bool {
    state.agent(id).is_some_and(|a| a.alive)
}

pub fn add_channel(state: &mut SimulationState, from: AgentId, to: AgentId, reliability: f64) -> Result<()> {
    for id in [from, to] {
        if !alive(state, id) {
            return Err(SimError::NotAlive(id.0));
        }
    }
    if !(0.0..=1.0).contains(&reliability) {
        return Err(SimError::OutOfRange {
            attr: "reliability".into(),
            value: reliability,
            min: 0.0,
            max: 1.0,
        });
    }
    state.channels.push(Channel { from, to, reliability });
    Ok(())
}

pub(crate) fn send_in_place(state: &mut SimulationState, msg: Message) -> Result<bool> {
    let reliability = state
        .channels
        .iter()
        .find(|c| c.from == msg.from && c.to == msg.to)
        .map(|c| c.reliability)
        .ok_or(SimError::NoSuchChannel {
            from: msg.from.0,
            to: msg.to.0,
        })?;
    if !alive(state, msg.to) {
        return Err(SimError::NotAlive(msg.to.0));
    }
    let delivered = state.rng.chance(reliability);
    if delivered {
        if let Some(a) = state.agent_mut(msg.to) {
            a.mailbox.pending.push(msg);
        }
    }
    Ok(delivered)
}

/// Sends one message over the `from -> to` channel. With probability equal to
/// the channel reliability it is queued for the recipient; otherwise dropped.
pub fn send(state: &SimulationState, msg: Message) -> Result<SimulationState> {
    let mut next = state.clone();
    send_in_place(&mut next, msg)?;
    Ok(next)
}

/// Sends over every outgoing channel of `from` in creation order; returns the
/// number of messages that survived. Channels to agents that died this tick
/// are skipped without a draw.
pub(crate) fn broadcast_in_place(state: &mut SimulationState, from: AgentId, topic: &str, payload: &Value) -> usize {
    let targets: Vec<AgentId> = state
        .channels
        .iter()
        .filter(|c| c.from == from)
        .map(|c| c.to)
        .collect();
    let tick = state.tick;
    let mut delivered = 0;
    for to in targets {
        let msg = Message {
            from,
            to,
            topic: topic.to_owned(),
            payload: payload.clone(),
            send_tick: tick,
        };
        if let Ok(true) = send_in_place(state, msg) {
            delivered += 1;
        }
    }
    delivered
}

pub fn broadcast(state: &SimulationState, from: AgentId, topic: &str, payload: Value) -> Result<SimulationState> {
    if !alive(state, from) {
        return Err(SimError::NotAlive(from.0));
    }
    let mut next = state.clone();
    broadcast_in_place(&mut next, from, topic, &payload);
    Ok(next)
}

pub(crate) fn deliver_in_place(state: &mut SimulationState) {
    for a in &mut state.agents {
        a.mailbox.inbox = std::mem::take(&mut a.mailbox.pending);
    }
}

/// Replaces every inbox with the messages pending for it.
pub fn deliver_pending(state: &SimulationState) -> SimulationState {
    let mut next = state.clone();
    deliver_in_place(&mut next);
    next
}

pub fn read_inbox(state: &SimulationState, id: AgentId) -> Result<&[Message]> {
    state
        .agent(id)
        .filter(|a| a.alive)
        .map(|a| a.mailbox.inbox.as_slice())
        .ok_or(SimError::NotAlive(id.0))
}
