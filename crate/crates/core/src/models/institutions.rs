//! Communicating institutions: agents pass opaque tokens along directed,
//! possibly lossy channels. Each agent first absorbs the tokens in its inbox,
//! then rebroadcasts every token it holds. Tokens are never forgotten.
//!
//! Agents sit on a `1 x agents` strip, agent `i` at column `i`.

use crate::error::{Result, SimError};
use crate::kernel::{AgentClass, AgentCtx, AgentId, Model, ModelDefinition, Schema, SimulationState};
use crate::observation::{ramp, PointOfView, ProbeDef, Rgb, VisualAttrs};
use crate::space::{Cell, Topology};
use crate::value::{AttrSpec, Params, ParamsExt, Value};

pub const INSTITUTION: &str = "institution";
pub const TOPIC: &str = "token";
const SIZE: f64 = 0.8;

/// Typed view of the institution parameters: explicit channel list (with
/// reliabilities) and initial token placement.
#[derive(Debug, Clone, PartialEq)]
pub struct InstitutionParams {
    pub agents: usize,
    pub tokens: usize,
    /// `(from, to, reliability)` in creation order.
    pub channels: Vec<(usize, usize, f64)>,
    /// `(agent, token)` pairs held at tick 0.
    pub holders: Vec<(usize, usize)>,
}

fn bad(name: &str, reason: String) -> SimError {
    SimError::BadParameter {
        name: name.into(),
        reason,
    }
}

impl InstitutionParams {
    pub fn from_params(p: &Params) -> Result<Self> {
        let n = p.int("agents") as usize;
        let tokens = p.int("tokens") as usize;
        let rel = p.real("reliability");
        let channels = match p.symbol("topology") {
            "chain" => (0..n.saturating_sub(1)).map(|i| (i, i + 1, rel)).collect(),
            "ring" => (0..n).filter(|_| n > 1).map(|i| (i, (i + 1) % n, rel)).collect(),
            "star" => (1..n).flat_map(|i| [(0, i, rel), (i, 0, rel)]).collect(),
            "complete" => (0..n)
                .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j, rel)))
                .collect(),
            "custom" => parse_channels(p.symbol("channels"), rel)?,
            other => return Err(bad("topology", format!("unknown topology `{other}`"))),
        };
        for &(a, b, r) in &channels {
            if a >= n || b >= n {
                return Err(bad("channels", format!("channel {a}>{b} references a missing agent (have {n})")));
            }
            if !(0.0..=1.0).contains(&r) {
                return Err(bad("channels", format!("reliability {r} outside [0, 1]")));
            }
        }
        let holders = parse_holders(p.symbol("holders"))?;
        for &(a, t) in &holders {
            if a >= n || t >= tokens {
                return Err(bad("holders", format!("`{a}:{t}` is out of range")));
            }
        }
        Ok(InstitutionParams {
            agents: n,
            tokens,
            channels,
            holders,
        })
    }
}

/// `"0>1@0.9,1>2"`: comma-separated `from>to` with optional `@reliability`.
fn parse_channels(text: &str, default: f64) -> Result<Vec<(usize, usize, f64)>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (pair, rel) = match item.split_once('@') {
                Some((pair, r)) => (pair, r.parse().map_err(|_| bad("channels", format!("bad reliability in `{item}`")))?),
                None => (item, default),
            };
            let (a, b) = pair
                .split_once('>')
                .ok_or_else(|| bad("channels", format!("expected from>to, got `{item}`")))?;
            let idx = |s: &str| s.trim().parse::<usize>().map_err(|_| bad("channels", format!("bad agent index in `{item}`")));
            Ok((idx(a)?, idx(b)?, rel))
        })
        .collect()
}

/// `"0:0,3:1"`: comma-separated `agent:token`.
fn parse_holders(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (a, t) = item
                .split_once(':')
                .ok_or_else(|| bad("holders", format!("expected agent:token, got `{item}`")))?;
            let idx = |s: &str| s.trim().parse::<usize>().map_err(|_| bad("holders", format!("bad index in `{item}`")));
            Ok((idx(a)?, idx(t)?))
        })
        .collect()
}

pub fn token_attr(k: usize) -> String {
    format!("token_{k}")
}

fn holds(agent: &crate::kernel::Agent, k: usize) -> bool {
    agent.attrs.get(k).is_some_and(Value::as_bool)
}

fn coverage(s: &SimulationState, k: usize) -> f64 {
    let (n, held) = s
        .live_agents()
        .fold((0usize, 0usize), |(n, h), a| (n + 1, h + usize::from(holds(a, k))));
    if n == 0 {
        0.0
    } else {
        held as f64 / n as f64
    }
}

pub struct Institutions;

impl Model for Institutions {
    fn name(&self) -> &'static str {
        "institutions"
    }

    fn param_specs(&self) -> Vec<AttrSpec> {
        vec![
            AttrSpec::int("agents", 6).range(1.0, 10_000.0),
            AttrSpec::symbol("topology", "chain", &["chain", "ring", "star", "complete", "custom"]),
            AttrSpec::real("reliability", 1.0)
                .range(0.0, 1.0)
                .doc("delivery probability of generated channels and the default for custom ones"),
            AttrSpec::symbol("channels", "", &[]).doc("custom channel list, e.g. 0>1@0.9,1>2"),
            AttrSpec::int("tokens", 1).range(1.0, 256.0),
            AttrSpec::symbol("holders", "0:0", &[]).doc("initial holdings as agent:token pairs"),
        ]
    }

    fn validate(&self, p: &Params) -> Result<()> {
        InstitutionParams::from_params(p).map(|_| ())
    }

    fn schema(&self, p: &Params) -> Schema {
        let tokens = p.int("tokens").max(0) as usize;
        Schema {
            patch: Vec::new(),
            agents: vec![AgentClass {
                name: INSTITUTION.into(),
                attrs: (0..tokens).map(|k| AttrSpec::boolean(token_attr(k), false)).collect(),
            }],
        }
    }

    fn grid_shape(&self, p: &Params) -> (i64, i64, Topology) {
        (p.int("agents"), 1, Topology::Bounded)
    }

    fn populate(&self, def: &ModelDefinition, state: &mut SimulationState) -> Result<()> {
        let ip = InstitutionParams::from_params(&state.params)?;
        let ids: Vec<AgentId> = (0..ip.agents)
            .map(|i| state.spawn_agent(INSTITUTION, Cell::new(0, i as u32), def.default_agent(INSTITUTION)))
            .collect();
        for (a, t) in ip.holders {
            if let Some(agent) = state.agent_mut(ids[a]) {
                agent.attrs[t] = Value::Bool(true);
            }
        }
        for (a, b, r) in ip.channels {
            crate::comms::add_channel(state, ids[a], ids[b], r)?;
        }
        Ok(())
    }

    fn agent_step(&self, ctx: &mut AgentCtx<'_>) {
        let tokens = ctx.def().agent_class(INSTITUTION).map_or(0, |c| c.attrs.len());
        for msg in ctx.inbox() {
            if msg.topic != TOPIC {
                continue;
            }
            if let Value::Int(k) = msg.payload {
                if (0..tokens as i64).contains(&k) {
                    ctx.set_attr(k as usize, Value::Bool(true));
                }
            }
        }
        for k in 0..tokens {
            if ctx.attr(k).as_bool() {
                ctx.broadcast(TOPIC, Value::Int(k as i64));
            }
        }
    }

    fn probes(&self, p: &Params) -> Vec<ProbeDef> {
        let tokens = p.int("tokens").max(1) as usize;
        vec![
            ProbeDef::total("coverage", |s| coverage(s, 0)),
            ProbeDef::total("mean_coverage", move |s| {
                (0..tokens).map(|k| coverage(s, k)).sum::<f64>() / tokens as f64
            }),
            ProbeDef::total("holdings", move |s| {
                s.live_agents()
                    .map(|a| (0..tokens).filter(|k| holds(a, *k)).count())
                    .sum::<usize>() as f64
            }),
            ProbeDef::total("in_transit", |s| {
                s.agents.iter().map(|a| a.mailbox.pending.len()).sum::<usize>() as f64
            }),
        ]
    }

    fn povs(&self, p: &Params) -> Vec<PointOfView> {
        let tokens = p.int("tokens").max(1) as usize;
        vec![
            PointOfView::new("token", |_| Rgb::WHITE).agent(INSTITUTION, |a| {
                VisualAttrs::circle(if holds(a, 0) { Rgb::GREEN } else { Rgb::GREY }, SIZE)
            }),
            PointOfView::new("knowledge", |_| Rgb(240, 240, 240)).agent(INSTITUTION, move |a| {
                let share = (0..tokens).filter(|k| holds(a, *k)).count() as f64 / tokens as f64;
                VisualAttrs::circle(ramp(Rgb::WHITE, Rgb::BLUE, share), SIZE)
            }),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{init_simulation, step};

    fn def(pairs: &[(&str, Value)]) -> ModelDefinition {
        let p: Params = pairs.iter().map(|(k, v)| ((*k).to_owned(), v.clone())).collect();
        crate::models::definition("institutions", &p).unwrap()
    }

    fn holders(s: &SimulationState) -> Vec<bool> {
        s.agents.iter().map(|a| holds(a, 0)).collect()
    }

    #[test]
    fn chain_of_three_reaches_the_end_during_tick_two() {
        let d = def(&[("agents", Value::Int(3))]);
        let s0 = init_simulation(&d, 1).unwrap();
        assert_eq!(holders(&s0), vec![true, false, false]);
        let s1 = step(&d, &s0);
        let s2 = step(&d, &s1);
        assert_eq!(holders(&s2), vec![true, true, false]);
        let s3 = step(&d, &s2);
        // state 3 is the world after tick 2 executed
        assert_eq!(holders(&s3), vec![true, true, true]);
        let c = s3.agents[2].mailbox.inbox.first().unwrap();
        assert_eq!(c.send_tick + 1, 2);
    }

    #[test]
    fn zero_reliability_freezes_holdings() {
        let d = def(&[("topology", Value::Symbol("complete".into())), ("reliability", Value::Real(0.0))]);
        let mut s = init_simulation(&d, 4).unwrap();
        let start = holders(&s);
        for _ in 0..20 {
            s = step(&d, &s);
            assert_eq!(holders(&s), start);
        }
    }

    #[test]
    fn topologies() {
        let ch = |topo: &str, n: i64| {
            let mut p = Params::new();
            p.insert("agents".into(), Value::Int(n));
            p.insert("topology".into(), Value::Symbol(topo.into()));
            p.insert("agents".into(), Value::Int(n));
            let p = crate::value::resolve_params(&Institutions.param_specs(), &p).unwrap();
            InstitutionParams::from_params(&p).unwrap().channels.len()
        };
        assert_eq!(ch("chain", 4), 3);
        assert_eq!(ch("ring", 4), 4);
        assert_eq!(ch("star", 4), 6);
        assert_eq!(ch("complete", 4), 12);
        assert_eq!(ch("ring", 1), 0);
    }

    #[test]
    fn custom_channels_and_holders_are_validated() {
        let d = def(&[
            ("topology", Value::Symbol("custom".into())),
            ("channels", Value::Symbol("0>2@0.5, 2>1".into())),
            ("agents", Value::Int(3)),
            ("tokens", Value::Int(2)),
            ("holders", Value::Symbol("0:0,1:1".into())),
        ]);
        let s = init_simulation(&d, 1).unwrap();
        assert_eq!(s.channels.len(), 2);
        assert_eq!(s.channels[0].reliability, 0.5);
        assert_eq!(s.channels[1].reliability, 1.0);
        assert!(s.agents[1].attrs[1].as_bool());

        let p = |k: &str, v: &str| {
            let mut o = Params::new();
            o.insert("topology".into(), Value::Symbol("custom".into()));
            o.insert(k.into(), Value::Symbol(v.into()));
            crate::models::definition("institutions", &o)
        };
        assert!(p("channels", "0>9").is_err());
        assert!(p("channels", "0-1").is_err());
        assert!(p("channels", "0>1@2").is_err());
        assert!(p("holders", "0:5").is_err());
    }
}
