//! One simulation under interactive control. A session is driven from a
//! single thread: commands and play-loop ticks are applied one at a time, in
//! the order they arrive.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::error::{Result, SimError};
use crate::kernel::{init_simulation, inspect_entity, set_attribute, step, ModelDefinition, SimulationState};
use crate::models;
use crate::observation::render_pov;
use crate::timetravel::Timeline;
use crate::value::Params;

use super::protocol::{decode_command, encode_event, AttrValue, Command, ErrorCode, Event};

/// Per-model parameter defaults a server applies before the client's own
/// overrides.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    base: BTreeMap<String, Params>,
}

impl Catalog {
    /// Built-in defaults only.
    pub fn builtin() -> Self {
        Catalog::default()
    }

    /// Reads `<dir>/<model>/params.json` for every registered model that has
    /// one. The directory must exist, and every parameter file found must be
    /// a valid override set for its model.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(SimError::Invalid(format!("models directory {} does not exist", dir.display())));
        }
        let mut base = BTreeMap::new();
        for name in models::names() {
            let path = dir.join(name).join("params.json");
            if !path.exists() {
                continue;
            }
            let text = fs::read_to_string(&path)
                .map_err(|e| SimError::Invalid(format!("{}: {e}", path.display())))?;
            let obj: serde_json::Map<String, serde_json::Value> = serde_json::from_str(&text)
                .map_err(|e| SimError::Invalid(format!("{}: {e}", path.display())))?;
            let params = models::params_from_json(&obj)?;
            models::definition(name, &params)?;
            base.insert(name.to_owned(), params);
        }
        Ok(Catalog { base })
    }

    pub fn models(&self) -> impl Iterator<Item = &str> {
        self.base.keys().map(String::as_str)
    }

    /// Catalog defaults for `model` overlaid with `overrides`.
    pub fn definition(&self, model: &str, overrides: &Params) -> Result<ModelDefinition> {
        let canonical = models::lookup(model)?;
        let mut params = self.base.get(canonical.name()).cloned().unwrap_or_default();
        params.extend(overrides.iter().map(|(k, v)| (k.clone(), v.clone())));
        ModelDefinition::new(canonical, &params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlayState {
    Paused,
    Playing { tps: f64, next_due: Instant },
}

struct Loaded {
    def: ModelDefinition,
    timeline: Timeline,
    state: SimulationState,
}

pub struct Session {
    pub id: String,
    catalog: Arc<Catalog>,
    loaded: Option<Loaded>,
    play: PlayState,
    povs: Vec<String>,
    probes: bool,
}

fn fail(e: &SimError) -> Vec<Event> {
    vec![Event::error(ErrorCode::from(e), e.to_string())]
}

impl Session {
    pub fn new(id: impl Into<String>, catalog: Arc<Catalog>) -> Self {
        Session {
            id: id.into(),
            catalog,
            loaded: None,
            play: PlayState::Paused,
            povs: Vec::new(),
            probes: true,
        }
    }

    pub fn is_loaded(&self) -> bool {
        self.loaded.is_some()
    }

    pub fn play_state(&self) -> PlayState {
        self.play
    }

    pub fn is_playing(&self) -> bool {
        matches!(self.play, PlayState::Playing { .. })
    }

    /// The state at the timeline cursor.
    pub fn state(&self) -> Option<&SimulationState> {
        self.loaded.as_ref().map(|l| &l.state)
    }

    pub fn timeline(&self) -> Option<&Timeline> {
        self.loaded.as_ref().map(|l| &l.timeline)
    }

    pub fn definition(&self) -> Option<&ModelDefinition> {
        self.loaded.as_ref().map(|l| &l.def)
    }

    /// Decodes one frame and applies it, returning the encoded replies.
    pub fn handle_text(&mut self, text: &str) -> Vec<String> {
        let events = match decode_command(text) {
            Ok(cmd) => self.handle(cmd, Instant::now()),
            Err(e) => vec![e.into_event()],
        };
        events.iter().map(encode_event).collect()
    }

    /// Applies one command. `now` anchors the play schedule when the command
    /// starts playback.
    pub fn handle(&mut self, cmd: Command, now: Instant) -> Vec<Event> {
        if let Command::Load { model, params, seed } = &cmd {
            return self.load(model, params, *seed);
        }
        if self.loaded.is_none() {
            return vec![Event::error(ErrorCode::NotLoaded, format!("`{}` needs a loaded model", cmd.type_name()))];
        }
        match cmd {
            Command::Load { .. } => unreachable!("handled above"),
            Command::Step { count } => self.step_many(count),
            Command::Play { tps } => {
                if !(tps.is_finite() && tps > 0.0) {
                    return vec![Event::error(ErrorCode::Range, format!("tps must be positive, got {tps}"))];
                }
                self.play = PlayState::Playing {
                    tps,
                    next_due: now + interval(tps),
                };
                vec![Event::ack("play")]
            }
            Command::Pause {} => {
                self.play = PlayState::Paused;
                vec![Event::ack("pause"), self.timeline_event()]
            }
            Command::Rewind { tick } => self.rewind(tick),
            Command::Edit { entity, attr, value } => {
                let l = self.loaded.as_mut().expect("checked above");
                let edited = match set_attribute(&l.def, &l.state, &entity, &attr, value) {
                    Ok(s) => s,
                    Err(e) => return fail(&e),
                };
                if let Err(e) = l.timeline.resume(Some(&edited)) {
                    return fail(&e);
                }
                l.state = edited;
                let mut out = Vec::new();
                if self.is_playing() {
                    self.play = PlayState::Paused;
                    out.push(Event::ack("pause"));
                }
                out.extend([Event::ack("edit"), self.timeline_event(), self.tick_event()]);
                out
            }
            Command::Inspect { entity } => {
                let l = self.loaded.as_ref().expect("checked above");
                match inspect_entity(&l.def, &l.state, &entity) {
                    Ok(i) => vec![Event::Inspection {
                        entity: i.entity,
                        location: i.cell,
                        attrs: i.attrs.into_iter().map(|(name, value)| AttrValue { name, value }).collect(),
                    }],
                    Err(e) => fail(&e),
                }
            }
            Command::Subscribe { povs, probes } => {
                let def = &self.loaded.as_ref().expect("checked above").def;
                if let Some(bad) = povs.iter().find(|p| def.pov(p).is_none()) {
                    return fail(&SimError::UnknownPov(bad.clone()));
                }
                self.povs = povs;
                self.probes = probes;
                vec![Event::ack("subscribe"), self.tick_event()]
            }
        }
    }

    /// When the next play tick is due, if playing.
    pub fn next_due(&self) -> Option<Instant> {
        match self.play {
            PlayState::Playing { next_due, .. } => Some(next_due),
            PlayState::Paused => None,
        }
    }

    /// Advances one tick if playing and the tick is due at `now`. The
    /// schedule keeps a fixed cadence; after a long stall it restarts from
    /// `now` rather than bursting to catch up.
    pub fn poll_play(&mut self, now: Instant) -> Vec<Event> {
        let PlayState::Playing { tps, next_due } = self.play else {
            return Vec::new();
        };
        if now < next_due {
            return Vec::new();
        }
        let period = interval(tps);
        let mut next = next_due + period;
        if next <= now {
            next = now + period;
        }
        self.play = PlayState::Playing { tps, next_due: next };
        match self.advance() {
            Ok(()) => vec![self.tick_event()],
            Err(e) => {
                self.play = PlayState::Paused;
                fail(&e)
            }
        }
    }

    fn load(&mut self, model: &str, params: &serde_json::Map<String, serde_json::Value>, seed: u64) -> Vec<Event> {
        let loaded = models::params_from_json(params)
            .and_then(|p| self.catalog.definition(model, &p))
            .and_then(|def| {
                let state = init_simulation(&def, seed)?;
                let timeline = Timeline::starting_at(&state)?;
                Ok(Loaded { def, timeline, state })
            });
        let l = match loaded {
            Ok(l) => l,
            Err(e) => return fail(&e),
        };
        log::info!("session {}: loaded {} seed {seed}", self.id, l.def.name());
        self.povs = l.def.pov_names();
        self.probes = true;
        self.play = PlayState::Paused;
        let ev = Event::Loaded {
            tick: l.state.tick,
            width: l.state.grid.width,
            height: l.state.grid.height,
            povs: l.def.pov_names(),
            probes: l.def.probe_names(),
        };
        self.loaded = Some(l);
        vec![ev, self.timeline_event(), self.tick_event()]
    }

    fn step_many(&mut self, count: u64) -> Vec<Event> {
        if count == 0 {
            return vec![Event::ack("step")];
        }
        let mut out = Vec::new();
        for _ in 0..count {
            if let Err(e) = self.advance() {
                out.extend(fail(&e));
                return out;
            }
            out.push(self.tick_event());
        }
        out.push(self.timeline_event());
        out
    }

    fn rewind(&mut self, tick: u64) -> Vec<Event> {
        let l = self.loaded.as_mut().expect("caller checked");
        match l.timeline.rewind(tick) {
            Ok(s) => {
                l.state = s;
                vec![self.timeline_event(), self.tick_event()]
            }
            Err(e) => fail(&e),
        }
    }

    fn advance(&mut self) -> Result<()> {
        let l = self.loaded.as_mut().expect("caller checked");
        let next = step(&l.def, &l.state);
        l.timeline.advance(&next)?;
        l.state = next;
        Ok(())
    }

    fn timeline_event(&self) -> Event {
        let t = &self.loaded.as_ref().expect("caller checked").timeline;
        Event::Timeline {
            current: t.current(),
            max: t.max(),
            branch_count: t.branch_count(),
        }
    }

    /// Frames for every subscribed PoV and all probes, from the cursor state.
    pub fn tick_event(&self) -> Event {
        let l = self.loaded.as_ref().expect("caller checked");
        let frames = self
            .povs
            .iter()
            .filter_map(|name| {
                let pov = l.def.pov(name)?;
                render_pov(&l.def, &l.state, pov).ok().map(|f| (name.clone(), f))
            })
            .collect();
        let probes = if self.probes {
            l.def
                .probes
                .iter()
                .map(|p| (p.name.clone(), p.eval(&l.state).ok().filter(|v| v.is_finite())))
                .collect()
        } else {
            BTreeMap::new()
        };
        Event::Tick {
            tick: l.state.tick,
            frames,
            probes,
        }
    }
}

fn interval(tps: f64) -> Duration {
    Duration::from_secs_f64(1.0 / tps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::EntityId;
    use crate::value::Value;

    fn gol(w: i64) -> Session {
        let mut s = Session::new("t", Arc::new(Catalog::builtin()));
        let mut params = serde_json::Map::new();
        params.insert("width".into(), w.into());
        params.insert("height".into(), w.into());
        let ev = s.handle(
            Command::Load {
                model: "gol".into(),
                params,
                seed: 1,
            },
            Instant::now(),
        );
        assert!(matches!(ev[0], Event::Loaded { .. }));
        s
    }

    fn code(ev: &[Event]) -> Option<ErrorCode> {
        match ev {
            [Event::Error { code, .. }] => Some(*code),
            _ => None,
        }
    }

    #[test]
    fn commands_before_load_are_rejected() {
        let mut s = Session::new("t", Arc::new(Catalog::builtin()));
        let ev = s.handle(Command::Step { count: 1 }, Instant::now());
        assert_eq!(code(&ev), Some(ErrorCode::NotLoaded));
    }

    #[test]
    fn step_zero_and_idempotent_pause() {
        let mut s = gol(4);
        let now = Instant::now();
        assert_eq!(s.handle(Command::Step { count: 0 }, now), vec![Event::ack("step")]);
        let a = s.handle(Command::Pause {}, now);
        let b = s.handle(Command::Pause {}, now);
        assert_eq!(a, b);
        assert_eq!(a[0], Event::ack("pause"));
    }

    #[test]
    fn rewind_reports_target_tick() {
        let mut s = gol(4);
        let now = Instant::now();
        let ev = s.handle(Command::Step { count: 10 }, now);
        assert_eq!(ev.len(), 11);
        let ev = s.handle(Command::Rewind { tick: 5 }, now);
        assert_eq!(
            ev[0],
            Event::Timeline {
                current: 5,
                max: 10,
                branch_count: 0
            }
        );
        assert!(matches!(ev[1], Event::Tick { tick: 5, .. }));
        assert_eq!(code(&s.handle(Command::Rewind { tick: 11 }, now)), Some(ErrorCode::BadTick));
    }

    #[test]
    fn edit_pauses_play_and_truncates() {
        let mut s = gol(4);
        let t0 = Instant::now();
        s.handle(Command::Step { count: 3 }, t0);
        s.handle(Command::Rewind { tick: 1 }, t0);
        s.handle(Command::Play { tps: 10.0 }, t0);
        let ev = s.handle(
            Command::Edit {
                entity: EntityId::patch(0),
                attr: "alive".into(),
                value: Value::Bool(true),
            },
            t0,
        );
        assert_eq!(ev[0], Event::ack("pause"));
        assert_eq!(ev[1], Event::ack("edit"));
        assert_eq!(
            ev[2],
            Event::Timeline {
                current: 1,
                max: 1,
                branch_count: 1
            }
        );
        assert!(!s.is_playing());
        assert!(s.poll_play(t0 + Duration::from_secs(5)).is_empty());
    }

    #[test]
    fn error_codes_for_bad_targets() {
        let mut s = gol(4);
        let now = Instant::now();
        let edit = |attr: &str, value: Value, index: u64| Command::Edit {
            entity: EntityId::patch(index),
            attr: attr.into(),
            value,
        };
        assert_eq!(code(&s.handle(edit("alive", Value::Bool(true), 99), now)), Some(ErrorCode::NoEntity));
        assert_eq!(code(&s.handle(edit("alive", Value::Int(3), 0), now)), Some(ErrorCode::Range));
        assert_eq!(code(&s.handle(Command::Play { tps: 0.0 }, now)), Some(ErrorCode::Range));
        let sub = Command::Subscribe {
            povs: vec!["nope".into()],
            probes: true,
        };
        assert_eq!(code(&s.handle(sub, now)), Some(ErrorCode::NoEntity));
        let load = Command::Load {
            model: "chess".into(),
            params: Default::default(),
            seed: 0,
        };
        assert_eq!(code(&s.handle(load, now)), Some(ErrorCode::NoEntity));
        assert!(s.is_loaded());
    }

    #[test]
    fn play_follows_the_schedule() {
        let mut s = gol(4);
        let t0 = Instant::now();
        s.handle(Command::Play { tps: 10.0 }, t0);
        let mut ticks = 0;
        for ms in (0..=1000).step_by(5) {
            ticks += s.poll_play(t0 + Duration::from_millis(ms)).len();
        }
        assert_eq!(ticks, 10);
        assert_eq!(s.state().unwrap().tick, 10);
    }

    #[test]
    fn subscribe_narrows_frames() {
        let mut s = gol(3);
        let ev = s.handle(
            Command::Subscribe {
                povs: vec![],
                probes: false,
            },
            Instant::now(),
        );
        let Event::Tick { frames, probes, .. } = &ev[1] else { panic!() };
        assert!(frames.is_empty() && probes.is_empty());
    }
}
