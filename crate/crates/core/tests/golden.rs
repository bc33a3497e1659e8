//! Scripted-session transcripts and session-level properties.
//!
//! Set `UPDATE_GOLDEN=1` to rewrite the stored transcripts after an
//! intentional protocol change.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use steppe::observation::render_pov;
use steppe::server::{decode_command, decode_event, encode_command, Catalog, Command, Event, Session};
use steppe::{EntityId, Value};

#[test]
fn transcripts_match_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for model in common::MODELS {
        let live = common::transcript(model);
        let path = common::golden_path(model);
        if update {
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            std::fs::write(&path, &live).unwrap();
            continue;
        }
        let golden = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        for (i, (a, b)) in live.lines().zip(golden.lines()).enumerate() {
            assert_eq!(a, b, "{model}: event {i} differs from {}", path.display());
        }
        assert_eq!(live, golden, "{model}: transcript length differs");
    }
}

#[test]
fn transcript_events_decode_and_cover_every_command() {
    let mut seen = std::collections::BTreeSet::new();
    for model in common::MODELS {
        for frame in common::script(model) {
            if let Ok(cmd) = decode_command(frame) {
                seen.insert(cmd.type_name());
            }
        }
        for line in common::transcript(model).lines() {
            decode_event(line).unwrap_or_else(|e| panic!("{model}: {line}: {}", e.message));
        }
    }
    for ty in ["load", "step", "play", "pause", "rewind", "edit", "inspect", "subscribe"] {
        assert!(seen.contains(ty), "no script exercises `{ty}`");
    }
}

#[test]
fn error_codes_appear_where_expected() {
    let gol = common::transcript(common::MODELS[0]);
    for code in ["E_NOT_LOADED", "E_RANGE", "E_BAD_TICK", "E_UNKNOWN_TYPE", "E_MALFORMED"] {
        assert!(gol.contains(code), "gol transcript lacks {code}");
    }
    let pastoral = common::transcript("pastoral");
    assert!(pastoral.contains("E_RANGE") && pastoral.contains("E_NO_ENTITY"));
}

#[test]
fn command_corpus_round_trips() {
    let mut corpus: Vec<Command> = common::MODELS
        .iter()
        .flat_map(|m| common::script(m))
        .filter_map(|f| decode_command(f).ok())
        .collect();
    corpus.push(Command::Play { tps: 12.5 });
    corpus.push(Command::Edit {
        entity: EntityId::agent("cow", steppe::AgentId(3)),
        attr: "energy".into(),
        value: Value::Symbol("x".into()),
    });
    for cmd in corpus {
        assert_eq!(decode_command(&encode_command(&cmd)).unwrap(), cmd);
    }
}

/// Every tick event carries frames and probes equal to a fresh render of the
/// recorded snapshot for that tick.
#[test]
fn tick_events_match_their_snapshots() {
    for model in common::MODELS {
        let mut session = Session::new("c", Arc::new(Catalog::builtin()));
        for frame in common::script(model) {
            let Ok(cmd) = decode_command(frame) else { continue };
            for ev in session.handle(cmd, Instant::now()) {
                let Event::Tick { tick, frames, probes } = ev else { continue };
                let def = session.definition().unwrap();
                let state = session.timeline().unwrap().snapshot(tick).unwrap().restore().unwrap();
                for (name, f) in &frames {
                    assert_eq!(&render_pov(def, &state, def.pov(name).unwrap()).unwrap(), f, "{model} tick {tick}");
                }
                for (name, v) in &probes {
                    let p = def.probes.iter().find(|p| &p.name == name).unwrap();
                    assert_eq!(p.eval(&state).ok(), *v, "{model} tick {tick} probe {name}");
                }
            }
        }
    }
}

#[test]
fn equal_sessions_are_isolated_and_identical() {
    let catalog = Arc::new(Catalog::builtin());
    let mut a = Session::new("a", catalog.clone());
    let mut b = Session::new("b", catalog);
    let script = common::script("institutions");
    let mut out_a = Vec::new();
    let mut out_b = Vec::new();
    for frame in &script {
        out_a.extend(a.handle_text(frame));
    }
    for frame in &script {
        out_b.extend(b.handle_text(frame));
    }
    assert_eq!(out_a, out_b);
}

/// Interleaving play ticks with commands yields the same state as replaying
/// the same actions one after another, with each play tick as `step 1`.
#[test]
fn play_interleaving_replays_sequentially() {
    let load = r#"{"type":"load","model":"pastoral","params":{"width":8,"height":8},"seed":4}"#;
    let t0 = Instant::now();
    let mut live = Session::new("live", Arc::new(Catalog::builtin()));
    let mut log: Vec<Command> = Vec::new();
    let apply = |s: &mut Session, cmd: Command, at: Instant, log: &mut Vec<Command>| {
        log.push(cmd.clone());
        s.handle(cmd, at)
    };
    apply(&mut live, decode_command(load).unwrap(), t0, &mut log);
    apply(&mut live, Command::Play { tps: 20.0 }, t0, &mut log);
    let scripted: Vec<(u64, Command)> = vec![
        (130, Command::Inspect { entity: EntityId::patch(3) }),
        (260, Command::Rewind { tick: 2 }),
        (400, Command::Step { count: 2 }),
        (
            520,
            Command::Edit {
                entity: EntityId::patch(5),
                attr: "humidity".into(),
                value: Value::Real(0.25),
            },
        ),
        (600, Command::Play { tps: 40.0 }),
        (900, Command::Pause {}),
    ];
    let mut queue = scripted.into_iter().peekable();
    for ms in (0..=1000).step_by(10) {
        let now = t0 + Duration::from_millis(ms);
        while let Some((_, cmd)) = queue.next_if(|(at, _)| *at <= ms) {
            apply(&mut live, cmd, now, &mut log);
        }
        for ev in live.poll_play(now) {
            if let Event::Tick { .. } = ev {
                log.push(Command::Step { count: 1 });
            }
        }
    }

    let mut replay = Session::new("replay", Arc::new(Catalog::builtin()));
    for cmd in log.into_iter().filter(|c| !matches!(c, Command::Play { .. } | Command::Pause {})) {
        replay.handle(cmd, t0);
    }
    assert_eq!(replay.state().unwrap().digest(), live.state().unwrap().digest());
    assert_eq!(
        replay.timeline().unwrap().snapshots().iter().map(|s| s.hash).collect::<Vec<_>>(),
        live.timeline().unwrap().snapshots().iter().map(|s| s.hash).collect::<Vec<_>>()
    );
    assert!(!live.is_playing());
}
