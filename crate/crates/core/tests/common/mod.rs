//! Scripted sessions shared by the golden, network and acceptance tests.

#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use steppe::server::{Catalog, Session};

pub const MODELS: [&str; 3] = ["gol", "pastoral", "institutions"];

/// Command frames for one model's scripted session. Some frames are
/// deliberately invalid so the error paths are part of the transcript.
pub fn script(model: &str) -> Vec<&'static str> {
    match model {
        "gol" => vec![
            r#"{"type":"step","count":1}"#,
            r#"{"type":"load","model":"gol","params":{"width":6,"height":6,"density":0.35},"seed":7}"#,
            r#"{"type":"step","count":3}"#,
            r#"{"type":"subscribe","povs":["life"],"probes":true}"#,
            r#"{"type":"step","count":2}"#,
            r#"{"type":"inspect","entity":{"kind":"patch","index":7}}"#,
            r#"{"type":"rewind","tick":2}"#,
            r#"{"type":"edit","entity":{"kind":"patch","index":14},"attr":"alive","value":true}"#,
            r#"{"type":"edit","entity":{"kind":"patch","index":15},"attr":"alive","value":3}"#,
            r#"{"type":"step","count":2}"#,
            r#"{"type":"inspect","entity":{"kind":"patch","index":14}}"#,
            r#"{"type":"rewind","tick":99}"#,
            r#"{"type":"step","count":0}"#,
            r#"{"type":"pause"}"#,
            r#"{"type":"warp","speed":9}"#,
            r#"{"type":"step","count":"#,
        ],
        "pastoral" => vec![
            r#"{"type":"load","model":"pastoral","params":{"width":6,"height":5,"cows":3,"trees":2},"seed":11}"#,
            r#"{"type":"step","count":2}"#,
            r#"{"type":"inspect","entity":{"kind":"cow","index":2}}"#,
            r#"{"type":"edit","entity":{"kind":"cow","index":2},"attr":"energy","value":5.0}"#,
            r#"{"type":"subscribe","povs":["humidity"],"probes":false}"#,
            r#"{"type":"step","count":2}"#,
            r#"{"type":"rewind","tick":1}"#,
            r#"{"type":"edit","entity":{"kind":"patch","index":0},"attr":"humidity","value":1.5}"#,
            r#"{"type":"edit","entity":{"kind":"patch","index":0},"attr":"humidity","value":0.9}"#,
            r#"{"type":"step","count":1}"#,
            r#"{"type":"inspect","entity":{"kind":"cow","index":99}}"#,
            r#"{"type":"inspect","entity":{"kind":"patch","index":0}}"#,
        ],
        "institutions" => vec![
            r#"{"type":"load","model":"institutions","params":{"agents":5,"topology":"ring","reliability":0.7,"tokens":2,"holders":"0:0,2:1"},"seed":3}"#,
            r#"{"type":"step","count":4}"#,
            r#"{"type":"inspect","entity":{"kind":"institution","index":3}}"#,
            r#"{"type":"rewind","tick":2}"#,
            r#"{"type":"edit","entity":{"kind":"institution","index":4},"attr":"token_1","value":true}"#,
            r#"{"type":"step","count":3}"#,
            r#"{"type":"subscribe","povs":["knowledge"],"probes":true}"#,
            r#"{"type":"subscribe","povs":["weather"],"probes":true}"#,
            r#"{"type":"play","tps":0}"#,
            r#"{"type":"pause"}"#,
        ],
        other => panic!("no script for {other}"),
    }
}

/// Replies to each frame of the script, grouped per frame.
pub fn transcript_groups(model: &str) -> Vec<Vec<String>> {
    let mut session = Session::new("golden", Arc::new(Catalog::builtin()));
    script(model).into_iter().map(|frame| session.handle_text(frame)).collect()
}

/// The transcript as stored on disk: one event per line.
pub fn transcript(model: &str) -> String {
    let mut out = String::new();
    for line in transcript_groups(model).into_iter().flatten() {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn golden_path(model: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
        .join(format!("{model}.jsonl"))
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}
