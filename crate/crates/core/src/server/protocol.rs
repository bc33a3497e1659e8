//! Wire messages. Every frame is one JSON object whose `type` field selects
//! the variant. Field order follows the struct declarations, so encoding the
//! same event twice yields the same bytes.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::kernel::EntityId;
use crate::observation::RenderFrame;
use crate::space::Cell;
use crate::value::Value;

/// Client to server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    Load {
        model: String,
        #[serde(default)]
        params: serde_json::Map<String, serde_json::Value>,
        #[serde(default)]
        seed: u64,
    },
    Step {
        #[serde(default = "one")]
        count: u64,
    },
    Play {
        tps: f64,
    },
    Pause {},
    Rewind {
        tick: u64,
    },
    Edit {
        entity: EntityId,
        attr: String,
        value: Value,
    },
    Inspect {
        entity: EntityId,
    },
    Subscribe {
        povs: Vec<String>,
        #[serde(default = "yes")]
        probes: bool,
    },
}

fn one() -> u64 {
    1
}

fn yes() -> bool {
    true
}

pub const COMMAND_TYPES: &[&str] = &[
    "load", "step", "play", "pause", "rewind", "edit", "inspect", "subscribe",
];

impl Command {
    pub fn type_name(&self) -> &'static str {
        match self {
            Command::Load { .. } => "load",
            Command::Step { .. } => "step",
            Command::Play { .. } => "play",
            Command::Pause {} => "pause",
            Command::Rewind { .. } => "rewind",
            Command::Edit { .. } => "edit",
            Command::Inspect { .. } => "inspect",
            Command::Subscribe { .. } => "subscribe",
        }
    }
}

/// One attribute in an inspection, kept in schema order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttrValue {
    pub name: String,
    pub value: Value,
}

/// Server to client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Loaded {
        tick: u64,
        width: u32,
        height: u32,
        povs: Vec<String>,
        probes: Vec<String>,
    },
    Tick {
        tick: u64,
        frames: BTreeMap<String, RenderFrame>,
        /// `null` marks a probe that failed on this state.
        probes: BTreeMap<String, Option<f64>>,
    },
    Timeline {
        current: u64,
        max: u64,
        branch_count: u64,
    },
    Inspection {
        entity: EntityId,
        location: Cell,
        attrs: Vec<AttrValue>,
    },
    Ack {
        of: String,
    },
    Error {
        code: ErrorCode,
        message: String,
    },
}

impl Event {
    pub fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        Event::Error {
            code,
            message: message.into(),
        }
    }

    pub fn ack(of: &str) -> Self {
        Event::Ack { of: of.to_owned() }
    }
}

/// Stable error codes carried by `error` events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    #[serde(rename = "E_UNKNOWN_TYPE")]
    UnknownType,
    #[serde(rename = "E_MALFORMED")]
    Malformed,
    #[serde(rename = "E_NOT_LOADED")]
    NotLoaded,
    #[serde(rename = "E_BAD_TICK")]
    BadTick,
    #[serde(rename = "E_NO_ENTITY")]
    NoEntity,
    #[serde(rename = "E_RANGE")]
    Range,
    #[serde(rename = "E_INTERNAL")]
    Internal,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::UnknownType => "E_UNKNOWN_TYPE",
            ErrorCode::Malformed => "E_MALFORMED",
            ErrorCode::NotLoaded => "E_NOT_LOADED",
            ErrorCode::BadTick => "E_BAD_TICK",
            ErrorCode::NoEntity => "E_NO_ENTITY",
            ErrorCode::Range => "E_RANGE",
            ErrorCode::Internal => "E_INTERNAL",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<&SimError> for ErrorCode {
    fn from(e: &SimError) -> Self {
        match e {
            SimError::UnknownModel(_)
            | SimError::UnknownEntity(_)
            | SimError::UnknownAttribute { .. }
            | SimError::UnknownPov(_)
            | SimError::PovKind { .. }
            | SimError::NoSuchChannel { .. }
            | SimError::NotAlive(_) => ErrorCode::NoEntity,
            SimError::UnknownParameter(_)
            | SimError::BadParameter { .. }
            | SimError::BadDimensions { .. }
            | SimError::TypeMismatch { .. }
            | SimError::OutOfRange { .. }
            | SimError::OutOfBounds { .. }
            | SimError::DimensionMismatch { .. } => ErrorCode::Range,
            SimError::BadTick { .. } => ErrorCode::BadTick,
            SimError::NonContiguous { .. } | SimError::Decode(_) | SimError::Invalid(_) => ErrorCode::Internal,
        }
    }
}

/// A decoding failure, ready to be sent back as an `error` event.
#[derive(Debug, Clone, PartialEq)]
pub struct WireError {
    pub code: ErrorCode,
    pub message: String,
}

impl WireError {
    fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        WireError {
            code,
            message: message.into(),
        }
    }

    pub fn into_event(self) -> Event {
        Event::Error {
            code: self.code,
            message: self.message,
        }
    }
}

/// Parses one command frame. Text that is not a JSON object with a string
/// `type` is `E_MALFORMED`; an unrecognised `type` is `E_UNKNOWN_TYPE`; a
/// known type with a bad body is `E_MALFORMED`.
pub fn decode_command(text: &str) -> Result<Command, WireError> {
    let raw: serde_json::Value =
        serde_json::from_str(text).map_err(|e| WireError::new(ErrorCode::Malformed, format!("invalid JSON: {e}")))?;
    let ty = raw
        .as_object()
        .ok_or_else(|| WireError::new(ErrorCode::Malformed, "frame must be a JSON object"))?
        .get("type")
        .and_then(serde_json::Value::as_str)
        .ok_or_else(|| WireError::new(ErrorCode::Malformed, "missing string field `type`"))?;
    if !COMMAND_TYPES.contains(&ty) {
        return Err(WireError::new(ErrorCode::UnknownType, format!("unknown message type `{ty}`")));
    }
    let ty = ty.to_owned();
    serde_json::from_value(raw).map_err(|e| WireError::new(ErrorCode::Malformed, format!("bad `{ty}` body: {e}")))
}

pub fn encode_command(cmd: &Command) -> String {
    serde_json::to_string(cmd).expect("commands always serialize")
}

pub fn encode_event(event: &Event) -> String {
    serde_json::to_string(event).expect("events always serialize")
}

pub fn decode_event(text: &str) -> Result<Event, WireError> {
    serde_json::from_str(text).map_err(|e| WireError::new(ErrorCode::Malformed, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_optional_fields() {
        assert_eq!(decode_command(r#"{"type":"step"}"#).unwrap(), Command::Step { count: 1 });
        assert_eq!(decode_command(r#"{"type":"pause"}"#).unwrap(), Command::Pause {});
        assert_eq!(
            decode_command(r#"{"type":"load","model":"gol"}"#).unwrap(),
            Command::Load {
                model: "gol".into(),
                params: Default::default(),
                seed: 0
            }
        );
    }

    #[test]
    fn error_classes() {
        let code = |t: &str| decode_command(t).unwrap_err().code;
        assert_eq!(code(r#"{"type":"step","count":"#), ErrorCode::Malformed);
        assert_eq!(code("[1,2]"), ErrorCode::Malformed);
        assert_eq!(code(r#"{"count":1}"#), ErrorCode::Malformed);
        assert_eq!(code(r#"{"type":"fly"}"#), ErrorCode::UnknownType);
        assert_eq!(code(r#"{"type":"rewind","tick":-1}"#), ErrorCode::Malformed);
        assert_eq!(code(r#"{"type":"rewind","tick":1,"extra":0}"#), ErrorCode::Malformed);
    }

    #[test]
    fn edit_value_keeps_its_json_type() {
        let c = decode_command(r#"{"type":"edit","entity":{"kind":"patch","index":3},"attr":"x","value":1.0}"#).unwrap();
        let Command::Edit { value, .. } = &c else { panic!() };
        assert_eq!(value, &Value::Real(1.0));
        assert_eq!(
            encode_command(&c),
            r#"{"type":"edit","entity":{"kind":"patch","index":3},"attr":"x","value":1.0}"#
        );
    }

    #[test]
    fn event_encoding_is_stable() {
        let e = Event::Timeline {
            current: 5,
            max: 10,
            branch_count: 0,
        };
        assert_eq!(encode_event(&e), r#"{"type":"timeline","current":5,"max":10,"branch_count":0}"#);
        let e = Event::error(ErrorCode::BadTick, "no");
        assert_eq!(encode_event(&e), r#"{"type":"error","code":"E_BAD_TICK","message":"no"}"#);
        assert_eq!(decode_event(&encode_event(&e)).unwrap(), e);
    }

    #[test]
    fn every_sim_error_has_a_code() {
        let bad_tick = SimError::BadTick { tick: 9, max: 3 };
        assert_eq!(ErrorCode::from(&bad_tick), ErrorCode::BadTick);
        assert_eq!(ErrorCode::from(&SimError::UnknownPov("x".into())), ErrorCode::NoEntity);
    }
}
