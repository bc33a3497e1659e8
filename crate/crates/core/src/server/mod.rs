//! Interactive sessions over a JSON message protocol.

pub mod net;
pub mod protocol;
pub mod session;

pub use net::Server;
pub use protocol::{decode_command, decode_event, encode_command, encode_event, Command, ErrorCode, Event};
pub use session::{Catalog, PlayState, Session};
