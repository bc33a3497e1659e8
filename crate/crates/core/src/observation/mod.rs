//! Probes (per-tick scalar measurements) and points of view (entity state to
//! visual attributes).

mod csv;
mod pov;
mod probes;

pub use csv::{export_csv, parse_csv};
pub use pov::{ramp, render_pov, AgentGlyph, PointOfView, RenderFrame, Rgb, Shape, VisualAttrs};
pub use probes::{sample_probes, ProbeDef, ProbeReading, ProbeSeries, ProbeSeriesSet};
