//! Low-fidelity digital-twin world generation for automated driving.
//!
//! The pipeline reads OpenStreetMap XML, keeps the features inside a
//! bounding box, extracts buildings and roads in a local metric frame, and
//! writes an SDFormat world together with vehicle models of three kinds:
//!
//! * `twin`: actuated Ackermann model with a GPS sensor,
//! * `shadow`: pose follower driven by the real vehicle's GPS,
//! * `ghost`: a shadow without collisions.
//!
//! The [`replay`] module replays recorded controls through a kinematic
//! bicycle model and reports how far the simulated and recorded
//! trajectories drift apart.

pub mod geodesy;
pub mod osm;
pub mod replay;
pub mod sdf;
pub mod vehicle;
pub mod world;

mod warning;
mod xml;

pub use geodesy::{GeoOrigin, GeodesyError, LocalPoint};
pub use osm::{BoundingBox, OsmDocument, OsmError, OsmNode, OsmWay};
pub use vehicle::{ConfigError, GenerationConfig, Spawn, VehicleKind, VehicleSpec};
pub use warning::Warning;
pub use world::{Building, ExtractionDefaults, Road};
