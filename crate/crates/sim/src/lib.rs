//! Discrete-event simulation of the beacon-scheduled MAC and of the 802.11
//! DCF, EDCA and power-save baselines on a fully connected single-hop
//! network.
//!
//! Time is kept in integer microseconds. Every node draws from its own
//! seeded streams, so a run is a pure function of its configuration.

pub mod csma;
pub mod demand;
pub mod error;
pub mod event;
pub mod medium;
pub mod metrics;
pub mod node;
pub mod proposed;
pub mod psm;
pub mod scenario;
pub mod wlan;
pub mod world;

pub use demand::{DemandEntry, DemandTable, EntryKind, Grant, SchedulingPacket};
pub use error::SimError;
pub use metrics::{format_cell, Counters, RunMetrics, CSV_HEADER, INFINITE_MARKER};
pub use proposed::{run_proposed, ProposedStats};
pub use scenario::{realtime_frame_minislots, run_scenario};
pub use world::World;
