//! Shared building blocks for the beacon-scheduled MAC analysis and
//! simulator: protocol constants, the integer-microsecond time base, traffic
//! sources, radio energy accounting and the scenario file format.

pub mod config;
pub mod energy;
pub mod error;
pub mod params;
pub mod rng;
pub mod time;
pub mod traffic;

pub use config::{Protocol, ScenarioConfig};
pub use energy::{EnergyLedger, PowerProfile, RadioMode};
pub use error::{ConfigError, EnergyError, ParamError};
pub use params::ProtocolParams;
pub use time::{us_to_minislots, Micros, MiniSlots};
pub use traffic::{Aggregate, CallMode, OnOffCall, PoissonSource};
