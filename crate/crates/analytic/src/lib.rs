//! Markov-chain model of realtime calls sharing a beacon-scheduled MAC.
//!
//! The state counts realtime senders by call mode and demand-table status.
//! Building the chain needs three factors per beacon: which table entries
//! are served, how many contention requests get through, and which calls
//! switch on or off. The stationary distribution gives the MAC loss rate,
//! and a binary search over the frame length gives the smallest realtime
//! frame meeting a loss target.

pub mod cf;
pub mod chain;
mod combin;
pub mod contention;
pub mod error;
pub mod frame;
pub mod loss;
pub mod montecarlo;
pub mod state;
pub mod status;
pub mod steady;

pub use chain::{transition_probability, ChainParams, MarkovChain, SparseMatrix};
pub use contention::{ContentionModel, DiffRow};
pub use error::AnalyticError;
pub use frame::{delta_mac_at, min_frame_duration, Analysis, FrameSearch};
pub use loss::{compose_loss, loss_rate_delta_mac, max_allowable_mac_loss, LossAveraging};
pub use state::{StateSpace, SystemState, TransitionCount};
pub use steady::{stationary_distribution, steady_state};
pub use combin::binomial_pmf;
