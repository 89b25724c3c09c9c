//! Deterministic discrete-event substrate shared by the protocol simulators.
//!
//! Virtual time is a binary64 count of seconds. Events that fire at the same
//! instant are delivered in the order they were scheduled, so a run is a pure
//! function of its configuration and seed.

mod header;
mod link;
mod queue;
mod rng;

pub use header::{config_hash, ReportHeader};
pub use link::{DeliveryVerdict, Duplex, LinkModel, UnitFault};
pub use queue::{EventKind, RunAborted, RunSummary, Scheduler, SimEvent, VirtualClock};
pub use rng::{derive_seed, SimRng, RNG_NAME};
