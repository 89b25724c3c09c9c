//! Forward and bilateral link efficiency.
//!
//! * [`analytic`]: closed forms for acquisition probability, contention
//!   slots, forward efficiency `E`, bilateral efficiency `E_B`, and the
//!   round-trip (causal closure) check.
//! * [`simkernel`]: deterministic event queue, seeded RNG, and lossy link.
//! * [`csmacd`]: Monte-Carlo slotted contention, the empirical check on `E`.
//! * [`eftp`]: stop-and-wait transfer with the END / ENDREPLY / echo dally.
//! * [`oae`]: full-duplex slice-acknowledged frames and streams.
//! * [`compare`]: forward vs. bilateral comparison on matched parameters.

pub mod analytic;
pub mod compare;
pub mod csmacd;
pub mod eftp;
pub mod error;
pub mod oae;
pub mod simkernel;

pub use analytic::{
    acquisition_probability, bilateral_efficiency, efficiency_grid, forward_efficiency,
    mean_contention_slots, validate_causal_closure, BilateralInputs, ContentionStats, EtherParams,
    GridCell,
};
pub use error::{Error, Result};
pub use simkernel::{LinkModel, ReportHeader, SimRng};
