//! Full-duplex link with slice-by-slice acknowledgment.
//!
//! A 64-byte frame travels as eight 8-byte slices. The receiver reports
//! progress on the return channel with four cumulative SACK levels at 8, 16,
//! 32, and 64 intact bytes; a frame commits when the sender observes the
//! 64-byte level. Streams keep the forward channel busy while SACKs for
//! earlier frames flow back, so commitment overlaps transmission.

mod engine;
mod sack;

pub use engine::{
    measure_bilateral_efficiency_oae, run_frame, run_stream, run_stream_detailed, FrameRecord,
    OaeConfig, OaeFrame, OaeRunReport, OaeStreamRun, OaeTraceEntry, RetransmitPolicy, SackCounts,
    SackEvent, SackGranularity, SliceVerdict, OAE_TRACE_HEADER,
};
pub use sack::{sack_level_for, SliceAckLevel};

pub const SLICE_BYTES: u64 = 8;
pub const SLICES_PER_FRAME: usize = 8;
pub const FRAME_BYTES: u64 = SLICE_BYTES * SLICES_PER_FRAME as u64;
pub const FRAME_BITS: u64 = FRAME_BYTES * 8;
pub const SLICE_BITS: u64 = SLICE_BYTES * 8;
/// Size of one SACK on the return channel.
pub const SACK_BITS: u64 = 64;
