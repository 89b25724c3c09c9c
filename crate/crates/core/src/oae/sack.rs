use std::fmt;

use serde::{Deserialize, Serialize};

use super::{FRAME_BYTES, SLICE_BYTES};
use crate::error::{Error, Result};

/// Cumulative slice-acknowledgment levels, ordered by depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SliceAckLevel {
    /// SACK 00: first slice seen without error.
    Sack00Information,
    /// SACK 01: 16 bytes captured.
    Sack01Knowledge,
    /// SACK 10: 32 bytes received, partial decode possible.
    Sack10Semantics,
    /// SACK 11: the full 64-byte frame received and matched.
    Sack11Understanding,
}

impl SliceAckLevel {
    pub const ALL: [SliceAckLevel; 4] = [
        SliceAckLevel::Sack00Information,
        SliceAckLevel::Sack01Knowledge,
        SliceAckLevel::Sack10Semantics,
        SliceAckLevel::Sack11Understanding,
    ];

    /// Intact bytes needed to reach this level.
    pub fn byte_threshold(self) -> u64 {
        match self {
            SliceAckLevel::Sack00Information => 8,
            SliceAckLevel::Sack01Knowledge => 16,
            SliceAckLevel::Sack10Semantics => 32,
            SliceAckLevel::Sack11Understanding => 64,
        }
    }

    /// Two-bit code as written on the wire.
    pub fn code(self) -> &'static str {
        match self {
            SliceAckLevel::Sack00Information => "00",
            SliceAckLevel::Sack01Knowledge => "01",
            SliceAckLevel::Sack10Semantics => "10",
            SliceAckLevel::Sack11Understanding => "11",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SliceAckLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SACK{}", self.code())
    }
}

/// Highest level whose threshold is covered by `bytes_ok` contiguous intact
/// bytes; `None` below one slice.
pub fn sack_level_for(bytes_ok: u64) -> Result<Option<SliceAckLevel>> {
    if bytes_ok % SLICE_BYTES != 0 || bytes_ok > FRAME_BYTES {
        return Err(Error::domain(format!(
            "{bytes_ok} bytes is not a whole number of slices within one frame"
        )));
    }
    Ok(SliceAckLevel::ALL
        .into_iter()
        .rev()
        .find(|level| level.byte_threshold() <= bytes_ok))
}
