use serde::{Deserialize, Serialize};

use super::rng::SimRng;
use crate::analytic::validate_causal_closure;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Duplex {
    /// Shared medium, one direction at a time.
    Half,
    /// Independent forward and return channels of equal capacity.
    Full,
}

/// Point-to-point channel with serialization, propagation, and independent
/// per-unit loss and corruption.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    pub capacity_bps: f64,
    pub propagation_s: f64,
    pub loss_prob: f64,
    pub corrupt_prob: f64,
    pub duplex: Duplex,
}

/// Fault drawn for one unit, independent of its timing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitFault {
    None,
    Lost,
    Corrupted,
}

/// What the channel did with one transmitted unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeliveryVerdict {
    Delivered { at: f64 },
    Lost,
    Corrupted { at: f64 },
}

impl DeliveryVerdict {
    pub fn arrival_time(&self) -> Option<f64> {
        match *self {
            DeliveryVerdict::Delivered { at } | DeliveryVerdict::Corrupted { at } => Some(at),
            DeliveryVerdict::Lost => None,
        }
    }

    pub fn is_intact(&self) -> bool {
        matches!(self, DeliveryVerdict::Delivered { .. })
    }
}

impl LinkModel {
    pub fn new(
        capacity_bps: f64,
        propagation_s: f64,
        loss_prob: f64,
        corrupt_prob: f64,
        duplex: Duplex,
    ) -> Result<Self> {
        let link = LinkModel {
            capacity_bps,
            propagation_s,
            loss_prob,
            corrupt_prob,
            duplex,
        };
        link.validate()?;
        Ok(link)
    }

    /// Fault-free link.
    pub fn ideal(capacity_bps: f64, propagation_s: f64, duplex: Duplex) -> Result<Self> {
        Self::new(capacity_bps, propagation_s, 0.0, 0.0, duplex)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.capacity_bps.is_finite() && self.capacity_bps > 0.0) {
            return Err(Error::domain(format!(
                "link capacity must be positive, got {}",
                self.capacity_bps
            )));
        }
        if !(self.propagation_s.is_finite() && self.propagation_s >= 0.0) {
            return Err(Error::domain(format!(
                "propagation delay must be non-negative, got {}",
                self.propagation_s
            )));
        }
        for (name, p) in [("loss", self.loss_prob), ("corruption", self.corrupt_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!(
                    "{name} probability must lie in [0, 1], got {p}"
                )));
            }
        }
        Ok(())
    }

    pub fn serialization_time(&self, bits: u64) -> f64 {
        bits as f64 / self.capacity_bps
    }

    /// Fails when a transaction window of `window_s` cannot cover a round trip.
    pub fn check_causal_closure(&self, window_s: f64) -> Result<()> {
        if validate_causal_closure(window_s, self.propagation_s)? {
            Ok(())
        } else {
            Err(Error::CausalClosure {
                window_s,
                round_trip_s: 2.0 * self.propagation_s,
            })
        }
    }

    /// Sends `bits` starting at `send_time`. A surviving unit arrives at
    /// exactly `send_time + bits/C + tau`.
    ///
    /// Every call consumes exactly two draws, so the random stream does not
    /// depend on earlier verdicts. Zero-bit units model a pure signal.
    pub fn transmit(&self, bits: u64, send_time: f64, rng: &mut SimRng) -> DeliveryVerdict {
        let at = send_time + self.serialization_time(bits) + self.propagation_s;
        match self.draw_fault(rng) {
            UnitFault::Lost => DeliveryVerdict::Lost,
            UnitFault::Corrupted => DeliveryVerdict::Corrupted { at },
            UnitFault::None => DeliveryVerdict::Delivered { at },
        }
    }

    /// Loss and corruption trials for one unit; always two draws.
    pub fn draw_fault(&self, rng: &mut SimRng) -> UnitFault {
        let lost = rng.bernoulli(self.loss_prob);
        let corrupted = rng.bernoulli(self.corrupt_prob);
        if lost {
            UnitFault::Lost
        } else if corrupted {
            UnitFault::Corrupted
        } else {
            UnitFault::None
        }
    }
}
