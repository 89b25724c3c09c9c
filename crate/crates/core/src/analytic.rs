//! Closed-form efficiency model.
//!
//! Forward efficiency follows the classic shared-Ether contention model: `Q`
//! continuously queued stations each fire with probability `1/Q` per slot,
//! a slot is acquired when exactly one fires, and the channel alternates
//! between a transmission interval of `P/C` seconds and a contention
//! interval of `W` slots of `T` seconds each.
//!
//! Bilateral efficiency scales the committed-transaction success rate by the
//! share of link time spent on payload rather than on reaching mutual
//! knowledge of success.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Capacity of the experimental 1976 Ether, bits per second.
pub const EXPERIMENTAL_CAPACITY_BPS: f64 = 3.0e6;
/// Slot time (one round trip) of the experimental Ether, seconds.
pub const EXPERIMENTAL_SLOT_S: f64 = 16.0e-6;
/// Packet sizes of the classic efficiency table, bits.
pub const TABLE_PACKET_BITS: [u64; 4] = [48, 512, 1024, 4096];
/// Largest station count of the classic efficiency table.
pub const TABLE_MAX_STATIONS: u32 = 256;

/// Parameter bundle shared by the closed forms and the simulators.
///
/// A propagation delay longer than half the slot is representable on
/// purpose; [`EtherParams::causal_closure_holds`] reports it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtherParams {
    pub capacity_bps: f64,
    pub slot_s: f64,
    pub packet_bits: u64,
    pub stations: u32,
    pub propagation_s: f64,
}

impl EtherParams {
    pub fn new(
        capacity_bps: f64,
        slot_s: f64,
        packet_bits: u64,
        stations: u32,
        propagation_s: f64,
    ) -> Result<Self> {
        let params = EtherParams {
            capacity_bps,
            slot_s,
            packet_bits,
            stations,
            propagation_s,
        };
        params.validate()?;
        Ok(params)
    }

    /// The experimental Ether with `tau = T/2`.
    pub fn experimental(packet_bits: u64, stations: u32) -> Result<Self> {
        Self::new(
            EXPERIMENTAL_CAPACITY_BPS,
            EXPERIMENTAL_SLOT_S,
            packet_bits,
            stations,
            EXPERIMENTAL_SLOT_S / 2.0,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.capacity_bps.is_finite() && self.capacity_bps > 0.0) {
            return Err(Error::domain(format!(
                "capacity must be positive, got {}",
                self.capacity_bps
            )));
        }
        if !(self.slot_s.is_finite() && self.slot_s > 0.0) {
            return Err(Error::domain(format!(
                "slot time must be positive, got {}",
                self.slot_s
            )));
        }
        if self.packet_bits == 0 {
            return Err(Error::domain("packet size must be positive"));
        }
        if self.stations == 0 {
            return Err(Error::domain("at least one station is required"));
        }
        if !(self.propagation_s.is_finite() && self.propagation_s >= 0.0) {
            return Err(Error::domain(format!(
                "propagation delay must be non-negative, got {}",
                self.propagation_s
            )));
        }
        Ok(())
    }

    /// Serialization time of one packet, `P/C`.
    pub fn packet_time_s(&self) -> f64 {
        self.packet_bits as f64 / self.capacity_bps
    }

    pub fn causal_closure_holds(&self) -> bool {
        self.slot_s >= 2.0 * self.propagation_s
    }
}

/// The `(A, W, E)` triple for one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContentionStats {
    pub acquisition: f64,
    pub mean_slots: f64,
    pub efficiency: f64,
}

/// Probability that exactly one of `stations` queued stations fires in a
/// slot when each fires with probability `1/stations`: `(1 - 1/Q)^(Q-1)`.
pub fn acquisition_probability(stations: u32) -> Result<f64> {
    match stations {
        0 => Err(Error::domain("no stations cannot contend")),
        1 => Ok(1.0),
        q => {
            let q_f = q as f64;
            let base = (q_f - 1.0) / q_f;
            // q - 1 fits in i32 for every realistic station count; fall back
            // to the log form beyond that.
            match i32::try_from(q - 1) {
                Ok(exp) => Ok(base.powi(exp)),
                Err(_) => Ok(((q_f - 1.0) * (-1.0 / q_f).ln_1p()).exp()),
            }
        }
    }
}

/// Mean number of failed slots before acquisition, `(1 - A)/A`.
pub fn mean_contention_slots(acquisition: f64) -> Result<f64> {
    if !(acquisition > 0.0 && acquisition <= 1.0) {
        return Err(Error::domain(format!(
            "acquisition probability must lie in (0, 1], got {acquisition}"
        )));
    }
    Ok((1.0 - acquisition) / acquisition)
}

/// Fraction of channel time carrying successful forward packets,
/// `E = (P/C) / (P/C + W*T)`.
pub fn forward_efficiency(params: &EtherParams) -> Result<ContentionStats> {
    params.validate()?;
    let acquisition = acquisition_probability(params.stations)?;
    let mean_slots = mean_contention_slots(acquisition)?;
    let packet_time = params.packet_time_s();
    let efficiency = packet_time / (packet_time + mean_slots * params.slot_s);
    Ok(ContentionStats {
        acquisition,
        mean_slots,
        efficiency,
    })
}

/// One cell of an efficiency table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub packet_bits: u64,
    pub stations: u32,
    #[serde(flatten)]
    pub stats: ContentionStats,
}

/// Powers of two from 1 up to and including `max` (1, 2, 4, ...).
pub fn station_counts_pow2(max: u32) -> Vec<u32> {
    std::iter::successors(Some(1u32), |q| q.checked_mul(2))
        .take_while(|&q| q <= max)
        .collect()
}

/// `1, 1 + step, 1 + 2*step, ...` up to `max`, always ending at `max`.
pub fn station_counts_linear(step: u32, max: u32) -> Result<Vec<u32>> {
    if step == 0 || max == 0 {
        return Err(Error::usage("station step and maximum must be positive"));
    }
    let mut counts: Vec<u32> = (1..=max).step_by(step as usize).collect();
    if counts.last() != Some(&max) {
        counts.push(max);
    }
    Ok(counts)
}

/// Station counts of the default table: powers of two through 256.
pub fn default_station_counts() -> Vec<u32> {
    station_counts_pow2(TABLE_MAX_STATIONS)
}

/// Forward efficiency for every `(P, Q)` pair, row-major by packet size then
/// station count in the order given.
pub fn efficiency_grid(
    packet_bits: &[u64],
    stations: &[u32],
    capacity_bps: f64,
    slot_s: f64,
) -> Result<Vec<GridCell>> {
    if packet_bits.is_empty() || stations.is_empty() {
        return Err(Error::usage(
            "efficiency grid needs at least one P and one Q",
        ));
    }
    let mut cells = Vec::with_capacity(packet_bits.len() * stations.len());
    for &p in packet_bits {
        for &q in stations {
            let params = EtherParams::new(capacity_bps, slot_s, p, q, 0.0)?;
            cells.push(GridCell {
                packet_bits: p,
                stations: q,
                stats: forward_efficiency(&params)?,
            });
        }
    }
    Ok(cells)
}

/// Measured inputs of the bilateral efficiency formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilateralInputs {
    pub n_committed: u64,
    pub n_attempted: u64,
    /// Payload occupancy per transaction, seconds (payload bits / capacity).
    pub payload_time_s: f64,
    /// Link time spent reaching mutual knowledge beyond forward delivery.
    pub commit_overhead_s: f64,
}

impl BilateralInputs {
    pub fn validate(&self) -> Result<()> {
        if self.n_attempted == 0 {
            return Err(Error::domain(
                "bilateral efficiency is undefined without attempts",
            ));
        }
        if self.n_committed > self.n_attempted {
            return Err(Error::domain(format!(
                "{} committed exceeds {} attempted",
                self.n_committed, self.n_attempted
            )));
        }
        if !(self.payload_time_s.is_finite() && self.payload_time_s > 0.0) {
            return Err(Error::domain(format!(
                "payload duration must be positive, got {}",
                self.payload_time_s
            )));
        }
        if !(self.commit_overhead_s.is_finite() && self.commit_overhead_s >= 0.0) {
            return Err(Error::domain(format!(
                "commit overhead must be non-negative, got {}",
                self.commit_overhead_s
            )));
        }
        Ok(())
    }
}

/// `E_B = (N_c / N_a) * P_eff / (P_eff + dT_commit)`.
pub fn bilateral_efficiency(inputs: &BilateralInputs) -> Result<f64> {
    inputs.validate()?;
    let success_rate = inputs.n_committed as f64 / inputs.n_attempted as f64;
    let time_share = inputs.payload_time_s / (inputs.payload_time_s + inputs.commit_overhead_s);
    Ok(success_rate * time_share)
}

/// True iff a slot (or transaction window) of `window_s` lets a signal make
/// a full round trip over a link with one-way delay `tau_s`.
pub fn validate_causal_closure(window_s: f64, tau_s: f64) -> Result<bool> {
    if !(window_s.is_finite() && window_s > 0.0) {
        return Err(Error::domain(format!(
            "window must be positive, got {window_s}"
        )));
    }
    if !(tau_s.is_finite() && tau_s >= 0.0) {
        return Err(Error::domain(format!(
            "propagation delay must be non-negative, got {tau_s}"
        )));
    }
    Ok(window_s >= 2.0 * tau_s)
}
