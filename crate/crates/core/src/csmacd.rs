//! Monte-Carlo model of slotted contention among continuously queued
//! stations.
//!
//! Each slot, every one of the `Q` stations fires independently with
//! probability `1/Q`. A slot with exactly one transmitter is acquired and is
//! followed by a transmission interval of `P/C`; any other slot (idle or
//! collision) costs `T`. The run ends after `n_packets` acquisitions.

use rand::distr::Bernoulli;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{forward_efficiency, EtherParams};
use crate::error::{Error, Result};
use crate::simkernel::{derive_seed, SimRng};

/// Result of one contention slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotOutcome {
    pub transmitters: u32,
    pub acquired: bool,
}

impl SlotOutcome {
    fn from_count(transmitters: u32) -> Self {
        SlotOutcome {
            transmitters,
            acquired: transmitters == 1,
        }
    }
}

/// Draws one slot: each station fires with the given per-station trial.
pub fn draw_slot(stations: u32, fire: &Bernoulli, rng: &mut SimRng) -> SlotOutcome {
    let transmitters = (0..stations).filter(|_| rng.sample(fire)).count() as u32;
    SlotOutcome::from_count(transmitters)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentionRunReport {
    pub packet_bits: u64,
    pub stations: u32,
    pub seed: u64,
    pub packets_completed: u64,
    /// Failed slots only; the acquiring slot is part of the transmission.
    pub contention_slots_total: u64,
    pub idle_slots: u64,
    pub collision_slots: u64,
    pub busy_time_s: f64,
    pub total_time_s: f64,
    pub empirical_e: f64,
    pub empirical_w: f64,
    /// Sample variance of failed slots per packet.
    pub slots_variance: f64,
}

impl ContentionRunReport {
    /// Fraction of all slots (failed plus acquiring) that were acquired.
    pub fn acquisition_frequency(&self) -> f64 {
        self.packets_completed as f64
            / (self.packets_completed + self.contention_slots_total) as f64
    }

    /// Standard error of `empirical_w`.
    pub fn w_standard_error(&self) -> f64 {
        (self.slots_variance / self.packets_completed as f64).sqrt()
    }

    /// Delta-method standard error of `empirical_e` given the slot time.
    pub fn e_standard_error(&self, packet_time_s: f64, slot_s: f64) -> f64 {
        let denom = packet_time_s + self.empirical_w * slot_s;
        packet_time_s * slot_s / (denom * denom) * self.w_standard_error()
    }
}

pub fn simulate_contention(
    params: &EtherParams,
    n_packets: u64,
    seed: u64,
) -> Result<ContentionRunReport> {
    params.validate()?;
    if n_packets == 0 {
        return Err(Error::usage("contention run needs at least one packet"));
    }
    let q = params.stations;
    let fire = SimRng::bernoulli_dist(1.0 / q as f64);
    let mut rng = SimRng::new(seed);

    let mut idle = 0u64;
    let mut collisions = 0u64;
    // Welford accumulators over failed-slot counts per packet.
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;

    for k in 1..=n_packets {
        let mut failed = 0u64;
        loop {
            let slot = draw_slot(q, &fire, &mut rng);
            if slot.acquired {
                break;
            }
            failed += 1;
            if slot.transmitters == 0 {
                idle += 1;
            } else {
                collisions += 1;
            }
        }
        let x = failed as f64;
        let delta = x - mean;
        mean += delta / k as f64;
        m2 += delta * (x - mean);
    }

    let contention_slots_total = idle + collisions;
    let busy_time_s = n_packets as f64 * params.packet_time_s();
    let total_time_s = busy_time_s + contention_slots_total as f64 * params.slot_s;
    let slots_variance = if n_packets > 1 {
        m2 / (n_packets - 1) as f64
    } else {
        0.0
    };
    Ok(ContentionRunReport {
        packet_bits: params.packet_bits,
        stations: q,
        seed,
        packets_completed: n_packets,
        contention_slots_total,
        idle_slots: idle,
        collision_slots: collisions,
        busy_time_s,
        total_time_s,
        empirical_e: busy_time_s / total_time_s,
        empirical_w: contention_slots_total as f64 / n_packets as f64,
        slots_variance,
    })
}

/// Analytic and simulated efficiency for one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub packet_bits: u64,
    pub stations: u32,
    pub seed: u64,
    pub analytic_e: f64,
    pub empirical_e: f64,
    pub abs_diff: f64,
    pub analytic_w: f64,
    pub empirical_w: f64,
    pub e_standard_error: f64,
    pub run: ContentionRunReport,
}

/// Seed for cell `(P, Q)` of a sweep.
pub fn cell_seed(base_seed: u64, packet_bits: u64, stations: u32) -> u64 {
    derive_seed(base_seed, &[packet_bits, stations as u64])
}

/// Runs [`simulate_contention`] on every `(P, Q)` cell, in parallel, and
/// pairs each with the closed form. Rows come back row-major by `P` then `Q`.
pub fn contention_sweep(
    packet_bits: &[u64],
    stations: &[u32],
    capacity_bps: f64,
    slot_s: f64,
    n_packets: u64,
    base_seed: u64,
) -> Result<Vec<SweepRow>> {
    if packet_bits.is_empty() || stations.is_empty() {
        return Err(Error::usage(
            "contention sweep needs at least one P and one Q",
        ));
    }
    let cells: Vec<(u64, u32)> = packet_bits
        .iter()
        .flat_map(|&p| stations.iter().map(move |&q| (p, q)))
        .collect();
    cells
        .par_iter()
        .map(|&(p, q)| {
            let params = EtherParams::new(capacity_bps, slot_s, p, q, 0.0)?;
            let analytic = forward_efficiency(&params)?;
            let seed = cell_seed(base_seed, p, q);
            let run = simulate_contention(&params, n_packets, seed)?;
            Ok(SweepRow {
                packet_bits: p,
                stations: q,
                seed,
                analytic_e: analytic.efficiency,
                empirical_e: run.empirical_e,
                abs_diff: (run.empirical_e - analytic.efficiency).abs(),
                analytic_w: analytic.mean_slots,
                empirical_w: run.empirical_w,
                e_standard_error: run.e_standard_error(params.packet_time_s(), slot_s),
                run,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lone_station_never_contends() {
        let p = EtherParams::new(3e6, 16e-6, 512, 1, 0.0).unwrap();
        let r = simulate_contention(&p, 1000, 5).unwrap();
        assert_eq!(r.empirical_e, 1.0);
        assert_eq!(r.empirical_w, 0.0);
        assert_eq!(r.contention_slots_total, 0);
    }

    #[test]
    fn zero_packets_is_usage_error() {
        let p = EtherParams::new(3e6, 16e-6, 512, 2, 0.0).unwrap();
        assert!(matches!(
            simulate_contention(&p, 0, 1),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn time_accounting_identity_holds() {
        let p = EtherParams::new(3e6, 16e-6, 1024, 8, 0.0).unwrap();
        let r = simulate_contention(&p, 5000, 11).unwrap();
        assert_eq!(
            r.total_time_s,
            r.busy_time_s + r.contention_slots_total as f64 * p.slot_s
        );
        assert_eq!(r.empirical_e, r.busy_time_s / r.total_time_s);
        assert!(r.empirical_e > 0.0 && r.empirical_e <= 1.0);
        assert_eq!(r.idle_slots + r.collision_slots, r.contention_slots_total);
    }

    #[test]
    fn slot_outcome_acquired_only_with_one_transmitter() {
        for n in 0..5 {
            let s = SlotOutcome::from_count(n);
            assert_eq!(s.acquired, n == 1);
        }
    }

    #[test]
    fn single_cell_lone_station_sweep_has_zero_diff() {
        let rows = contention_sweep(&[4096], &[1], 3e6, 16e-6, 100, 1).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].abs_diff, 0.0);
    }

    #[test]
    fn same_seed_same_report() {
        let p = EtherParams::new(3e6, 16e-6, 48, 16, 0.0).unwrap();
        let a = simulate_contention(&p, 2000, 77).unwrap();
        let b = simulate_contention(&p, 2000, 77).unwrap();
        assert_eq!(a, b);
    }
}
