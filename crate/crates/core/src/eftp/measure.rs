use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::run::{run_transfer_with_id, EftpConfig, Outcome, TransactionRecord};
use crate::analytic::{bilateral_efficiency, BilateralInputs};
use crate::error::{Error, Result};
use crate::simkernel::{derive_seed, LinkModel};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub committed: u64,
    pub sender_only_assured: u64,
    pub receiver_only_assured: u64,
    pub failed: u64,
}

impl OutcomeCounts {
    pub fn tally<'a>(records: impl IntoIterator<Item = &'a TransactionRecord>) -> Self {
        let mut counts = OutcomeCounts::default();
        for r in records {
            match r.outcome {
                Outcome::Committed => counts.committed += 1,
                Outcome::SenderOnlyAssured => counts.sender_only_assured += 1,
                Outcome::ReceiverOnlyAssured => counts.receiver_only_assured += 1,
                Outcome::Failed => counts.failed += 1,
            }
        }
        counts
    }
}

/// Aggregate bilateral efficiency of a batch of transactions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilateralReport {
    pub n_attempted: u64,
    pub n_committed: u64,
    /// Payload serialization time per transaction, seconds.
    pub payload_time_s: f64,
    /// Mean commit overhead over committed transactions; absent when none
    /// committed.
    pub delta_t_commit_s: Option<f64>,
    pub e_b: f64,
    pub outcomes: OutcomeCounts,
    pub retransmissions: u64,
}

impl BilateralReport {
    /// Builds the report from per-transaction outcomes and overheads.
    pub fn from_parts(
        n_attempted: u64,
        n_committed: u64,
        payload_time_s: f64,
        delta_t_commit_s: Option<f64>,
        outcomes: OutcomeCounts,
        retransmissions: u64,
    ) -> Result<Self> {
        let e_b = match delta_t_commit_s {
            Some(overhead) if n_committed > 0 => bilateral_efficiency(&BilateralInputs {
                n_committed,
                n_attempted,
                payload_time_s,
                commit_overhead_s: overhead,
            })?,
            _ => {
                if n_attempted == 0 {
                    return Err(Error::domain("no transactions attempted"));
                }
                0.0
            }
        };
        Ok(BilateralReport {
            n_attempted,
            n_committed,
            payload_time_s,
            delta_t_commit_s: delta_t_commit_s.filter(|_| n_committed > 0),
            e_b,
            outcomes,
            retransmissions,
        })
    }

    pub fn inputs(&self) -> BilateralInputs {
        BilateralInputs {
            n_committed: self.n_committed,
            n_attempted: self.n_attempted,
            payload_time_s: self.payload_time_s,
            commit_overhead_s: self.delta_t_commit_s.unwrap_or(0.0),
        }
    }

    pub fn commit_rate(&self) -> f64 {
        self.n_committed as f64 / self.n_attempted as f64
    }
}

/// Runs `n_transfers` independent transfers (seeded from `seed` and the
/// transfer index) and reduces them to a [`BilateralReport`].
pub fn measure_bilateral_efficiency_eftp(
    n_transfers: u64,
    file_bits: u64,
    packet_bits: u64,
    link: &LinkModel,
    cfg: &EftpConfig,
    seed: u64,
) -> Result<BilateralReport> {
    let records = run_batch(n_transfers, file_bits, packet_bits, link, cfg, seed)?;
    report_from_records(&records, file_bits, link)
}

pub(crate) fn run_batch(
    n_transfers: u64,
    file_bits: u64,
    packet_bits: u64,
    link: &LinkModel,
    cfg: &EftpConfig,
    seed: u64,
) -> Result<Vec<TransactionRecord>> {
    if n_transfers == 0 {
        return Err(Error::usage("at least one transfer is required"));
    }
    (0..n_transfers)
        .into_par_iter()
        .map(|i| {
            run_transfer_with_id(
                i,
                file_bits,
                packet_bits,
                link,
                cfg,
                derive_seed(seed, &[i]),
            )
        })
        .collect()
}

pub(crate) fn report_from_records(
    records: &[TransactionRecord],
    file_bits: u64,
    link: &LinkModel,
) -> Result<BilateralReport> {
    let outcomes = OutcomeCounts::tally(records);
    let overheads: Vec<f64> = records.iter().filter_map(|r| r.commit_overhead()).collect();
    let delta =
        (!overheads.is_empty()).then(|| overheads.iter().sum::<f64>() / overheads.len() as f64);
    BilateralReport::from_parts(
        records.len() as u64,
        outcomes.committed,
        link.serialization_time(file_bits),
        delta,
        outcomes,
        records.iter().map(|r| r.retransmissions).sum(),
    )
}
