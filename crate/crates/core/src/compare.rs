//! Forward efficiency of the contention model next to the bilateral
//! efficiency of EFTP and of slice-acknowledged streaming, all on matched
//! capacity, propagation delay, fault model, and payload volume.

use serde::{Deserialize, Serialize};

use crate::analytic::{forward_efficiency, ContentionStats, EtherParams};
use crate::eftp::{measure_bilateral_efficiency_eftp, BilateralReport, EftpConfig};
use crate::error::{Error, Result};
use crate::oae::{run_stream, OaeConfig, OaeRunReport, RetransmitPolicy, FRAME_BITS};
use crate::simkernel::{derive_seed, Duplex, LinkModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub capacity_bps: f64,
    pub slot_s: f64,
    pub propagation_s: f64,
    /// Forward-model packet size, also the EFTP data packet size.
    pub packet_bits: u64,
    pub stations: u32,
    pub loss_prob: f64,
    pub corrupt_prob: f64,
    /// Transactions per regime.
    pub n_transactions: u64,
    /// Payload carried by one transaction in every regime.
    pub payload_bits: u64,
    pub dally_s: f64,
    pub retries: u32,
    pub control_bits: u64,
    pub seed: u64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            capacity_bps: 3e6,
            slot_s: 16e-6,
            propagation_s: 8e-6,
            packet_bits: 4096,
            stations: 1,
            loss_prob: 0.0,
            corrupt_prob: 0.0,
            n_transactions: 1000,
            payload_bits: 4 * 4096,
            dally_s: 10.0,
            retries: 5,
            control_bits: 48,
            seed: 1,
        }
    }
}

impl CompareConfig {
    /// OAE frames carrying one transaction's payload.
    pub fn frames_per_transaction(&self) -> u64 {
        self.payload_bits.div_ceil(FRAME_BITS)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Forward1976,
    EftpBilateral,
    OaeBilateral,
}

/// One row of the comparison table, with qualitative annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub regime: Regime,
    /// `E` or `E_B`.
    pub measures: String,
    pub value: f64,
    pub success_definition: String,
    pub boundary: String,
    pub channel: String,
    pub model: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub forward: ContentionStats,
    pub eftp: BilateralReport,
    pub oae: OaeRunReport,
}

impl ComparisonReport {
    pub fn value(&self, regime: Regime) -> f64 {
        self.rows
            .iter()
            .find(|r| r.regime == regime)
            .map(|r| r.value)
            .expect("every regime has a row")
    }
}

/// Builds the three-row table from already computed regime results.
pub fn comparison_rows(
    forward: &ContentionStats,
    eftp: &BilateralReport,
    oae: &OaeRunReport,
) -> Vec<ComparisonRow> {
    vec![
        ComparisonRow {
            regime: Regime::Forward1976,
            measures: "E".into(),
            value: forward.efficiency,
            success_definition: "packet carried without collision".into(),
            boundary: "sender only".into(),
            channel: "forward only".into(),
            model: "(P/C)/(P/C + W*T)".into(),
        },
        ComparisonRow {
            regime: Regime::EftpBilateral,
            measures: "E_B".into(),
            value: eftp.e_b,
            success_definition: "sender and receiver both assured (end-dally)".into(),
            boundary: "sender and receiver".into(),
            channel: "forward + return (ACK / END / ENDREPLY / echo)".into(),
            model: "Nc/Na * Pe/(Pe + dTc)".into(),
        },
        ComparisonRow {
            regime: Regime::OaeBilateral,
            measures: "E_B".into(),
            value: oae.e_b_oae,
            success_definition: "sender and receiver both assured (SACK 11)".into(),
            boundary: "sender and receiver".into(),
            channel: "forward + concurrent return (slice SACKs)".into(),
            model: "Nc/Na * Pe/(Pe + dTc)".into(),
        },
    ]
}

pub fn compare(cfg: &CompareConfig) -> Result<ComparisonReport> {
    if cfg.n_transactions == 0 {
        return Err(Error::usage("comparison needs at least one transaction"));
    }
    if cfg.payload_bits < cfg.packet_bits {
        return Err(Error::usage(format!(
            "payload of {} bits is smaller than one {}-bit packet",
            cfg.payload_bits, cfg.packet_bits
        )));
    }
    let params = EtherParams::new(
        cfg.capacity_bps,
        cfg.slot_s,
        cfg.packet_bits,
        cfg.stations,
        cfg.propagation_s,
    )?;
    let forward = forward_efficiency(&params)?;

    let half = LinkModel::new(
        cfg.capacity_bps,
        cfg.propagation_s,
        cfg.loss_prob,
        cfg.corrupt_prob,
        Duplex::Half,
    )?;
    let eftp_cfg = EftpConfig {
        control_bits: cfg.control_bits,
        retries: cfg.retries,
        dally_s: cfg.dally_s,
        ..EftpConfig::default()
    };
    let eftp = measure_bilateral_efficiency_eftp(
        cfg.n_transactions,
        cfg.payload_bits,
        cfg.packet_bits,
        &half,
        &eftp_cfg,
        derive_seed(cfg.seed, &[1]),
    )?;

    let full = LinkModel {
        duplex: Duplex::Full,
        ..half
    };
    let oae_cfg = OaeConfig {
        policy: RetransmitPolicy {
            retries: cfg.retries,
            stall_timeout_s: None,
        },
        ..OaeConfig::default()
    };
    let oae = run_stream(
        cfg.n_transactions * cfg.frames_per_transaction(),
        &full,
        &oae_cfg,
        derive_seed(cfg.seed, &[2]),
    )?;

    Ok(ComparisonReport {
        rows: comparison_rows(&forward, &eftp, &oae),
        forward,
        eftp,
        oae,
    })
}
