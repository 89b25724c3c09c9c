//! The JSON document every command produces, and its CSV rendering.
//!
//! CSV is always derived from the document, so `render` on a saved JSON
//! report prints exactly what `--format csv` printed for the original run.

use bilateral_core::analytic::GridCell;
use bilateral_core::compare::{CompareConfig, ComparisonReport};
use bilateral_core::csmacd::SweepRow;
use bilateral_core::eftp::BilateralReport;
use bilateral_core::oae::OaeRunReport;
use bilateral_core::ReportHeader;
use serde::{Deserialize, Serialize};

use crate::commands::{CsmacdConfig, EftpRunConfig, OaeRunConfig, Table1Config};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Document {
    Table1 {
        header: ReportHeader,
        config: Table1Config,
        rows: Vec<GridCell>,
    },
    SimCsmacd {
        header: ReportHeader,
        config: CsmacdConfig,
        rows: Vec<SweepRow>,
    },
    SimEftp {
        header: ReportHeader,
        config: EftpRunConfig,
        report: BilateralReport,
    },
    SimOae {
        header: ReportHeader,
        config: OaeRunConfig,
        report: OaeRunReport,
    },
    Compare {
        header: ReportHeader,
        config: CompareConfig,
        report: ComparisonReport,
    },
}

impl Document {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize to JSON");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let (header, rows): (&[&str], Vec<Vec<String>>) = match self {
            Document::Table1 { rows, .. } => (
                &["P_bits", "Q", "A", "W", "E"],
                rows.iter()
                    .map(|c| {
                        vec![
                            c.packet_bits.to_string(),
                            c.stations.to_string(),
                            sig6(c.stats.acquisition),
                            sig6(c.stats.mean_slots),
                            sig6(c.stats.efficiency),
                        ]
                    })
                    .collect(),
            ),
            Document::SimCsmacd { rows, .. } => (
                &[
                    "P_bits",
                    "Q",
                    "seed",
                    "packets",
                    "E_analytic",
                    "E_empirical",
                    "abs_diff",
                    "E_stderr",
                    "W_analytic",
                    "W_empirical",
                    "W_variance",
                    "acquisition_freq",
                ],
                rows.iter()
                    .map(|r| {
                        vec![
                            r.packet_bits.to_string(),
                            r.stations.to_string(),
                            r.seed.to_string(),
                            r.run.packets_completed.to_string(),
                            sig6(r.analytic_e),
                            sig6(r.empirical_e),
                            sig6(r.abs_diff),
                            sig6(r.e_standard_error),
                            sig6(r.analytic_w),
                            sig6(r.empirical_w),
                            sig6(r.run.slots_variance),
                            sig6(r.run.acquisition_frequency()),
                        ]
                    })
                    .collect(),
            ),
            Document::SimEftp { report: r, .. } => (
                &[
                    "n_attempted",
                    "n_committed",
                    "commit_rate",
                    "payload_time_s",
                    "delta_t_commit_s",
                    "E_B",
                    "committed",
                    "sender_only_assured",
                    "receiver_only_assured",
                    "failed",
                    "retransmissions",
                ],
                vec![vec![
                    r.n_attempted.to_string(),
                    r.n_committed.to_string(),
                    sig6(r.commit_rate()),
                    sig6(r.payload_time_s),
                    r.delta_t_commit_s.map(sig6).unwrap_or_default(),
                    sig6(r.e_b),
                    r.outcomes.committed.to_string(),
                    r.outcomes.sender_only_assured.to_string(),
                    r.outcomes.receiver_only_assured.to_string(),
                    r.outcomes.failed.to_string(),
                    r.retransmissions.to_string(),
                ]],
            ),
            Document::SimOae { report: r, .. } => (
                &[
                    "frames_attempted",
                    "frames_committed",
                    "commit_rate",
                    "payload_time_s",
                    "delta_t_commit_s",
                    "E_B",
                    "sack00",
                    "sack01",
                    "sack10",
                    "sack11",
                    "retransmissions",
                    "stream_duration_s",
                    "forward_busy_s",
                    "return_busy_s",
                ],
                vec![vec![
                    r.frames_attempted.to_string(),
                    r.frames_committed.to_string(),
                    sig6(r.frames_committed as f64 / r.frames_attempted as f64),
                    sig6(r.payload_time_s),
                    sig6(r.delta_t_commit_s),
                    sig6(r.e_b_oae),
                    r.sack_counts.sack00.to_string(),
                    r.sack_counts.sack01.to_string(),
                    r.sack_counts.sack10.to_string(),
                    r.sack_counts.sack11.to_string(),
                    r.retransmissions.to_string(),
                    sig6(r.stream_duration_s),
                    sig6(r.forward_busy_s),
                    sig6(r.return_busy_s),
                ]],
            ),
            Document::Compare { report, .. } => (
                &[
                    "regime",
                    "measures",
                    "value",
                    "success_definition",
                    "boundary",
                    "channel",
                    "model",
                ],
                report
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            format!("{:?}", r.regime),
                            r.measures.clone(),
                            sig6(r.value),
                            r.success_definition.clone(),
                            r.boundary.clone(),
                            r.channel.clone(),
                            r.model.clone(),
                        ]
                    })
                    .collect(),
            ),
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("in-memory CSV write");
        for row in rows {
            w.write_record(&row).expect("in-memory CSV write");
        }
        String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
    }
}

/// `x` to six significant digits, switching to exponent form outside
/// `[1e-4, 1e6)`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // Let the exponent formatter do the rounding, so 0.9999996 becomes 1.00000.
    let sci = format!("{x:.5e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-4..6).contains(&exp) {
        format!("{x:.*}", (5 - exp) as usize)
    } else {
        sci
    }
}
