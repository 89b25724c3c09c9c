use bilateral_core::analytic::{
    default_station_counts, efficiency_grid, validate_causal_closure, EXPERIMENTAL_CAPACITY_BPS,
    EXPERIMENTAL_SLOT_S, TABLE_PACKET_BITS,
};
use bilateral_core::compare::{compare, CompareConfig};
use bilateral_core::csmacd::contention_sweep;
use bilateral_core::eftp::{
    measure_bilateral_efficiency_eftp, run_transfer_traced, EftpConfig, TRACE_HEADER,
};
use bilateral_core::oae::{
    run_stream_detailed, OaeConfig, RetransmitPolicy, SackGranularity, OAE_TRACE_HEADER,
};
use bilateral_core::simkernel::{derive_seed, Duplex, LinkModel};
use bilateral_core::ReportHeader;
use serde::{Deserialize, Serialize};

use crate::args::{Command, Opts, Sack};
use crate::report::Document;
use crate::CliError;

const DEFAULT_SEED: u64 = 1;
const DEFAULT_PAYLOAD_BITS: u64 = 4 * 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Config {
    pub capacity_bps: f64,
    pub slot_s: f64,
    pub packet_bits: Vec<u64>,
    pub stations: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsmacdConfig {
    pub capacity_bps: f64,
    pub slot_s: f64,
    pub packet_bits: Vec<u64>,
    pub stations: Vec<u32>,
    pub n_packets: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EftpRunConfig {
    pub link: LinkModel,
    pub packet_bits: u64,
    pub payload_bits: u64,
    pub n_transfers: u64,
    pub seed: u64,
    pub control_bits: u64,
    pub retries: u32,
    pub timeout_s: f64,
    pub dally_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OaeRunConfig {
    pub link: LinkModel,
    pub n_frames: u64,
    pub seed: u64,
    pub retries: u32,
    pub stall_timeout_s: f64,
    pub processing_s: [f64; 4],
    pub granularity: SackGranularity,
}

/// A finished command: the report plus any trace text for stderr.
pub struct Outcome {
    pub document: Document,
    pub trace: Option<String>,
}

fn allow(opts: &Opts, command: &str, allowed: &[&str]) -> Result<(), CliError> {
    let extra: Vec<&str> = opts
        .given()
        .into_iter()
        .filter(|f| !allowed.contains(f))
        .collect();
    if extra.is_empty() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{command} does not use {}",
            extra.join(", ")
        )))
    }
}

fn single<T: Copy>(list: &Option<Vec<T>>, flag: &str, default: T) -> Result<T, CliError> {
    match list.as_deref() {
        None => Ok(default),
        Some([one]) => Ok(*one),
        Some(_) => Err(CliError::Usage(format!("{flag} takes a single value here"))),
    }
}

fn capacity(opts: &Opts) -> f64 {
    opts.capacity.unwrap_or(EXPERIMENTAL_CAPACITY_BPS)
}

fn slot(opts: &Opts) -> f64 {
    opts.slot.unwrap_or(EXPERIMENTAL_SLOT_S)
}

/// Propagation delay; by default half the slot, so the slot is one round trip.
fn tau(opts: &Opts) -> f64 {
    opts.tau.unwrap_or(slot(opts) / 2.0)
}

pub fn run(command: &Command, opts: &Opts) -> Result<Outcome, CliError> {
    match command {
        Command::Table1 => table1(opts),
        Command::SimCsmacd => sim_csmacd(opts),
        Command::SimEftp => sim_eftp(opts),
        Command::SimOae => sim_oae(opts),
        Command::Compare => cmd_compare(opts),
        Command::Render { .. } => unreachable!("render is handled by main"),
    }
}

fn table1(opts: &Opts) -> Result<Outcome, CliError> {
    allow(opts, "table1", &["--C", "--T", "--tau", "--P", "--Q"])?;
    let config = Table1Config {
        capacity_bps: capacity(opts),
        slot_s: slot(opts),
        packet_bits: opts
            .packet_bits
            .clone()
            .unwrap_or_else(|| TABLE_PACKET_BITS.to_vec()),
        stations: opts.stations.clone().unwrap_or_else(default_station_counts),
    };
    // The closed form holds at any tau; a slot shorter than a round trip is
    // reported, not refused.
    if !validate_causal_closure(config.slot_s, tau(opts))? {
        eprintln!(
            "warning: slot {} s is shorter than the round trip 2*tau = {} s",
            config.slot_s,
            2.0 * tau(opts)
        );
    }
    let rows = efficiency_grid(
        &config.packet_bits,
        &config.stations,
        config.capacity_bps,
        config.slot_s,
    )?;
    Ok(Outcome {
        document: Document::Table1 {
            header: ReportHeader::new(0, &config),
            config,
            rows,
        },
        trace: None,
    })
}

fn sim_csmacd(opts: &Opts) -> Result<Outcome, CliError> {
    allow(
        opts,
        "sim-csmacd",
        &["--C", "--T", "--P", "--Q", "--n", "--seed"],
    )?;
    let config = CsmacdConfig {
        capacity_bps: capacity(opts),
        slot_s: slot(opts),
        packet_bits: opts
            .packet_bits
            .clone()
            .unwrap_or_else(|| TABLE_PACKET_BITS.to_vec()),
        stations: opts.stations.clone().unwrap_or_else(default_station_counts),
        n_packets: opts.n.unwrap_or(100_000),
        seed: opts.seed.unwrap_or(DEFAULT_SEED),
    };
    let rows = contention_sweep(
        &config.packet_bits,
        &config.stations,
        config.capacity_bps,
        config.slot_s,
        config.n_packets,
        config.seed,
    )?;
    Ok(Outcome {
        document: Document::SimCsmacd {
            header: ReportHeader::new(config.seed, &config),
            config,
            rows,
        },
        trace: None,
    })
}

fn sim_eftp(opts: &Opts) -> Result<Outcome, CliError> {
    allow(
        opts,
        "sim-eftp",
        &[
            "--C",
            "--T",
            "--tau",
            "--P",
            "--n",
            "--seed",
            "--loss",
            "--corrupt",
            "--dally-s",
            "--retries",
            "--payload-bits",
            "--trace",
        ],
    )?;
    let link = LinkModel::new(
        capacity(opts),
        tau(opts),
        opts.loss.unwrap_or(0.0),
        opts.corrupt.unwrap_or(0.0),
        Duplex::Half,
    )?;
    let packet_bits = single(&opts.packet_bits, "--P", 4096)?;
    let defaults = EftpConfig::default();
    let cfg = EftpConfig {
        retries: opts.retries.unwrap_or(defaults.retries),
        dally_s: opts.dally_s.unwrap_or(defaults.dally_s),
        ..defaults
    };
    let config = EftpRunConfig {
        link,
        packet_bits,
        payload_bits: opts.payload_bits.unwrap_or(DEFAULT_PAYLOAD_BITS),
        n_transfers: opts.n.unwrap_or(1000),
        seed: opts.seed.unwrap_or(DEFAULT_SEED),
        control_bits: cfg.control_bits,
        retries: cfg.retries,
        timeout_s: cfg.effective_timeout(packet_bits, &link),
        dally_s: cfg.dally_s,
    };
    let report = measure_bilateral_efficiency_eftp(
        config.n_transfers,
        config.payload_bits,
        config.packet_bits,
        &link,
        &cfg,
        config.seed,
    )?;
    // Transfer 0 of the batch, replayed with its trace.
    let trace = if opts.trace {
        let run = run_transfer_traced(
            0,
            config.payload_bits,
            config.packet_bits,
            &link,
            &cfg,
            derive_seed(config.seed, &[0]),
        )?;
        Some(lines(TRACE_HEADER, run.trace.iter()))
    } else {
        None
    };
    Ok(Outcome {
        document: Document::SimEftp {
            header: ReportHeader::new(config.seed, &config),
            config,
            report,
        },
        trace,
    })
}

fn sim_oae(opts: &Opts) -> Result<Outcome, CliError> {
    allow(
        opts,
        "sim-oae",
        &[
            "--C",
            "--T",
            "--tau",
            "--n",
            "--seed",
            "--loss",
            "--corrupt",
            "--retries",
            "--sack",
            "--trace",
        ],
    )?;
    let link = LinkModel::new(
        capacity(opts),
        tau(opts),
        opts.loss.unwrap_or(0.0),
        opts.corrupt.unwrap_or(0.0),
        Duplex::Full,
    )?;
    let cfg = OaeConfig {
        policy: RetransmitPolicy {
            retries: opts.retries.unwrap_or(RetransmitPolicy::default().retries),
            stall_timeout_s: None,
        },
        granularity: match opts.sack {
            Some(Sack::PerSlice) => SackGranularity::PerSlice,
            Some(Sack::PerThreshold) | None => SackGranularity::PerThreshold,
        },
        ..OaeConfig::default()
    };
    let config = OaeRunConfig {
        link,
        n_frames: opts.n.unwrap_or(10_000),
        seed: opts.seed.unwrap_or(DEFAULT_SEED),
        retries: cfg.policy.retries,
        stall_timeout_s: cfg.stall_window(&link),
        processing_s: cfg.processing_s,
        granularity: cfg.granularity,
    };
    let run = run_stream_detailed(config.n_frames, &link, &cfg, config.seed)?;
    let trace = opts
        .trace
        .then(|| lines(OAE_TRACE_HEADER, run.trace.iter()));
    Ok(Outcome {
        document: Document::SimOae {
            header: ReportHeader::new(config.seed, &config),
            config,
            report: run.report,
        },
        trace,
    })
}

fn cmd_compare(opts: &Opts) -> Result<Outcome, CliError> {
    allow(
        opts,
        "compare",
        &[
            "--C",
            "--T",
            "--tau",
            "--P",
            "--Q",
            "--n",
            "--seed",
            "--loss",
            "--corrupt",
            "--dally-s",
            "--retries",
            "--payload-bits",
        ],
    )?;
    let d = CompareConfig::default();
    let config = CompareConfig {
        capacity_bps: capacity(opts),
        slot_s: slot(opts),
        propagation_s: tau(opts),
        packet_bits: single(&opts.packet_bits, "--P", d.packet_bits)?,
        stations: single(&opts.stations, "--Q", d.stations)?,
        loss_prob: opts.loss.unwrap_or(d.loss_prob),
        corrupt_prob: opts.corrupt.unwrap_or(d.corrupt_prob),
        n_transactions: opts.n.unwrap_or(d.n_transactions),
        payload_bits: opts.payload_bits.unwrap_or(d.payload_bits),
        dally_s: opts.dally_s.unwrap_or(d.dally_s),
        retries: opts.retries.unwrap_or(d.retries),
        control_bits: d.control_bits,
        seed: opts.seed.unwrap_or(d.seed),
    };
    let report = compare(&config)?;
    Ok(Outcome {
        document: Document::Compare {
            header: ReportHeader::new(config.seed, &config),
            config,
            report,
        },
        trace: None,
    })
}

fn lines<T: std::fmt::Display>(header: &str, entries: impl Iterator<Item = T>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for e in entries {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}
