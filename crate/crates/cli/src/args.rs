use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "bilateral",
    version,
    about = "Forward and bilateral efficiency of shared and point-to-point links",
    after_help = "Exit codes: 0 success, 2 usage or invalid input, 3 internal logic error, 4 I/O error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form contention efficiency over a (P, Q) grid.
    Table1,
    /// Monte-Carlo contention on every (P, Q) cell, next to the closed form.
    SimCsmacd,
    /// Batch of EFTP transfers with end-dally completion.
    SimEftp,
    /// One slice-acknowledged stream of 64-byte frames.
    SimOae,
    /// Forward E beside EFTP and OAE bilateral efficiency on matched parameters.
    Compare,
    /// Re-read a JSON report written by this tool and print its table.
    Render {
        /// JSON report to read.
        input: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sack {
    PerThreshold,
    PerSlice,
}

/// Flags shared by every command. Each command rejects flags it does not use.
#[derive(Debug, Default, Args)]
pub struct Opts {
    /// Link capacity in bits per second.
    #[arg(long = "C", global = true, value_name = "BPS")]
    pub capacity: Option<f64>,

    /// Contention slot time in seconds.
    #[arg(long = "T", global = true, value_name = "SECONDS")]
    pub slot: Option<f64>,

    /// One-way propagation delay in seconds.
    #[arg(long = "tau", global = true, value_name = "SECONDS")]
    pub tau: Option<f64>,

    /// Packet size(s) in bits, comma separated.
    #[arg(long = "P", global = true, value_delimiter = ',', num_args = 1.., value_name = "BITS")]
    pub packet_bits: Option<Vec<u64>>,

    /// Station count(s), comma separated.
    #[arg(long = "Q", global = true, value_delimiter = ',', num_args = 1.., value_name = "STATIONS")]
    pub stations: Option<Vec<u32>>,

    /// Packets per cell, transfers, frames, or transactions.
    #[arg(long = "n", global = true)]
    pub n: Option<u64>,

    #[arg(long = "seed", global = true)]
    pub seed: Option<u64>,

    /// Per-unit loss probability.
    #[arg(long = "loss", global = true, value_name = "PROB")]
    pub loss: Option<f64>,

    /// Per-unit corruption probability, applied to units that are not lost.
    #[arg(long = "corrupt", global = true, value_name = "PROB")]
    pub corrupt: Option<f64>,

    /// EFTP receiver dally in seconds.
    #[arg(long = "dally-s", global = true, value_name = "SECONDS")]
    pub dally_s: Option<f64>,

    /// Retransmissions per packet (EFTP) or per frame (OAE).
    #[arg(long = "retries", global = true)]
    pub retries: Option<u32>,

    /// Payload bits per EFTP transfer or compared transaction.
    #[arg(long = "payload-bits", global = true, value_name = "BITS")]
    pub payload_bits: Option<u64>,

    /// When OAE receivers emit SACKs.
    #[arg(long = "sack", global = true, value_enum)]
    pub sack: Option<Sack>,

    /// Output format; tables default to csv, simulations to json.
    #[arg(long = "format", global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the event trace to stderr.
    #[arg(long = "trace", global = true)]
    pub trace: bool,

    /// Write output to this file instead of stdout.
    #[arg(long = "out", global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

impl Opts {
    /// Names of the command-specific flags that were given.
    pub fn given(&self) -> Vec<&'static str> {
        let mut given = Vec::new();
        let mut note = |set: bool, name| {
            if set {
                given.push(name);
            }
        };
        note(self.capacity.is_some(), "--C");
        note(self.slot.is_some(), "--T");
        note(self.tau.is_some(), "--tau");
        note(self.packet_bits.is_some(), "--P");
        note(self.stations.is_some(), "--Q");
        note(self.n.is_some(), "--n");
        note(self.seed.is_some(), "--seed");
        note(self.loss.is_some(), "--loss");
        note(self.corrupt.is_some(), "--corrupt");
        note(self.dally_s.is_some(), "--dally-s");
        note(self.retries.is_some(), "--retries");
        note(self.payload_bits.is_some(), "--payload-bits");
        note(self.sack.is_some(), "--sack");
        note(self.trace, "--trace");
        given
    }
}
