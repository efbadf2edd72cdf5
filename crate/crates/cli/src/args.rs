use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gemtrail_core::Strategy;

#[derive(Debug, Parser)]
#[command(
    name = "gemtrail",
    version,
    about = "Trace real money through virtual currencies to the items it bought"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Append a JSONL event log to the state directory.
    Ingest {
        /// Path to the log file.
        log: PathBuf,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        ledger: LedgerArgs,
    },
    /// Spend by currency and, optionally, by date.
    Report {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        ledger: LedgerArgs,
        /// App to report on; required when the state holds several.
        #[arg(long)]
        app: Option<String>,
        /// First local date included, YYYY-MM-DD.
        #[arg(long)]
        from: Option<String>,
        /// Last local date included, YYYY-MM-DD.
        #[arg(long)]
        to: Option<String>,
        /// none, day or month.
        #[arg(long, default_value = "none")]
        group: String,
        /// Fixed UTC offset used for dates, e.g. +02:00.
        #[arg(long, default_value = "+00:00", allow_hyphen_values = true)]
        tz: String,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Show how an item purchase's cost was derived.
    Trace {
        /// Event id of the item purchase.
        id: String,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        ledger: LedgerArgs,
        #[arg(long)]
        app: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Replay the built-in magic chest and wizard scenario and check its values.
    Casestudy {
        #[arg(long, value_parser = parse_strategy, default_value = "fifo")]
        strategy: Strategy,
        /// Multiply every virtual quantity by this factor.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        scale: u64,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value = "demo/config.toml")]
        config: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// State directory holding events.jsonl.
    #[arg(long = "state", env = "GEMTRAIL_STATE", default_value = "gemtrail-state")]
    pub dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct LedgerArgs {
    #[arg(long, value_parser = parse_strategy, default_value = "fifo")]
    pub strategy: Strategy,
    /// Real currency that costs are reported in.
    #[arg(long, default_value = "USD")]
    pub currency: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse::<Strategy>().map_err(|e| e.to_string())
}
