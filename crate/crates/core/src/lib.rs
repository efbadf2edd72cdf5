//! Attribution of real money to in-game purchases.
//!
//! Virtual currency is tracked as lots, each carrying the exact real-money
//! cost of one unit. Spending drains lots in FIFO or LIFO order, exchanges
//! carry cost forward into the currency they buy, and every item purchase is
//! assigned the summed cost of the units it consumed. Earned currency (grants
//! and resale proceeds) costs nothing, so only money the player actually
//! spent is ever attributed.
//!
//! All arithmetic is exact; values are rounded only when rendered.

pub mod amount;
pub mod book;
pub mod casestudy;
pub mod catalog;
pub mod chain;
pub mod currency;
pub mod error;
pub mod event;
pub mod exec;
pub mod gen;
pub mod ingest;
pub mod ledger;
pub mod lot;
pub mod report;
pub mod trace;

pub use amount::{Quantity, Rational};
pub use book::{Audit, LedgerSet};
pub use chain::chain_price;
pub use currency::{CurrencyId, CurrencyKind, Money};
pub use error::{ChainError, LedgerError};
pub use event::{Event, Holding, Payload, Timestamp};
pub use exec::Execution;
pub use ingest::{ingest_log, parse_event_line, EventRecord, IngestReport};
pub use ledger::{attribute_item_purchase, Attribution, Ledger, LedgerConfig};
pub use lot::{Consumption, Lot, Strategy, Wallet};
pub use report::{report_by_date, report_spend_by_currency, DateRange, Grouping, ReportDocument, ReportQuery};
pub use trace::{build_trace, Trace, TraceDocument};
