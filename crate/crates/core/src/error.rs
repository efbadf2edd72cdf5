use thiserror::Error;

use crate::amount::Quantity;
use crate::currency::CurrencyId;
use crate::event::Timestamp;

/// Failures raised while applying events or querying a ledger.
///
/// Every variant is raised before any state is mutated.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("event id {0:?} already applied")]
    DuplicateEventId(String),
    #[error("insufficient {currency}: have {have}, need {need}")]
    InsufficientBalance {
        currency: CurrencyId,
        have: Quantity,
        need: Quantity,
    },
    #[error("unknown currency {0}")]
    UnknownCurrency(String),
    #[error("quantity of {0} must be positive")]
    NonPositiveQuantity(String),
    #[error("real currency {0} used where a virtual currency is required")]
    RealCurrencyInVirtualPosition(String),
    #[error("event belongs to app {got:?}, ledger tracks {expected:?}")]
    AppMismatch { expected: String, got: String },
    #[error("real currency {got} differs from the report currency {expected}")]
    ReportCurrencyMismatch { expected: String, got: String },
    #[error("item purchase lists no payment")]
    EmptyPayment,
    #[error("real-money amount must be positive")]
    NonPositiveAmount,
    #[error("event {event_id:?} at {at} is older than the ledger head {head}")]
    StaleEvent {
        event_id: String,
        at: Timestamp,
        head: Timestamp,
    },
    #[error("no attribution with id {0:?}")]
    UnknownAttribution(String),
}

impl LedgerError {
    /// Stable machine-readable name.
    pub fn code(&self) -> &'static str {
        match self {
            LedgerError::DuplicateEventId(_) => "duplicate_event_id",
            LedgerError::InsufficientBalance { .. } => "insufficient_balance",
            LedgerError::UnknownCurrency(_) => "unknown_currency",
            LedgerError::NonPositiveQuantity(_) => "non_positive_quantity",
            LedgerError::RealCurrencyInVirtualPosition(_) => "real_currency_in_virtual_position",
            LedgerError::AppMismatch { .. } => "app_mismatch",
            LedgerError::ReportCurrencyMismatch { .. } => "report_currency_mismatch",
            LedgerError::EmptyPayment => "empty_payment",
            LedgerError::NonPositiveAmount => "non_positive_amount",
            LedgerError::StaleEvent { .. } => "stale_event",
            LedgerError::UnknownAttribution(_) => "unknown_attribution",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("exchange-rate chain is empty")]
    EmptyChain,
    #[error("exchange rate at hop {0} is negative")]
    NegativeRate(usize),
}
