//! Immutable economy events.

use chrono::{DateTime, Utc};

use crate::amount::Quantity;
use crate::currency::{CurrencyId, Money};

pub type Timestamp = DateTime<Utc>;

/// A positive amount of one currency, as it appears in event payloads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Holding {
    pub currency: CurrencyId,
    pub units: Quantity,
}

impl Holding {
    pub fn new(currency: CurrencyId, units: impl Into<Quantity>) -> Self {
        Holding {
            currency,
            units: units.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    RealMoneyPurchase {
        paid: Money,
        received: Holding,
    },
    Exchange {
        spent: Holding,
        received: Holding,
    },
    ItemPurchase {
        item_id: String,
        count: Quantity,
        /// Consumed in listed order.
        paid_with: Vec<Holding>,
    },
    ItemSale {
        item_id: String,
        count: Quantity,
        proceeds: Holding,
    },
    Grant {
        received: Holding,
        reason: String,
    },
}

impl Payload {
    pub fn kind(&self) -> EventKind {
        match self {
            Payload::RealMoneyPurchase { .. } => EventKind::RealMoneyPurchase,
            Payload::Exchange { .. } => EventKind::Exchange,
            Payload::ItemPurchase { .. } => EventKind::ItemPurchase,
            Payload::ItemSale { .. } => EventKind::ItemSale,
            Payload::Grant { .. } => EventKind::Grant,
        }
    }

    /// Every currency/quantity pair mentioned by the payload, spent or received.
    pub fn holdings(&self) -> Vec<&Holding> {
        match self {
            Payload::RealMoneyPurchase { received, .. } => vec![received],
            Payload::Exchange { spent, received } => vec![spent, received],
            Payload::ItemPurchase { paid_with, .. } => paid_with.iter().collect(),
            Payload::ItemSale { proceeds, .. } => vec![proceeds],
            Payload::Grant { received, .. } => vec![received],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    RealMoneyPurchase,
    Exchange,
    ItemPurchase,
    ItemSale,
    Grant,
}

impl EventKind {
    /// Wire name used in the JSONL log.
    pub fn wire_name(self) -> &'static str {
        match self {
            EventKind::RealMoneyPurchase => "real_purchase",
            EventKind::Exchange => "exchange",
            EventKind::ItemPurchase => "item_purchase",
            EventKind::ItemSale => "item_sale",
            EventKind::Grant => "grant",
        }
    }

    pub fn from_wire_name(name: &str) -> Option<Self> {
        Some(match name {
            "real_purchase" => EventKind::RealMoneyPurchase,
            "exchange" => EventKind::Exchange,
            "item_purchase" => EventKind::ItemPurchase,
            "item_sale" => EventKind::ItemSale,
            "grant" => EventKind::Grant,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub event_id: String,
    pub app_id: String,
    pub timestamp: Timestamp,
    pub payload: Payload,
}

impl Event {
    /// Copy of the event with every virtual quantity and item count
    /// multiplied by `factor`. Money amounts are left alone.
    pub fn scaled(&self, factor: u64) -> Event {
        let scale = |h: &Holding| Holding::new(h.currency.clone(), h.units.scaled(factor));
        let payload = match &self.payload {
            Payload::RealMoneyPurchase { paid, received } => Payload::RealMoneyPurchase {
                paid: paid.clone(),
                received: scale(received),
            },
            Payload::Exchange { spent, received } => Payload::Exchange {
                spent: scale(spent),
                received: scale(received),
            },
            Payload::ItemPurchase {
                item_id,
                count,
                paid_with,
            } => Payload::ItemPurchase {
                item_id: item_id.clone(),
                count: count.scaled(factor),
                paid_with: paid_with.iter().map(scale).collect(),
            },
            Payload::ItemSale {
                item_id,
                count,
                proceeds,
            } => Payload::ItemSale {
                item_id: item_id.clone(),
                count: count.scaled(factor),
                proceeds: scale(proceeds),
            },
            Payload::Grant { received, reason } => Payload::Grant {
                received: scale(received),
                reason: reason.clone(),
            },
        };
        Event {
            payload,
            ..self.clone()
        }
    }
}
