//! Lots, wallets and FIFO/LIFO consumption.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::amount::{Quantity, Rational};
use crate::currency::{CurrencyId, Money};
use crate::error::LedgerError;
use crate::event::Timestamp;

/// Order in which lots of one currency are drained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Oldest lot first.
    #[default]
    Fifo,
    /// Newest lot first.
    Lifo,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fifo" => Ok(Strategy::Fifo),
            "lifo" => Ok(Strategy::Lifo),
            _ => Err(format!("unknown strategy {s:?} (expected fifo or lifo)")),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Fifo => "fifo",
            Strategy::Lifo => "lifo",
        })
    }
}

/// A live batch of one virtual currency with an immutable per-unit cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lot {
    pub lot_id: String,
    pub currency: CurrencyId,
    pub remaining: Quantity,
    /// Real money per unit, in the ledger's report currency.
    pub unit_basis: Rational,
    pub origin_event_id: String,
    pub acquired_at: Timestamp,
}

/// Units taken from one lot by a spend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Consumption {
    pub lot_id: String,
    pub currency: CurrencyId,
    pub taken: Quantity,
    /// `taken × unit_basis`, exact.
    pub basis_part: Money,
}

/// Per-currency lot queues for one app, each kept in acquisition order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Wallet {
    app_id: String,
    lots: BTreeMap<CurrencyId, VecDeque<Lot>>,
}

impl Wallet {
    pub fn new(app_id: impl Into<String>) -> Self {
        Wallet {
            app_id: app_id.into(),
            lots: BTreeMap::new(),
        }
    }

    pub fn app_id(&self) -> &str {
        &self.app_id
    }

    pub fn balance(&self, currency: &CurrencyId) -> Quantity {
        self.lots
            .get(currency)
            .map(|q| q.iter().map(|l| &l.remaining).sum())
            .unwrap_or_default()
    }

    /// Live lots of `currency`, oldest first.
    pub fn lots(&self, currency: &CurrencyId) -> impl Iterator<Item = &Lot> {
        self.lots.get(currency).into_iter().flatten()
    }

    pub fn all_lots(&self) -> impl Iterator<Item = &Lot> {
        self.lots.values().flatten()
    }

    pub fn currencies(&self) -> impl Iterator<Item = &CurrencyId> {
        self.lots.keys()
    }

    /// Appends a lot. Callers deposit in acquisition order; zero-unit lots
    /// are dropped.
    pub fn deposit(&mut self, lot: Lot) {
        if lot.remaining.is_zero() {
            return;
        }
        self.lots.entry(lot.currency.clone()).or_default().push_back(lot);
    }

    /// Removes `qty` units of `currency`, draining lots in `strategy` order.
    ///
    /// Fails with `InsufficientBalance` without touching the wallet when the
    /// balance is short. Fully drained lots are removed.
    pub fn consume(
        &mut self,
        currency: &CurrencyId,
        qty: &Quantity,
        strategy: Strategy,
        report_currency: &CurrencyId,
    ) -> Result<Vec<Consumption>, LedgerError> {
        let have = self.balance(currency);
        if have < *qty {
            return Err(LedgerError::InsufficientBalance {
                currency: currency.clone(),
                have,
                need: qty.clone(),
            });
        }
        let mut out = Vec::new();
        if qty.is_zero() {
            return Ok(out);
        }
        let queue = self
            .lots
            .get_mut(currency)
            .expect("non-zero balance implies a queue");
        let mut outstanding = qty.clone();
        while !outstanding.is_zero() {
            let lot = match strategy {
                Strategy::Fifo => queue.front_mut(),
                Strategy::Lifo => queue.back_mut(),
            }
            .expect("balance covers the request");
            let taken = if lot.remaining <= outstanding {
                lot.remaining.clone()
            } else {
                outstanding.clone()
            };
            lot.remaining = lot.remaining.checked_sub(&taken).expect("taken <= remaining");
            outstanding = outstanding.checked_sub(&taken).expect("taken <= outstanding");
            out.push(Consumption {
                lot_id: lot.lot_id.clone(),
                currency: currency.clone(),
                basis_part: Money::new(&taken * &lot.unit_basis, report_currency.clone()),
                taken,
            });
            if lot.remaining.is_zero() {
                match strategy {
                    Strategy::Fifo => queue.pop_front(),
                    Strategy::Lifo => queue.pop_back(),
                };
            }
        }
        if queue.is_empty() {
            self.lots.remove(currency);
        }
        Ok(out)
    }
}
