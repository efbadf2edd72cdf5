//! The per-app event-sourced ledger.
//!
//! A [`Ledger`] owns the append-only event log of one app together with the
//! state derived from it: the [`Wallet`] of live lots, an archive of every lot
//! ever created (so traces can walk back through drained lots) and the
//! [`Attribution`] of every item purchase.
//!
//! Applying an event is atomic. All validation, including balance checks for
//! every spent currency, happens before the first mutation, so a rejected
//! event leaves the ledger exactly as it was.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::amount::{Quantity, Rational};
use crate::currency::{CurrencyId, CurrencyKind, Money};
use crate::error::LedgerError;
use crate::event::{Event, Holding, Payload, Timestamp};
use crate::lot::{Consumption, Lot, Strategy, Wallet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerConfig {
    pub strategy: Strategy,
    /// ISO-style code of the single real currency this ledger accepts.
    pub report_currency: String,
}

impl Default for LedgerConfig {
    fn default() -> Self {
        LedgerConfig {
            strategy: Strategy::Fifo,
            report_currency: "USD".to_string(),
        }
    }
}

impl LedgerConfig {
    pub fn new(strategy: Strategy, report_currency: impl Into<String>) -> Self {
        LedgerConfig {
            strategy,
            report_currency: report_currency.into(),
        }
    }
}

/// How a lot came into existence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LotOrigin {
    Purchase { paid: Rational },
    Exchange { spent: Holding, sources: Vec<Consumption> },
    Grant { reason: String },
    SaleProceeds { item_id: String },
}

/// Immutable record of a lot as created. Kept after the live lot drains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LotRecord {
    pub lot_id: String,
    pub currency: CurrencyId,
    pub initial: Quantity,
    pub unit_basis: Rational,
    pub origin_event_id: String,
    pub acquired_at: Timestamp,
    pub origin: LotOrigin,
}

/// Real-money cost assigned to one item purchase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribution {
    /// Id of the `ItemPurchase` event; doubles as the attribution id.
    pub event_id: String,
    pub item_id: String,
    pub count: Quantity,
    pub timestamp: Timestamp,
    pub consumptions: Vec<Consumption>,
    pub total_basis: Money,
}

impl Attribution {
    /// Per-item cost, for display only.
    pub fn unit_cost(&self) -> Rational {
        match Rational::ratio(&Quantity::new(1), &self.count) {
            Some(inv) => &self.total_basis.amount * &inv,
            None => Rational::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ledger {
    app_id: String,
    config: LedgerConfig,
    report_currency: CurrencyId,
    events: Vec<Event>,
    seen: HashSet<String>,
    wallet: Wallet,
    lot_records: BTreeMap<String, LotRecord>,
    attributions: Vec<Attribution>,
    attribution_index: HashMap<String, usize>,
}

impl Ledger {
    pub fn new(app_id: impl Into<String>, config: LedgerConfig) -> Self {
        let app_id = app_id.into();
        Ledger {
            wallet: Wallet::new(app_id.clone()),
            report_currency: CurrencyId::real(config.report_currency.clone()),
            app_id,
            config,
            events: Vec::new(),
            seen: HashSet::new(),
            lot_records: BTreeMap::new(),
            attributions: Vec::new(),
            attribution_index: HashMap::new(),
        }
    }

    /// Builds a ledger by applying `events` in order, stopping at the first
    /// failure.
    pub fn replay<'a>(
        app_id: impl Into<String>,
        config: LedgerConfig,
        events: impl IntoIterator<Item = &'a Event>,
    ) -> Result<Self, LedgerError> {
        let mut ledger = Ledger::new(app_id, config);
        for event in events {
            ledger.apply_event(event.clone())?;
        }
        Ok(ledger)
    }

    pub fn app_id(&self) -> &str {
        &self.app_id
    }

    pub fn config(&self) -> &LedgerConfig {
        &self.config
    }

    pub fn strategy(&self) -> Strategy {
        self.config.strategy
    }

    pub fn report_currency(&self) -> &CurrencyId {
        &self.report_currency
    }

    /// Applied events in application order.
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn contains_event(&self, event_id: &str) -> bool {
        self.seen.contains(event_id)
    }

    /// Timestamp of the latest applied event.
    pub fn head(&self) -> Option<Timestamp> {
        self.events.last().map(|e| e.timestamp)
    }

    pub fn wallet(&self) -> &Wallet {
        &self.wallet
    }

    pub fn balance(&self, currency: &CurrencyId) -> Quantity {
        self.wallet.balance(currency)
    }

    pub fn lot_record(&self, lot_id: &str) -> Option<&LotRecord> {
        self.lot_records.get(lot_id)
    }

    pub fn lot_records(&self) -> impl Iterator<Item = &LotRecord> {
        self.lot_records.values()
    }

    pub fn attributions(&self) -> &[Attribution] {
        &self.attributions
    }

    pub fn attribution(&self, event_id: &str) -> Option<&Attribution> {
        self.attribution_index
            .get(event_id)
            .map(|&i| &self.attributions[i])
    }

    /// Shorthand for a virtual currency of this ledger's app.
    pub fn currency(&self, code: &str) -> CurrencyId {
        CurrencyId::virtual_in(self.app_id.clone(), code)
    }

    /// Sum of every real-money purchase amount applied so far.
    pub fn real_money_injected(&self) -> Rational {
        self.events
            .iter()
            .filter_map(|e| match &e.payload {
                Payload::RealMoneyPurchase { paid, .. } => Some(&paid.amount),
                _ => None,
            })
            .sum()
    }

    pub fn attributed_total(&self) -> Rational {
        self.attributions.iter().map(|a| &a.total_basis.amount).sum()
    }

    /// Σ remaining × unit_basis over live lots.
    pub fn unspent_basis(&self) -> Rational {
        self.wallet
            .all_lots()
            .map(|l| &l.remaining * &l.unit_basis)
            .sum()
    }

    /// Applies one event, appending it to the log on success.
    pub fn apply_event(&mut self, event: Event) -> Result<(), LedgerError> {
        self.validate(&event)?;
        match &event.payload {
            Payload::RealMoneyPurchase { paid, received } => {
                let unit_basis = &paid.amount
                    / &Rational::from(&received.units);
                self.create_lot(
                    &event,
                    received,
                    unit_basis,
                    LotOrigin::Purchase {
                        paid: paid.amount.clone(),
                    },
                );
            }
            Payload::Exchange { spent, received } => {
                let sources = self.consume(spent)?;
                let total: Rational = sources.iter().map(|c| &c.basis_part.amount).sum();
                let unit_basis = &total / &Rational::from(&received.units);
                self.create_lot(
                    &event,
                    received,
                    unit_basis,
                    LotOrigin::Exchange {
                        spent: spent.clone(),
                        sources,
                    },
                );
            }
            Payload::ItemPurchase {
                item_id,
                count,
                paid_with,
            } => {
                let mut consumptions = Vec::new();
                for holding in paid_with {
                    consumptions.extend(self.consume(holding)?);
                }
                let total: Rational = consumptions.iter().map(|c| &c.basis_part.amount).sum();
                self.attribution_index
                    .insert(event.event_id.clone(), self.attributions.len());
                self.attributions.push(Attribution {
                    event_id: event.event_id.clone(),
                    item_id: item_id.clone(),
                    count: count.clone(),
                    timestamp: event.timestamp,
                    consumptions,
                    total_basis: Money::new(total, self.report_currency.clone()),
                });
            }
            Payload::ItemSale {
                item_id, proceeds, ..
            } => self.handle_item_sale(&event, item_id, proceeds),
            Payload::Grant { received, reason } => {
                self.create_lot(
                    &event,
                    received,
                    Rational::zero(),
                    LotOrigin::Grant {
                        reason: reason.clone(),
                    },
                );
            }
        }
        self.seen.insert(event.event_id.clone());
        self.events.push(event);
        Ok(())
    }

    /// Sale proceeds enter the wallet at zero basis. Earlier attributions of
    /// the sold item are left as they were.
    fn handle_item_sale(&mut self, event: &Event, item_id: &str, proceeds: &Holding) {
        self.create_lot(
            event,
            proceeds,
            Rational::zero(),
            LotOrigin::SaleProceeds {
                item_id: item_id.to_string(),
            },
        );
    }

    fn consume(&mut self, holding: &Holding) -> Result<Vec<Consumption>, LedgerError> {
        self.wallet.consume(
            &holding.currency,
            &holding.units,
            self.config.strategy,
            &self.report_currency,
        )
    }

    fn create_lot(
        &mut self,
        event: &Event,
        received: &Holding,
        unit_basis: Rational,
        origin: LotOrigin,
    ) {
        let lot_id = event.event_id.clone();
        self.wallet.deposit(Lot {
            lot_id: lot_id.clone(),
            currency: received.currency.clone(),
            remaining: received.units.clone(),
            unit_basis: unit_basis.clone(),
            origin_event_id: event.event_id.clone(),
            acquired_at: event.timestamp,
        });
        self.lot_records.insert(
            lot_id.clone(),
            LotRecord {
                lot_id,
                currency: received.currency.clone(),
                initial: received.units.clone(),
                unit_basis,
                origin_event_id: event.event_id.clone(),
                acquired_at: event.timestamp,
                origin,
            },
        );
    }

    fn validate(&self, event: &Event) -> Result<(), LedgerError> {
        if event.app_id != self.app_id {
            return Err(LedgerError::AppMismatch {
                expected: self.app_id.clone(),
                got: event.app_id.clone(),
            });
        }
        if event.event_id.is_empty() || self.seen.contains(&event.event_id) {
            return Err(LedgerError::DuplicateEventId(event.event_id.clone()));
        }
        if let Some(head) = self.head() {
            if event.timestamp < head {
                return Err(LedgerError::StaleEvent {
                    event_id: event.event_id.clone(),
                    at: event.timestamp,
                    head,
                });
            }
        }
        for holding in event.payload.holdings() {
            self.validate_holding(holding)?;
        }
        match &event.payload {
            Payload::RealMoneyPurchase { paid, .. } => {
                let c = &paid.currency;
                if c.kind != CurrencyKind::Real || !c.is_well_formed() {
                    return Err(LedgerError::UnknownCurrency(c.to_string()));
                }
                if c.code != self.config.report_currency {
                    return Err(LedgerError::ReportCurrencyMismatch {
                        expected: self.config.report_currency.clone(),
                        got: c.code.clone(),
                    });
                }
                if paid.amount.is_zero() || paid.amount.is_negative() {
                    return Err(LedgerError::NonPositiveAmount);
                }
            }
            Payload::Exchange { spent, .. } => {
                self.check_balances(std::slice::from_ref(spent))?;
            }
            Payload::ItemPurchase {
                item_id,
                count,
                paid_with,
            } => {
                if count.is_zero() {
                    return Err(LedgerError::NonPositiveQuantity(format!("{item_id} count")));
                }
                if paid_with.is_empty() {
                    return Err(LedgerError::EmptyPayment);
                }
                self.check_balances(paid_with)?;
            }
            Payload::ItemSale { item_id, count, .. } => {
                if count.is_zero() {
                    return Err(LedgerError::NonPositiveQuantity(format!("{item_id} count")));
                }
            }
            Payload::Grant { .. } => {}
        }
        Ok(())
    }

    fn validate_holding(&self, holding: &Holding) -> Result<(), LedgerError> {
        let c = &holding.currency;
        if c.kind == CurrencyKind::Real {
            return Err(LedgerError::RealCurrencyInVirtualPosition(c.to_string()));
        }
        if !c.is_well_formed() || c.app_id != self.app_id {
            return Err(LedgerError::UnknownCurrency(c.to_string()));
        }
        if holding.units.is_zero() {
            return Err(LedgerError::NonPositiveQuantity(c.to_string()));
        }
        Ok(())
    }

    /// Checks aggregated need per currency against current balances.
    fn check_balances(&self, spends: &[Holding]) -> Result<(), LedgerError> {
        let mut need: BTreeMap<&CurrencyId, Quantity> = BTreeMap::new();
        for h in spends {
            *need.entry(&h.currency).or_default() += &h.units;
        }
        for (currency, need) in need {
            let have = self.wallet.balance(currency);
            if have < need {
                return Err(LedgerError::InsufficientBalance {
                    currency: currency.clone(),
                    have,
                    need,
                });
            }
        }
        Ok(())
    }
}

/// Looks up the attribution recorded when `purchase` was applied.
pub fn attribute_item_purchase<'a>(
    ledger: &'a Ledger,
    purchase: &Event,
) -> Result<&'a Attribution, LedgerError> {
    match &purchase.payload {
        Payload::ItemPurchase { .. } => ledger
            .attribution(&purchase.event_id)
            .ok_or_else(|| LedgerError::UnknownAttribution(purchase.event_id.clone())),
        _ => Err(LedgerError::UnknownAttribution(purchase.event_id.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::casestudy;
    use chrono::{TimeZone, Utc};

    fn at(minute: u32) -> Timestamp {
        Utc.with_ymd_and_hms(2023, 5, 1, 10, minute, 0).unwrap()
    }

    fn ledger() -> Ledger {
        Ledger::new(casestudy::APP_ID, LedgerConfig::default())
    }

    fn ev(id: &str, minute: u32, payload: Payload) -> Event {
        Event {
            event_id: id.into(),
            app_id: casestudy::APP_ID.into(),
            timestamp: at(minute),
            payload,
        }
    }

    fn gems(units: u64) -> Holding {
        Holding::new(CurrencyId::virtual_in(casestudy::APP_ID, "gems"), units)
    }

    fn gold(units: u64) -> Holding {
        Holding::new(CurrencyId::virtual_in(casestudy::APP_ID, "gold"), units)
    }

    fn usd(text: &str) -> Money {
        Money::new(Rational::parse_decimal(text).unwrap(), CurrencyId::real("USD"))
    }

    fn buy_gems(l: &mut Ledger) {
        l.apply_event(ev(
            "p1",
            0,
            Payload::RealMoneyPurchase {
                paid: usd("19.99"),
                received: gems(2500),
            },
        ))
        .unwrap();
    }

    #[test]
    fn purchase_lot_basis() {
        let mut l = ledger();
        buy_gems(&mut l);
        let lot = l.wallet().all_lots().next().unwrap();
        assert_eq!(lot.unit_basis, Rational::new(1999, 250000));
        assert_eq!(lot.unit_basis.to_plain_string(), "0.007996");
    }

    #[test]
    fn grant_lot_is_zero_basis() {
        let mut l = ledger();
        l.apply_event(ev(
            "g1",
            0,
            Payload::Grant {
                received: gems(100),
                reason: "daily reward".into(),
            },
        ))
        .unwrap();
        let lot = l.wallet().all_lots().next().unwrap();
        assert!(lot.unit_basis.is_zero());
        assert_eq!(lot.remaining, Quantity::new(100));
    }

    #[test]
    fn exchange_blends_basis() {
        let mut l = ledger();
        buy_gems(&mut l);
        l.apply_event(ev(
            "x1",
            1,
            Payload::Exchange {
                spent: gems(60),
                received: gold(1000),
            },
        ))
        .unwrap();
        let gold_lot = l.wallet().lots(&gold(1).currency).next().unwrap();
        // (60 × 19.99/2500) / 1000
        let expected = &(&Rational::from_integer(60) * &Rational::new(1999, 250000))
            / &Rational::from_integer(1000);
        assert_eq!(gold_lot.unit_basis, expected);
        assert_eq!(l.balance(&gems(1).currency), Quantity::new(2440));
    }

    #[test]
    fn chest_attribution() {
        let mut l = ledger();
        buy_gems(&mut l);
        let chest = ev(
            "chest",
            1,
            Payload::ItemPurchase {
                item_id: "magic_chest".into(),
                count: Quantity::new(1),
                paid_with: vec![gems(250)],
            },
        );
        l.apply_event(chest.clone()).unwrap();
        let a = attribute_item_purchase(&l, &chest).unwrap();
        assert_eq!(a.total_basis.amount, Rational::new(1999, 1000));
        assert_eq!(a.consumptions.len(), 1);
    }

    #[test]
    fn granted_item_costs_nothing() {
        let mut l = ledger();
        l.apply_event(ev(
            "g1",
            0,
            Payload::Grant {
                received: gold(500),
                reason: "quest".into(),
            },
        ))
        .unwrap();
        l.apply_event(ev(
            "w",
            1,
            Payload::ItemPurchase {
                item_id: "wizard_card".into(),
                count: Quantity::new(2),
                paid_with: vec![gold(200)],
            },
        ))
        .unwrap();
        assert!(l.attribution("w").unwrap().total_basis.amount.is_zero());
    }

    #[test]
    fn resale_proceeds_do_not_count() {
        let mut l = ledger();
        buy_gems(&mut l);
        l.apply_event(ev(
            "chest",
            1,
            Payload::ItemPurchase {
                item_id: "magic_chest".into(),
                count: Quantity::new(1),
                paid_with: vec![gems(2350)],
            },
        ))
        .unwrap();
        l.apply_event(ev(
            "sale",
            2,
            Payload::ItemSale {
                item_id: "magic_chest".into(),
                count: Quantity::new(1),
                proceeds: gems(100),
            },
        ))
        .unwrap();
        let chest_before = l.attribution("chest").unwrap().clone();
        // 150 purchased gems remain first in FIFO order, sale proceeds follow.
        l.apply_event(ev(
            "big",
            3,
            Payload::ItemPurchase {
                item_id: "legendary".into(),
                count: Quantity::new(1),
                paid_with: vec![gems(250)],
            },
        ))
        .unwrap();
        let big = l.attribution("big").unwrap();
        assert_eq!(
            big.total_basis.amount,
            &Rational::from_integer(150) * &Rational::new(1999, 250000)
        );
        assert_eq!(l.attribution("chest").unwrap(), &chest_before);
        assert_eq!(l.real_money_injected(), &l.attributed_total() + &l.unspent_basis());
    }

    #[test]
    fn rejected_events_do_not_mutate() {
        let mut l = ledger();
        buy_gems(&mut l);
        let before = l.clone();
        let cases = vec![
            (
                ev("p1", 5, Payload::Grant { received: gems(1), reason: String::new() }),
                "duplicate_event_id",
            ),
            (
                ev(
                    "x",
                    5,
                    Payload::ItemPurchase {
                        item_id: "a".into(),
                        count: Quantity::new(1),
                        paid_with: vec![gems(2000), gems(501)],
                    },
                ),
                "insufficient_balance",
            ),
            (
                ev("x", 5, Payload::Grant { received: gems(0), reason: String::new() }),
                "non_positive_quantity",
            ),
            (
                ev(
                    "x",
                    5,
                    Payload::Grant {
                        received: Holding::new(CurrencyId::real("USD"), 5),
                        reason: String::new(),
                    },
                ),
                "real_currency_in_virtual_position",
            ),
            (
                ev(
                    "x",
                    5,
                    Payload::Grant {
                        received: Holding::new(CurrencyId::virtual_in("other", "gems"), 5),
                        reason: String::new(),
                    },
                ),
                "unknown_currency",
            ),
            (
                ev(
                    "x",
                    5,
                    Payload::RealMoneyPurchase {
                        paid: Money::new(Rational::one(), CurrencyId::real("EUR")),
                        received: gems(5),
                    },
                ),
                "report_currency_mismatch",
            ),
            (
                ev(
                    "x",
                    5,
                    Payload::ItemPurchase {
                        item_id: "a".into(),
                        count: Quantity::new(1),
                        paid_with: vec![],
                    },
                ),
                "empty_payment",
            ),
        ];
        for (event, code) in cases {
            let err = l.apply_event(event).unwrap_err();
            assert_eq!(err.code(), code, "{err}");
            assert_eq!(l, before);
        }
    }

    #[test]
    fn stale_and_foreign_events_rejected() {
        let mut l = ledger();
        l.apply_event(ev("g1", 10, Payload::Grant { received: gems(1), reason: String::new() }))
            .unwrap();
        let err = l
            .apply_event(ev("g0", 5, Payload::Grant { received: gems(1), reason: String::new() }))
            .unwrap_err();
        assert_eq!(err.code(), "stale_event");
        let mut foreign = ev("g2", 11, Payload::Grant { received: gems(1), reason: String::new() });
        foreign.app_id = "other".into();
        assert_eq!(l.apply_event(foreign).unwrap_err().code(), "app_mismatch");
    }

    #[test]
    fn mixed_currency_purchase_consumes_in_listed_order() {
        let mut l = ledger();
        buy_gems(&mut l);
        l.apply_event(ev(
            "x1",
            1,
            Payload::Exchange {
                spent: gems(60),
                received: gold(1000),
            },
        ))
        .unwrap();
        l.apply_event(ev(
            "mix",
            2,
            Payload::ItemPurchase {
                item_id: "bundle".into(),
                count: Quantity::new(1),
                paid_with: vec![gold(500), gems(100)],
            },
        ))
        .unwrap();
        let a = l.attribution("mix").unwrap();
        assert_eq!(a.consumptions[0].currency.code, "gold");
        assert_eq!(a.consumptions[1].currency.code, "gems");
        let sum: Rational = a.consumptions.iter().map(|c| &c.basis_part.amount).sum();
        assert_eq!(sum, a.total_basis.amount);
    }
}
