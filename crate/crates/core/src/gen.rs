//! Seeded generators of valid event logs, for property checks and benches.

use chrono::{Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amount::{Quantity, Rational};
use crate::currency::{CurrencyId, Money};
use crate::event::{Event, Holding, Payload, Timestamp};

pub const GEN_APP: &str = "gen-app";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogShape {
    pub max_events: usize,
    /// Upper bound for any single virtual quantity or item count.
    pub max_units: u64,
    pub currencies: usize,
    /// Upper bound for a purchase price, in cents.
    pub max_cents: u64,
}

impl Default for LogShape {
    fn default() -> Self {
        LogShape {
            max_events: 50,
            max_units: 1000,
            currencies: 3,
            max_cents: 5000,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn start() -> Timestamp {
    Utc.with_ymd_and_hms(2023, 5, 1, 8, 0, 0).unwrap()
}

fn code(i: usize) -> String {
    format!("c{i}")
}

fn currency(i: usize) -> CurrencyId {
    CurrencyId::virtual_in(GEN_APP, code(i))
}

struct Builder {
    events: Vec<Event>,
    now: Timestamp,
}

impl Builder {
    fn push(&mut self, rng: &mut impl Rng, payload: Payload) {
        // Ties are common on purpose; second-precision logs collide.
        if rng.gen_bool(0.7) {
            self.now += Duration::minutes(rng.gen_range(1..=360));
        }
        let id = format!("g{}", self.events.len());
        self.events.push(Event {
            event_id: id,
            app_id: GEN_APP.into(),
            timestamp: self.now,
            payload,
        });
    }
}

/// A valid log with purchases, exchanges, item purchases (sometimes paid in
/// two currencies), resales and grants. Every spend is covered by the
/// running balance.
pub fn random_log(rng: &mut impl Rng, shape: &LogShape) -> Vec<Event> {
    let n = rng.gen_range(1..=shape.max_events);
    let mut balance = vec![0u64; shape.currencies];
    let mut b = Builder {
        events: Vec::with_capacity(n),
        now: start(),
    };
    while b.events.len() < n {
        let funded: Vec<usize> = (0..shape.currencies).filter(|&i| balance[i] > 0).collect();
        let roll = rng.gen_range(0..100);
        let payload = if roll < 25 {
            let c = rng.gen_range(0..shape.currencies);
            let units = rng.gen_range(1..=shape.max_units);
            balance[c] += units;
            Payload::RealMoneyPurchase {
                paid: Money::new(
                    Rational::new(rng.gen_range(1..=shape.max_cents) as i64, 100),
                    CurrencyId::real("USD"),
                ),
                received: Holding::new(currency(c), units),
            }
        } else if roll < 45 && !funded.is_empty() {
            let from = *funded.choose(rng).unwrap();
            let spent = rng.gen_range(1..=balance[from].min(shape.max_units));
            let to = rng.gen_range(0..shape.currencies);
            let received = rng.gen_range(1..=shape.max_units);
            balance[from] -= spent;
            balance[to] += received;
            Payload::Exchange {
                spent: Holding::new(currency(from), spent),
                received: Holding::new(currency(to), received),
            }
        } else if roll < 70 && !funded.is_empty() {
            let mut picks = funded.clone();
            picks.shuffle(rng);
            picks.truncate(rng.gen_range(1..=2.min(picks.len())));
            let paid_with = picks
                .into_iter()
                .map(|c| {
                    let units = rng.gen_range(1..=balance[c].min(shape.max_units));
                    balance[c] -= units;
                    Holding::new(currency(c), units)
                })
                .collect();
            Payload::ItemPurchase {
                item_id: format!("item{}", rng.gen_range(0..5)),
                count: Quantity::new(rng.gen_range(1..=shape.max_units.min(5))),
                paid_with,
            }
        } else if roll < 80 {
            let c = rng.gen_range(0..shape.currencies);
            let units = rng.gen_range(1..=shape.max_units);
            balance[c] += units;
            Payload::ItemSale {
                item_id: format!("item{}", rng.gen_range(0..5)),
                count: Quantity::new(rng.gen_range(1..=shape.max_units.min(3))),
                proceeds: Holding::new(currency(c), units),
            }
        } else {
            let c = rng.gen_range(0..shape.currencies);
            let units = rng.gen_range(1..=shape.max_units);
            balance[c] += units;
            Payload::Grant {
                received: Holding::new(currency(c), units),
                reason: "reward".into(),
            }
        };
        b.push(rng, payload);
    }
    b.events
}

/// Parameters of a pure purchase → exchanges → item chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainLog {
    pub events: Vec<Event>,
    /// Purchase price in cents.
    pub paid_cents: u64,
    /// Units received at each hop: the purchase, then each exchange.
    pub hop_units: Vec<u64>,
    /// Units of the final currency spent on the item.
    pub item_units: u64,
    pub item_event_id: String,
}

/// One real-money purchase, `exchanges` full-lot exchanges, one item buy.
pub fn single_chain(rng: &mut impl Rng, exchanges: usize, max_units: u64) -> ChainLog {
    let paid_cents = rng.gen_range(1..=10_000);
    let hop_units: Vec<u64> = (0..=exchanges)
        .map(|_| rng.gen_range(1..=max_units))
        .collect();
    let item_units = rng.gen_range(1..=hop_units[exchanges]);
    let mut b = Builder {
        events: Vec::new(),
        now: start(),
    };
    b.push(
        rng,
        Payload::RealMoneyPurchase {
            paid: Money::new(Rational::new(paid_cents as i64, 100), CurrencyId::real("USD")),
            received: Holding::new(currency(0), hop_units[0]),
        },
    );
    for hop in 1..=exchanges {
        b.push(
            rng,
            Payload::Exchange {
                spent: Holding::new(currency(hop - 1), hop_units[hop - 1]),
                received: Holding::new(currency(hop), hop_units[hop]),
            },
        );
    }
    let count = Quantity::new(rng.gen_range(1..=10));
    b.push(
        rng,
        Payload::ItemPurchase {
            item_id: "chained".into(),
            count,
            paid_with: vec![Holding::new(currency(exchanges), item_units)],
        },
    );
    let item_event_id = b.events.last().unwrap().event_id.clone();
    ChainLog {
        events: b.events,
        paid_cents,
        hop_units,
        item_units,
        item_event_id,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::{Ledger, LedgerConfig};
    use crate::lot::Strategy;

    #[test]
    fn generated_logs_replay_cleanly() {
        let mut r = rng(7);
        for _ in 0..200 {
            let log = random_log(&mut r, &LogShape::default());
            for s in [Strategy::Fifo, Strategy::Lifo] {
                Ledger::replay(GEN_APP, LedgerConfig::new(s, "USD"), &log).unwrap();
            }
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = random_log(&mut rng(3), &LogShape::default());
        let b = random_log(&mut rng(3), &LogShape::default());
        assert_eq!(a, b);
    }

    #[test]
    fn chain_shape() {
        let c = single_chain(&mut rng(1), 3, 100);
        assert_eq!(c.events.len(), 5);
        assert_eq!(c.hop_units.len(), 4);
    }
}
