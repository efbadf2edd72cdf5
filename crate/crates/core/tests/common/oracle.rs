//! Brute-force cost oracle: every atomic unit of virtual currency is a
//! separate entry carrying its own real-money cost. FIFO spends from the
//! front of a currency's unit list and LIFO from the back. Exchanges spread
//! the summed cost of the spent units evenly over the units received.
//!
//! Shares nothing with the lot-based implementation beyond the event types.

use std::collections::{BTreeMap, VecDeque};

use gemtrail_core::{Event, Payload, Rational, Strategy};

fn units(q: &gemtrail_core::Quantity) -> usize {
    q.to_u64().expect("oracle logs use small quantities") as usize
}

#[derive(Default)]
pub struct UnitBook {
    units: BTreeMap<String, VecDeque<Rational>>,
    pub items: BTreeMap<String, Rational>,
    pub injected: Rational,
}

impl UnitBook {
    fn add(&mut self, code: &str, n: usize, each: Rational) {
        let list = self.units.entry(code.to_string()).or_default();
        list.extend(std::iter::repeat_n(each, n));
    }

    fn take(&mut self, code: &str, n: usize, strategy: Strategy) -> Rational {
        let list = self.units.get_mut(code).expect("spent currency exists");
        assert!(list.len() >= n, "oracle log overspends {code}");
        let mut total = Rational::zero();
        for _ in 0..n {
            let unit = match strategy {
                Strategy::Fifo => list.pop_front(),
                Strategy::Lifo => list.pop_back(),
            };
            total += &unit.unwrap();
        }
        total
    }

    /// Σ cost of units still held.
    pub fn held(&self) -> Rational {
        self.units.values().flatten().sum()
    }
}

pub fn run(events: &[Event], strategy: Strategy) -> UnitBook {
    let mut book = UnitBook::default();
    for e in events {
        match &e.payload {
            Payload::RealMoneyPurchase { paid, received } => {
                let n = units(&received.units);
                let each = &paid.amount / &Rational::from_integer(n as u64);
                book.injected += &paid.amount;
                book.add(&received.currency.code, n, each);
            }
            Payload::Exchange { spent, received } => {
                let cost = book.take(&spent.currency.code, units(&spent.units), strategy);
                let n = units(&received.units);
                let each = &cost / &Rational::from_integer(n as u64);
                book.add(&received.currency.code, n, each);
            }
            Payload::ItemPurchase { paid_with, .. } => {
                let mut cost = Rational::zero();
                for h in paid_with {
                    cost += &book.take(&h.currency.code, units(&h.units), strategy);
                }
                book.items.insert(e.event_id.clone(), cost);
            }
            Payload::ItemSale { proceeds, .. } => {
                book.add(&proceeds.currency.code, units(&proceeds.units), Rational::zero());
            }
            Payload::Grant { received, .. } => {
                book.add(&received.currency.code, units(&received.units), Rational::zero());
            }
        }
    }
    book
}
