//! The gem-and-gold shop scenario used as the golden reference.
//!
//! $19.99 buys 2500 gems; a magic chest costs 250 gems; a 1000-gold pack
//! costs 60 gems; eight wizard cards cost 800 gold. The chest is attributed
//! exactly $1.999 and the wizards exactly $0.383808.

use chrono::{TimeZone, Utc};

use crate::amount::{Quantity, Rational};
use crate::currency::{CurrencyId, Money};
use crate::event::{Event, Holding, Payload, Timestamp};

pub const APP_ID: &str = "clash-royale";
pub const CHEST_EVENT_ID: &str = "cs-chest";
pub const WIZARDS_EVENT_ID: &str = "cs-wizards";

pub fn chest_cost() -> Rational {
    Rational::new(1999, 1000)
}

pub fn wizards_cost() -> Rational {
    Rational::new(5997, 15625)
}

fn at(hour: u32, minute: u32) -> Timestamp {
    Utc.with_ymd_and_hms(2023, 5, 1, hour, minute, 0).unwrap()
}

fn v(code: &str, units: u64) -> Holding {
    Holding::new(CurrencyId::virtual_in(APP_ID, code), units)
}

/// The six case-study events in log order.
pub fn events() -> Vec<Event> {
    let mk = |id: &str, ts: Timestamp, payload: Payload| Event {
        event_id: id.to_string(),
        app_id: APP_ID.to_string(),
        timestamp: ts,
        payload,
    };
    vec![
        mk(
            "cs-gems",
            at(10, 0),
            Payload::RealMoneyPurchase {
                paid: Money::new(Rational::new(1999, 100), CurrencyId::real("USD")),
                received: v("gems", 2500),
            },
        ),
        mk(
            CHEST_EVENT_ID,
            at(10, 1),
            Payload::ItemPurchase {
                item_id: "magic_chest".into(),
                count: Quantity::new(1),
                paid_with: vec![v("gems", 250)],
            },
        ),
        mk(
            "cs-gold",
            at(10, 5),
            Payload::Exchange {
                spent: v("gems", 60),
                received: v("gold", 1000),
            },
        ),
        mk(
            WIZARDS_EVENT_ID,
            at(10, 6),
            Payload::ItemPurchase {
                item_id: "wizard_card".into(),
                count: Quantity::new(8),
                paid_with: vec![v("gold", 800)],
            },
        ),
        mk(
            "cs-daily",
            at(18, 0),
            Payload::Grant {
                received: v("gems", 10),
                reason: "daily reward".into(),
            },
        ),
        mk(
            "cs-arena",
            at(18, 30),
            Payload::Grant {
                received: v("gold", 25),
                reason: "arena win".into(),
            },
        ),
    ]
}
