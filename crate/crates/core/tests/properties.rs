mod common;

use common::oracle;
use gemtrail_core::chain_price;
use gemtrail_core::gen::{self, LogShape, GEN_APP};
use gemtrail_core::ingest::{self, to_jsonl, EventRecord};
use gemtrail_core::ledger::LotOrigin;
use gemtrail_core::report::{report_by_date, report_spend_by_currency, DateRange, Grouping};
use gemtrail_core::trace::build_trace;
use gemtrail_core::{Event, Ledger, LedgerConfig, Payload, Rational, Strategy};
use chrono::FixedOffset;
use proptest::prelude::*;

fn replay(log: &[Event], strategy: Strategy) -> Ledger {
    Ledger::replay(GEN_APP, LedgerConfig::new(strategy, "USD"), log).unwrap()
}

fn small() -> LogShape {
    LogShape {
        max_events: 10,
        max_units: 100,
        currencies: 3,
        max_cents: 2000,
    }
}

fn utc() -> FixedOffset {
    FixedOffset::east_opt(0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn conservation(seed in any::<u64>()) {
        let log = gen::random_log(&mut gen::rng(seed), &LogShape::default());
        let injected: Rational = log.iter().filter_map(|e| match &e.payload {
            Payload::RealMoneyPurchase { paid, .. } => Some(paid.amount.clone()),
            _ => None,
        }).sum();
        for s in [Strategy::Fifo, Strategy::Lifo] {
            let l = replay(&log, s);
            prop_assert_eq!(&l.attributed_total() + &l.unspent_basis(), injected.clone());
        }
    }

    #[test]
    fn oracle_agrees(seed in any::<u64>()) {
        let log = gen::random_log(&mut gen::rng(seed), &small());
        for s in [Strategy::Fifo, Strategy::Lifo] {
            let l = replay(&log, s);
            let book = oracle::run(&log, s);
            prop_assert_eq!(l.attributions().len(), book.items.len());
            for a in l.attributions() {
                prop_assert_eq!(&a.total_basis.amount, &book.items[&a.event_id]);
            }
            prop_assert_eq!(l.unspent_basis(), book.held());
        }
    }

    #[test]
    fn strategy_independent_totals(seed in any::<u64>()) {
        let log = gen::random_log(&mut gen::rng(seed), &LogShape::default());
        let fifo = replay(&log, Strategy::Fifo);
        let lifo = replay(&log, Strategy::Lifo);
        prop_assert_eq!(
            &fifo.attributed_total() + &fifo.unspent_basis(),
            &lifo.attributed_total() + &lifo.unspent_basis()
        );
        let range = DateRange::all();
        prop_assert_eq!(
            report_spend_by_currency(&fifo, &range, &utc()),
            report_spend_by_currency(&lifo, &range, &utc())
        );
    }

    #[test]
    fn scale_invariance(seed in any::<u64>(), m in prop::sample::select(vec![2u64, 7, 1000])) {
        let log = gen::random_log(&mut gen::rng(seed), &LogShape::default());
        let scaled: Vec<Event> = log.iter().map(|e| e.scaled(m)).collect();
        for s in [Strategy::Fifo, Strategy::Lifo] {
            let a = replay(&log, s);
            let b = replay(&scaled, s);
            for (x, y) in a.attributions().iter().zip(b.attributions()) {
                prop_assert_eq!(&x.total_basis, &y.total_basis);
            }
        }
    }

    #[test]
    fn zero_basis_closure(seed in any::<u64>()) {
        let log = gen::random_log(&mut gen::rng(seed), &LogShape::default());
        let l = replay(&log, Strategy::Fifo);
        for a in l.attributions() {
            let all_earned = a.consumptions.iter().all(|c| {
                let rec = l.lot_record(&c.lot_id).unwrap();
                earned_only(&l, rec)
            });
            if all_earned {
                prop_assert!(a.total_basis.amount.is_zero());
            }
        }
    }

    #[test]
    fn trace_branches_sum_to_total(seed in any::<u64>()) {
        let log = gen::random_log(&mut gen::rng(seed), &LogShape::default());
        let l = replay(&log, Strategy::Lifo);
        for a in l.attributions() {
            let t = build_trace(&l, &a.event_id).unwrap();
            let sum: Rational = t.branches.iter().map(|b| b.basis.clone()).sum();
            prop_assert_eq!(&sum, &a.total_basis.amount);
            for b in &t.branches {
                let rates: Vec<Rational> = b.steps.iter().map(|s| s.rate.clone()).collect();
                prop_assert_eq!(chain_price(&rates).unwrap(), b.basis.clone());
                prop_assert_eq!(&b.steps.last().unwrap().running_product, &b.basis);
            }
        }
    }

    #[test]
    fn date_buckets_sum_to_totals(seed in any::<u64>(), hours in -12i32..=14) {
        let log = gen::random_log(&mut gen::rng(seed), &LogShape::default());
        let l = replay(&log, Strategy::Fifo);
        let offset = FixedOffset::east_opt(hours * 3600).unwrap();
        let injected = l.real_money_injected();
        for g in [Grouping::Day, Grouping::Month] {
            let buckets = report_by_date(&l, g, &offset);
            let spend: Rational = buckets.iter().map(|b| b.real_spend.amount.clone()).sum();
            let attributed: Rational = buckets.iter().map(|b| b.attributed()).sum();
            prop_assert_eq!(&spend, &injected);
            prop_assert_eq!(attributed, l.attributed_total());
            prop_assert!(buckets.windows(2).all(|w| w[0].bucket < w[1].bucket));
        }
        let rows = report_spend_by_currency(&l, &DateRange::all(), &offset);
        let by_currency: Rational = rows.iter().map(|r| r.real_spend.amount.clone()).sum();
        prop_assert_eq!(by_currency, injected);
    }

    #[test]
    fn line_round_trip(seed in any::<u64>()) {
        for event in gen::random_log(&mut gen::rng(seed), &small()) {
            let record = EventRecord::new(event);
            let again = ingest::parse_event_line(&record.to_line()).unwrap();
            prop_assert_eq!(&again, &record);
            prop_assert_eq!(again.to_line(), record.to_line());
        }
    }

    #[test]
    fn split_batches_match_single_batch(seed in any::<u64>(), cut in 0usize..50) {
        let log = gen::random_log(&mut gen::rng(seed), &LogShape::default());
        let text = to_jsonl(&log);
        let lines: Vec<&str> = text.lines().collect();
        let cut = cut.min(lines.len());
        let config = LedgerConfig::default();
        let mut whole = Ledger::new(GEN_APP, config.clone());
        ingest::ingest_log(&lines, &mut whole);
        let mut split = Ledger::new(GEN_APP, config);
        ingest::ingest_log(&lines[..cut], &mut split);
        ingest::ingest_log(&lines[cut..], &mut split);
        prop_assert_eq!(whole, split);
    }

    #[test]
    fn replay_is_deterministic(seed in any::<u64>()) {
        let log = gen::random_log(&mut gen::rng(seed), &LogShape::default());
        let a = replay(&log, Strategy::Fifo);
        let b = replay(&log, Strategy::Fifo);
        let q = gemtrail_core::ReportQuery { grouping: Grouping::Day, ..Default::default() };
        prop_assert_eq!(
            gemtrail_core::ReportDocument::build(&a, &q).to_json(),
            gemtrail_core::ReportDocument::build(&b, &q).to_json()
        );
        for attr in a.attributions() {
            prop_assert_eq!(build_trace(&a, &attr.event_id).unwrap(), build_trace(&b, &attr.event_id).unwrap());
        }
    }

    #[test]
    fn failed_events_leave_no_trace(seed in any::<u64>(), extra in 1u64..1000) {
        let log = gen::random_log(&mut gen::rng(seed), &LogShape::default());
        let mut l = replay(&log, Strategy::Fifo);
        let before = l.clone();
        let gems = l.currency("c0");
        let overspend = Event {
            event_id: "overspend".into(),
            app_id: GEN_APP.into(),
            timestamp: l.head().unwrap(),
            payload: Payload::ItemPurchase {
                item_id: "x".into(),
                count: 1u64.into(),
                paid_with: vec![
                    gemtrail_core::Holding::new(gems.clone(), l.balance(&gems)),
                    gemtrail_core::Holding::new(gems, extra),
                ],
            },
        };
        prop_assert!(l.apply_event(overspend).is_err());
        prop_assert_eq!(l, before);
    }
}

fn earned_only(l: &Ledger, rec: &gemtrail_core::ledger::LotRecord) -> bool {
    match &rec.origin {
        LotOrigin::Purchase { .. } => false,
        LotOrigin::Grant { .. } | LotOrigin::SaleProceeds { .. } => true,
        LotOrigin::Exchange { sources, .. } => sources
            .iter()
            .all(|c| earned_only(l, l.lot_record(&c.lot_id).unwrap())),
    }
}

#[test]
fn sell_rebuy_loops_never_exceed_injected_money() {
    // Buy once, then repeatedly buy an item, sell it back and rebuy with the
    // proceeds mixed with what is left.
    let mut r = gen::rng(99);
    for n in 1..40u64 {
        let mut log = gen::single_chain(&mut r, 0, 1000).events;
        log.truncate(1);
        let mut ts = log[0].timestamp;
        let c0 = log[0].payload.holdings()[0].currency.clone();
        for i in 0..n {
            ts += chrono::Duration::minutes(1);
            log.push(Event {
                event_id: format!("buy{i}"),
                app_id: GEN_APP.into(),
                timestamp: ts,
                payload: Payload::ItemPurchase {
                    item_id: "sword".into(),
                    count: 1u64.into(),
                    paid_with: vec![gemtrail_core::Holding::new(c0.clone(), 1)],
                },
            });
            log.push(Event {
                event_id: format!("sell{i}"),
                app_id: GEN_APP.into(),
                timestamp: ts,
                payload: Payload::ItemSale {
                    item_id: "sword".into(),
                    count: 1u64.into(),
                    proceeds: gemtrail_core::Holding::new(c0.clone(), 3),
                },
            });
        }
        for s in [Strategy::Fifo, Strategy::Lifo] {
            let l = replay(&log, s);
            assert!(l.attributed_total() <= l.real_money_injected());
            assert_eq!(&l.attributed_total() + &l.unspent_basis(), l.real_money_injected());
        }
    }
}

#[test]
fn shuffled_case_study_matches_in_order() {
    use gemtrail_core::casestudy;
    let text = to_jsonl(&casestudy::events());
    let lines: Vec<&str> = text.lines().collect();
    let mut in_order = Ledger::new(casestudy::APP_ID, LedgerConfig::default());
    ingest::ingest_log(&lines, &mut in_order);
    let q = gemtrail_core::ReportQuery { grouping: Grouping::Day, ..Default::default() };
    let expected = gemtrail_core::ReportDocument::build(&in_order, &q).to_json();
    let mut r = gen::rng(5);
    for _ in 0..50 {
        let mut shuffled = lines.clone();
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut r);
        let mut l = Ledger::new(casestudy::APP_ID, LedgerConfig::default());
        let report = ingest::ingest_log(&shuffled, &mut l);
        assert_eq!(report.accepted, 6);
        assert_eq!(gemtrail_core::ReportDocument::build(&l, &q).to_json(), expected);
    }
}
