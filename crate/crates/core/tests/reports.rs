use chrono::{FixedOffset, TimeZone, Utc};
use gemtrail_core::casestudy;
use gemtrail_core::report::{
    parse_date, parse_offset, report_by_date, report_spend_by_currency, DateRange, Grouping,
    ReportError,
};
use gemtrail_core::{
    CurrencyId, Event, Holding, Ledger, LedgerConfig, Money, Payload, Quantity, Rational,
    ReportDocument, ReportQuery, Strategy,
};

fn case_ledger(strategy: Strategy) -> Ledger {
    Ledger::replay(
        casestudy::APP_ID,
        LedgerConfig::new(strategy, "USD"),
        &casestudy::events(),
    )
    .unwrap()
}

fn utc() -> FixedOffset {
    FixedOffset::east_opt(0).unwrap()
}

#[test]
fn spend_by_currency_after_case_study() {
    let l = case_ledger(Strategy::Fifo);
    let rows = report_spend_by_currency(&l, &DateRange::all(), &utc());
    let summary: Vec<(String, String, String)> = rows
        .iter()
        .map(|r| {
            (
                r.currency.code.clone(),
                r.real_spend.amount.to_exact_string(),
                r.virtual_bought.to_string(),
            )
        })
        .collect();
    assert_eq!(
        summary,
        [
            ("gems".to_string(), "1999/100".to_string(), "2500".to_string()),
            ("gold".to_string(), "0".to_string(), "1000".to_string()),
        ]
    );
}

#[test]
fn empty_ledger_reports_nothing() {
    let l = Ledger::new("nobody", LedgerConfig::default());
    assert!(report_spend_by_currency(&l, &DateRange::all(), &utc()).is_empty());
    assert!(report_by_date(&l, Grouping::Day, &utc()).is_empty());
}

#[test]
fn one_day_bucket_with_both_items() {
    for s in [Strategy::Fifo, Strategy::Lifo] {
        let l = case_ledger(s);
        let buckets = report_by_date(&l, Grouping::Day, &utc());
        assert_eq!(buckets.len(), 1);
        let b = &buckets[0];
        assert_eq!(b.bucket, "2023-05-01");
        assert_eq!(b.real_spend.amount, Rational::new(1999, 100));
        let costs: Vec<Rational> = b
            .item_attributions
            .iter()
            .map(|a| a.total_basis.amount.clone())
            .collect();
        assert_eq!(costs, [casestudy::chest_cost(), casestudy::wizards_cost()]);
    }
}

#[test]
fn offset_moves_late_purchase_to_next_day() {
    let mut l = Ledger::new("late", LedgerConfig::default());
    l.apply_event(Event {
        event_id: "p".into(),
        app_id: "late".into(),
        timestamp: Utc.with_ymd_and_hms(2023, 5, 1, 23, 59, 0).unwrap(),
        payload: Payload::RealMoneyPurchase {
            paid: Money::new(Rational::new(499, 100), CurrencyId::real("USD")),
            received: Holding::new(CurrencyId::virtual_in("late", "gems"), 500),
        },
    })
    .unwrap();
    let plus_two = parse_offset("+02:00").unwrap();
    assert_eq!(report_by_date(&l, Grouping::Day, &utc())[0].bucket, "2023-05-01");
    assert_eq!(report_by_date(&l, Grouping::Day, &plus_two)[0].bucket, "2023-05-02");
    assert_eq!(report_by_date(&l, Grouping::Month, &plus_two)[0].bucket, "2023-05");
    // Date ranges are evaluated in local time as well.
    let may2 = parse_date("2023-05-02").unwrap();
    let range = DateRange::new(Some(may2), Some(may2)).unwrap();
    assert_eq!(report_spend_by_currency(&l, &range, &plus_two).len(), 1);
    assert!(report_spend_by_currency(&l, &range, &utc()).is_empty());
}

#[test]
fn invalid_range_and_inputs() {
    let a = parse_date("2023-05-02").unwrap();
    let b = parse_date("2023-05-01").unwrap();
    assert_eq!(
        DateRange::new(Some(a), Some(b)).unwrap_err(),
        ReportError::InvalidDateRange { from: a, to: b }
    );
    assert!(DateRange::new(Some(a), Some(a)).is_ok());
    assert!(parse_date("05/01/2023").is_err());
    for bad in ["2", "+25:00", "+02:60", "0200", "+2:00", "+02:0"] {
        assert!(parse_offset(bad).is_err(), "{bad}");
    }
    assert_eq!(parse_offset("-05:30").unwrap().local_minus_utc(), -(5 * 3600 + 1800));
    assert_eq!(parse_offset("Z").unwrap(), utc());
    assert!("week".parse::<Grouping>().is_err());
}

#[test]
fn document_renders_exact_and_display() {
    let l = case_ledger(Strategy::Fifo);
    let q = ReportQuery {
        grouping: Grouping::Day,
        ..Default::default()
    };
    let doc = ReportDocument::build(&l, &q);
    assert_eq!(doc.total_spend.display, "19.99");
    assert_eq!(doc.buckets.len(), 1);
    let costs: Vec<(&str, &str)> = doc.buckets[0]
        .attributions
        .iter()
        .map(|a| (a.cost.exact.as_str(), a.cost.display.as_str()))
        .collect();
    assert_eq!(costs, [("1999/1000", "1.99"), ("5997/15625", "0.38")]);

    let json: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
    assert_eq!(json["buckets"][0]["real_spend"]["display"], "19.99");
    assert_eq!(json["attributions"][1]["count"], "8");
}

#[test]
fn ungrouped_totals_equal_sum_of_days() {
    let mut events = casestudy::events();
    // Second day: another pack and another chest.
    let next = |h: u32| Utc.with_ymd_and_hms(2023, 5, 2, h, 0, 0).unwrap();
    let gems = CurrencyId::virtual_in(casestudy::APP_ID, "gems");
    events.push(Event {
        event_id: "d2-pack".into(),
        app_id: casestudy::APP_ID.into(),
        timestamp: next(9),
        payload: Payload::RealMoneyPurchase {
            paid: Money::new(Rational::new(499, 100), CurrencyId::real("USD")),
            received: Holding::new(gems.clone(), 500),
        },
    });
    events.push(Event {
        event_id: "d2-chest".into(),
        app_id: casestudy::APP_ID.into(),
        timestamp: next(10),
        payload: Payload::ItemPurchase {
            item_id: "magic_chest".into(),
            count: Quantity::new(1),
            paid_with: vec![Holding::new(gems, 250)],
        },
    });
    let l = Ledger::replay(casestudy::APP_ID, LedgerConfig::default(), &events).unwrap();
    let none = ReportDocument::build(&l, &ReportQuery::default());
    let day = ReportDocument::build(
        &l,
        &ReportQuery {
            grouping: Grouping::Day,
            ..Default::default()
        },
    );
    assert!(none.buckets.is_empty());
    assert_eq!(day.buckets.len(), 2);
    let spend: Rational = day
        .buckets
        .iter()
        .map(|b| Rational::parse(&b.real_spend.exact).unwrap())
        .sum();
    assert_eq!(spend.to_exact_string(), none.total_spend.exact);
    let attributed: Rational = day
        .buckets
        .iter()
        .map(|b| Rational::parse(&b.attributed.exact).unwrap())
        .sum();
    assert_eq!(attributed.to_exact_string(), none.total_attributed.exact);

    let before = parse_date("2022-01-01").unwrap();
    let empty = ReportDocument::build(
        &l,
        &ReportQuery {
            range: DateRange::new(None, Some(before)).unwrap(),
            grouping: Grouping::Day,
            ..Default::default()
        },
    );
    assert!(empty.buckets.is_empty());
    assert!(empty.currencies.is_empty());
}

#[test]
fn query_from_text() {
    let q = ReportQuery::parse(Some("2023-05-01"), None, Some("day"), Some("+02:00")).unwrap();
    assert_eq!(q.grouping, Grouping::Day);
    assert_eq!(q.offset.local_minus_utc(), 7200);
    assert_eq!(ReportQuery::parse(None, None, None, None).unwrap(), ReportQuery::default());
    let codes: Vec<&str> = [
        ReportQuery::parse(Some("2023-05-02"), Some("2023-05-01"), None, None),
        ReportQuery::parse(Some("yesterday"), None, None, None),
        ReportQuery::parse(None, None, Some("week"), None),
        ReportQuery::parse(None, None, None, Some("CET")),
    ]
    .iter()
    .map(|r| r.as_ref().unwrap_err().code())
    .collect();
    assert_eq!(codes, ["invalid_date_range", "bad_date", "bad_grouping", "bad_offset"]);
}

/// The shipped demo log is the canonical serialization of the case study.
/// Run with `GEMTRAIL_BLESS=1` to regenerate it.
#[test]
fn demo_log_matches_case_study() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../demo/casestudy.jsonl");
    let want = gemtrail_core::ingest::to_jsonl(&casestudy::events());
    if std::env::var_os("GEMTRAIL_BLESS").is_some() {
        std::fs::write(&path, &want).unwrap();
    }
    assert_eq!(std::fs::read_to_string(&path).unwrap(), want);
}
