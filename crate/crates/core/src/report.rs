//! Spend reports: per currency and per calendar date.
//!
//! Dates are local calendar dates under a fixed UTC offset. Real spend only
//! counts real-money purchases, so currency bought with other currency is
//! never counted twice.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{FixedOffset, NaiveDate};
use serde::Serialize;
use thiserror::Error;

use crate::amount::{Quantity, Rational};
use crate::currency::{CurrencyId, Money};
use crate::event::{Payload, Timestamp};
use crate::ledger::{Attribution, Ledger};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("invalid date range: {from} is after {to}")]
    InvalidDateRange { from: NaiveDate, to: NaiveDate },
    #[error("invalid date {0:?} (expected YYYY-MM-DD)")]
    BadDate(String),
    #[error("invalid UTC offset {0:?} (expected e.g. +02:00)")]
    BadOffset(String),
    #[error("invalid grouping {0:?} (expected none, day or month)")]
    BadGrouping(String),
}

impl ReportError {
    pub fn code(&self) -> &'static str {
        match self {
            ReportError::InvalidDateRange { .. } => "invalid_date_range",
            ReportError::BadDate(_) => "bad_date",
            ReportError::BadOffset(_) => "bad_offset",
            ReportError::BadGrouping(_) => "bad_grouping",
        }
    }
}

/// Inclusive range of local calendar dates; open ends are unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DateRange {
    from: Option<NaiveDate>,
    to: Option<NaiveDate>,
}

impl DateRange {
    pub fn new(from: Option<NaiveDate>, to: Option<NaiveDate>) -> Result<Self, ReportError> {
        if let (Some(f), Some(t)) = (from, to) {
            if f > t {
                return Err(ReportError::InvalidDateRange { from: f, to: t });
            }
        }
        Ok(DateRange { from, to })
    }

    pub fn all() -> Self {
        DateRange::default()
    }

    pub fn from(&self) -> Option<NaiveDate> {
        self.from
    }

    pub fn to(&self) -> Option<NaiveDate> {
        self.to
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.from.is_none_or(|f| date >= f) && self.to.is_none_or(|t| date <= t)
    }
}

pub fn parse_date(text: &str) -> Result<NaiveDate, ReportError> {
    NaiveDate::parse_from_str(text, "%Y-%m-%d").map_err(|_| ReportError::BadDate(text.to_string()))
}

/// Parses `Z`, `UTC`, `+HH:MM`, `-HH:MM`, `+HHMM` or `+HH`.
pub fn parse_offset(text: &str) -> Result<FixedOffset, ReportError> {
    let bad = || ReportError::BadOffset(text.to_string());
    let t = text.trim();
    if t.eq_ignore_ascii_case("z") || t.eq_ignore_ascii_case("utc") {
        return Ok(FixedOffset::east_opt(0).unwrap());
    }
    let (sign, rest) = match t.as_bytes().first() {
        Some(b'+') => (1, &t[1..]),
        Some(b'-') => (-1, &t[1..]),
        _ => return Err(bad()),
    };
    let digits: String = rest.chars().filter(|c| *c != ':').collect();
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let (hh, mm) = match digits.len() {
        2 => (&digits[..2], "00"),
        4 => (&digits[..2], &digits[2..]),
        _ => return Err(bad()),
    };
    if rest.contains(':') && rest.len() != 5 {
        return Err(bad());
    }
    let hours: i32 = hh.parse().map_err(|_| bad())?;
    let minutes: i32 = mm.parse().map_err(|_| bad())?;
    if hours > 23 || minutes > 59 {
        return Err(bad());
    }
    FixedOffset::east_opt(sign * (hours * 3600 + minutes * 60)).ok_or_else(bad)
}

pub fn format_offset(offset: &FixedOffset) -> String {
    let secs = offset.local_minus_utc();
    let sign = if secs < 0 { '-' } else { '+' };
    let secs = secs.abs();
    format!("{sign}{:02}:{:02}", secs / 3600, (secs % 3600) / 60)
}

pub fn local_date(ts: &Timestamp, offset: &FixedOffset) -> NaiveDate {
    ts.with_timezone(offset).date_naive()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Grouping {
    #[default]
    None,
    Day,
    Month,
}

impl Grouping {
    fn bucket(self, date: NaiveDate) -> String {
        match self {
            Grouping::None => String::new(),
            Grouping::Day => date.format("%Y-%m-%d").to_string(),
            Grouping::Month => date.format("%Y-%m").to_string(),
        }
    }
}

impl FromStr for Grouping {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "" => Ok(Grouping::None),
            "day" => Ok(Grouping::Day),
            "month" => Ok(Grouping::Month),
            _ => Err(ReportError::BadGrouping(s.to_string())),
        }
    }
}

impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Grouping::None => "none",
            Grouping::Day => "day",
            Grouping::Month => "month",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportQuery {
    pub range: DateRange,
    pub grouping: Grouping,
    pub offset: FixedOffset,
}

impl Default for ReportQuery {
    fn default() -> Self {
        ReportQuery {
            range: DateRange::all(),
            grouping: Grouping::None,
            offset: FixedOffset::east_opt(0).unwrap(),
        }
    }
}

impl ReportQuery {
    /// Builds a query from optional textual parameters, as given on a
    /// command line or in a URL query string.
    pub fn parse(
        from: Option<&str>,
        to: Option<&str>,
        group: Option<&str>,
        tz: Option<&str>,
    ) -> Result<Self, ReportError> {
        let from = from.map(parse_date).transpose()?;
        let to = to.map(parse_date).transpose()?;
        Ok(ReportQuery {
            range: DateRange::new(from, to)?,
            grouping: group.map(str::parse).transpose()?.unwrap_or_default(),
            offset: match tz {
                Some(tz) => parse_offset(tz)?,
                None => FixedOffset::east_opt(0).unwrap(),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpendRow {
    pub app_id: String,
    pub currency: CurrencyId,
    pub real_spend: Money,
    /// Units acquired by real-money purchase or exchange.
    pub virtual_bought: Quantity,
}

/// Real money spent per virtual currency within `range`, ordered by
/// (app, currency code).
pub fn report_spend_by_currency(
    ledger: &Ledger,
    range: &DateRange,
    offset: &FixedOffset,
) -> Vec<SpendRow> {
    let mut rows: BTreeMap<(String, String), SpendRow> = BTreeMap::new();
    for event in ledger.events() {
        if !range.contains(local_date(&event.timestamp, offset)) {
            continue;
        }
        let (received, paid) = match &event.payload {
            Payload::RealMoneyPurchase { paid, received } => (received, Some(&paid.amount)),
            Payload::Exchange { received, .. } => (received, None),
            _ => continue,
        };
        let key = (received.currency.app_id.clone(), received.currency.code.clone());
        let row = rows.entry(key).or_insert_with(|| SpendRow {
            app_id: ledger.app_id().to_string(),
            currency: received.currency.clone(),
            real_spend: Money::zero(ledger.report_currency().clone()),
            virtual_bought: Quantity::zero(),
        });
        if let Some(amount) = paid {
            row.real_spend.amount += amount;
        }
        row.virtual_bought += &received.units;
    }
    rows.into_values().collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DateBucket<'a> {
    pub bucket: String,
    pub real_spend: Money,
    pub item_attributions: Vec<&'a Attribution>,
}

impl DateBucket<'_> {
    pub fn attributed(&self) -> Rational {
        self.item_attributions
            .iter()
            .map(|a| &a.total_basis.amount)
            .sum()
    }
}

/// Real spend and item attributions bucketed by local day or month.
pub fn report_by_date<'a>(
    ledger: &'a Ledger,
    grouping: Grouping,
    offset: &FixedOffset,
) -> Vec<DateBucket<'a>> {
    report_by_date_in(ledger, &DateRange::all(), grouping, offset)
}

/// Like [`report_by_date`] restricted to `range`. Buckets appear for dates
/// with at least one real-money purchase or item purchase, ascending.
pub fn report_by_date_in<'a>(
    ledger: &'a Ledger,
    range: &DateRange,
    grouping: Grouping,
    offset: &FixedOffset,
) -> Vec<DateBucket<'a>> {
    let mut buckets: BTreeMap<String, DateBucket<'a>> = BTreeMap::new();
    for event in ledger.events() {
        let date = local_date(&event.timestamp, offset);
        if !range.contains(date) {
            continue;
        }
        match &event.payload {
            Payload::RealMoneyPurchase { paid, .. } => {
                bucket_entry(&mut buckets, ledger, grouping.bucket(date)).real_spend.amount +=
                    &paid.amount;
            }
            Payload::ItemPurchase { .. } => {
                let attribution = ledger
                    .attribution(&event.event_id)
                    .expect("applied item purchases are attributed");
                bucket_entry(&mut buckets, ledger, grouping.bucket(date))
                    .item_attributions
                    .push(attribution);
            }
            _ => {}
        }
    }
    buckets.into_values().collect()
}

fn bucket_entry<'m, 'a>(
    buckets: &'m mut BTreeMap<String, DateBucket<'a>>,
    ledger: &Ledger,
    key: String,
) -> &'m mut DateBucket<'a> {
    buckets.entry(key.clone()).or_insert_with(|| DateBucket {
        bucket: key,
        real_spend: Money::zero(ledger.report_currency().clone()),
        item_attributions: Vec::new(),
    })
}

/// A money value as both an exact fraction and a two-decimal display string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MoneyView {
    pub exact: String,
    pub display: String,
}

impl From<&Rational> for MoneyView {
    fn from(r: &Rational) -> Self {
        MoneyView {
            exact: r.to_exact_string(),
            display: r.to_display(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryView {
    pub from: Option<String>,
    pub to: Option<String>,
    pub group: String,
    pub tz: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurrencyRowView {
    pub app_id: String,
    pub currency: String,
    pub real_spend: MoneyView,
    pub virtual_bought: Quantity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttributionView {
    pub id: String,
    pub item_id: String,
    pub count: Quantity,
    pub timestamp: String,
    pub cost: MoneyView,
    pub unit_cost: MoneyView,
}

impl From<&Attribution> for AttributionView {
    fn from(a: &Attribution) -> Self {
        AttributionView {
            id: a.event_id.clone(),
            item_id: a.item_id.clone(),
            count: a.count.clone(),
            timestamp: crate::ingest::format_timestamp(&a.timestamp),
            cost: MoneyView::from(&a.total_basis.amount),
            unit_cost: MoneyView::from(&a.unit_cost()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BucketView {
    pub bucket: String,
    pub real_spend: MoneyView,
    pub attributed: MoneyView,
    pub attributions: Vec<AttributionView>,
}

/// Machine-readable report shared by the CLI and the HTTP service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportDocument {
    pub app_id: String,
    pub report_currency: String,
    pub strategy: String,
    pub query: QueryView,
    pub total_spend: MoneyView,
    pub total_attributed: MoneyView,
    pub currencies: Vec<CurrencyRowView>,
    pub attributions: Vec<AttributionView>,
    pub buckets: Vec<BucketView>,
}

impl ReportDocument {
    pub fn build(ledger: &Ledger, query: &ReportQuery) -> Self {
        let rows = report_spend_by_currency(ledger, &query.range, &query.offset);
        let total_spend: Rational = rows.iter().map(|r| &r.real_spend.amount).sum();
        let in_range: Vec<&Attribution> = ledger
            .attributions()
            .iter()
            .filter(|a| query.range.contains(local_date(&a.timestamp, &query.offset)))
            .collect();
        let total_attributed: Rational = in_range.iter().map(|a| &a.total_basis.amount).sum();
        let buckets = match query.grouping {
            Grouping::None => Vec::new(),
            g => report_by_date_in(ledger, &query.range, g, &query.offset)
                .into_iter()
                .map(|b| BucketView {
                    real_spend: MoneyView::from(&b.real_spend.amount),
                    attributed: MoneyView::from(&b.attributed()),
                    attributions: b.item_attributions.iter().map(|a| (*a).into()).collect(),
                    bucket: b.bucket,
                })
                .collect(),
        };
        ReportDocument {
            app_id: ledger.app_id().to_string(),
            report_currency: ledger.report_currency().code.clone(),
            strategy: ledger.strategy().to_string(),
            query: QueryView {
                from: query.range.from().map(|d| d.to_string()),
                to: query.range.to().map(|d| d.to_string()),
                group: query.grouping.to_string(),
                tz: format_offset(&query.offset),
            },
            total_spend: MoneyView::from(&total_spend),
            total_attributed: MoneyView::from(&total_attributed),
            currencies: rows
                .iter()
                .map(|r| CurrencyRowView {
                    app_id: r.app_id.clone(),
                    currency: r.currency.code.clone(),
                    real_spend: MoneyView::from(&r.real_spend.amount),
                    virtual_bought: r.virtual_bought.clone(),
                })
                .collect(),
            attributions: in_range.into_iter().map(AttributionView::from).collect(),
            buckets,
        }
    }

    /// Pretty JSON with a trailing newline; byte-stable for equal inputs.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
