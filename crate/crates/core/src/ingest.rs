//! JSON Lines event log: parsing, canonical serialization and batch ingest.
//!
//! One event per line, schema version 1:
//!
//! ```text
//! {"schema_version":1,"type":"real_purchase","event_id":"e1","app_id":"clash-royale",
//!  "ts":"2023-05-01T10:00:00Z","paid":{"amount":"19.99","currency":"USD"},
//!  "received":{"code":"gems","units":2500}}
//! ```
//!
//! Money amounts are decimal strings and are parsed straight to exact
//! rationals. Units and counts are JSON integers or digit strings.
//! Timestamps are RFC 3339 in UTC at second precision.

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Serialize, Serializer};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::amount::{Quantity, Rational};
use crate::currency::{CurrencyId, Money};
use crate::error::LedgerError;
use crate::event::{Event, EventKind, Holding, Payload, Timestamp};
use crate::ledger::Ledger;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("missing field {0:?}")]
    MissingField(String),
    #[error("field {name:?} must be {expected}")]
    WrongType { name: String, expected: &'static str },
    #[error("bad timestamp {0:?} (expected RFC 3339 UTC with second precision)")]
    BadTimestamp(String),
    #[error("bad decimal in {name:?}: {value}")]
    BadDecimal { name: String, value: String },
    #[error("bad quantity in {name:?}: {value}")]
    BadQuantity { name: String, value: String },
    #[error("unknown event type {0:?}")]
    UnknownEventType(String),
    #[error("unsupported schema version {0}")]
    UnsupportedSchemaVersion(String),
}

impl ParseError {
    pub fn code(&self) -> &'static str {
        match self {
            ParseError::MalformedJson(_) => "malformed_json",
            ParseError::MissingField(_) => "missing_field",
            ParseError::WrongType { .. } => "wrong_type",
            ParseError::BadTimestamp(_) => "bad_timestamp",
            ParseError::BadDecimal { .. } => "bad_decimal",
            ParseError::BadQuantity { .. } => "bad_quantity",
            ParseError::UnknownEventType(_) => "unknown_event_type",
            ParseError::UnsupportedSchemaVersion(_) => "unsupported_schema_version",
        }
    }
}

/// Why a single line was not applied.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

impl LineError {
    pub fn code(&self) -> &'static str {
        match self {
            LineError::Parse(e) => e.code(),
            LineError::Ledger(e) => e.code(),
        }
    }
}

/// A parsed, structurally valid log line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRecord {
    pub schema_version: u64,
    pub event: Event,
}

impl EventRecord {
    pub fn new(event: Event) -> Self {
        EventRecord {
            schema_version: SCHEMA_VERSION,
            event,
        }
    }

    /// Canonical single-line JSON (no trailing newline).
    pub fn to_line(&self) -> String {
        serde_json::to_string(&WireLine::new(self.schema_version, &self.event, true))
            .expect("event serializes")
    }
}

pub fn format_timestamp(ts: &Timestamp) -> String {
    ts.to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn parse_timestamp(text: &str) -> Result<Timestamp, ParseError> {
    let bad = || ParseError::BadTimestamp(text.to_string());
    let parsed = DateTime::parse_from_rfc3339(text).map_err(|_| bad())?;
    if parsed.offset().local_minus_utc() != 0 || parsed.timestamp_subsec_nanos() != 0 {
        return Err(bad());
    }
    Ok(parsed.with_timezone(&Utc))
}

/// Parses and structurally validates one log line.
///
/// Lines without an `event_id` get a deterministic id derived from the
/// canonical form of the rest of the record.
pub fn parse_event_line(text: &str) -> Result<EventRecord, ParseError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| ParseError::MalformedJson(e.to_string()))?;
    parse_event_value(&value)
}

pub fn parse_event_value(value: &Value) -> Result<EventRecord, ParseError> {
    let obj = value.as_object().ok_or_else(|| ParseError::WrongType {
        name: "<line>".into(),
        expected: "a JSON object",
    })?;
    let fields = Fields { obj, prefix: "" };

    let schema_version = match obj.get("schema_version") {
        None => SCHEMA_VERSION,
        Some(v) => match v.as_u64() {
            Some(SCHEMA_VERSION) => SCHEMA_VERSION,
            _ => return Err(ParseError::UnsupportedSchemaVersion(v.to_string())),
        },
    };
    let kind_name = fields.string("type")?;
    let kind = EventKind::from_wire_name(kind_name)
        .ok_or_else(|| ParseError::UnknownEventType(kind_name.to_string()))?;
    let app_id = fields.string("app_id")?.to_string();
    let timestamp = parse_timestamp(fields.string("ts")?)?;

    let payload = match kind {
        EventKind::RealMoneyPurchase => {
            let paid = fields.object("paid")?;
            let amount_text = paid.string("amount")?;
            let amount = Rational::parse_decimal(amount_text).map_err(|_| ParseError::BadDecimal {
                name: paid.name("amount"),
                value: amount_text.to_string(),
            })?;
            let code = paid.string("currency")?;
            let currency = if CurrencyId::looks_real(code) {
                CurrencyId::real(code)
            } else {
                CurrencyId::virtual_in(app_id.clone(), code)
            };
            Payload::RealMoneyPurchase {
                paid: Money::new(amount, currency),
                received: fields.object("received")?.holding(&app_id)?,
            }
        }
        EventKind::Exchange => Payload::Exchange {
            spent: fields.object("spent")?.holding(&app_id)?,
            received: fields.object("received")?.holding(&app_id)?,
        },
        EventKind::ItemPurchase => {
            let list = fields.array("paid_with")?;
            let mut paid_with = Vec::with_capacity(list.len());
            for (i, v) in list.iter().enumerate() {
                let name = format!("paid_with[{i}]");
                let obj = v.as_object().ok_or_else(|| ParseError::WrongType {
                    name: name.clone(),
                    expected: "an object",
                })?;
                let entry = Fields { obj, prefix: &name };
                paid_with.push(entry.holding(&app_id)?);
            }
            Payload::ItemPurchase {
                item_id: fields.string("item_id")?.to_string(),
                count: fields.quantity("count")?,
                paid_with,
            }
        }
        EventKind::ItemSale => Payload::ItemSale {
            item_id: fields.string("item_id")?.to_string(),
            count: fields.quantity("count")?,
            proceeds: fields.object("proceeds")?.holding(&app_id)?,
        },
        EventKind::Grant => Payload::Grant {
            received: fields.object("received")?.holding(&app_id)?,
            reason: match obj.get("reason") {
                None | Some(Value::Null) => String::new(),
                Some(_) => fields.string("reason")?.to_string(),
            },
        },
    };

    let mut event = Event {
        event_id: String::new(),
        app_id,
        timestamp,
        payload,
    };
    event.event_id = match obj.get("event_id") {
        None | Some(Value::Null) => derived_event_id(schema_version, &event),
        Some(_) => fields.string("event_id")?.to_string(),
    };
    Ok(EventRecord {
        schema_version,
        event,
    })
}

fn derived_event_id(schema_version: u64, event: &Event) -> String {
    let canonical = serde_json::to_string(&WireLine::new(schema_version, event, false))
        .expect("event serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    format!("h-{}", hex::encode(&digest[..12]))
}

struct Fields<'a> {
    obj: &'a Map<String, Value>,
    prefix: &'a str,
}

impl<'a> Fields<'a> {
    fn name(&self, key: &str) -> String {
        if self.prefix.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.prefix)
        }
    }

    fn get(&self, key: &str) -> Result<&'a Value, ParseError> {
        match self.obj.get(key) {
            None | Some(Value::Null) => Err(ParseError::MissingField(self.name(key))),
            Some(v) => Ok(v),
        }
    }

    fn string(&self, key: &str) -> Result<&'a str, ParseError> {
        self.get(key)?.as_str().ok_or_else(|| ParseError::WrongType {
            name: self.name(key),
            expected: "a string",
        })
    }

    fn array(&self, key: &str) -> Result<&'a Vec<Value>, ParseError> {
        self.get(key)?.as_array().ok_or_else(|| ParseError::WrongType {
            name: self.name(key),
            expected: "an array",
        })
    }

    fn object(&self, key: &'a str) -> Result<Fields<'a>, ParseError> {
        let obj = self.get(key)?.as_object().ok_or_else(|| ParseError::WrongType {
            name: self.name(key),
            expected: "an object",
        })?;
        Ok(Fields { obj, prefix: key })
    }

    fn quantity(&self, key: &str) -> Result<Quantity, ParseError> {
        let v = self.get(key)?;
        let bad = || ParseError::BadQuantity {
            name: self.name(key),
            value: v.to_string(),
        };
        match v {
            Value::Number(n) => n.as_u64().map(Quantity::new).ok_or_else(bad),
            Value::String(s) => Quantity::parse(s).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }

    fn holding(&self, app_id: &str) -> Result<Holding, ParseError> {
        let code = self.string("code")?;
        let currency = if CurrencyId::looks_real(code) {
            CurrencyId::real(code)
        } else {
            CurrencyId::virtual_in(app_id, code)
        };
        Ok(Holding {
            currency,
            units: self.quantity("units")?,
        })
    }
}

struct WireUnits<'a>(&'a Quantity);

impl Serialize for WireUnits<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.0.to_u64() {
            Some(n) => serializer.serialize_u64(n),
            None => serializer.serialize_str(&self.0.to_string()),
        }
    }
}

#[derive(Serialize)]
struct WireHolding<'a> {
    code: &'a str,
    units: WireUnits<'a>,
}

impl<'a> From<&'a Holding> for WireHolding<'a> {
    fn from(h: &'a Holding) -> Self {
        WireHolding {
            code: &h.currency.code,
            units: WireUnits(&h.units),
        }
    }
}

#[derive(Serialize)]
struct WireMoney<'a> {
    amount: String,
    currency: &'a str,
}

#[derive(Serialize)]
struct WireLine<'a> {
    schema_version: u64,
    #[serde(rename = "type")]
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    event_id: Option<&'a str>,
    app_id: &'a str,
    ts: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    item_id: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    count: Option<WireUnits<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    paid: Option<WireMoney<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spent: Option<WireHolding<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    paid_with: Option<Vec<WireHolding<'a>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    received: Option<WireHolding<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    proceeds: Option<WireHolding<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<&'a str>,
}

impl<'a> WireLine<'a> {
    fn new(schema_version: u64, event: &'a Event, with_id: bool) -> Self {
        let mut line = WireLine {
            schema_version,
            kind: event.payload.kind().wire_name(),
            event_id: with_id.then_some(event.event_id.as_str()),
            app_id: &event.app_id,
            ts: format_timestamp(&event.timestamp),
            item_id: None,
            count: None,
            paid: None,
            spent: None,
            paid_with: None,
            received: None,
            proceeds: None,
            reason: None,
        };
        match &event.payload {
            Payload::RealMoneyPurchase { paid, received } => {
                line.paid = Some(WireMoney {
                    amount: paid.amount.to_plain_string(),
                    currency: &paid.currency.code,
                });
                line.received = Some(received.into());
            }
            Payload::Exchange { spent, received } => {
                line.spent = Some(spent.into());
                line.received = Some(received.into());
            }
            Payload::ItemPurchase {
                item_id,
                count,
                paid_with,
            } => {
                line.item_id = Some(item_id);
                line.count = Some(WireUnits(count));
                line.paid_with = Some(paid_with.iter().map(WireHolding::from).collect());
            }
            Payload::ItemSale {
                item_id,
                count,
                proceeds,
            } => {
                line.item_id = Some(item_id);
                line.count = Some(WireUnits(count));
                line.proceeds = Some(proceeds.into());
            }
            Payload::Grant { received, reason } => {
                line.received = Some(received.into());
                line.reason = Some(reason);
            }
        }
        line
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub line_no: usize,
    pub code: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
}

impl IngestReport {
    pub fn total(&self) -> usize {
        self.accepted + self.rejected.len()
    }

    pub fn merge(&mut self, other: IngestReport) {
        self.accepted += other.accepted;
        self.rejected.extend(other.rejected);
        self.rejected.sort_by_key(|r| r.line_no);
    }

    /// `"accepted 6, rejected 0"`, with rejection codes appended when any.
    pub fn summary(&self) -> String {
        let mut s = format!("accepted {}, rejected {}", self.accepted, self.rejected.len());
        if !self.rejected.is_empty() {
            let mut codes: Vec<&str> = self
                .rejected
                .iter()
                .map(|r| match r.code.as_str() {
                    "duplicate_event_id" => "duplicate",
                    other => other,
                })
                .collect();
            codes.sort_unstable();
            codes.dedup();
            s.push_str(&format!(" ({})", codes.join(", ")));
        }
        s
    }
}

/// A line that parsed, with its 1-based position in the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedLine {
    pub line_no: usize,
    pub record: EventRecord,
}

/// Parses every non-blank line, collecting parse failures as rejections.
pub fn parse_lines<I, S>(lines: I) -> (Vec<ParsedLine>, Vec<Rejection>)
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut parsed = Vec::new();
    let mut rejected = Vec::new();
    for (i, line) in lines.into_iter().enumerate() {
        let text = line.as_ref();
        if text.trim().is_empty() {
            continue;
        }
        match parse_event_line(text) {
            Ok(record) => parsed.push(ParsedLine {
                line_no: i + 1,
                record,
            }),
            Err(e) => rejected.push(Rejection {
                line_no: i + 1,
                code: e.code().to_string(),
                reason: e.to_string(),
            }),
        }
    }
    (parsed, rejected)
}

/// Applies already-parsed lines in timestamp order (input order breaks ties).
///
/// Returns the report and the events that were applied, in apply order.
pub fn apply_parsed(
    mut parsed: Vec<ParsedLine>,
    ledger: &mut Ledger,
) -> (IngestReport, Vec<Event>) {
    parsed.sort_by_key(|p| (p.record.event.timestamp, p.line_no));
    let mut report = IngestReport::default();
    let mut applied = Vec::new();
    for p in parsed {
        let event = p.record.event;
        match ledger.apply_event(event.clone()) {
            Ok(()) => {
                report.accepted += 1;
                applied.push(event);
            }
            Err(e) => report.rejected.push(Rejection {
                line_no: p.line_no,
                code: e.code().to_string(),
                reason: e.to_string(),
            }),
        }
    }
    (report, applied)
}

/// Ingests a batch of log lines into `ledger`.
///
/// Failures are isolated per line and reported; they never abort the batch.
pub fn ingest_log<I, S>(lines: I, ledger: &mut Ledger) -> IngestReport
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    ingest_log_detailed(lines, ledger).0
}

pub fn ingest_log_detailed<I, S>(lines: I, ledger: &mut Ledger) -> (IngestReport, Vec<Event>)
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let (parsed, parse_rejections) = parse_lines(lines);
    let (mut report, applied) = apply_parsed(parsed, ledger);
    report.rejected.extend(parse_rejections);
    report.rejected.sort_by_key(|r| r.line_no);
    (report, applied)
}

/// Canonical JSONL for a sequence of events, one line each with `\n`.
pub fn to_jsonl<'a>(events: impl IntoIterator<Item = &'a Event>) -> String {
    let mut out = String::new();
    for event in events {
        out.push_str(&EventRecord::new(event.clone()).to_line());
        out.push('\n');
    }
    out
}
