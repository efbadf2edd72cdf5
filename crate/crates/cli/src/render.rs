//! Human-readable and CSV renderings of report and trace documents.
//!
//! Both are built from the same documents the JSON output serializes, so the
//! three formats cannot disagree on values.

use std::fmt::Write as _;

use gemtrail_core::currency::currency_symbol;
use gemtrail_core::report::{AttributionView, MoneyView};
use gemtrail_core::{ReportDocument, TraceDocument};

fn money(symbol: &str, m: &MoneyView) -> String {
    format!("{symbol}{}", m.display)
}

fn item_label(a: &AttributionView) -> String {
    if a.count.to_string() == "1" {
        a.item_id.clone()
    } else {
        format!("{}× {}", a.count, a.item_id)
    }
}

fn item_lines(out: &mut String, symbol: &str, items: &[AttributionView], indent: &str) {
    let width = items.iter().map(|a| item_label(a).chars().count()).max().unwrap_or(0);
    for a in items {
        let label = item_label(a);
        let pad = width - label.chars().count();
        let _ = writeln!(
            out,
            "{indent}{label}{}  {:>9}  {}",
            " ".repeat(pad),
            money(symbol, &a.cost),
            a.id
        );
    }
}

pub fn report_table(doc: &ReportDocument) -> String {
    let symbol = currency_symbol(&doc.report_currency);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}  ({}, {}, tz {})",
        doc.app_id, doc.report_currency, doc.strategy, doc.query.tz
    );
    if doc.query.from.is_some() || doc.query.to.is_some() {
        let _ = writeln!(
            out,
            "range {} .. {}",
            doc.query.from.as_deref().unwrap_or("start"),
            doc.query.to.as_deref().unwrap_or("end")
        );
    }
    out.push('\n');
    if doc.currencies.is_empty() && doc.attributions.is_empty() {
        out.push_str("nothing in range\n");
        return out;
    }
    if !doc.currencies.is_empty() {
        let width = doc.currencies.iter().map(|r| r.currency.len()).max().unwrap_or(0).max(8);
        let _ = writeln!(out, "{:<width$}  {:>10}  {:>10}", "currency", "spent", "bought");
        for r in &doc.currencies {
            let _ = writeln!(
                out,
                "{:<width$}  {:>10}  {:>10}",
                r.currency,
                money(symbol, &r.real_spend),
                r.virtual_bought.to_string()
            );
        }
        out.push('\n');
    }
    if doc.buckets.is_empty() {
        if !doc.attributions.is_empty() {
            out.push_str("items\n");
            item_lines(&mut out, symbol, &doc.attributions, "  ");
            out.push('\n');
        }
    } else {
        for b in &doc.buckets {
            let _ = writeln!(
                out,
                "{}  {} spent, {} attributed",
                b.bucket,
                money(symbol, &b.real_spend),
                money(symbol, &b.attributed)
            );
            item_lines(&mut out, symbol, &b.attributions, "  ");
            out.push('\n');
        }
    }
    let _ = writeln!(
        out,
        "total  {} spent, {} attributed",
        money(symbol, &doc.total_spend),
        money(symbol, &doc.total_attributed)
    );
    out
}

fn record(w: &mut csv::Writer<Vec<u8>>, fields: [&str; 6]) {
    w.write_record(fields).expect("writing to memory");
}

fn attribution_record(w: &mut csv::Writer<Vec<u8>>, bucket: &str, a: &AttributionView) {
    let count = a.count.to_string();
    record(w, ["attribution", bucket, &a.id, &a.item_id, &count, &a.cost.display]);
}

/// One record per value; amounts are display-rounded.
pub fn report_csv(doc: &ReportDocument) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    record(&mut w, ["kind", "bucket", "id", "item_id", "count", "amount"]);
    for r in &doc.currencies {
        let bought = r.virtual_bought.to_string();
        record(
            &mut w,
            ["currency_spend", "", &r.currency, "", &bought, &r.real_spend.display],
        );
    }
    if doc.buckets.is_empty() {
        for a in &doc.attributions {
            attribution_record(&mut w, "", a);
        }
    }
    for b in &doc.buckets {
        record(&mut w, ["bucket_spend", &b.bucket, "", "", "", &b.real_spend.display]);
        record(&mut w, ["bucket_attributed", &b.bucket, "", "", "", &b.attributed.display]);
        for a in &b.attributions {
            attribution_record(&mut w, &b.bucket, a);
        }
    }
    record(&mut w, ["total_spend", "", "", "", "", &doc.total_spend.display]);
    record(&mut w, ["total_attributed", "", "", "", "", &doc.total_attributed.display]);
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

pub fn trace_text(doc: &TraceDocument, report_currency: &str) -> String {
    let symbol = currency_symbol(report_currency);
    let mut out = String::new();
    let label = if doc.count.to_string() == "1" {
        doc.item_id.clone()
    } else {
        format!("{}× {}", doc.count, doc.item_id)
    };
    let _ = writeln!(
        out,
        "{} ({}): {} (exact {})",
        label,
        doc.attribution_id,
        money(symbol, &doc.cost),
        doc.cost.exact
    );
    for (i, s) in doc.steps.iter().enumerate() {
        let _ = writeln!(
            out,
            "  {}. × {:<12} running {:<14} {}",
            i + 1,
            s.rate_text,
            s.running_product.exact,
            s.description
        );
    }
    let expression = match doc.rendered_arithmetic.rsplit_once(" = ") {
        Some((expr, _)) => expr,
        None => &doc.rendered_arithmetic,
    };
    let _ = writeln!(out, "{expression} = {}", money(symbol, &doc.cost));
    out
}
