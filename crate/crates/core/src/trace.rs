//! Step-by-step derivations of attributions.
//!
//! Each consumed lot gets a [`TraceBranch`] that walks from the item back to
//! real money. The first hop is the share of the lot that was taken
//! (`250/2500`). A lot bought with money then contributes the amount paid
//! (`19.99`). A lot obtained by exchange contributes the units spent on it
//! (`60`) followed by the per-unit cost of the spent currency (`19.99/2500`),
//! recursing while that currency itself came from a single-source exchange.
//! The product of a branch's rates is exactly the branch's basis.

use serde::Serialize;

use crate::amount::{Quantity, Rational};
use crate::currency::{CurrencyId, Money};
use crate::error::LedgerError;
use crate::ledger::{Attribution, Ledger, LotOrigin, LotRecord};
use crate::lot::Consumption;
use crate::report::MoneyView;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub description: String,
    pub rate: Rational,
    /// Rate as it appears in the arithmetic line, e.g. `"250/2500"`.
    pub rate_text: String,
    pub running_product: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceBranch {
    pub lot_id: String,
    pub currency: String,
    pub taken: Quantity,
    pub basis: Rational,
    pub steps: Vec<TraceStep>,
    /// Product form of the branch, e.g. `"250/2500 × 19.99"`.
    pub expression: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub attribution_id: String,
    pub item_id: String,
    pub count: Quantity,
    pub total_basis: Money,
    pub branches: Vec<TraceBranch>,
    /// Full arithmetic line, e.g. `"250/2500 × 19.99 = 1.99"`.
    pub rendered_arithmetic: String,
}

impl Trace {
    /// All steps, branch by branch.
    pub fn steps(&self) -> impl Iterator<Item = &TraceStep> {
        self.branches.iter().flat_map(|b| b.steps.iter())
    }

    /// Rates of a single-branch trace, in walk order.
    pub fn rates(&self) -> Vec<Rational> {
        self.steps().map(|s| s.rate.clone()).collect()
    }

    pub fn expression(&self) -> String {
        match self.branches.as_slice() {
            [one] => one.expression.clone(),
            many => many
                .iter()
                .map(|b| format!("({})", b.expression))
                .collect::<Vec<_>>()
                .join(" + "),
        }
    }
}

pub fn build_trace(ledger: &Ledger, attribution_id: &str) -> Result<Trace, LedgerError> {
    let attribution = ledger
        .attribution(attribution_id)
        .ok_or_else(|| LedgerError::UnknownAttribution(attribution_id.to_string()))?;
    Ok(trace_attribution(ledger, attribution))
}

pub fn trace_attribution(ledger: &Ledger, attribution: &Attribution) -> Trace {
    let branches: Vec<TraceBranch> = attribution
        .consumptions
        .iter()
        .map(|c| branch(ledger, attribution, c))
        .collect();
    let mut trace = Trace {
        attribution_id: attribution.event_id.clone(),
        item_id: attribution.item_id.clone(),
        count: attribution.count.clone(),
        total_basis: attribution.total_basis.clone(),
        branches,
        rendered_arithmetic: String::new(),
    };
    trace.rendered_arithmetic = format!(
        "{} = {}",
        trace.expression(),
        attribution.total_basis.amount.to_display()
    );
    trace
}

/// Machine-readable trace shared by the CLI and the HTTP service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceDocument {
    pub app_id: String,
    pub attribution_id: String,
    pub item_id: String,
    pub count: Quantity,
    pub cost: MoneyView,
    pub steps: Vec<StepView>,
    pub branches: Vec<TraceBranch>,
    pub rendered_arithmetic: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepView {
    pub lot_id: String,
    pub description: String,
    pub rate: String,
    pub rate_text: String,
    pub running_product: MoneyView,
}

impl TraceDocument {
    pub fn build(ledger: &Ledger, trace: &Trace) -> Self {
        let steps = trace
            .branches
            .iter()
            .flat_map(|b| {
                b.steps.iter().map(move |s| StepView {
                    lot_id: b.lot_id.clone(),
                    description: s.description.clone(),
                    rate: s.rate.to_exact_string(),
                    rate_text: s.rate_text.clone(),
                    running_product: MoneyView::from(&s.running_product),
                })
            })
            .collect();
        TraceDocument {
            app_id: ledger.app_id().to_string(),
            attribution_id: trace.attribution_id.clone(),
            item_id: trace.item_id.clone(),
            count: trace.count.clone(),
            cost: MoneyView::from(&trace.total_basis.amount),
            steps,
            branches: trace.branches.clone(),
            rendered_arithmetic: trace.rendered_arithmetic.clone(),
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("trace serializes");
        s.push('\n');
        s
    }
}

struct Walk {
    steps: Vec<TraceStep>,
    product: Rational,
}

impl Walk {
    fn push(&mut self, description: String, rate: Rational, rate_text: String) {
        self.product = &self.product * &rate;
        self.steps.push(TraceStep {
            description,
            rate,
            rate_text,
            running_product: self.product.clone(),
        });
    }
}

fn code(c: &CurrencyId) -> &str {
    &c.code
}

fn item_label(a: &Attribution) -> String {
    if a.count == Quantity::new(1) {
        a.item_id.clone()
    } else {
        format!("{}× {}", a.count, a.item_id)
    }
}

fn branch(ledger: &Ledger, a: &Attribution, c: &Consumption) -> TraceBranch {
    let record = ledger
        .lot_record(&c.lot_id)
        .expect("consumptions reference archived lots");
    let mut walk = Walk {
        steps: Vec::new(),
        product: Rational::one(),
    };
    if record.unit_basis.is_zero() {
        walk.push(
            format!(
                "{} {} from lot {} ({}): earned — $0.00",
                c.taken,
                code(&c.currency),
                record.lot_id,
                earned_source(ledger, record)
            ),
            Rational::zero(),
            "0".into(),
        );
    } else {
        let share = Rational::ratio(&c.taken, &record.initial).expect("lots are non-empty");
        walk.push(
            format!(
                "{} paid with {} of {} {} from lot {}",
                item_label(a),
                c.taken,
                record.initial,
                code(&record.currency),
                record.lot_id
            ),
            share,
            format!("{}/{}", c.taken, record.initial),
        );
        whole_lot_cost(ledger, record, &mut walk);
    }
    let expression = walk
        .steps
        .iter()
        .map(|s| s.rate_text.as_str())
        .collect::<Vec<_>>()
        .join(" × ");
    TraceBranch {
        lot_id: c.lot_id.clone(),
        currency: c.currency.code.clone(),
        taken: c.taken.clone(),
        basis: c.basis_part.amount.clone(),
        steps: walk.steps,
        expression,
    }
}

/// Pushes the steps whose product is the cost of the whole lot.
fn whole_lot_cost(ledger: &Ledger, record: &LotRecord, walk: &mut Walk) {
    match &record.origin {
        LotOrigin::Purchase { paid } => walk.push(
            format!(
                "{} {} bought for {} (event {})",
                record.initial,
                code(&record.currency),
                money_text(ledger, paid),
                record.origin_event_id
            ),
            paid.clone(),
            paid.to_plain_string(),
        ),
        LotOrigin::Exchange { spent, sources } => {
            walk.push(
                format!(
                    "{} {} obtained for {} {} (event {})",
                    record.initial,
                    code(&record.currency),
                    spent.units,
                    code(&spent.currency),
                    record.origin_event_id
                ),
                Rational::from(&spent.units),
                spent.units.to_string(),
            );
            per_unit_cost(ledger, &spent.currency, &spent.units, sources, walk);
        }
        LotOrigin::Grant { .. } | LotOrigin::SaleProceeds { .. } => {
            walk.push(
                format!("{} {} earned", record.initial, code(&record.currency)),
                Rational::zero(),
                "0".into(),
            );
        }
    }
}

/// Pushes the per-unit cost of `units` of `currency` paid out of `sources`.
fn per_unit_cost(
    ledger: &Ledger,
    currency: &CurrencyId,
    units: &Quantity,
    sources: &[Consumption],
    walk: &mut Walk,
) {
    if let [single] = sources {
        let parent = ledger
            .lot_record(&single.lot_id)
            .expect("sources reference archived lots");
        match &parent.origin {
            LotOrigin::Purchase { paid } => {
                let rate = paid / &Rational::from(&parent.initial);
                walk.push(
                    format!(
                        "{} per {} (lot {}: {} for {})",
                        money_text(ledger, &rate),
                        code(currency),
                        parent.lot_id,
                        money_text(ledger, paid),
                        parent.initial
                    ),
                    rate,
                    format!("{}/{}", paid.to_plain_string(), parent.initial),
                );
                return;
            }
            LotOrigin::Exchange {
                spent,
                sources: grand,
            } if !parent.unit_basis.is_zero() => {
                let rate = Rational::ratio(&spent.units, &parent.initial).expect("non-empty lot");
                walk.push(
                    format!(
                        "{} {} per {} (lot {}: {} {} for {} {})",
                        rate.to_plain_string(),
                        code(&spent.currency),
                        code(currency),
                        parent.lot_id,
                        parent.initial,
                        code(currency),
                        spent.units,
                        code(&spent.currency)
                    ),
                    rate,
                    format!("{}/{}", spent.units, parent.initial),
                );
                per_unit_cost(ledger, &spent.currency, &spent.units, grand, walk);
                return;
            }
            _ => {}
        }
    }
    let total: Rational = sources.iter().map(|c| &c.basis_part.amount).sum();
    let rate = &total / &Rational::from(units);
    let description = if total.is_zero() {
        format!("{} {} spent were earned currency", units, code(currency))
    } else {
        let parts: Vec<String> = sources
            .iter()
            .map(|c| format!("{} from lot {}", c.taken, c.lot_id))
            .collect();
        format!(
            "{} per {}, weighted over {} lots ({})",
            money_text(ledger, &rate),
            code(currency),
            sources.len(),
            parts.join(", ")
        )
    };
    let text = rate.to_plain_string();
    walk.push(description, rate, text);
}

fn earned_source(ledger: &Ledger, record: &LotRecord) -> String {
    match &record.origin {
        LotOrigin::Grant { reason } if reason.is_empty() => "grant".into(),
        LotOrigin::Grant { reason } => format!("grant: {reason}"),
        LotOrigin::SaleProceeds { item_id } => format!("sale of {item_id}"),
        LotOrigin::Exchange { spent, .. } => {
            format!("exchanged from earned {}", code(&spent.currency))
        }
        LotOrigin::Purchase { .. } => {
            debug_assert!(false, "purchased lots carry a positive basis");
            ledger.app_id().to_string()
        }
    }
}

fn money_text(ledger: &Ledger, amount: &Rational) -> String {
    let symbol = crate::currency::currency_symbol(&ledger.report_currency().code);
    format!("{symbol}{}", amount.to_plain_string())
}
