use std::io::Write;
use std::path::Path;

use gemtrail_core::ingest::{to_jsonl, IngestReport};
use gemtrail_core::trace::build_trace;
use gemtrail_core::{
    casestudy, Event, Execution, Ledger, LedgerConfig, LedgerSet, Rational, ReportDocument,
    ReportQuery, Strategy, TraceDocument,
};
use gemtrail_service::{ServiceConfig, ServiceError, Store, StoreError};

use crate::args::{Format, LedgerArgs};
use crate::render;

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// The command ran but the data did not pass (exit 1).
    Domain(String),
    /// Bad flags, unreadable files, busy state (exit 2).
    Usage(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Usage(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Usage(m) => m,
        }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub type Outcome = Result<(), Failure>;

fn ledger_config(args: &LedgerArgs) -> Result<LedgerConfig, Failure> {
    if !gemtrail_core::CurrencyId::looks_real(&args.currency) {
        return Err(Failure::Usage(format!(
            "--currency {:?} is not a three-letter currency code",
            args.currency
        )));
    }
    Ok(LedgerConfig::new(args.strategy, args.currency.clone()))
}

/// Opens the state directory and replays its log.
pub fn load(dir: &Path, config: LedgerConfig) -> Result<(Store, LedgerSet), Failure> {
    let store = Store::open(dir)?;
    let mut set = LedgerSet::new(config);
    let lines = store.read_lines()?;
    let (report, _) = set.ingest(&lines, Execution::default());
    if !report.rejected.is_empty() {
        eprintln!(
            "warning: {} line(s) of {} could not be replayed",
            report.rejected.len(),
            store.log_path().display()
        );
    }
    Ok((store, set))
}

fn print_rejections(report: &IngestReport) {
    for r in &report.rejected {
        eprintln!("line {}: {}: {}", r.line_no, r.code, r.reason);
    }
}

pub fn ingest(log: &Path, state: &Path, args: &LedgerArgs) -> Outcome {
    let config = ledger_config(args)?;
    let text = std::fs::read_to_string(log)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", log.display())))?;
    let (store, mut set) = load(state, config)?;
    let (report, applied) = set.ingest(text.lines(), Execution::default());
    store.append(&applied)?;
    print_rejections(&report);
    println!("{}", report.summary());
    if report.rejected.is_empty() {
        Ok(())
    } else {
        Err(Failure::Domain(String::new()))
    }
}

fn pick_app<'a>(set: &'a LedgerSet, app: Option<&str>) -> Result<&'a Ledger, Failure> {
    match app {
        Some(app) => set
            .get(app)
            .ok_or_else(|| Failure::Domain(format!("no events for app {app}"))),
        None => {
            let mut all = set.ledgers();
            match (all.next(), all.next()) {
                (Some(only), None) => Ok(only),
                _ => Err(Failure::Usage(format!(
                    "state holds several apps ({}); pick one with --app",
                    set.app_ids().collect::<Vec<_>>().join(", ")
                ))),
            }
        }
    }
}

pub struct ReportArgs<'a> {
    pub app: Option<&'a str>,
    pub from: Option<&'a str>,
    pub to: Option<&'a str>,
    pub group: &'a str,
    pub tz: &'a str,
    pub format: Format,
}

pub fn report(state: &Path, ledger: &LedgerArgs, r: ReportArgs<'_>) -> Outcome {
    let query = ReportQuery::parse(r.from, r.to, Some(r.group), Some(r.tz))
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let (_store, set) = load(state, ledger_config(ledger)?)?;
    if set.is_empty() {
        println!("no events");
        return Ok(());
    }
    let doc = ReportDocument::build(pick_app(&set, r.app)?, &query);
    let text = match r.format {
        Format::Table => render::report_table(&doc),
        Format::Json => doc.to_json(),
        Format::Csv => render::report_csv(&doc),
    };
    print!("{text}");
    Ok(())
}

pub fn trace(state: &Path, ledger: &LedgerArgs, id: &str, app: Option<&str>, format: Format) -> Outcome {
    let (_store, set) = load(state, ledger_config(ledger)?)?;
    let found = match app {
        Some(app) => set.get(app).filter(|l| l.attribution(id).is_some()),
        None => set.ledgers().find(|l| l.attribution(id).is_some()),
    };
    let ledger = found.ok_or_else(|| Failure::Domain(format!("no item purchase with id {id}")))?;
    let t = build_trace(ledger, id).map_err(|e| Failure::Domain(e.to_string()))?;
    let doc = TraceDocument::build(ledger, &t);
    match format {
        Format::Json => print!("{}", doc.to_json()),
        Format::Table | Format::Csv => {
            print!("{}", render::trace_text(&doc, &ledger.report_currency().code))
        }
    }
    Ok(())
}

/// Replays the scenario through a throwaway state directory, prints its
/// report and traces, and checks both costs exactly.
pub fn casestudy(strategy: Strategy, scale: u64) -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| Failure::Usage(e.to_string()))?;
    let log_path = tmp.path().join("casestudy.jsonl");
    let events: Vec<Event> = casestudy::events().iter().map(|e| e.scaled(scale)).collect();
    std::fs::write(&log_path, to_jsonl(&events)).map_err(|e| Failure::Usage(e.to_string()))?;
    let ledger_args = LedgerArgs {
        strategy,
        currency: "USD".into(),
    };
    let state = tmp.path().join("state");
    println!("== ingest (strategy {strategy}, scale ×{scale})");
    ingest(&log_path, &state, &ledger_args)?;

    let (_store, set) = load(&state, ledger_config(&ledger_args)?)?;
    let ledger = pick_app(&set, Some(casestudy::APP_ID))?;
    let query = ReportQuery::parse(None, None, Some("day"), None).expect("static query");
    println!("\n== report");
    print!("{}", render::report_table(&ReportDocument::build(ledger, &query)));

    let mut ok = true;
    for (id, want) in [
        (casestudy::CHEST_EVENT_ID, casestudy::chest_cost()),
        (casestudy::WIZARDS_EVENT_ID, casestudy::wizards_cost()),
    ] {
        let t = build_trace(ledger, id).map_err(|e| Failure::Domain(e.to_string()))?;
        println!("\n== trace {id}");
        print!("{}", render::trace_text(&TraceDocument::build(ledger, &t), "USD"));
        let got: &Rational = &t.total_basis.amount;
        let verdict = if *got == want { "ok" } else { "MISMATCH" };
        ok &= *got == want;
        println!(
            "check {id}: {} (want {} = {}) {verdict}",
            got.to_exact_string(),
            want.to_exact_string(),
            want.to_terminating_decimal().unwrap_or_default()
        );
    }
    let _ = std::io::stdout().flush();
    if ok {
        Ok(())
    } else {
        Err(Failure::Domain("case study values do not match".into()))
    }
}

pub fn serve(config_path: &Path) -> Outcome {
    let config = ServiceConfig::load(config_path).map_err(|e| Failure::Usage(e.to_string()))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Usage(e.to_string()))?;
    let apps: Vec<String> = config.apps.keys().cloned().collect();
    let result = runtime.block_on(gemtrail_service::serve(
        config,
        |addr| {
            println!("listening on http://{addr} (apps: {})", apps.join(", "));
            let _ = std::io::stdout().flush();
        },
        gemtrail_service::shutdown_signal(),
    ));
    match result {
        Ok(()) => {
            println!("shut down");
            Ok(())
        }
        Err(e @ ServiceError::Serve(_)) => Err(Failure::Domain(e.to_string())),
        Err(e) => Err(Failure::Usage(e.to_string())),
    }
}
