//! Many apps' ledgers behind one log.
//!
//! Each app's ledger is single-writer, but ledgers of different apps share
//! nothing, so a mixed batch is split by app and the per-app groups are
//! applied concurrently.

use std::collections::BTreeMap;

use crate::amount::Rational;
use crate::event::Event;
use crate::exec::Execution;
use crate::ingest::{apply_parsed, parse_lines, IngestReport, ParsedLine};
use crate::ledger::{Ledger, LedgerConfig};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LedgerSet {
    default_config: LedgerConfig,
    configs: BTreeMap<String, LedgerConfig>,
    ledgers: BTreeMap<String, Ledger>,
}

impl LedgerSet {
    /// Apps without an explicit config get `default_config`.
    pub fn new(default_config: LedgerConfig) -> Self {
        LedgerSet {
            default_config,
            configs: BTreeMap::new(),
            ledgers: BTreeMap::new(),
        }
    }

    pub fn configure(&mut self, app_id: impl Into<String>, config: LedgerConfig) {
        self.configs.insert(app_id.into(), config);
    }

    pub fn get(&self, app_id: &str) -> Option<&Ledger> {
        self.ledgers.get(app_id)
    }

    pub fn ledgers(&self) -> impl Iterator<Item = &Ledger> {
        self.ledgers.values()
    }

    pub fn app_ids(&self) -> impl Iterator<Item = &str> {
        self.ledgers.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.ledgers.values().all(|l| l.events().is_empty())
    }

    /// Every applied event across apps, ordered by timestamp then app.
    pub fn events(&self) -> Vec<&Event> {
        let mut all: Vec<&Event> = self.ledgers.values().flat_map(|l| l.events()).collect();
        all.sort_by_key(|e| e.timestamp);
        all
    }

    fn config_for(&self, app_id: &str) -> LedgerConfig {
        self.configs
            .get(app_id)
            .cloned()
            .unwrap_or_else(|| self.default_config.clone())
    }

    /// Ingests a mixed-app batch. Returns the merged report and the applied
    /// events ordered by timestamp (app order breaks ties).
    pub fn ingest<I, S>(&mut self, lines: I, exec: Execution) -> (IngestReport, Vec<Event>)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let (parsed, parse_rejections) = parse_lines(lines);
        let mut groups: BTreeMap<String, Vec<ParsedLine>> = BTreeMap::new();
        for p in parsed {
            groups.entry(p.record.event.app_id.clone()).or_default().push(p);
        }
        let work: Vec<(Ledger, Vec<ParsedLine>)> = groups
            .into_iter()
            .map(|(app, lines)| {
                let ledger = self
                    .ledgers
                    .remove(&app)
                    .unwrap_or_else(|| Ledger::new(app.clone(), self.config_for(&app)));
                (ledger, lines)
            })
            .collect();
        let results = exec.map_owned(work, |(mut ledger, lines)| {
            let (report, applied) = apply_parsed(lines, &mut ledger);
            (ledger, report, applied)
        });

        let mut report = IngestReport {
            accepted: 0,
            rejected: parse_rejections,
        };
        let mut applied_all = Vec::new();
        for (ledger, r, applied) in results {
            report.merge(r);
            applied_all.extend(applied);
            if !ledger.events().is_empty() {
                self.ledgers.insert(ledger.app_id().to_string(), ledger);
            }
        }
        report.rejected.sort_by_key(|r| r.line_no);
        applied_all.sort_by_key(|e| e.timestamp);
        (report, applied_all)
    }

    /// Conservation check for every app.
    pub fn audit(&self, exec: Execution) -> Vec<Audit> {
        let ledgers: Vec<&Ledger> = self.ledgers.values().collect();
        exec.map(&ledgers, |l| Audit::of(l))
    }
}

/// Where a ledger's real money currently sits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Audit {
    pub app_id: String,
    pub injected: Rational,
    pub attributed: Rational,
    pub unspent: Rational,
}

impl Audit {
    pub fn of(ledger: &Ledger) -> Self {
        Audit {
            app_id: ledger.app_id().to_string(),
            injected: ledger.real_money_injected(),
            attributed: ledger.attributed_total(),
            unspent: ledger.unspent_basis(),
        }
    }

    /// Attributed plus unspent basis equals money injected, exactly.
    pub fn balanced(&self) -> bool {
        &self.attributed + &self.unspent == self.injected
    }
}

/// Replays many independent logs, one ledger each.
pub fn replay_all(
    logs: &[Vec<Event>],
    app_id: &str,
    config: &LedgerConfig,
    exec: Execution,
) -> Vec<Result<Ledger, crate::error::LedgerError>> {
    exec.map(logs, |log| Ledger::replay(app_id, config.clone(), log))
}
