use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn demo(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../demo").join(file)
}

fn gemtrail(args: &[&str], state: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gemtrail"))
        .args(args)
        .env("GEMTRAIL_STATE", state)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ingested() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let log = demo("casestudy.jsonl");
    let o = gemtrail(&["ingest", log.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "accepted 6, rejected 0\n");
    dir
}

#[test]
fn ingest_twice_is_idempotent() {
    let dir = ingested();
    let log = demo("casestudy.jsonl");
    let before = std::fs::read(dir.path().join("events.jsonl")).unwrap();
    let o = gemtrail(&["ingest", log.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "accepted 0, rejected 6 (duplicate)\n");
    assert_eq!(std::fs::read(dir.path().join("events.jsonl")).unwrap(), before);
}

#[test]
fn ingest_missing_file_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = gemtrail(&["ingest", "/nonexistent/log.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn day_report_table() {
    let dir = ingested();
    let o = gemtrail(&["report", "--group", "day"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let chest = text.lines().find(|l| l.contains("magic_chest")).unwrap();
    assert!(chest.contains("$1.99"), "{text}");
    let wizards = text.lines().find(|l| l.contains("8× wizard_card")).unwrap();
    assert!(wizards.contains("$0.38"), "{text}");
    assert!(text.contains("2023-05-01  $19.99 spent"), "{text}");
}

#[test]
fn empty_state_reports_no_events() {
    let dir = tempfile::tempdir().unwrap();
    let o = gemtrail(&["report"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "no events\n");
}

#[test]
fn bad_flags_exit_2() {
    let dir = ingested();
    for args in [
        &["report", "--group", "week"][..],
        &["report", "--from", "2023-05-02", "--to", "2023-05-01"],
        &["report", "--tz", "CET"],
        &["report", "--format", "xml"],
        &["report", "--strategy", "hifo"],
        &["report", "--currency", "gems"],
        &["casestudy", "--scale", "0"],
    ] {
        assert_eq!(gemtrail(args, dir.path()).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn csv_and_json_agree() {
    let dir = ingested();
    let json = stdout(&gemtrail(&["report", "--group", "day", "--format", "json"], dir.path()));
    let csv = stdout(&gemtrail(&["report", "--group", "day", "--format", "csv"], dir.path()));
    let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    let mut from_json = vec![
        doc["total_spend"]["display"].as_str().unwrap().to_string(),
        doc["total_attributed"]["display"].as_str().unwrap().to_string(),
    ];
    for b in doc["buckets"].as_array().unwrap() {
        for a in b["attributions"].as_array().unwrap() {
            from_json.push(format!("{}={}", a["id"].as_str().unwrap(), a["cost"]["display"].as_str().unwrap()));
        }
    }
    let mut from_csv = Vec::new();
    let mut totals = Vec::new();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        match f[0] {
            "total_spend" | "total_attributed" => totals.push(f[5].to_string()),
            "attribution" => from_csv.push(format!("{}={}", f[2], f[5])),
            _ => {}
        }
    }
    totals.extend(from_csv);
    assert_eq!(totals, from_json);
}

#[test]
fn json_is_deterministic() {
    let dir = ingested();
    let args = ["report", "--group", "month", "--tz", "-08:00", "--format", "json"];
    assert_eq!(gemtrail(&args, dir.path()).stdout, gemtrail(&args, dir.path()).stdout);
}

#[test]
fn traces() {
    let dir = ingested();
    let chest = stdout(&gemtrail(&["trace", "cs-chest"], dir.path()));
    assert!(chest.ends_with("250/2500 × 19.99 = $1.99\n"), "{chest}");
    let wizards = stdout(&gemtrail(&["trace", "cs-wizards"], dir.path()));
    assert!(wizards.ends_with("800/1000 × 60 × 19.99/2500 = $0.38\n"), "{wizards}");
    let steps = wizards
        .lines()
        .filter(|l| l.starts_with("  "))
        .filter(|l| l.trim_start().split_once(". ").is_some_and(|(n, _)| n.parse::<u32>().is_ok()))
        .count();
    assert_eq!(steps, 3);
    let o = gemtrail(&["trace", "cs-nope"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn casestudy_under_variants() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["casestudy"][..],
        &["casestudy", "--strategy", "lifo"],
        &["casestudy", "--scale", "7"],
    ] {
        let o = gemtrail(args, dir.path());
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        let text = stdout(&o);
        assert!(text.contains("check cs-chest: 1999/1000 (want 1999/1000 = 1.999) ok"));
        assert!(text.contains("check cs-wizards: 5997/15625 (want 5997/15625 = 0.383808) ok"));
    }
}

#[test]
fn serve_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "listen = 5").unwrap();
    let o = gemtrail(&["serve", "--config", config.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = gemtrail(&["serve", "--config", "/nonexistent.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
