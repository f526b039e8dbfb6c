use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

fn models() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn model(name: &str) -> String {
    models().join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pivotmodel")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const FIGURE_TEN_CELL: &str = "ACCTS=Net sales,TIME=Qtr1,ORG=Total Company,PRODUCT=Total Products,SCENARIO=%Var";

#[test]
fn stats_prints_cell_counts() {
    let out = run(&["stats", &model("lighting.json")]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "cells=12600 input=1728 calculated=10872 rules=12\n");
}

#[test]
fn validate_reports_lint_findings() {
    let out = run(&["validate", &model("lighting.json")]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).ends_with("ok\n"));

    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(models().join("lighting.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["rules"].as_array_mut().unwrap().remove(2);
    let gap = dir.path().join("gap.json");
    std::fs::write(&gap, doc.to_string()).unwrap();
    let out = run(&["validate", gap.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("ORG 'Total Company' has hierarchy children but no enabled rule"));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, text.replace("{Net sales}", "{Nett sales}")).unwrap();
    let out = run(&["validate", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Nett sales"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["stats"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["stats", "/no/such/model.json"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn calc_without_data_writes_zero_rule_cells() {
    let out = run(&["calc", &model("lighting.json")]);
    assert!(out.status.success(), "{}", stderr(&out));
    let ledger = stdout(&out);
    let rows: Vec<&str> = ledger.lines().skip(1).collect();
    assert_eq!(rows.len(), 10_872);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!((fields[5], fields[6]), ("0", "RULE"), "{row}");
    }
    assert!(stderr(&out).contains("calculated:"));
}

#[test]
fn calc_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut ledgers = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("ledger{i}.csv"));
        let out = run(&[
            "calc",
            &model("lighting.json"),
            "--data",
            &model("europe_budget_wide.csv"),
            "--data",
            &model("actuals_erp_long.csv"),
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        ledgers.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(ledgers[0], ledgers[1]);
    let text = String::from_utf8(ledgers.remove(0)).unwrap();
    let row = text.lines().find(|l| l.starts_with("Net sales,Qtr1,Outdoor,Europe,Budget,")).unwrap();
    let value: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
    assert!((value - 9_863.257_60).abs() < 5e-5);
}

#[test]
fn rejected_rows_fail_unless_allowed() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    std::fs::write(&data, "ACCTS,TIME,PRODUCT,ORG,SCENARIO,Value\nNet sales,Qtr1,Outdoor,North,Budget,5\n").unwrap();
    let lighting = model("lighting.json");
    let args = vec!["calc", &lighting, "--data", data.to_str().unwrap()];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("bad.csv:2: rejected: aggregate member not loadable"));

    let mut allowed = args.clone();
    allowed.push("--allow-rejects");
    assert!(run(&allowed).status.success());

    let out = run(&["calc", &model("lighting.json"), "--data", "/no/such.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn trace_exports_the_first_drill_block() {
    let out = run(&[
        "trace",
        &model("lighting.json"),
        "--data",
        &model("europe_budget_wide.csv"),
        "--cell",
        FIGURE_TEN_CELL,
        "--depth",
        "1",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().filter(|l| !l.is_empty()).collect();
    assert_eq!(lines[0], "Level,ACCTS,TIME,PRODUCT,ORG,SCENARIO,Value,Rule");
    assert!(lines[1].starts_with("L1,Net sales,Qtr1,Total Products,Total Company,%Var,"));
    assert!(lines[2].starts_with("L1.1,Net sales,Qtr1,Total Products,Total Company,$Var,"));
    assert!(lines[3].starts_with("L1.2,Net sales,Qtr1,Total Products,Total Company,Actuals,"));
    assert_eq!(lines.len(), 4);

    let deeper = run(&["trace", &model("lighting.json"), "--cell", FIGURE_TEN_CELL, "--depth", "3"]);
    let blocks = stdout(&deeper).split("\n\n").filter(|b| !b.trim().is_empty()).count();
    assert!(blocks > 3, "{}", stdout(&deeper));

    let bad = run(&["trace", &model("lighting.json"), "--cell", "ACCTS=Net sales", "--depth", "1"]);
    assert_eq!(bad.status.code(), Some(2));
    let wrong_rule = run(&["trace", &model("lighting.json"), "--cell", FIGURE_TEN_CELL, "--rule", "TIME - Year"]);
    assert_eq!(wrong_rule.status.code(), Some(2));
}

#[test]
fn docs_lists_hierarchy_and_rules() {
    let out = run(&["docs", &model("lighting_docs_variant.json")]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\nSales\t1\t3\n"));
    assert!(text.contains("\nMargin\t8\t0\n"));
    assert!(text.contains("ACCTS - Net Sales\t= {Sales} - {Discounts and allowances}"));

    let csv = run(&["docs", &model("lighting.json"), "--format", "csv"]);
    assert!(stdout(&csv).starts_with("Section,Folder,Name,Child,Parent,Formula,Enabled\n"));
}

#[test]
fn view_writes_a_grid() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("view.json");
    std::fs::write(
        &spec,
        r#"{"pages":[{"dimension":"TIME","member":"Qtr1"},{"dimension":"ORG","member":"Europe"},{"dimension":"SCENARIO","member":"Budget"}],
            "rows":["ACCTS"],"cols":["PRODUCT"]}"#,
    )
    .unwrap();
    let out = run(&[
        "view",
        &model("lighting.json"),
        "--data",
        &model("europe_budget_wide.csv"),
        "--spec",
        spec.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 15);
    let row = text.lines().find(|l| l.starts_with("Net sales,")).unwrap();
    let outdoor: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
    assert!((outdoor - 9_863.257_60).abs() < 5e-5, "{row}");

    std::fs::write(&spec, r#"{"rows":["ACCTS"],"cols":["PRODUCT"]}"#).unwrap();
    let out = run(&["view", &model("lighting.json"), "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn audit_lists_ratio_cells() {
    let out = run(&["audit", &model("lighting.json"), "--data", &model("europe_budget_wide.csv")]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("audit:"));
}

#[test]
fn serve_answers_health_checks() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let listen = format!("127.0.0.1:{port}");
    let mut child = Command::new(env!("CARGO_BIN_EXE_pivotmodel"))
        .args(["serve", "--listen", &listen])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let deadline = Instant::now() + Duration::from_secs(10);
    let reply = loop {
        if let Ok(mut stream) = TcpStream::connect(&listen) {
            write!(stream, "GET /health HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n").unwrap();
            let mut reply = String::new();
            stream.read_to_string(&mut reply).unwrap();
            break reply;
        }
        assert!(Instant::now() < deadline, "server did not start");
        std::thread::sleep(Duration::from_millis(50));
    };
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(reply.starts_with("HTTP/1.1 200"), "{reply}");
    assert!(reply.ends_with("ok"));
}
