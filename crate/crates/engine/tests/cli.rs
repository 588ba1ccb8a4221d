mod common;

use std::path::Path;
use std::process::{Command, Output};

use locot2v::report::Report;
use locot2v::suite::load_suite;
use locot2v_core::MetricStatus;
use serde_json::Value;

fn run(args: &[&str], paths: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(common::binary());
    cmd.args(args);
    for (flag, p) in paths {
        cmd.arg(flag).arg(p);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_video_is_a_partial_failure_and_reports_render() {
    let fx = common::write_fixture("");
    let root = fx.dir.path();
    std::fs::remove_file(fx.videos.join("s3.y4m")).unwrap();
    let out = root.join("report.json");
    let o = run(
        &["eval", "run"],
        &[("--config", &fx.config), ("--suite", &fx.suite), ("--videos", &fx.videos), ("--out", &out)],
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("samples with errors: s3"), "{}", stderr(&o));

    let report = Report::load(&out).unwrap();
    for s in &report.samples {
        let errors = s.metrics.values().filter(|m| m.status == MetricStatus::Error).count();
        if s.sample_id == "s3" {
            assert_eq!(errors, 26);
            assert_eq!(s.metrics.values().next().unwrap().diagnostics["error"], "video not found");
        } else {
            assert_eq!(errors, 0, "{}", s.sample_id);
        }
    }
    assert!(report.overall_mean.is_some());
    assert!(root.join("report.json.artifacts/s1/transitions.json").exists());
    assert!(!root.join("report.json.checkpoint").exists());

    let tables = root.join("tables");
    let o = run(&["eval", "tables", "--format", "csv"], &[("--report", &out), ("--out-dir", &tables)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["dimensions.csv", "temporal.csv", "herd.csv", "categories.csv", "radar.json"] {
        assert!(tables.join(name).exists(), "{name}");
    }
    let dims = common::read(&tables.join("dimensions.csv"));
    let mut lines = dims.lines();
    assert!(lines.next().unwrap().starts_with("Method,AQ,TQ"));
    assert!(lines.next().unwrap().starts_with("fixture,"));

    let o = run(&["eval", "tables"], &[("--report", &out), ("--out-dir", &tables)]);
    assert!(o.status.success());
    assert!(common::read(&tables.join("herd.md")).contains("| fixture |"));

    let o = run(&["eval", "tables", "--format", "xlsx"], &[("--report", &out), ("--out-dir", &tables)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: "), "{}", stderr(&o));

    // Pooling two reports prefixes sample ids with the method name.
    let other = root.join("other.json");
    let mut second = report.clone();
    second.method = "copy".into();
    second.save(&other).unwrap();
    let corr = root.join("corr");
    let o = Command::new(common::binary())
        .args(["eval", "correlate", "--pair", "static_quality:herd", "--pair", "event_alignment:overall"])
        .arg("--report")
        .arg(&out)
        .arg("--report")
        .arg(&other)
        .arg("--out-dir")
        .arg(&corr)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = common::read(&corr.join("correlations.csv"));
    assert_eq!(csv.lines().count(), 3, "{csv}");
    let scatter: Value = serde_json::from_str(&common::read(&corr.join("scatter.json"))).unwrap();
    let text = scatter.to_string();
    assert!(text.contains("fixture/s1") && text.contains("copy/s5"), "{text}");
    assert!(!text.contains("fixture/s3"), "error samples must be skipped");
    assert!(corr.join("correlations.md").exists());

    let o = Command::new(common::binary())
        .args(["eval", "correlate", "--pair", "nonsense"])
        .arg("--report")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_reports_bad_polarity() {
    let fx = common::write_fixture("");
    let o = run(&["suite", "validate"], &[("--suite", &fx.suite)]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).ends_with(": ok\n"));

    let text = common::read(&fx.suite).replacen("\"negative\"", "\"maybe\"", 1);
    let bad = fx.dir.path().join("bad.json");
    std::fs::write(&bad, text).unwrap();
    let o = run(&["suite", "validate"], &[("--suite", &bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stdout(&o).contains("herd_questions[0].polarity: not in {positive,negative}"),
        "{}",
        stdout(&o)
    );
    assert!(stderr(&o).contains("1 problems"), "{}", stderr(&o));
}

#[test]
fn suite_tools_dry_run_leaves_the_file_alone() {
    let fx = common::write_fixture("");
    let before = common::read(&fx.suite);
    for tool in ["complexity", "actions", "events", "herd-questions"] {
        let o = run(&["suite", tool, "--dry-run"], &[("--config", &fx.config), ("--suite", &fx.suite)]);
        assert!(o.status.success(), "{tool}: {}", stderr(&o));
        let printed: Value = serde_json::from_str(&stdout(&o)).unwrap_or_else(|e| panic!("{tool}: {e}"));
        assert_eq!(printed["samples"].as_array().unwrap().len(), 5, "{tool}");
        if tool == "complexity" {
            assert!(printed["samples"][0]["complexity"]["average"].is_number());
            assert!(stderr(&o).contains("mean complexity"));
        }
    }
    assert_eq!(common::read(&fx.suite), before);

    let o = run(&["suite", "split-events", "--dry-run"], &[("--config", &fx.config), ("--suite", &fx.suite)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let split: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(split["s2"].as_array().unwrap().len(), 3);

    let o = run(&["suite", "split-events"], &[("--suite", &fx.suite)]);
    assert_eq!(o.status.code(), Some(1), "--out is required without --dry-run");
}

#[test]
fn suite_tool_rewrites_the_file() {
    let fx = common::write_fixture("");
    let o = run(&["suite", "complexity"], &[("--config", &fx.config), ("--suite", &fx.suite)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("updated 5 records"), "{}", stderr(&o));
    let suite = load_suite(&fx.suite).unwrap();
    assert!(suite.samples.iter().all(|r| r.complexity.is_some()));
}

#[test]
fn usage_errors_exit_one() {
    let o = run(&["eval", "frobnicate"], &[]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["--help"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let fx = common::write_fixture("");
    let o = run(
        &["eval", "run", "--set", "run.no_such_key=1"],
        &[("--suite", &fx.suite), ("--videos", &fx.videos)],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no_such_key"), "{}", stderr(&o));
}
