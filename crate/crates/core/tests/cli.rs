use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hele_shaw_stability::sweep::columns;
use serde_json::Value;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hs-stability"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn roots_at_zero_reports_no_eigenvalue() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["roots", "--k", "0"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "no eigenvalue at k=0");
}

#[test]
fn roots_labels_both_branches() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["roots", "--k", "5"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        text.contains("A-side: sigma") && text.contains("B-side: sigma"),
        "{text}"
    );
}

#[test]
fn usage_and_config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_eq!(run(&[], dir).status.code(), Some(2));
    assert_eq!(run(&["roots", "--k", "-1"], dir).status.code(), Some(2));
    assert_eq!(run(&["sweep", "missing.conf"], dir).status.code(), Some(2));

    fs::write(
        dir.join("bad.conf"),
        "normalization = constant\nviscosity = 3\n",
    )
    .unwrap();
    assert_eq!(run(&["sweep", "bad.conf"], dir).status.code(), Some(2));

    fs::write(dir.join("nonorm.conf"), "mu = 2\n").unwrap();
    assert_eq!(run(&["sweep", "nonorm.conf"], dir).status.code(), Some(2));

    fs::write(
        dir.join("invalid.conf"),
        "normalization = constant\nmu_L = 5\n",
    )
    .unwrap();
    assert_eq!(run(&["audit", "invalid.conf"], dir).status.code(), Some(2));
}

#[test]
fn audit_rejects_grid_through_zero() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("zero.conf"),
        "normalization = constant\nk_min = 0\nk_spacing = linear\n",
    )
    .unwrap();
    let out = run(&["audit", "zero.conf"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn audit_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("run.conf"),
        "normalization = constant\nreport = reports/audit.json\n",
    )
    .unwrap();
    let out = run(&["audit", "run.conf"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let doc: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("reports/audit.json")).unwrap())
            .unwrap();
    assert_eq!(doc["schema_version"], 1);
    let reports = doc["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 13);
    assert!(reports.iter().all(|r| r["status"] == "confirmed"));
    assert_eq!(
        doc["extensions"][0]["claim_id"],
        "extension.b_side_boundedness"
    );
}

#[test]
fn audit_exits_1_on_violation() {
    // T_b = 2 puts a zero of d on the A side at k^2 = 0.4
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("run.conf"),
        "normalization = constant\nT_b = 2\nk_min = 0.1\nk_max = 5\nk_count = 200\n",
    )
    .unwrap();
    let out = run(&["audit", "run.conf"], tmp.path());
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
    assert!(stdout(&out).contains("VIOLATED"));
}

#[test]
fn verify_paper_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["verify-paper", "--out-dir", "vp"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(
        text.lines().filter(|l| l.starts_with("PASS")).count(),
        4,
        "{text}"
    );
    assert!(!text.contains("FAIL"));
    for name in [
        "report.json",
        "unbounded_wide_layer.csv",
        "decaying_narrow_layer.svg",
    ] {
        assert!(tmp.path().join("vp").join(name).is_file(), "{name}");
    }
}

#[test]
fn sweep_writes_configured_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("run.conf"),
        "normalization = exp_neg_ka\nk_count = 30\ncsv = out/s.csv\njson = out/s.json\nsvg_dispersion = plots/d.svg\n",
    )
    .unwrap();
    let out = run(&["sweep", "run.conf"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("out/s.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), columns().join(","));
    assert_eq!(csv.lines().count(), 31);
    let svg = fs::read_to_string(tmp.path().join("plots/d.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    let json: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("out/s.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 30);
}

#[test]
fn sweep_without_outputs_prints_csv() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("run.conf"),
        "normalization = constant\nk_count = 5\n",
    )
    .unwrap();
    let out = run(&["sweep", "run.conf"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 6);
}
