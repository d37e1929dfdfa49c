//! The `urank` binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use urank::experiments::reference;
use urank::io::{to_json, Document};
use urank::model::{ClassSpec, RankingRule, ScoreFn, ThresholdFamily, ThresholdGrid};

fn urank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_urank")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn worked_sample(dir: &Path) -> PathBuf {
    write(dir, "s.csv", "x0,y\n1,1\n2,3\n3,2\n4,4\n")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn risk_writes_report_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let sample = worked_sample(dir.path());
    let rule = write(dir.path(), "r.json", &to_json(&Document::new(RankingRule::scorer("up", ScoreFn::identity()))));
    let out = dir.path().join("out.json");
    let o = urank(&["risk", "--sample", s(&sample), "--rule", s(&rule), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out);
    assert_eq!(report["l_n"].as_f64(), Some(1.0 / 6.0));
    assert_eq!(report["error_pair_count"], 2);
    let manifest = json(&dir.path().join("out.json.manifest.json"));
    assert_eq!(manifest["command_name"], "risk");
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 1);
}

fn erm_min_risk(dir: &Path, thetas: Vec<f64>) -> Value {
    let sample = worked_sample(dir);
    let class = ClassSpec::Thresholds(ThresholdGrid::new(ThresholdFamily::Floor, thetas));
    let class = write(dir, "c.json", &to_json(&Document::new(class)));
    let out = dir.join("erm.json");
    let o = urank(&["erm", "--sample", s(&sample), "--class", s(&class), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    json(&out)["min_risk"].clone()
}

#[test]
fn erm_on_five_cell_class() {
    let dir = tempfile::tempdir().unwrap();
    // no cell is Bayes-equivalent on this sample: the pair (2, 3) is always misordered or tied
    assert_eq!(erm_min_risk(dir.path(), vec![0.5, 1.5, 2.5, 3.5, 4.5]).as_f64(), Some(1.0 / 6.0));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(urank(&["--help"]).status.code(), Some(0));
    assert_eq!(urank(&["risk", "--bogus"]).status.code(), Some(1));
    let missing = dir.path().join("nope.csv");
    let o = urank(&["risk", "--sample", s(&missing), "--rule", s(&missing)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&o.stderr).lines().count(), 1);
    let bad = write(dir.path(), "bad.json", "{ not json");
    let sample = worked_sample(dir.path());
    assert_eq!(urank(&["risk", "--sample", s(&sample), "--rule", s(&bad)]).status.code(), Some(1));
}

fn small_rate_config(dir: &Path) -> PathBuf {
    let mut c = reference::rate_binary(4, 9);
    c.n_grid = vec![20, 40, 80];
    write(dir, "rate.json", &to_json(&c))
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn rate_experiment_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_rate_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (d, threads) in [(&a, "1"), (&b, "3")] {
        let o = urank(&["--threads", threads, "experiment", "rate", "--config", s(&config), "--out-dir", s(d)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let files = read_dir(&a);
    assert_eq!(
        files.iter().map(|f| f.0.as_str()).collect::<Vec<_>>(),
        ["cells.csv", "plot.dat", "result.json", "summary.csv"]
    );
    assert_eq!(files, read_dir(&b));
}

#[test]
fn replay_reproduces_and_detects_changed_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let sample = worked_sample(dir.path());
    let rule = write(dir.path(), "r.json", &to_json(&Document::new(RankingRule::scorer("up", ScoreFn::identity()))));
    let out = dir.path().join("out.json");
    assert!(urank(&["risk", "--sample", s(&sample), "--rule", s(&rule), "--out", s(&out)]).status.success());
    let manifest = dir.path().join("out.json.manifest.json");
    assert_eq!(urank(&["replay", "--manifest", s(&manifest)]).status.code(), Some(0));
    std::fs::write(&sample, "x0,y\n1,1\n2,2\n").unwrap();
    assert_eq!(urank(&["replay", "--manifest", s(&manifest)]).status.code(), Some(1));
}

#[test]
fn experiment_overrides_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_rate_config(dir.path());
    let out = dir.path().join("d");
    let o = urank(&["experiment", "rate", "--config", s(&config), "--out-dir", s(&out), "--reps", "3", "--seed", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["config"]["reps"], 3);
    assert_eq!(m["base_seed"], 5);
    let cells = std::fs::read_to_string(out.join("cells.csv")).unwrap();
    assert_eq!(cells.lines().count(), 1 + 3 * 3);
}
