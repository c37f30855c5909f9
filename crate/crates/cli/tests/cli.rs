use std::path::Path;
use std::process::{Command, Output};

use raylab_core::instances::{packing_instance, OverlapKind};
use raylab_core::Digraph;

fn raylab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_raylab")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn classify_prints_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = raylab(&["classify", "--spec", "prefix=;tail=out"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "Ubiquitous (finitely many turns)\n");
    let o = raylab(&["classify", "--spec", "prefix=;tail=period:+-"], dir.path());
    assert_eq!(stdout(&o), "NonUbiquitous (bounded, c=1)\n");
    let o = raylab(&["classify", "--spec", "prefix=+-;tail=grow:1,1,+", "--format", "machine"], dir.path());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"]["variant"], "unbounded");
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(raylab(&["classify", "--spec", "nonsense"], dir.path()).status.code(), Some(2));
    assert_eq!(raylab(&["classify"], dir.path()).status.code(), Some(2));
    assert_eq!(raylab(&["export", "--digraph", "missing.json", "--format", "dot"], dir.path()).status.code(), Some(2));
    let o = raylab(&["build", "--kind", "bounded", "--spec", "prefix=;tail=out", "--max-m", "1", "--len", "5", "--steps", "1", "--out", "g.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("g.json").exists());
}

#[test]
fn verify_in_the_wrong_mode_reports_a_violation() {
    let dir = tempfile::tempdir().unwrap();
    let o = raylab(&["build", "--kind", "bounded", "--spec", "prefix=;tail=period:++-", "--max-m", "1", "--len", "60", "--steps", "1", "--out", "g.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let o = raylab(&["verify", "--digraph", "g.json", "--plan", "g.json.plan.json", "--mode", "bounded"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = raylab(&["verify", "--digraph", "g.json", "--plan", "g.json.plan.json", "--mode", "unbounded"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn native_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    raylab(&["build", "--kind", "unbounded", "--spec", "prefix=;tail=grow:1,1,-", "--max-m", "1", "--len", "300", "--steps", "1", "--out", "g.json"], dir.path());
    let text = std::fs::read_to_string(dir.path().join("g.json")).unwrap();
    let o = raylab(&["export", "--digraph", "g.json", "--format", "native"], dir.path());
    assert_eq!(stdout(&o), text);
    let d = Digraph::from_native(&text).unwrap();
    assert_eq!(Digraph::from_native(&d.to_native()).unwrap(), d);
    let dot = stdout(&raylab(&["export", "--digraph", "g.json", "--format", "dot"], dir.path()));
    assert!(dot.starts_with("digraph") && dot.contains("doublecircle"));
}

#[test]
fn pack_reads_a_tribe_dump() {
    let dir = tempfile::tempdir().unwrap();
    let sizes: Vec<usize> = (0..6).map(|k| 8 + 10 * k).collect();
    let inst = packing_instance(5, OverlapKind::Star, &sizes, 40);
    std::fs::write(dir.path().join("d.json"), inst.digraph.to_native()).unwrap();
    std::fs::write(dir.path().join("t.json"), inst.tribe.to_dump()).unwrap();
    let o = raylab(&["pack", "--digraph", "d.json", "--tribe", "t.json", "--n", "3", "--min-len", "10", "--format", "machine"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["embeddings"].as_array().unwrap().len(), 3);
    assert_eq!(v["trace"].as_array().unwrap().len(), 3);
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = raylab(&["selftest"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("pass ")));
}
