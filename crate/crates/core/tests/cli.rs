use std::path::Path;
use std::process::{Command, Output};

use srgeo::cli::commands::read_trajectory_csv;
use srgeo::extremal::{integrate, ExtremalState};
use srgeo::metric::{frame_from_metric, MetricChart};

fn run(dir: &Path, args: &[&str], config: &str) -> Output {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_srgeo")).args(args).arg("--config").arg(&cfg).arg("--out").arg(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn flat(initial: &str, window: &str) -> String {
    format!("metric = \"flat\"\ninitial = {initial}\nwindow = {window}\n")
}

#[test]
fn simulate_hamiltonian_column_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["simulate"], &flat("[0, 0, 0, 0, 1, 1]", "[0, 20]"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("drift"));
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    for line in text.lines().skip(1) {
        let h: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((h - 0.5).abs() < 1e-8);
    }
    let rows = read_trajectory_csv(&text).unwrap();
    let frame = frame_from_metric(&MetricChart::flat());
    let traj = integrate(&frame, &ExtremalState::new(0.0, 0.0, 0.0, 0.0, 1.0, 1.0), (0.0, 20.0), 1e-10).unwrap();
    assert_eq!(rows.len(), traj.nodes().count());
    for (t, s) in rows {
        assert!(traj.eval(t).unwrap().distance(&s) <= 1e-12);
    }
}

#[test]
fn constant_state_gives_identical_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["simulate"], &flat("[0.1, 0.2, 0.3, 0, 0, 0]", "[0, 5]"));
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let states: Vec<String> = text.lines().skip(1).map(|l| l.split_once(',').unwrap().1.to_string()).collect();
    assert!(states.len() >= 2 && states.iter().all(|s| *s == states[0]));
}

#[test]
fn sphere_domain_exit_is_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "metric = \"sphere\"\ninitial = [1.4, 0, 0, 1, 0, 0]\nwindow = [0, 5]\n";
    let o = run(dir.path(), &["simulate"], cfg);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("domain-exit"));
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let last: f64 = text.lines().last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(last < 5.0);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in ["metric = \"flat\"\nwindow = [0, 1]\nbogus = 3\n", "metric = \"flat\"\nwindow = [0, 1]\n", "not toml ["] {
        let o = run(dir.path(), &["simulate"], cfg);
        assert_eq!(o.status.code(), Some(2), "{cfg}");
    }
    let o = run(dir.path(), &["simulate", "--tol", "1"], &flat("[0, 0, 0, 0, 1, 1]", "[0, 1]"));
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), &["oracle"], "metric = \"sphere\"\ninitial = [0, 0, 0, 0, 1, 1]\nwindow = [0, 1]\n");
    assert_eq!(o.status.code(), Some(2));
}

fn events(dir: &Path) -> Vec<serde_json::Value> {
    serde_json::from_str(&std::fs::read_to_string(dir.join("events.json")).unwrap()).unwrap()
}

#[test]
fn classify_records() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["classify"], &flat("[0, 0, 0, 0, 0, 1]", "[0, 10]"));
    assert_eq!(o.status.code(), Some(0));
    let ev = events(dir.path());
    assert_eq!(ev.len(), 1);
    assert_eq!(ev[0]["pair"], "(II,III)");

    let o = run(dir.path(), &["classify"], &flat("[0, 0, 1, 0, 0, 0]", "[0, 10]"));
    assert_eq!(o.status.code(), Some(0));
    let ev = events(dir.path());
    assert_eq!(ev.len(), 1);
    assert_eq!(ev[0]["pair"], "(I,I)");

    // libration: theta oscillates about the zero of A
    let o = run(dir.path(), &["classify"], &flat("[0, 0, 0, 0, 1, 0.5]", "[0, 30]"));
    assert_eq!(o.status.code(), Some(0));
    let ev = events(dir.path());
    assert!(ev.len() > 4);
    let proj: Vec<&str> = ev[1..].iter().map(|e| e["projection"].as_str().unwrap()).collect();
    assert!(proj.windows(2).all(|w| w[0] != w[1]), "{proj:?}");
    for e in &ev[1..] {
        let want = if e["projection"] == "pi" { "(IV,III)" } else { "(III,IV)" };
        assert_eq!(e["pair"], want);
        assert_eq!(e["class"], "IV");
    }
}

const SWEEP: &str = "metric = \"flat\"\nwindow = [0, 10]\nseed = 11\n[sweep]\ncount = 40\n";

#[test]
fn sweep_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let oa = run(a.path(), &["sweep"], SWEEP);
    let ob = run(b.path(), &["sweep"], SWEEP);
    assert_eq!(oa.status.code(), Some(0));
    assert!(stdout(&oa).contains("violations: 0"));
    assert_eq!(oa.stdout, ob.stdout);
    let ra = std::fs::read(a.path().join("sweep.txt")).unwrap();
    assert_eq!(ra, std::fs::read(b.path().join("sweep.txt")).unwrap());
    let oc = run(a.path(), &["sweep", "--seed", "12"], SWEEP);
    assert_ne!(oa.stdout, oc.stdout);
}

#[test]
fn straight_slice_is_all_iii_ii() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "metric = \"flat\"\nwindow = [0, 5]\n[sweep]\ncount = 30\nslice = \"straight\"\n";
    let o = run(dir.path(), &["sweep"], cfg);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("  (III,II) 30\n"), "{out}");
}

#[test]
fn oracle_cases() {
    let dir = tempfile::tempdir().unwrap();
    for (init, regime) in
        [("[0, 0, 0, 0, 1, 0.5]", "libration"), ("[0, 0, 0, 0, 1, 2]", "rotation"), ("[0, 0, 0.3, 0, 0, 0.7]", "degenerate")]
    {
        let o = run(dir.path(), &["oracle"], &flat(init, "[0, 20]"));
        assert_eq!(o.status.code(), Some(0), "{init}");
        assert!(stdout(&o).contains(regime), "{}", stdout(&o));
    }
}

#[test]
fn render_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = flat("[0, 0, 0, 0, 1, 0.5]", "[0, 20]") + "[render]\nleaf = true\n";
    assert_eq!(run(a.path(), &["render"], &cfg).status.code(), Some(0));
    assert_eq!(run(b.path(), &["render"], &cfg).status.code(), Some(0));
    let svg = std::fs::read_to_string(a.path().join("front.svg")).unwrap();
    assert_eq!(svg, std::fs::read_to_string(b.path().join("front.svg")).unwrap());
    assert!(svg.contains("<circle") && svg.contains("<line"));

    let o = run(a.path(), &["render"], &flat("[0, 0, 0, 1, 0, 0]", "[0, 3]"));
    assert_eq!(o.status.code(), Some(0));
    let svg = std::fs::read_to_string(a.path().join("front.svg")).unwrap();
    assert!(!svg.contains("<circle"));
}

#[test]
fn extra_outputs_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = flat("[0, 0, 0, 0, 1, 0.5]", "[0, 10]") + "outputs = [\"events-json\", \"front-svg\", \"report-text\"]\n";
    let o = run(dir.path(), &["simulate"], &cfg);
    assert_eq!(o.status.code(), Some(0));
    for f in ["trajectory.csv", "events.json", "front.svg", "report.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}
