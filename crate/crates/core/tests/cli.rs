use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_distmorse");
const CIRCLE3: &str = r#"{"nvars":2,"terms":[{"exp":[2,0],"coef":1},{"exp":[0,2],"coef":1},{"exp":[0,0],"coef":-9}]}"#;
const SHIFTED: &str = r#"{"nvars":2,"terms":[{"exp":[2,0],"coef":1},{"exp":[0,2],"coef":1},{"exp":[1,0],"coef":-2}]}"#;
const SPHERE: &str = r#"{"nvars":3,"terms":[{"exp":[2,0,0],"coef":1},{"exp":[0,2,0],"coef":1},{"exp":[0,0,2],"coef":1},{"exp":[0,0,0],"coef":-1}]}"#;

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("DISTMORSE_THREADS", "1")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn degree_bound_prints_the_integer() {
    let o = run(&["degree-bound", "--n", "5", "--k", "6", "--r", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "4");
}

#[test]
fn circle_pair_analysis_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(&dir, "x.json", CIRCLE3);
    let y = write(&dir, "y.json", SHIFTED);
    let report = dir.path().join("r.json");
    let o = run(&[
        "analyze",
        "--surface",
        s(&x),
        "--target",
        s(&y),
        "--x-topology",
        "circle",
        "--xy-topology",
        "empty",
        "--no-meta",
        "--out",
        s(&report),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("\"seed\""));

    let v = run(&["verify", "--report", s(&report)]);
    assert_eq!(v.status.code(), Some(0));
    assert!(
        stdout(&v).contains("euler identity holds: 0 = 0"),
        "{}",
        stdout(&v)
    );

    let csv = dir.path().join("plot.csv");
    let p = run(&["plotdata", "--report", s(&report), "--out", s(&csv)]);
    assert_eq!(p.status.code(), Some(0));
    let csv = std::fs::read_to_string(&csv).unwrap();
    assert!(csv.starts_with("x,y,which,k,iota\n"));
    assert_eq!(csv.lines().filter(|l| l.contains(",crit,")).count(), 2);
    assert!(csv.lines().any(|l| l.contains(",X,")) && csv.lines().any(|l| l.contains(",Y,")));

    // Rerunning the stored inputs reproduces the report byte for byte.
    let again = dir.path().join("again.json");
    let o = run(&[
        "analyze",
        "--request",
        s(&report),
        "--no-meta",
        "--out",
        s(&again),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&again).unwrap(), text);
}

#[test]
fn circle_and_point_duality() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(&dir, "x.json", CIRCLE3);
    let xy = dir.path().join("xy.json");
    let yx = dir.path().join("yx.json");
    let o = run(&[
        "analyze",
        "--surface",
        s(&x),
        "--point",
        "5,1",
        "--x-topology",
        "circle",
        "--y-topology",
        "point",
        "--xy-topology",
        "empty",
        "--no-meta",
        "--out",
        s(&xy),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let o = run(&[
        "analyze",
        "--domain-point",
        "5,1",
        "--target",
        s(&x),
        "--x-topology",
        "point",
        "--y-topology",
        "circle",
        "--xy-topology",
        "empty",
        "--no-meta",
        "--out",
        s(&yx),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v = run(&["verify", "--report-xy", s(&xy), "--report-yx", s(&yx)]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(stdout(&v).trim(), "duality holds: 1 = 1");
}

#[test]
fn failing_identity_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(&dir, "x.json", CIRCLE3);
    let y = write(&dir, "y.json", SHIFTED);
    let report = dir.path().join("r.json");
    // A circle passed off as a sphere: χ = 2 cannot match the census.
    let o = run(&[
        "analyze",
        "--surface",
        s(&x),
        "--target",
        s(&y),
        "--x-topology",
        "sphere",
        "--xy-topology",
        "empty",
        "--no-meta",
        "--out",
        s(&report),
    ]);
    assert_ne!(o.status.code(), Some(1));
    let v = run(&["verify", "--report", s(&report)]);
    assert_eq!(v.status.code(), Some(2));
    assert!(stdout(&v).contains("fails"));
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(&dir, "bad.json", r#"{"nvars":2,"terms":[{"exp":[1]"#);
    let y = write(&dir, "y.json", SHIFTED);
    let o = run(&["analyze", "--surface", s(&bad), "--target", s(&y)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.json"));

    let dup = write(&dir, "dup.json", r#"{"dim":2,"points":[[1,1],[1,1]]}"#);
    let o = run(&["analyze", "--ambient", "--cloud", s(&dup)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("general position"));

    let o = run(&["degree-bound", "--n", "0", "--k", "1", "--r", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn plotdata_rejects_non_planar_reports() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(&dir, "x.json", SPHERE);
    let report = dir.path().join("r.json");
    let o = run(&[
        "analyze",
        "--surface",
        s(&x),
        "--point",
        "3,0,0",
        "--no-meta",
        "--out",
        s(&report),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let p = run(&["plotdata", "--report", s(&report)]);
    assert_eq!(p.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&p.stderr).contains("planar"));
}

#[test]
fn ellipse_bottleneck_is_the_centre() {
    let dir = tempfile::tempdir().unwrap();
    let e = write(
        &dir,
        "e.json",
        r#"{"nvars":2,"terms":[{"exp":[2,0],"coef":0.25},{"exp":[0,2],"coef":1},{"exp":[0,0],"coef":-1}]}"#,
    );
    let o = run(&["bottlenecks", "--target", s(&e), "--k", "1", "--no-meta"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cps = r["critical_points"].as_array().unwrap();
    assert_eq!(cps.len(), 1);
    // Witnesses (0, ±1) on the minor axis; along the major axis the distance
    // falls off, so the point is a maximum of the two-sheet distance.
    let c = &cps[0];
    assert_eq!((c["k"].as_u64(), c["iota"].as_u64()), (Some(1), Some(1)));
    assert!((c["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(c["x"]
        .as_array()
        .unwrap()
        .iter()
        .all(|v| v.as_f64().unwrap().abs() < 1e-9));
}
