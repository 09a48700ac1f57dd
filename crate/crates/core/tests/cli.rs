//! The `measure` binary end to end.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

const PROGRAM: &str = "family temperature kind affine
scale C of temperature
scale F of temperature offset -160/9 factor 5/9
let t1 = 10 @C
let t2 = 20 @C
let t3 = 35 @C
check (t2 - t1) / (t3 - t1)
check t1 / t2
";

const DECLARATIONS: &str = "family temperature kind affine
scale C of temperature
scale F of temperature offset -160/9 factor 5/9
family mass kind linear
scale kg of mass
";

fn measure(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_measure"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("prog.msr"), PROGRAM).unwrap();
    std::fs::write(dir.path().join("decl.msr"), DECLARATIONS).unwrap();
    std::fs::write(
        dir.path().join("ok.msr"),
        format!("{DECLARATIONS}check 1 @C - 2 @F\n"),
    )
    .unwrap();
    std::fs::write(
        dir.path().join("temps.csv"),
        "day,temp\nmon,10\ntue,20\nwed,30\n",
    )
    .unwrap();
    dir
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

#[test]
fn check_reports_sort_errors_with_exit_one() {
    let dir = workspace();
    let o = measure(&["check", "prog.msr"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("E_POINT_RATIO"), "{err}");
    assert!(err.contains("line 8"), "{err}");
    let o = measure(&["check", "ok.msr"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "ok\n");
}

#[test]
fn convert_freezing_point() {
    let dir = workspace();
    let o = measure(
        &[
            "convert",
            "0",
            "--from",
            "C",
            "--to",
            "F",
            "--registry",
            "decl.msr",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "32");
    let o = measure(
        &[
            "convert",
            "10",
            "--from",
            "C",
            "--to",
            "F",
            "--difference",
            "--registry",
            "decl.msr",
        ],
        dir.path(),
    );
    assert_eq!(stdout(&o).trim(), "18");
    let o = measure(
        &[
            "convert",
            "-40",
            "--from",
            "F",
            "--to",
            "C",
            "--json",
            "--registry",
            "decl.msr",
        ],
        dir.path(),
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() + 40.0).abs() < 1e-9);
    assert_eq!(v["sort"]["tag"], "point");
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = workspace();
    let o = measure(&["eval", "nowhere.msr"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    let dir = workspace();
    assert_eq!(measure(&["frobnicate"], dir.path()).status.code(), Some(2));
    let o = measure(&["meaningful", "--trials", "0", "prog.msr"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eval_reads_standard_input() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_measure"))
        .args(["eval", "--json", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(format!("{DECLARATIONS}check 0 @C\n").as_bytes())
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "ok");
    assert_eq!(v["results"][0]["sort"]["tag"], "point");
}

#[test]
fn out_writes_only_where_asked() {
    let dir = workspace();
    let before = listing(dir.path());
    for args in [
        &["eval", "--json", "ok.msr"][..],
        &["check", "prog.msr"],
        &["meaningful", "prog.msr"],
        &["export-registry", "decl.msr"],
    ] {
        measure(args, dir.path());
    }
    assert_eq!(
        listing(dir.path()),
        before,
        "a command wrote a file unasked"
    );

    let o = measure(
        &["eval", "--json", "--out", "result.json", "ok.msr"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(dir.path().join("result.json")).unwrap();
    let direct = stdout(&measure(&["eval", "--json", "ok.msr"], dir.path()));
    assert_eq!(written, direct);
}

#[test]
fn stats_json_lists_refusals() {
    let dir = workspace();
    let o = measure(
        &[
            "stats",
            "temps.csv",
            "--column",
            "temp",
            "--family",
            "temperature",
            "--scale",
            "C",
            "--role",
            "point",
            "--registry",
            "decl.msr",
            "--json",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let stats = v["stats"].as_array().unwrap();
    let find = |name: &str| stats.iter().find(|s| s["name"] == name).unwrap();
    assert_eq!(find("mean")["value"], 20.0);
    assert_eq!(find("cv")["status"], "refused");
    assert_eq!(find("cv")["code"], "E_POINT_RATIO");
    assert_eq!(find("sum")["code"], "E_POINT_SUM");

    let o = measure(
        &[
            "stats",
            "temps.csv",
            "--column",
            "temp",
            "--family",
            "mass",
            "--scale",
            "kg",
            "--role",
            "point",
            "--registry",
            "decl.msr",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("E_ROLE_KIND"));
}

#[test]
fn meaningful_json_has_a_replayable_witness() {
    let dir = workspace();
    let o = measure(
        &["meaningful", "--json", "--seed", "7", "prog.msr"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let verdicts = v["verdicts"].as_array().unwrap();
    assert_eq!(verdicts[0]["status"], "meaningful");
    assert_eq!(verdicts[1]["status"], "not_meaningful");
    let w = &verdicts[1]["witness"];
    let (p, q) = (w["p"].as_f64().unwrap(), w["q"].as_f64().unwrap());
    let replay = (p + q * 10.0) / (p + q * 20.0);
    assert!((replay - w["y_transformed"].as_f64().unwrap()).abs() < 1e-12);

    let seq = measure(
        &[
            "meaningful",
            "--json",
            "--seed",
            "7",
            "--sequential",
            "prog.msr",
        ],
        dir.path(),
    );
    assert_eq!(seq.stdout, o.stdout);
}

#[test]
fn export_registry_lists_scales() {
    let dir = workspace();
    let o = measure(&["export-registry", "decl.msr"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let names: Vec<&str> = v["scales"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["temperature.ref", "C", "F", "mass.ref", "kg"]);
}
