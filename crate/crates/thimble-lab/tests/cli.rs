use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thimble-lab")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(3));
    assert_eq!(run(&["periods", "--j", "0"]).status.code(), Some(3));
    assert_eq!(run(&["periods", "--j", "0", "--q", "1"]).status.code(), Some(3));
    assert_eq!(run(&["periods", "--j", "4", "--q", "1,0"]).status.code(), Some(3));
    assert_eq!(run(&["--tol", "-1", "periods", "--j", "0", "--q", "1,0"]).status.code(), Some(3));
    assert_eq!(run(&["--format", "svg", "monodromy", "--around", "A"]).status.code(), Some(3));
    assert_eq!(run(&["verify", "--samples", "0"]).status.code(), Some(3));
    assert_eq!(run(&["verify", "--suite", "everything"]).status.code(), Some(3));
    assert_eq!(run(&["--format", "json", "figure", "--name", "cps"]).status.code(), Some(3));
    assert_eq!(run(&["--format", "svg", "figure", "--name", "affine-grid"]).status.code(), Some(3));
}

#[test]
fn periods_document() {
    let out = run(&["periods", "--j", "0", "--q", "0,0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "periods");
    let im: f64 = v["value"]["im"].as_str().unwrap().parse().unwrap();
    let re: f64 = v["value"]["re"].as_str().unwrap().parse().unwrap();
    assert!(im > 13.0 && re.abs() < 1e-9);
    for key in ["q", "value", "error", "n_evals"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn monodromy_document() {
    let v = json(&run(&["monodromy", "--around", "C"]));
    assert_eq!(v["matrix"], serde_json::json!([[-1, -4], [1, 3]]));
    assert_eq!(v["unipotent"], true);
}

#[test]
fn verify_reports_checks() {
    let out = run(&["verify", "--suite", "iso"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 4);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn grid_csv_shape() {
    let out = run(&["figure", "--name", "affine-grid", "--nx", "3", "--ny", "2", "--re-min", "-2", "--re-max", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "re,im,chamber,f_c,f_d,status");
    assert_eq!(lines.len(), 7);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 6));
}

#[test]
fn out_file_replaces_target() {
    let dir = std::env::temp_dir().join(format!("thimble-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cps.svg");
    std::fs::write(&path, "old").unwrap();
    let out = run(&["--out", path.to_str().unwrap(), "figure", "--name", "cps"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let svg = std::fs::read_to_string(&path).unwrap();
    assert!(svg.starts_with("<svg"));
    let leftovers = std::fs::read_dir(&dir).unwrap().count();
    assert_eq!(leftovers, 1);
    std::fs::remove_dir_all(&dir).unwrap();
}
