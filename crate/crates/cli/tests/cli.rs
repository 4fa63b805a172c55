use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn lamg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lamg"))
        .args(args)
        .env("LAMG_COLOR", "never")
        .output()
        .expect("run lamg")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write(dir: &Path, name: &str, src: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, src).unwrap();
    p.display().to_string()
}

#[test]
fn run_tag_match_and_mismatch() {
    let o = lamg(&["run", corpus("tagmatch.lamg").to_str().unwrap(), "--fuel", "100"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "value: ()");
    let o = lamg(&["run", corpus("mismatch.lamg").to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "error: \u{2127}");
}

#[test]
fn dynamism_prints_the_function_derivation() {
    let o = lamg(&["dynamism", "1 -> 1", "? -> ?"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "(tag(1) o id(1) -> tag(1) o id(1))");
    let o = lamg(&["dynamism", "?", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "unrelated");
}

#[test]
fn compile_output_runs_with_the_same_result() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tm.lamt");
    let o = lamg(&["compile", corpus("golden/tag_dn_pair.lamg").to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let first = fs::read_to_string(&out).unwrap();
    lamg(&["compile", corpus("golden/tag_dn_pair.lamg").to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(first, fs::read_to_string(&out).unwrap(), "compile output is deterministic");
    let check = lamg(&["check", out.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0), "{}", String::from_utf8_lossy(&check.stderr));
    let v = json(&lamg(&["run-typed", out.to_str().unwrap(), "--json"]));
    assert_eq!(v["outcome"], "value");
    assert_eq!(v["value"], "((), ())");
    assert!(v["unrolls"].as_u64().unwrap() >= 1);
}

#[test]
fn check_reports_types_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "g.lamg", "fun (x : ?) -> x");
    assert_eq!(stdout(&lamg(&["check", &good])).trim(), "? -> ?");
    let ill = write(dir.path(), "i.lamg", "() ()");
    let o = lamg(&["check", &ill]);
    assert_eq!(o.status.code(), Some(2));
    let bad = write(dir.path(), "b.lamg", "fun (x : ?) ->\n  <1 => > x");
    let o = lamg(&["check", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("b.lamg:2:"));
}

#[test]
fn approx_exit_codes_and_schema() {
    let dir = tempfile::tempdir().unwrap();
    let unit = write(dir.path(), "u.lamg", "()");
    let err = write(dir.path(), "e.lamg", "err : 1");
    let o = lamg(&["approx", &err, &unit, "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["verdict"], "holds");
    assert!(v.get("fuel_used").is_some() && v.get("samples").is_some());
    let o = lamg(&["approx", &unit, &err, "--json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(json(&o)["witness"].is_object());
}

#[test]
fn approx_is_inconclusive_when_one_side_diverges() {
    let dir = tempfile::tempdir().unwrap();
    let omega = fs::read_to_string(corpus("golden/omega.lamg")).unwrap();
    let diverge = write(dir.path(), "o.lamg", &omega);
    let tagged = write(dir.path(), "t.lamg", "<1 => ?> ()");
    let o = lamg(&["approx", &tagged, &diverge, "--fuel", "500", "--json"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&o)["cause"], "fuel");
}

#[test]
fn witness_replay_reproduces_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let f1 = write(dir.path(), "f1.lamg", "fun (x : ?) -> x");
    let f2 = write(dir.path(), "f2.lamg", "<1 -> 1 => ? -> ?> (fun (x : 1) -> x)");
    let w = dir.path().join("w.json");
    let first = lamg(&["approx", &f1, &f2, "--seed", "3", "--json", "--witness", w.to_str().unwrap()]);
    assert_eq!(first.status.code(), Some(1));
    let replay = lamg(&["replay", w.to_str().unwrap(), "--json"]);
    assert_eq!(replay.status.code(), Some(1));
    assert_eq!(json(&first), json(&replay));
}

#[test]
fn precision_checks_term_dynamism() {
    let dir = tempfile::tempdir().unwrap();
    let lo = write(dir.path(), "lo.lamg", "fun (x : 1) -> x");
    let hi = write(dir.path(), "hi.lamg", "fun (x : ?) -> x");
    let o = lamg(&["precision", &lo, &hi]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1 -> 1 <= ? -> ?");
    assert_eq!(lamg(&["precision", &hi, &lo]).status.code(), Some(1));
}

#[test]
fn props_report_is_consistent_and_stable() {
    let dir = tempfile::tempdir().unwrap();
    let wd = dir.path().join("w");
    let args = ["props", "retraction", "--seed", "7", "--count", "20", "--json", "--witness-dir", wd.to_str().unwrap()];
    let o = lamg(&args);
    assert_eq!(o.status.code(), Some(0));
    let mut v = json(&o);
    let total = ["holds", "fails", "inconclusive"].iter().map(|k| v[k].as_u64().unwrap()).sum::<u64>();
    assert_eq!(total, v["cases"].as_u64().unwrap());
    assert_eq!(v["config"]["seed"], 7);
    let mut again = json(&lamg(&args));
    v["wall_ms"] = Value::Null;
    again["wall_ms"] = Value::Null;
    assert_eq!(v, again);
}

#[test]
fn props_rejects_unknown_suites() {
    assert_eq!(lamg(&["props", "nope"]).status.code(), Some(2));
}

#[test]
fn suite_failure_files_replay() {
    let dir = tempfile::tempdir().unwrap();
    let failure = serde_json::json!({
        "suite": "retraction",
        "index": 4,
        "config": { "seed": 7, "max_type_depth": 3, "max_term_size": 24, "cast_probability": 0.3,
                    "fuel": 2000, "samples": 8, "err_probability": 0.02 },
        "summary": "",
        "reason": "",
        "witness": null
    });
    let path = write(dir.path(), "f.json", &failure.to_string());
    let o = lamg(&["replay", &path]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("holds"));
}

#[test]
fn gen_is_deterministic_and_typechecks() {
    let a = stdout(&lamg(&["gen", "--seed", "5", "--count", "6"]));
    assert_eq!(a, stdout(&lamg(&["gen", "--seed", "5", "--count", "6"])));
    let dir = tempfile::tempdir().unwrap();
    let o = lamg(&["gen", "--seed", "5", "--count", "6", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let mut n = 0;
    for e in fs::read_dir(dir.path()).unwrap() {
        let p = e.unwrap().path();
        assert_eq!(lamg(&["check", p.to_str().unwrap()]).status.code(), Some(0), "{}", p.display());
        n += 1;
    }
    assert_eq!(n, 6);
}
