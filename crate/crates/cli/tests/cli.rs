use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ergolab_cli::{emit_csv, Report, Scenario};
use serde_json::Value;

fn ergolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergolab")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn summary(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("summary json on stdout")
}

const SANDWICH: &str = r#"{"construct":"sandwich","space":{"circle":{"base":2}},
 "f":{"hat":{"center":"1/2","half_width":"1/2"}},"x":"0","y":"1/3","K":["4/9","2/3"],"horizon":96}"#;

#[test]
fn good_scenario_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.json", SANDWICH);
    let out = ergolab(&["run", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&out);
    assert_eq!(s["pass"], true);
    assert_eq!(s["scenario"]["construct"], "sandwich");
    assert_eq!(s["clusters"].as_array().unwrap().len(), 2);
}

#[test]
fn zero_denominator_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.json", r#"{"construct":"trace","delta":"1/0","segments":[]}"#);
    assert_eq!(ergolab(&["run", p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown.json", r#"{"construct":"ergopt","f":{"indicator":"0"},"colour":"red"}"#),
        ("kind.json", r#"{"construct":"teleport"}"#),
        ("nojson.json", "not json"),
        ("point.json", r#"{"construct":"trace","delta":"1/2","segments":[{"a":0,"b":1,"x":"2|0"}]}"#),
        ("spacing.json", r#"{"construct":"trace","delta":"1/4","segments":[{"a":0,"b":3,"x":"|0"},{"a":4,"b":5,"x":"|1"}]}"#),
    ];
    for (name, body) in cases {
        let p = write(dir.path(), name, body);
        assert_eq!(ergolab(&["run", p.to_str().unwrap()]).status.code(), Some(2), "{name}");
    }
    assert_eq!(ergolab(&["run", "/nonexistent/scenario.json"]).status.code(), Some(2));
    assert_eq!(ergolab(&["example", "nope"]).status.code(), Some(2));
    assert_eq!(ergolab(&["example", "give-and-take", "--horizon", "2"]).status.code(), Some(2));
    assert_eq!(ergolab(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn subcommand_must_match_construct() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.json", SANDWICH);
    assert_eq!(ergolab(&["chase", p.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(ergolab(&["sandwich", p.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn failed_assertion_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "o.json",
        r#"{"construct":"oscillate","f":{"indicator":"0"},"horizon":600,"tolerance":"1/1000000"}"#,
    );
    let out = ergolab(&["run", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(summary(&out)["pass"], false);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.json", SANDWICH);
    let mut seen = Vec::new();
    for (i, threads) in ["1", "2", "1"].iter().enumerate() {
        let csv = dir.path().join(format!("{i}.csv"));
        let js = dir.path().join(format!("{i}.json"));
        let out_arg = format!("{},{}", csv.display(), js.display());
        let out = ergolab(&["sandwich", p.to_str().unwrap(), "--threads", threads, "--out", &out_arg]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
        seen.push((fs::read(&csv).unwrap(), fs::read(&js).unwrap()));
    }
    assert!(seen.windows(2).all(|w| w[0] == w[1]));
    let csv = String::from_utf8(seen[0].0.clone()).unwrap();
    assert!(csv.starts_with("k,i_k,target,t_k,r_k,s_k,value,value_decimal,bound,certified\n"));
    assert_eq!(csv.lines().count(), 97);
}

#[test]
fn ergopt_indicator_of_01_has_maximum_one_half() {
    // oracle: best cyclic frequency of "01" over all periodic words up to length 10
    let mut best = (0u32, 1u32);
    for len in 1..=10u32 {
        for w in 0u32..(1 << len) {
            let bit = |i: u32| (w >> (i % len)) & 1;
            let hits = (0..len).filter(|&i| bit(i) == 0 && bit(i + 1) == 1).count() as u32;
            if hits * best.1 > best.0 * len {
                best = (hits, len);
            }
        }
    }
    assert_eq!(best.0 * 2, best.1);
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "e.json", r#"{"construct":"ergopt","f":{"indicator":"01"},"horizon":24}"#);
    let out = ergolab(&["ergopt", p.to_str().unwrap()]);
    let s = summary(&out);
    assert_eq!(s["abar"], "1/2");
    assert_eq!(s["aunder"], "0");
    assert_eq!(s["checks"]["sandwich_holds"], true);
}

#[test]
fn examples_pass() {
    for name in ["give-and-take", "cant-take-limsups"] {
        let out = ergolab(&["example", name, "--horizon", "48"]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert_eq!(summary(&out)["pass"], true);
    }
    let out = ergolab(&["example", "cant-take-limsups", "--horizon", "40"]);
    let rows = summary(&out)["running_max"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r["ok"] == true));
}

#[test]
fn oscillate_from_targets_file_writes_prefix_and_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "targets.json", r#"[{"orbit":"0"},{"orbit":"1"}]"#);
    let (prefix, csv) = (dir.path().join("prefix.txt"), dir.path().join("cp.csv"));
    let out_arg = format!("{},{}", prefix.display(), csv.display());
    let out = ergolab(&[
        "oscillate", "--targets", t.to_str().unwrap(), "--poly", "t,t^2", "--horizon", "1500", "--out", &out_arg,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let p = fs::read_to_string(&prefix).unwrap();
    assert!(p.trim_end().chars().all(|c| c == '0' || c == '1'));
    let s = summary(&out);
    assert_eq!(s["levels_certified"], 4);
    assert_eq!(p.trim_end().len() as u64, s["prefix_length"].as_u64().unwrap());
    let cp = fs::read_to_string(&csv).unwrap();
    assert!(cp.starts_with("l,pi,k,n,target,dist_lo,dist_hi,dist_hi_decimal,bound,certified\n"));
    assert!(cp.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn trace_fuzz_depends_only_on_seed() {
    let a = ergolab(&["trace", "--fuzz", "60", "--seed", "11"]);
    let b = ergolab(&["trace", "--fuzz", "60", "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(summary(&a)["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn trace_scenario_reports_the_point() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "t.json",
        r#"{"construct":"trace","delta":"1/4","segments":[{"a":0,"b":3,"x":"|0"},{"a":7,"b":10,"x":"|1"}]}"#,
    );
    let s = summary(&ergolab(&["trace", p.to_str().unwrap()]));
    assert_eq!(s["y"], "0000000111111|0");
    assert_eq!(s["delta_tracing"], true);
}

#[test]
fn decay_check_geometric_radii() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "d.json", r#"{"construct":"decay-check","radii":["1/4","1/8"],"deltas":["1/10"],"horizon":12}"#);
    let (csv, js) = (dir.path().join("d.csv"), dir.path().join("d.json.out"));
    let out = ergolab(&["decay-check", p.to_str().unwrap(), "--out", &format!("{},{}", csv.display(), js.display())]);
    assert_eq!(out.status.code(), Some(0));
    let s: Value = serde_json::from_str(&fs::read_to_string(js).unwrap()).unwrap();
    assert_eq!(s["consistent_with_decay"], true);
    assert_eq!(s["max_radius_at_horizon"], "1/16777216");
    let bad = write(dir.path(), "b.json", r#"{"construct":"decay-check","radii":["3/2"],"deltas":["1/10"]}"#);
    assert_eq!(ergolab(&["run", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn empty_series_is_header_only() {
    assert_eq!(emit_csv(&["k", "value"], &[]), "k,value\n");
}

#[test]
fn summary_is_last_file() {
    let r = Report { artifacts: vec![], summary: serde_json::json!({"pass": true}), pass: true };
    let files = r.files();
    assert_eq!(files.len(), 1);
    assert_eq!(files[0].role, "summary");
    assert!(files[0].content.ends_with("}\n"));
}

#[test]
fn scenario_parser_rejects_unknown_keys() {
    assert!(Scenario::parse(r#"{"construct":"chase","horizonn":3}"#).is_err());
    assert!(Scenario::parse(r#"{"construct":"chase","horizon":3}"#).is_ok());
}

#[test]
fn shift_sandwich_reachable_and_unreachable_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.json", r#"{"construct":"sandwich","f":{"indicator":"1"},"x":"|0","y":"|1","K":["1/2"],"horizon":48}"#);
    let out = ergolab(&["run", ok.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(summary(&out)["clusters"][0]["center"], "1/2");
    // uniform cylinder ratios are 1/(1+2^j); 3/4-ish weights cannot be met within 1/k
    let bad = write(dir.path(), "bad.json", r#"{"construct":"sandwich","f":{"indicator":"1"},"x":"|0","y":"|1","K":[["1/4","3/4"]],"horizon":64}"#);
    assert_eq!(ergolab(&["run", bad.to_str().unwrap()]).status.code(), Some(1));
}
