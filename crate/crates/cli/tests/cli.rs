use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nichols")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    });
    (out.status.code().unwrap(), v)
}

#[test]
fn jordan_hilbert_series() {
    let (code, v) = json(&["compute", "--family", "jordan", "--k", "1", "--max-degree", "10"]);
    assert_eq!(code, 0);
    assert_eq!(v["dims"], serde_json::json!([1, 2, 3, 4, 3, 2, 1]));
    assert_eq!(v["status"], "finite");
    assert_eq!(v["total"], 16);
}

#[test]
fn truncated_compute_exits_3() {
    let out = run(&["compute", "--family", "lstr", "--max-degree", "5"]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["dims"], serde_json::json!([1, 3, 6, 11, 15, 18]));
}

#[test]
fn table_row_with_auto_field() {
    let (code, v) = json(&["table1", "--row", "lstr", "--p", "ord:1", "--q22", "int:1", "--a", "ord:3", "--k", "auto"]);
    assert_eq!(code, 0);
    assert_eq!(v["total"], 256);
    assert_eq!(v["pass"], true);
    assert_eq!(v["field"]["k"], 2);
}

#[test]
fn auto_field_is_least_containing_all_orders() {
    let (_, v) = json(&["dynkin", "--family", "lstr", "--p", "ord:3", "--q22", "ord:5", "--a", "int:1"]);
    // lcm(3, 5) = 15 divides 2^4 - 1
    assert_eq!(v["diagram"]["field"]["k"], 4);
    let (_, v) = json(&["dynkin", "--family", "lstr", "--p", "ord:7", "--q22", "ord:3", "--a", "int:1"]);
    assert_eq!(v["diagram"]["field"]["k"], 6);
}

#[test]
fn lstr_diagram_is_a_triangle() {
    let (code, v) = json(&["dynkin", "--family", "lstr", "--p", "ord:3", "--q22", "ord:5", "--a", "int:1", "--k", "auto"]);
    assert_eq!(code, 0);
    let d = &v["diagram"];
    assert_eq!(d["vertices"].as_array().unwrap().len(), 3);
    let edges = d["edges"].as_array().unwrap();
    assert_eq!(edges.len(), 3);
    assert!(edges.iter().all(|e| e["label"] == edges[0]["label"]));
    assert_eq!(v["connected"], true);
}

#[test]
fn json_round_trips_byte_for_byte() {
    for args in [
        &["dynkin", "--family", "pale", "--p", "ord:3", "--q22", "ord:3"][..],
        &["compute", "--family", "pale", "--max-degree", "8"][..],
        &["table1", "--row", "pale"][..],
    ] {
        let out = run(args);
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        let mut again = serde_json::to_string_pretty(&v).unwrap();
        again.push('\n');
        assert_eq!(again.as_bytes(), &out.stdout[..], "{args:?}");
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "--family", "lstr", "--a", "int:1", "--fuzz", "12", "--seed", "99"];
    let first = run(&args);
    assert_eq!(first.status.code(), Some(0));
    for _ in 0..2 {
        assert_eq!(run(&args).stdout, first.stdout);
    }
}

#[test]
fn writes_to_file() {
    let path = std::env::temp_dir().join(format!("nichols-cli-{}.json", std::process::id()));
    let out = run(&["compute", "--family", "jordan", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["total"], 16);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["compute", "--family", "jordan", "--q", "int:1"]), 2);
    assert_eq!(code(&["compute", "--family", "nope"]), 2);
    assert_eq!(code(&["compute", "--family", "lstr", "--p", "ord:4"]), 2);
    assert_eq!(code(&["table1", "--row", "poseidon"]), 3);
    assert_eq!(code(&["verify", "--family", "diagonal", "--q", "int:1,int:1;int:1,int:1"]), 2);
    assert_eq!(code(&["boson", "--family", "lstr", "--orders", "2,2"]), 0);
    assert_eq!(code(&["boson", "--family", "lstr", "--orders", "3,6"]), 2);
    assert_eq!(code(&["boson", "--family", "pale", "--p", "int:1", "--q22", "ord:3", "--orders", "1,6"]), 1);
}

#[test]
fn oracle_agrees_with_engine() {
    let (code, v) = json(&["oracle", "--family", "pale", "--p", "ord:3", "--q22", "ord:3", "--max-degree", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["pass"], true);
    assert_eq!(v["degrees"].as_array().unwrap().len(), 5);
}

#[test]
fn split_passes_for_small_rows() {
    for args in [&["split", "--family", "lstr"][..], &["split", "--family", "pale", "--p", "ord:3", "--q22", "ord:3"][..]] {
        let (code, v) = json(args);
        assert_eq!(code, 0, "{args:?}");
        assert_eq!(v["pass"], true);
        assert!(v["factorization"]["Ok"].is_object());
    }
}
