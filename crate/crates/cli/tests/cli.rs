use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn hicomm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hicomm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> (i32, Value) {
    let out = hicomm(args);
    let code = out.status.code().unwrap();
    let v = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", String::from_utf8_lossy(&out.stderr)));
    (code, v)
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn sym3_commutator_by_both_methods() {
    let (code, v) = report(&["commutator", "zoo:sym3", "--congs", "2,2", "--method", "both"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["agree"], true);
    assert_eq!(v["result"]["forks"]["blocks"], "0,3,4|1,2,5");
    assert_eq!(v["result"]["termcond"], v["result"]["forks"]);
}

#[test]
fn dihedral4_has_degree_two() {
    let (code, v) = report(&["supernilpotence", "zoo:dihedral4", "--kmax", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["degree"], 2);
}

#[test]
fn cyclic4_passes_the_hc_suite() {
    let (code, v) = report(&["hc-verify", "zoo:cyclic(4)", "--n", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["passed"], true);
    let laws = v["result"]["laws"].as_array().unwrap();
    assert_eq!(laws.len(), 8);
    assert!(laws.iter().all(|l| l["failures"] == 0));
}

#[test]
fn sym3_has_three_congruences() {
    let (code, v) = report(&["con", "zoo:sym3"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["count"], 3);
    assert_eq!(v["result"]["congruences"][1]["blocks"], "0,3,4|1,2,5");
}

#[test]
fn block_notation_matches_indices() {
    let (_, by_index) = report(&["delta", "zoo:klein4", "--congs", "1,2"]);
    let c1 = by_index["result"]["congs"][0]["blocks"].as_str().unwrap().to_string();
    let c2 = by_index["result"]["congs"][1]["blocks"].as_str().unwrap().to_string();
    let blocks = format!("{c1};{c2}");
    let (code, by_blocks) = report(&["delta", "zoo:klein4", "--congs-blocks", &blocks]);
    assert_eq!(code, 0);
    assert_eq!(by_index["result"], by_blocks["result"]);
    assert_eq!(by_blocks["result"]["forks_agree"], true);
}

#[test]
fn z2_delta_lists_even_tuples() {
    let (code, v) = report(&["delta", "zoo:cyclic(2)", "--congs", "1,1", "--tuples"]);
    assert_eq!(code, 0);
    let tuples = v["result"]["tuples"].as_array().unwrap();
    assert_eq!(tuples.len(), 8);
    for t in tuples {
        let sum: u64 = t.as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).sum();
        assert_eq!(sum % 2, 0);
    }
}

#[test]
fn algebra_file_with_malcev_term() {
    let path = scratch(
        "z2_q.json",
        r#"{"name":"z2","size":2,"operations":[{"symbol":"+","arity":2,"table":[0,1,1,0]}],"malcev_term":"(+ x0 (+ x1 x2))"}"#,
    );
    let (code, v) = report(&["cube-term", path.to_str().unwrap(), "--n", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["malcev_term"], "(+ x0 (+ x1 x2))");
    assert_eq!(v["result"]["check"]["passed"], true);
}

#[test]
fn file_round_trip_through_zoo() {
    let out = hicomm(&["zoo", "ring_z(4)"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let path = scratch("ring4.json", &text);
    let (_, from_file) = report(&["con", path.to_str().unwrap()]);
    let (_, from_zoo) = report(&["con", "zoo:ring_z(4)"]);
    assert_eq!(from_file["algebra"], from_zoo["algebra"]);
    assert_eq!(from_file["result"], from_zoo["result"]);
    let again = hicomm(&["zoo", "ring_z(4)"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn reports_are_deterministic() {
    let args = ["largest-clone", "zoo:cyclic(3)", "--congs", "1,1", "--samples", "3", "--seed", "7"];
    let a = hicomm(&args);
    let b = hicomm(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let mut timed = args.to_vec();
    timed.push("--timings");
    let (_, mut v) = report(&timed);
    assert!(v["timings"]["total_ms"].is_number());
    v.as_object_mut().unwrap().remove("timings");
    let (_, plain) = report(&args);
    assert_eq!(v["result"], plain["result"]);
    assert_eq!(v["stats"], plain["stats"]);
}

#[test]
fn text_format() {
    let out = hicomm(&["malcev", "zoo:klein4", "--format", "text"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("found: true"), "{text}");
}

#[test]
fn zoo_listing() {
    let (code, v) = report(&["zoo"]);
    assert_eq!(code, 0);
    let names = v["algebras"].as_array().unwrap();
    assert!(names.iter().any(|n| n == "quaternion8"));
    assert!(names.iter().any(|n| n == "semilattice3"));
}

#[test]
fn constants_expand_the_algebra() {
    let (code, v) = report(&["con", "zoo:cyclic(3)", "--with-constants"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["count"], 2);
    let out = hicomm(&["zoo", "cyclic(3)", "--with-constants"]);
    let file: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(file["operations"].as_array().unwrap().len(), 6);
}

#[test]
fn exit_one_on_property_failure() {
    let (code, v) = report(&["commutator", "zoo:semilattice3", "--congs", "1,1", "--method", "forks"]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "property-failure");
    let (code, _) = report(&["cube-term", "zoo:set(3)", "--n", "2"]);
    assert_eq!(code, 1);
}

#[test]
fn exit_two_on_usage_errors() {
    assert_eq!(hicomm(&["con", "zoo:nonsense"]).status.code(), Some(2));
    assert_eq!(hicomm(&["commutator", "zoo:sym3", "--congs", "9,9"]).status.code(), Some(2));
    assert_eq!(hicomm(&["commutator", "zoo:sym3"]).status.code(), Some(2));
    assert_eq!(hicomm(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(hicomm(&["delta", "zoo:cyclic(4)", "--congs-blocks", "0,1|2|3"]).status.code(), Some(2));
    let short = scratch(
        "short.json",
        r#"{"name":"bad","size":2,"operations":[{"symbol":"+","arity":2,"table":[0,1,1]}]}"#,
    );
    let (code, v) = report(&["con", short.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(v["error"]["message"].as_str().unwrap().contains("operations[0]"));
    let wrong_q = scratch(
        "wrong_q.json",
        r#"{"name":"z2","size":2,"operations":[{"symbol":"+","arity":2,"table":[0,1,1,0]}],"malcev_term":"(+ x0 x1)"}"#,
    );
    assert_eq!(hicomm(&["con", wrong_q.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn exit_three_on_resource_limits() {
    let (code, v) = report(&["delta", "zoo:cyclic(4)", "--congs", "2,2,2", "--max-tuples", "50"]);
    assert_eq!(code, 3);
    assert_eq!(v["error"]["kind"], "resource-limit");
}
