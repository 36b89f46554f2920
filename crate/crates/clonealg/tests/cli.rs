use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const S2: &str = r#"{"carrier":2,"ops":{"s":{"arity":2,"table":[0,0,0,1]}}}"#;
const CHAIN3: &str = r#"{"carrier":3,"ops":{"s":{"arity":2,"table":[0,0,0,0,1,1,0,1,2]}}}"#;
const XOR2: &str = r#"{"carrier":2,"ops":{"s":{"arity":2,"table":[0,1,1,0]}}}"#;
const PARITY: &str = r#"{"carrier":2,"trace":{"kind":"basic","bases":[{"cycle":[1]}]},
    "ops":{"s":{"kind":"programmatic","builtin":"parity"}}}"#;

fn clonealg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clonealg")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = clonealg(&all);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("json report")
}

struct Files(TempDir);

impl Files {
    fn new() -> Files {
        let dir = TempDir::new().unwrap();
        for (name, text) in [("s2.json", S2), ("chain3.json", CHAIN3), ("xor2.json", XOR2), ("parity.json", PARITY)] {
            std::fs::write(dir.path().join(name), text).unwrap();
        }
        Files(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }
}

#[test]
fn compose_selects_an_argument() {
    let o = clonealg(&["compose", "-n", "2", "e1", "a", "b"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "a");
}

#[test]
fn star_of_a_binary_application() {
    let o = clonealg(&["translate", "--star", "s(v1,v2)"]);
    assert_eq!(stdout(&o).trim(), "s");
    let o = clonealg(&["translate", "--star", "s(v1,v2)", "--rho", "s:2"]);
    assert_eq!(stdout(&o).trim(), "s");
}

#[test]
fn topo_birkhoff_on_semilattice_and_chain() {
    let f = Files::new();
    let r = json(&["topo-birkhoff", "-A", &f.arg("s2.json"), "-B", &f.arg("chain3.json")]);
    assert_eq!(r["answer"], "yes");
    assert_eq!(r["exactness"], "exact");
    assert_eq!(r["verb"], "topo-birkhoff");
}

#[test]
fn reports_are_byte_identical() {
    let f = Files::new();
    let args = ["et-member", "-A", &f.arg("s2.json"), "-B", &f.arg("xor2.json"), "--format", "json"];
    let a = clonealg(&args);
    let b = clonealg(&args);
    assert_eq!(a.stdout, b.stdout);
    let keys: Vec<String> = match serde_json::from_slice::<Value>(&a.stdout).unwrap() {
        Value::Object(m) => m.keys().cloned().collect(),
        _ => panic!("not an object"),
    };
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn digest_follows_contents_not_paths() {
    let f = Files::new();
    std::fs::write(f.path("copy.json"), S2).unwrap();
    let a = json(&["hsp", "-A", &f.arg("s2.json"), "-B", &f.arg("chain3.json")]);
    let b = json(&["hsp", "-A", &f.arg("copy.json"), "-B", &f.arg("chain3.json")]);
    let c = json(&["hsp", "-A", &f.arg("s2.json"), "-B", &f.arg("xor2.json")]);
    assert_eq!(a["inputs_digest"], b["inputs_digest"]);
    assert_ne!(a["inputs_digest"], c["inputs_digest"]);
}

#[test]
fn hsp_answers_both_ways() {
    let f = Files::new();
    let yes = json(&["hsp", "-A", &f.arg("s2.json"), "-B", &f.arg("chain3.json")]);
    assert_eq!(yes["answer"], "yes");
    let no = json(&["hsp", "-A", &f.arg("s2.json"), "-B", &f.arg("xor2.json")]);
    assert_eq!(no["answer"], "no");
    assert!(no["witness"]["separator"].is_string());
}

#[test]
fn free_algebra_and_clone_levels() {
    let f = Files::new();
    assert_eq!(json(&["free-algebra", "-A", &f.arg("s2.json"), "-k", "2"])["answer"], 3);
    assert_eq!(json(&["clone-gen", "-A", &f.arg("s2.json"), "--arity", "2"])["answer"], 3);
    assert_eq!(json(&["clone-gen", "-A", &f.arg("s2.json"), "--arity", "3"])["answer"], 7);
}

#[test]
fn generated_clone_algebras_validate() {
    let f = Files::new();
    let out = f.arg("ca.json");
    json(&["clone-gen", "-A", &f.arg("xor2.json"), "--window", "2", "--out", &out]);
    let r = json(&["validate-ca", "-A", &out, "--limit", "3"]);
    assert_eq!(r["answer"], "yes");
    assert_eq!(r["certificate"]["violations"], 0);
}

#[test]
fn parity_dimension_is_open() {
    let f = Files::new();
    let r = json(&["dim", "-A", &f.arg("parity.json"), "--symbol", "s"]);
    assert_eq!(r["answer"], ">=8");
    assert_eq!(r["exactness"], "probed");
    assert_eq!(json(&["dim", "-A", &f.arg("s2.json"), "--symbol", "s"])["answer"], 2);
}

#[test]
fn identities_and_hyperidentities() {
    let f = Files::new();
    assert_eq!(json(&["check-id", "-A", &f.arg("s2.json"), "s(e1,e1) = e1"])["answer"], "yes");
    let no = json(&["check-id", "-A", &f.arg("xor2.json"), "s(e1,e1) = e1"]);
    assert_eq!(no["answer"], "no");
    assert!(no["witness"]["thread"].is_object());
    // weakly, x(e1,e2) becomes a fresh designated element on both sides
    let weak = json(&["check-hyperid", "-A", &f.arg("s2.json"), "--weak", "x(e1,e2) = x(e2,e1)"]);
    assert_eq!(weak["answer"], "yes");
    let full = json(&["check-hyperid", "-A", &f.arg("s2.json"), "--full", "x(e1,e2) = x(e2,e1)"]);
    assert_eq!(full["answer"], "no");
    assert!(full["witness"]["assignment"]["x"].is_string());
    let weak = json(&["check-hyperid", "-A", &f.arg("s2.json"), "--weak", "x(e1,e1) = e1"]);
    assert_eq!(weak["answer"], "no");
}

#[test]
fn eval_on_a_patch() {
    let f = Files::new();
    let r = json(&["eval", "-A", &f.arg("s2.json"), "s(e1,e2)", "--patch", "1,1"]);
    assert_eq!(r["answer"], 1);
    let r = json(&["eval", "-A", &f.arg("parity.json"), "s", "--thread", r#"{"cycle":[1],"patch":{"3":0}}"#]);
    assert_eq!(r["answer"], 0);
}

#[test]
fn exit_codes() {
    let f = Files::new();
    // usage errors
    assert_eq!(clonealg(&["bogus"]).status.code(), Some(1));
    assert_eq!(clonealg(&["hsp", "-A", &f.arg("s2.json")]).status.code(), Some(1));
    assert_eq!(clonealg(&["translate", "s(v1)"]).status.code(), Some(1));
    // schema violations name the offending path
    std::fs::write(f.path("bad.json"), r#"{"carrier":2,"ops":{"s":{"arity":2,"table":[0,0,0]}}}"#).unwrap();
    let o = clonealg(&["hsp", "-A", &f.arg("bad.json"), "-B", &f.arg("s2.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`s`"));
    // a closure larger than the cap
    let o = clonealg(&["clone-gen", "-A", &f.arg("chain3.json"), "--window", "3", "--cap", "5"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn every_module_passes_its_self_test() {
    for verb in ["parse", "hsp", "eval", "axioms", "topo-birkhoff"] {
        let one = clonealg(&[verb, "--selftest", "--seed", "3", "--format", "json"]);
        let four = clonealg(&[verb, "--selftest", "--seed", "3", "--jobs", "4", "--format", "json"]);
        assert_eq!(one.status.code(), Some(0), "{verb}: {}", stdout(&one));
        assert_eq!(one.stdout, four.stdout, "{verb}");
    }
}

#[test]
fn free_hyperterms_satisfy_the_axioms() {
    let r = json(&["axioms"]);
    assert_eq!(r["answer"], "yes");
    assert!(r["certificate"]["terms"].as_u64().unwrap() > 10);
}

