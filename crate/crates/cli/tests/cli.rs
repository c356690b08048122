use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmodal")).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let out = run(&all);
    (out.status.code().unwrap(), serde_json::from_slice(&out.stdout).expect("json output"))
}

#[test]
fn decide_exit_codes() {
    assert_eq!(code(&["decide", "--logic", "gk-box", "[](p->q) -> ([]p -> []q)"]), 0);
    assert_eq!(code(&["decide", "--logic", "gkf-diamond", "~~<>p -> <>~~p"]), 1);
    assert_eq!(code(&["decide", "--logic", "gk-diamond", "~~<>p -> <>~~p"]), 0);
    assert_eq!(code(&["decide", "--logic", "g", "p"]), 1);
    assert_eq!(code(&["decide", "--logic", "g", "p <= q ; q <= p"]), 0);
    assert_eq!(code(&["decide", "--logic", "g", "p &"]), 2);
    assert_eq!(code(&["decide", "--logic", "g", "[]p"]), 2);
    assert_eq!(code(&["decide", "--logic", "k", "p"]), 2);
    assert_eq!(code(&["decide", "--logic", "g", "--max-nodes", "2", "(p -> q) | (q -> p)"]), 3);
}

#[test]
fn decide_json_schema() {
    let (c, v) = json(&["decide", "--logic", "gk-box", "--trace", "~~[]p -> []~~p"]);
    assert_eq!(c, 0);
    assert_eq!(v["logic"], "gk-box");
    assert_eq!(v["verdict"], "valid");
    assert!(v["trace"]["nodes"].is_array());
    assert!(v.get("diagnostic").is_none());
    let input = v["input"].as_str().unwrap();
    assert_eq!(gmodal::parse_sequent(input).unwrap().to_string(), input);

    let (c, v) = json(&["decide", "--logic", "gk-box", "--trace", "[]~~p -> ~~[]p"]);
    assert_eq!(c, 1);
    assert_eq!(v["verdict"], "invalid");
    assert!(v["diagnostic"]["leaf"].is_array());
    assert!(v.get("trace").is_none());
}

#[test]
fn search_modes_agree() {
    for f in ["~~[]p -> []~~p", "[]~~p -> ~~[]p", "[](p & q) -> []p & []q"] {
        let a = code(&["decide", "--logic", "gk-box", "--search", "gfp", f]);
        let b = code(&["decide", "--logic", "gk-box", "--search", "exhaustive", f]);
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn check_proof_files() {
    assert_eq!(code(&["check-proof", &fixture("prelinearity.json")]), 0);
    assert_eq!(code(&["check-proof", "--calculus", "ggk-box", &fixture("box-double-negation.json")]), 0);
    assert_eq!(code(&["check-proof", &fixture("box-double-negation.json")]), 1);
    assert_eq!(code(&["check-proof", &fixture("truncated-proof.json")]), 2);
    assert_eq!(code(&["check-proof", &fixture("missing.json")]), 2);
    let (c, v) = json(&["check-proof", &fixture("box-double-negation.json")]);
    assert_eq!(c, 1);
    assert_eq!(v["error"]["rule"], "box");
    assert!(v["error"]["path"].is_array());
}

#[test]
fn cut_elimination_outputs() {
    let dir = std::env::temp_dir().join(format!("gmodal-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for name in ["identity-cut.json", "box-cut.json"] {
        let out = dir.join(name).display().to_string();
        assert_eq!(code(&["cut-elim", &fixture(name), "--output", &out]), 0);
        assert_eq!(code(&["check-proof", "--calculus", "ggk-box", &out]), 0);
        let d: gmodal::HDerivation = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        let input: gmodal::HDerivation = serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
        assert!(d.is_cut_free());
        assert_eq!(d.conclusion, input.conclusion);
        if name == "box-cut.json" {
            assert!(d.count_rule(gmodal::HRule::Com) >= 1);
            assert!(d.count_rule(gmodal::HRule::Box) >= 1);
        }
    }
    std::fs::remove_dir_all(&dir).unwrap();

    let out = run(&["cut-elim", &fixture("prelinearity.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(out.stdout, std::fs::read(fixture("prelinearity.json")).unwrap());
    assert_eq!(code(&["cut-elim", &fixture("truncated-proof.json")]), 2);
}

#[test]
fn eval_and_countermodel() {
    let out = run(&["eval", "--model", &fixture("truncated-model.json"), "<>q"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "1/4");
    assert_eq!(code(&["eval", "--model", &fixture("prelinearity.json"), "p"]), 2);
    assert_eq!(code(&["eval", "--model", &fixture("truncated-model.json"), "r"]), 2);

    let (c, v) = json(&["countermodel", "--logic", "gk-diamond", "--max-worlds", "2", "<>p -> <>q"]);
    assert_eq!(c, 1);
    assert_eq!(v["found"], true);
    let m: gmodal::KripkeModel = serde_json::from_value(v["model"].clone()).unwrap();
    assert!(m.worlds() <= 2);
    assert_eq!(code(&["countermodel", "--logic", "g", "p <= p"]), 0);
    assert_eq!(code(&["countermodel", "--logic", "gkf-diamond", "~~<>p -> <>~~p"]), 1);
    assert_eq!(code(&["countermodel", "--logic", "gk-box", "--budget", "100", "[]~~p -> ~~[]p"]), 3);
    assert_eq!(code(&["countermodel", "--logic", "gk-box", "--mode", "random", "--seed", "7", "--samples", "500", "[]p -> p"]), 1);
}

#[test]
fn selftest_passes() {
    let (c, v) = json(&["selftest"]);
    assert_eq!(c, 0);
    assert_eq!(v["failed"], 0);
}
