use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn repvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repvar")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = repvar(&all);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn count_values() {
    for (n, fix, torus) in [("0", 1, 1), ("2", 3, 5), ("3", 5, 9), ("-4", 9, 17)] {
        let doc = json(&["count", "--n", n]);
        assert_eq!(doc["format"], "repvar-count-1");
        assert_eq!(doc["fix"], fix);
        assert_eq!(doc["char_fix"], fix);
        assert_eq!(doc["torus"], torus);
        assert_eq!(doc["parity_consistent"], true);
    }
    assert!(stdout(&repvar(&["count", "--n", "3"])).contains("torus      9"));
}

#[test]
fn enumerate_matches_count() {
    let doc = json(&["enumerate", "--n", "3", "--system", "torus"]);
    assert_eq!(doc["labels"].as_array().unwrap().len(), 9);
    let text = stdout(&repvar(&["enumerate", "--n", "2"]));
    assert_eq!(text.lines().collect::<Vec<_>>(), ["central", "(+,0,1)", "(+,1,0)"]);
}

#[test]
fn representative_classifies_back() {
    let dir = tempfile::tempdir().unwrap();
    for (label, system) in [("(+,0,1)", "fix"), ("(-,1,0)", "fix"), ("eps=-1,(+,1,0)", "torus")] {
        let file = dir.path().join("rep.json");
        for seed in [None, Some("5")] {
            let mut args =
                vec!["representative", "--n", "3", "--label", label, "--system", system, "--out", path_str(&file)];
            if let Some(s) = seed {
                args.extend(["--seed", s]);
            }
            assert!(repvar(&args).status.success());
            let out = repvar(&["classify", path_str(&file)]);
            assert!(out.status.success());
            assert_eq!(stdout(&out).trim(), label);
        }
    }
}

#[test]
fn probe_refuses_across_labels_and_certifies_within() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let c = dir.path().join("c.json");
    let cert = dir.path().join("cert.json");
    assert!(repvar(&["representative", "--n", "2", "--label", "(+,0,1)", "--out", path_str(&a)]).status.success());
    assert!(repvar(&["representative", "--n", "2", "--label", "(+,0,1)", "--seed", "9", "--out", path_str(&b)])
        .status
        .success());
    assert!(repvar(&["representative", "--n", "2", "--label", "(+,1,0)", "--out", path_str(&c)]).status.success());

    let out = repvar(&["probe", path_str(&a), path_str(&c), "--n", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("label mismatch"));

    let out = repvar(&["probe", path_str(&a), path_str(&b), "--n", "2", "--out", path_str(&cert)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&["verify", "--cert", path_str(&cert)]);
    assert_eq!(doc["valid"], true);

    let mut tampered: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    tampered["labels"][1] = "(+,1,0)".into();
    std::fs::write(&cert, tampered.to_string()).unwrap();
    assert_eq!(repvar(&["verify", "--cert", path_str(&cert)]).status.code(), Some(1));
}

#[test]
fn census_is_deterministic() {
    let args = ["census", "--n", "2", "--system", "torus", "--samples", "8", "--seed", "17"];
    let first = json(&args);
    assert_eq!(first, json(&args));
    assert_eq!(first["format"], "repvar-census-1");
    assert_eq!(first["agreement"], true);
    assert_eq!(first["estimated_components"], 5);
}

#[test]
fn verify_table_passes() {
    let doc = json(&["verify", "--n", "3", "--samples", "4"]);
    assert_eq!(doc["format"], "repvar-verify-1");
    assert_eq!(doc["pass"], true);
}

#[test]
fn bad_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(repvar(&["classify", path_str(&bad)]).status.code(), Some(2));
    std::fs::write(&bad, r#"{"format":"repvar-1","n":2,"T":null,"A":[[2,0,0,0],[1,0,0,0],[1,0,0,0]],"B":[[1,0,0,0],[1,0,0,0],[1,0,0,0]]}"#)
        .unwrap();
    assert_eq!(repvar(&["classify", path_str(&bad)]).status.code(), Some(2));
    assert_eq!(repvar(&["classify", path_str(&dir.path().join("missing.json"))]).status.code(), Some(2));
    assert_eq!(repvar(&["representative", "--n", "2", "--label", "(+,5,0)"]).status.code(), Some(2));
    assert_eq!(repvar(&["representative", "--n", "2", "--label", "nonsense"]).status.code(), Some(2));
    assert_eq!(repvar(&["count"]).status.code(), Some(2));
    assert_eq!(repvar(&["census", "--n", "2", "--system", "surface"]).status.code(), Some(2));
}
