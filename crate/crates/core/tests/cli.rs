use std::path::Path;

use neutral4::cli::{golden, main_with_args};

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let code = main_with_args(std::iter::once("neutral4").chain(args.iter().copied()), &mut o, &mut e);
    (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
}

fn manifest(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel).display().to_string()
}

#[test]
fn lorentzian_counterexample_fails_with_signature() {
    let (code, out, _) = call(&["check", "signature", "--geometry", &manifest("examples/bad_31.geom"), "--seed", "1"]);
    assert_eq!(code, 1);
    assert!(out.contains("signature (3,1)"), "{out}");
}

#[test]
fn pair_suites_need_a_declared_pair() {
    let (code, _, err) = call(&["check", "killing_pair", "--geometry", &manifest("examples/bad_31.geom"), "--seed", "1"]);
    assert_eq!(code, 2);
    assert!(err.contains("does not apply"), "{err}");
}

#[test]
fn petean_commuting_pair_passes_all_clauses() {
    let (code, out, _) = call(&["check", "david", "--geometry", "petean_torus", "--samples", "50", "--seed", "7"]);
    assert_eq!(code, 0, "{out}");
    for clause in ["(i)", "(ii)", "(iii)"] {
        assert!(out.lines().any(|l| l.starts_with("PASS") && l.contains(clause)), "{clause}: {out}");
    }
}

#[test]
fn json_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<String> = (0..2).map(|k| dir.path().join(format!("r{k}.json")).display().to_string()).collect();
    for p in &paths {
        let (code, _, _) = call(&["check", "lee", "--geometry", "inoue_s_plus", "--samples", "30", "--seed", "5", "--json", p]);
        assert_eq!(code, 0);
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["spec"]["seed_source"], "given");
    assert_eq!(v["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn hopf_triple_report_is_written_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json").display().to_string();
    let (code, _, _) = call(&[
        "check", "para_hyperhermitian", "--geometry", "hopf", "--samples", "100", "--seed", "1", "--tol", "1e-8", "--json", &path,
    ]);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["verdict"], "fail");
    let failing: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["verdict"] == "fail")
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failing.contains(&"para_hyperhermitian/N_S = 0"), "{failing:?}");
}

#[test]
fn resolution_errors_exit_two() {
    assert_eq!(call(&["describe", "nope"]).0, 2);
    assert_eq!(call(&["check", "signature", "--geometry", "/no/such/file.geom"]).0, 2);
    assert_eq!(call(&["check", "inoue_invariance", "--geometry", "flat_neutral", "--seed", "1"]).0, 2);
    assert_eq!(call(&["check", "signature", "--geometry", "inoue_s_plus", "--param", "n11=3", "--seed", "1"]).0, 2);
    let missing = tempfile::tempdir().unwrap().path().join("gone").display().to_string();
    assert_eq!(call(&["golden", "verify", "--dir", &missing]).0, 2);
}

#[test]
fn list_names_exactly_the_registered_suites() {
    let (_, out, _) = call(&["list"]);
    let section: Vec<&str> = out
        .lines()
        .skip_while(|l| *l != "suites:")
        .skip(1)
        .take_while(|l| l.starts_with("  "))
        .map(|l| l.split_whitespace().next().unwrap())
        .collect();
    assert_eq!(
        section,
        [
            "signature",
            "curvature",
            "weyl_split",
            "para_hyperhermitian",
            "killing_pair",
            "david",
            "lee",
            "inoue_invariance",
            "hopf_remark",
            "ad_oracle"
        ]
    );
}

#[test]
fn golden_update_verify_and_detect_edits() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().display().to_string();
    assert_eq!(call(&["golden", "update", "--dir", &d]).0, 0);
    let (code, out, _) = call(&["golden", "verify", "--dir", &d]);
    assert_eq!(code, 0, "{out}");
    assert!(!out.contains("bytes differ"));

    let file = dir.path().join(&golden::pinned()[0].file);
    let text = std::fs::read_to_string(&file).unwrap();
    let edited = text.replacen("\"algebraic\": 1.0000000000000000e-10", "\"algebraic\": 1.0000000000000000e-9", 1);
    assert_ne!(text, edited);
    std::fs::write(&file, edited).unwrap();
    let (code, out, _) = call(&["golden", "verify", "--dir", &d]);
    assert_eq!(code, 1);
    assert!(out.contains("$.spec.tolerances.algebraic"), "{out}");

    std::fs::remove_file(&file).unwrap();
    let (code, out, _) = call(&["golden", "verify", "--dir", &d]);
    assert_eq!(code, 1);
    assert!(out.contains("MISSING"));
}
