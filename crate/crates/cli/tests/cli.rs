mod common;

use coboundary::scalar::{int, ratio};
use coboundary::{PiecewiseTranslation, StepFunction};
use common::{code, path, run, set, stdout_json, text, write_json};
use tempfile::tempdir;

fn halves() -> StepFunction {
    StepFunction::from_sets([(set(0, 1, 2), int(1)), (set(1, 2, 2), int(-1))]).unwrap()
}

#[test]
fn construct_then_verify_certificate() {
    let dir = tempdir().unwrap();
    let f = write_json(dir.path(), "f.json", &halves());
    let out = dir.path().join("c.json");
    let o = run(&["construct", "--f", path(&f), "--delta", "1/4", "--stages", "2", "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["certificate"]["residual_bound"], "0/1");
    assert!(text(&v["certificate"]["sup_bound"]) <= ratio(5, 4));
    assert_eq!(v["stages"].as_array().unwrap().len(), 2);
    let o = run(&["verify", "--f", path(&f), "--cert", path(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["holds"], true);

    // A bare certificate is accepted too.
    let bare = write_json(dir.path(), "bare.json", &v["certificate"]);
    assert_eq!(code(&run(&["verify", "--f", path(&f), "--cert", path(&bare)])), 0);
}

#[test]
fn perturbed_triple_is_refuted() {
    let dir = tempdir().unwrap();
    let t = PiecewiseTranslation::rotation(&ratio(1, 2)).unwrap();
    let g = StepFunction::indicator(&set(0, 1, 2));
    let f = g.sub(&g.pullback(&t).unwrap());
    let fp = write_json(dir.path(), "f.json", &f);
    let tp = write_json(dir.path(), "t.json", &t);
    let gp = write_json(dir.path(), "g.json", &g);
    let o = run(&["verify", "--f", path(&fp), "--t", path(&tp), "--g", path(&gp)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["witness"], serde_json::json!([]));

    let bumped = g.add(&StepFunction::constant_on(&set(0, 1, 8), int(1)));
    let bp = write_json(dir.path(), "b.json", &bumped);
    let o = run(&["verify", "--f", path(&fp), "--t", path(&tp), "--g", path(&bp)]);
    assert_eq!(code(&o), 2);
    let v = stdout_json(&o);
    assert_eq!(v["holds"], false);
    // g + 1 on [0, 1/8) breaks the identity there and on its preimage [1/2, 5/8).
    assert_eq!(text(&v["witness_measure"]), ratio(1, 4));
}

#[test]
fn certificate_for_other_function_is_an_error() {
    let dir = tempdir().unwrap();
    let f = write_json(dir.path(), "f.json", &halves());
    let out = dir.path().join("c.json");
    assert_eq!(code(&run(&["construct", "--f", path(&f), "--delta", "1/4", "--stages", "1", "--out", path(&out)])), 0);
    let other = write_json(dir.path(), "o.json", &halves().scale(&int(2)));
    let o = run(&["verify", "--f", path(&other), "--cert", path(&out)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--cert"));
}

#[test]
fn solvable_verdicts() {
    let dir = tempdir().unwrap();
    let u = write_json(dir.path(), "u.json", &StepFunction::indicator(&set(0, 1, 3)));
    let o = run(&["solvable", "--f", path(&u)]);
    assert_eq!(code(&o), 2);
    assert_eq!(stdout_json(&o)["verdict"], "Unbalanced");
    let b = write_json(dir.path(), "b.json", &halves());
    let o = run(&["solvable", "--f", path(&b)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["verdict"], "BalancedFinite");
}

#[test]
fn errors_name_the_parameter() {
    let dir = tempdir().unwrap();
    let f = write_json(dir.path(), "f.json", &halves());
    let o = run(&["construct", "--f", path(&f), "--delta", "0.25"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--delta"));

    let o = run(&["construct", "--f", "/nonexistent/f.json", "--delta", "1/4"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--f"));

    let o = run(&["construct", "--f", path(&f), "--delta", "-1/4"]);
    assert_eq!(code(&o), 1);

    let o = run(&["bogus"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn branch_cap_is_a_hard_error() {
    let dir = tempdir().unwrap();
    let f = write_json(dir.path(), "f.json", &halves());
    let o = std::process::Command::new(common::BIN)
        .args(["construct", "--f", path(&f), "--delta", "1/4"])
        .env("COBOUNDARY_MAX_BRANCHES", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("branch limit"));

    let o = std::process::Command::new(common::BIN)
        .args(["construct", "--f", path(&f), "--delta", "1/4"])
        .env("COBOUNDARY_MAX_BRANCHES", "lots")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("COBOUNDARY_MAX_BRANCHES"));
}

#[test]
fn schmidt_csv_columns() {
    let dir = tempdir().unwrap();
    let f = write_json(dir.path(), "f.json", &StepFunction::indicator(&set(0, 1, 2)));
    let t = write_json(dir.path(), "t.json", &PiecewiseTranslation::rotation(&ratio(1, 3)).unwrap());
    let o = run(&["schmidt", "--f", path(&f), "--t", path(&t), "--m", "1", "--n-max", "3", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let s = String::from_utf8(o.stdout).unwrap();
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("n,threshold,measure_le"));
    assert_eq!(lines.next(), Some("1,1/1,1/1"));
    assert_eq!(lines.count(), 2);

    let o = run(&["schmidt", "--f", path(&f), "--t", path(&t), "--m", "1,3", "--n-max", "3"]);
    let v = stdout_json(&o);
    assert_eq!(v["statistics"][1]["statistic"], "1/1");
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn generic_class_round_trip() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("gp.json");
    let o = run(&["gen-gp", "--p", "1", "--n", "1", "--epsilon", "1/2", "--out", path(&out)]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["family"], "generic_gp");
    let f = write_json(dir.path(), "f1.json", &v["function"]);
    let o = run(&["gp-audit", "--f", path(&f), "--p", "1", "--n", "1", "--i-max", "7", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.starts_with("i,v_measure,v_threshold,u_measure,u_threshold,pass\n"));
    assert!(s.lines().last().unwrap().ends_with(",true"));

    // Zero never dips below −a_{i−1}, so no index passes.
    let z = write_json(dir.path(), "z.json", &StepFunction::zero());
    let o = run(&["gp-audit", "--f", path(&z), "--p", "1", "--n", "1", "--i-max", "5"]);
    assert_eq!(code(&o), 2);
    assert_eq!(stdout_json(&o)["witness"], serde_json::Value::Null);
}

#[test]
fn family_generators() {
    let o = run(&["gen-moment", "--depth", "4"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["parameters"]["shift"], 2);

    let dir = tempdir().unwrap();
    let short = write_json(dir.path(), "phi.json", &[["1", "0"], ["2", "1"]]);
    let o = run(&["gen-moment", "--depth", "4", "--phi-table", path(&short)]);
    assert_eq!(code(&o), 1);

    let o = run(&["gen-kwapien", "--p", "2", "--r", "2", "--depth", "4"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert!(v["audit"].as_array().unwrap().iter().all(|e| e["pass"] == true));

    let small = write_json(dir.path(), "n.json", &["2", "4", "8", "16"]);
    let o = run(&["gen-kwapien", "--p", "2", "--r", "2", "--depth", "4", "--n-table", path(&small)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("summability"));
}

#[test]
fn construct_lp_reports_the_chain() {
    let dir = tempdir().unwrap();
    let f = StepFunction::from_sets([
        (set(0, 1, 4), ratio(5, 2)),
        (set(1, 2, 4), ratio(-1, 2)),
        (set(2, 3, 4), ratio(-3, 2)),
        (set(3, 4, 4), ratio(-1, 2)),
    ])
    .unwrap();
    let fp = write_json(dir.path(), "f.json", &f);
    let o = run(&["construct-lp", "--f", path(&fp), "--p", "2", "--delta", "1/4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["report"]["total_holds"], true);
    assert!(text(&v["report"]["lhs_total"]) <= text(&v["report"]["rhs"]));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempdir().unwrap();
    let f = write_json(dir.path(), "f.json", &halves());
    let a = run(&["construct", "--f", path(&f), "--delta", "1/4"]).stdout;
    let b = run(&["construct", "--f", path(&f), "--delta", "1/4"]).stdout;
    assert!(!a.is_empty());
    assert_eq!(a, b);
}
