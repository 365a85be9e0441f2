use std::path::PathBuf;
use std::process::{Command, Output};

use adiabatic_core::nstate;
use adiabatic_lab::generator::{generate, GenParams};
use adiabatic_lab::report;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adiabatic-lab")).args(args).output().unwrap()
}

fn model(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("models").join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_model(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn exact_shift_value() {
    let out = stdout(&lab(&["two-state", "exact", "--delta", "1", "--x", "0.5"]));
    let rep = report::from_json(&stdout(&lab(&["two-state", "exact", "--delta", "1", "--x", "0.5", "--format", "json"]))).unwrap();
    assert!(out.lines().next().unwrap().split(',').any(|h| h == "delta_e"));
    let t = &rep.tables[0];
    let k = t.columns.iter().position(|c| c.name == "delta_e").unwrap();
    let report::Cell::Real(v) = t.rows[0][k] else { panic!("delta_e is not real") };
    assert!((v - (1.0 - 1.25f64.sqrt())).abs() < 1e-14, "{v}");
}

#[test]
fn compare_agrees_and_reports_pass() {
    let o = lab(&["two-state", "compare", "--model", &model("two-state.json"), "--t", "-2,-1,0", "--format", "json"]);
    let rep = report::from_json(&stdout(&o)).unwrap();
    let mut residuals = 0;
    for t in &rep.tables {
        for (k, c) in t.columns.iter().enumerate() {
            if c.versus.is_some() {
                for row in &t.rows {
                    if let report::Cell::Real(r) = row[k] {
                        residuals += 1;
                        assert!(r <= 1e-6, "{} = {r}", c.name);
                    }
                }
            }
        }
    }
    assert!(residuals > 0);
    assert!(rep.flags.is_empty(), "{:?}", rep.flags);
}

#[test]
fn oracle_on_embedded_two_level() {
    let out = stdout(&lab(&["n-state", "oracle", "--model", &model("two-level-embed.json")]));
    let line = out.lines().nth(2).unwrap();
    let v: f64 = line.split(',').next().unwrap().parse().unwrap();
    assert!((v - (1.0 - 1.25f64.sqrt())).abs() < 1e-13, "{v}");
}

#[test]
fn recursion_prints_sign_note() {
    let o = lab(&["n-state", "recursion", "--model", &model("two-level-embed.json"), "--order", "2"]);
    let out = stdout(&o);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Sign conventions"));
    let xi2 = out.lines().find(|l| l.starts_with("2,")).unwrap();
    assert_eq!(xi2.split(',').nth(1).unwrap().parse::<f64>().unwrap(), -0.5);
}

#[test]
fn evolve_trajectory_header() {
    let out = stdout(&lab(&["two-state", "evolve", "--model", &model("two-state.json")]));
    assert_eq!(out.lines().next().unwrap(), "t,re_a,im_a,re_c,im_c,norm");
    let last: Vec<f64> = out.lines().last().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(last[0], 0.0);
    assert!((last[5] - 1.0).abs() < 1e-8);
}

#[test]
fn json_output_is_deterministic() {
    let args = ["n-state", "compare", "--model", &model("three-level.json"), "--format", "json"];
    let (a, b) = (stdout(&lab(&args)), stdout(&lab(&args)));
    assert_eq!(a, b);
    assert!(report::from_json(&a).unwrap().timing.is_none());
    let timed = stdout(&lab(&["n-state", "oracle", "--model", &model("three-level.json"), "--format", "json", "--timing"]));
    assert!(report::from_json(&timed).unwrap().timing.is_some());
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let args = ["two-state", "phase", "--model", &model("two-state.json")];
    let direct = stdout(&lab(&args));
    let mut with_out = args.to_vec();
    let p = path.display().to_string();
    with_out.extend(["--out", &p]);
    assert!(stdout(&lab(&with_out)).is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), direct);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |o: Output| o.status.code().unwrap();

    assert_eq!(code(lab(&["two-state", "exact", "--delta", "1", "--x", "0"])), 2);
    assert_eq!(code(lab(&["two-state", "frobnicate"])), 2);
    let bad = write_model(&dir, "bad.json", r#"{"kind": "two-state", "delta": 1}"#);
    assert_eq!(code(lab(&["two-state", "exact", "--model", &bad])), 2);

    let degenerate = write_model(
        &dir,
        "deg.json",
        r#"{"kind": "n-state", "energies": [0, 1e-12, 2], "v_real": [0, 1, 0, 1, 0, 1, 0, 1, 0], "x": 0.1, "eps": 0.1}"#,
    );
    assert_eq!(code(lab(&["n-state", "recursion", "--model", &degenerate])), 4);

    let crowded = write_model(
        &dir,
        "crowd.json",
        r#"{"kind": "n-state", "energies": [0, 1e-3, 2e-3], "v_real": [1, 1, 1, 1, 1, 1, 1, 1, 1], "x": 10, "eps": 0.1, "ground_index": 1}"#,
    );
    assert_eq!(code(lab(&["n-state", "oracle", "--model", &crowded])), 5);

    let missing = dir.path().join("nope.json").display().to_string();
    assert_eq!(code(lab(&["n-state", "oracle", "--model", &missing])), 10);
    let unwritable = dir.path().join("no/such/dir/out.csv").display().to_string();
    assert_eq!(code(lab(&["two-state", "exact", "--delta", "1", "--x", "0.5", "--out", &unwritable])), 10);
}

#[test]
fn gen_writes_loadable_model() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.json").display().to_string();
    let o = lab(&["n-state", "gen", "--seed", "7", "--levels", "6", "--out", &p]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&p).unwrap();
    assert_eq!(text, stdout(&lab(&["n-state", "gen", "--seed", "7", "--levels", "6"])));
    assert!(stdout(&lab(&["n-state", "split", "--model", &p])).contains("delta_e"));
}

/// ODE component ratios at t = 0 approach the continued eigenvector as eps shrinks.
#[test]
fn evolved_ratios_converge_to_eigenvector() {
    let spec = generate(&GenParams { seed: 5, levels: 4, gap: 1.0, vscale: 1.0, x: 0.1, eps: 0.2 });
    let m0 = spec.build().unwrap();
    let (_, v) = nstate::oracle_state(&m0).unwrap();
    let target = nstate::component_ratios(&v, 0);
    let errs: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&eps| {
            let m = m0.with_eps(eps).unwrap();
            let tr = nstate::evolve_nstate(&m, 0.0, 1e-12, 1e-12).unwrap();
            let r = nstate::component_ratios(tr.final_state(), 0);
            r.iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[2] < 1e-3, "{errs:?}");
}
