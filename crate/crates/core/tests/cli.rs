use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pxlap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pxlap")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pxlap-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sweep_writes_all_artifacts_deterministically() {
    let a = scratch("sweep-a");
    let b = scratch("sweep-b");
    for dir in [&a, &b] {
        let out = pxlap(&["sweep", "--preset", "oned_case1", "--out", s(dir)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let sweep = fs::read_to_string(a.join("sweep.csv")).unwrap();
    assert!(sweep.starts_with("n,F,logF,root,d_root,supgradD,supdiff,iters\n"));
    assert_eq!(sweep.lines().count(), 7);
    let solution = fs::read_to_string(a.join("solution.csv")).unwrap();
    assert!(solution.starts_with("x,u\n"));
    assert_eq!(solution.lines().count(), 257);
    let verdict = json(&a.join("verdict.json"));
    assert_eq!(verdict["regime"], "undecided");
    for f in ["sweep.csv", "solution.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn oracle_curve_hits_the_flat_value() {
    let dir = scratch("oracle");
    let out = pxlap(&["oracle1d", "--preset", "oned_case2", "--resolution", "1001", "--out", s(&dir)]);
    assert!(out.status.success());
    let mut r = csv::Reader::from_path(dir.join("oracle.csv")).unwrap();
    let rows: Vec<(f64, f64)> = r.deserialize().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 1001);
    let (x, u) = rows[750];
    assert_eq!(x, 0.75);
    assert!((u - 0.3).abs() < 1e-12, "{u}");
    assert_eq!(json(&dir.join("oracle.json"))["limit"]["k"], 0.6);

    let out = pxlap(&["oracle1d", "--preset", "oned_case1", "--n", "16", "--resolution", "11", "--out", s(&dir)]);
    assert!(out.status.success());
    assert!(json(&dir.join("oracle.json"))["log_c1"].is_f64());
}

#[test]
fn feasibility_verdicts_and_exit_codes() {
    let dir = scratch("feas");
    let out = pxlap(&["feasibility", "--preset", "tangent_balls_trace", "--out", s(&dir)]);
    assert!(out.status.success());
    let report = json(&dir.join("feasibility.json"));
    assert!(report["trace_lipschitz_estimate"].as_f64().unwrap() > 1000.0);
    assert_eq!(report["verdict"], "inconclusive");

    let code = |preset: &str, expect: &str| {
        pxlap(&["feasibility", "--preset", preset, "--expect", expect, "--out", s(&dir)]).status.code()
    };
    assert_eq!(code("strip_slope2", "nonempty"), Some(2));
    assert_eq!(code("strip_slope2", "empty"), Some(0));
    assert_eq!(code("interior_disc", "empty"), Some(2));
    assert_eq!(code("interior_disc", "nonempty"), Some(0));
    assert_eq!(json(&dir.join("feasibility.json"))["verdict"], "nonempty_guaranteed");
}

#[test]
fn solve_from_config_then_check() {
    let dir = scratch("config");
    let cfg = dir.join("problem.json");
    fs::write(
        &cfg,
        r#"{
            "geometry": {
                "omega": {"kind": "rectangle", "min": [0.0, 0.0], "max": [1.0, 1.0]},
                "d": {"kind": "disc", "center": [0.5, 0.5], "radius": 0.25}
            },
            "exponent": {"form": "affine", "a": 3.0, "b": [1.0, 0.0]},
            "datum": {"kind": "affine", "constant": 0.0, "gradient": [0.5, 0.0]},
            "nodes_per_side": 33
        }"#,
    )
    .unwrap();
    let out = pxlap(&["solve", "--config", s(&cfg), "--n", "16", "--out", s(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&dir.join("solve.json"))["stats"]["converged"], true);

    let out = pxlap(&["check", "--config", s(&cfg), "--out", s(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let check = fs::read_to_string(dir.join("check.csv")).unwrap();
    assert!(check.starts_with("x,y,region,kind,value,verdict\n"));
    assert!(check.contains(",annulus,pxlap_residual,") && check.contains(",D_interior,inflap_residual,"));
    assert_eq!(json(&dir.join("check.json"))["interface_samples"], 200);
}

#[test]
fn errors_carry_their_module() {
    let dir = scratch("errors");
    let stderr = |args: &[&str]| {
        let out = pxlap(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        String::from_utf8_lossy(&out.stderr).into_owned()
    };
    assert!(stderr(&["sweep", "--preset", "nope", "--out", s(&dir)]).contains("[cli_io]"));
    assert!(stderr(&["solve", "--preset", "oned_case1", "--out", s(&dir)]).contains("--n"));
    assert!(stderr(&["sweep", "--preset", "half_disc_trace", "--out", s(&dir)]).contains("feasibility-only"));
    assert!(stderr(&["solve", "--preset", "oned_case1", "--n", "1", "--out", s(&dir)]).contains("[exponent_field]"));

    let cfg = dir.join("disc.json");
    fs::write(
        &cfg,
        r#"{
            "geometry": {"omega": {"kind": "disc", "center": [0.0, 0.0], "radius": 1.0}},
            "exponent": {"form": "constant", "value": 4.0},
            "datum": {"kind": "affine", "constant": 0.0, "gradient": [1.0, 0.0]},
            "nodes_per_side": 17
        }"#,
    )
    .unwrap();
    assert!(stderr(&["sweep", "--config", s(&cfg), "--out", s(&dir)]).contains("[discretization]"));
    let out = pxlap(&["feasibility", "--config", s(&cfg), "--out", s(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    fs::write(&cfg, "{\"geometry\": 1}").unwrap();
    assert!(stderr(&["solve", "--config", s(&cfg), "--n", "8", "--out", s(&dir)]).contains("[cli_io]"));
}
