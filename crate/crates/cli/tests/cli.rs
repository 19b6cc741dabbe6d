use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rgflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rgflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn reals(v: &Value) -> Vec<f64> {
    v["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|z| z["re"].as_f64().unwrap())
        .collect()
}

#[test]
fn flat_symbol_has_gauge_kernel() {
    let out = rgflow(&["symbol", "--preset", "flat", "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let ev = reals(&v);
    for (got, want) in ev.iter().zip([0.0, 0.0, 0.0, 1.0, 1.0, 1.0]) {
        assert!((got - want).abs() < 1e-12, "{ev:?}");
    }
    assert_eq!(v["kernel_dim"], 3);
    assert_eq!(v["verdict"], "weakly-elliptic-with-gauge-kernel");
}

#[test]
fn constant_curvature_symbol_margin() {
    let out = rgflow(&[
        "symbol",
        "--preset",
        "constant-curvature",
        "--curvature",
        "-1",
        "-a",
        "0.4",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    for ev in &reals(&v)[3..] {
        assert!((ev - 0.2).abs() < 1e-12);
    }
    assert!((v["margin"].as_f64().unwrap() - 0.2).abs() < 1e-12);
}

#[test]
fn sample_file_reports_rotation_angle() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("point.txt");
    fs::write(
        &path,
        "metric = 1 0 0 1 0 1\nricci = 0 0 0 5 2 1\nxi = 1 0 0\na = 0.1\n",
    )
    .unwrap();
    let out = rgflow(&["symbol", path.to_str().unwrap(), "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((v["alpha"].as_f64().unwrap() - PI / 8.0).abs() < 1e-12);
    assert!(v["ricci_rotated"][1][2].as_f64().unwrap().abs() < 1e-12);
    let text = rgflow(&["symbol", path.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&text.stdout);
    assert!(stdout.contains("symbol (unrotated)") && stdout.contains("symbol (rotated)"));
}

#[test]
fn malformed_point_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    fs::write(&path, "metric = 1 0 0 1 0 1\nricci = 1 two 3 4 5 6\n").unwrap();
    let out = rgflow(&["symbol", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("ricci"), "{err}");
}

fn check(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["check", "--json", "--n", "32"];
    all.extend_from_slice(args);
    let out = rgflow(&all);
    (code(&out), json(&out))
}

#[test]
fn check_gate_cases() {
    let (c, v) = check(&["--preset", "flat", "--kind", "rg2", "-a", "-3.5"]);
    assert_eq!(c, 0);
    assert_eq!(v["margin"], 1.0);
    let (c, v) = check(&[
        "--preset",
        "constant-curvature",
        "--curvature",
        "-1",
        "-a",
        "0.4",
    ]);
    assert_eq!(c, 0);
    assert!((v["margin"].as_f64().unwrap() - 0.2).abs() < 1e-12);
    let (c, v) = check(&[
        "--preset",
        "constant-curvature",
        "--curvature",
        "-1",
        "-a",
        "0.6",
    ]);
    assert_eq!(c, 1);
    assert!((v["margin"].as_f64().unwrap() + 0.2).abs() < 1e-12);
    assert_eq!(v["worst_plane"].as_array().unwrap().len(), 3);
    for (k, a, expected) in [("1", "0.1", 0), ("-1", "-0.1", 0), ("1", "-0.1", 1)] {
        let (c, _) = check(&[
            "--preset",
            "constant-curvature",
            "--curvature",
            k,
            "--kind",
            "rg2zero",
            "-a",
            a,
        ]);
        assert_eq!(c, expected, "K = {k}, a = {a}");
    }
    let (c, _) = check(&["--preset", "mixed-sign", "--kind", "rg2zero", "-a", "0.1"]);
    assert_eq!(c, 1);
    let (c, _) = check(&["--preset", "mixed-sign", "--kind", "rg2zero", "-a", "-0.1"]);
    assert_eq!(c, 1);
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.ini");
    fs::write(
        &path,
        format!(
            "{body}\n[output]\ndir = {}\nsnapshot_every = 5\n",
            dir.join("out").display()
        ),
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_RUN: &str =
    "[flow]\nkind = rg2\na = 0.05\n[geometry]\npreset = flat-perturbed-1d\nn = 32\n\
                         amplitude = 1e-2\n[time]\ndt0 = 1e-2\nt_end = 0.06";

#[test]
fn run_writes_every_output_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_RUN);
    let out = rgflow(&["run", "--config", &cfg, "--seed", "3", "--json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&out);
    let outdir = dir.path().join("out");
    let on_disk: Value =
        serde_json::from_str(&fs::read_to_string(outdir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(on_disk["stop_reason"], "t_end");
    assert_eq!(on_disk["t_final"], 0.06);
    assert_eq!(on_disk["seed"], 3);
    assert!(on_disk["wall_ms"].is_u64());
    let steps = on_disk["steps"].as_u64().unwrap() as usize;
    assert!(steps > 5);

    let csv = fs::read_to_string(outdir.join("diagnostics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,dt,margin,max_riem,min_eig_g,kind,a"));
    assert_eq!(lines.count(), steps + 1);

    let echoed = fs::read_to_string(outdir.join("config.ini")).unwrap();
    assert!(echoed.contains("seed = 3") && echoed.contains("kind = rg2"));
    for name in summary["snapshots"].as_array().unwrap() {
        assert!(outdir.join(name.as_str().unwrap()).exists());
    }
    assert!(outdir.join("snapshot_000005.json").exists() && outdir.join("final.json").exists());

    // the echoed config reproduces the run
    let again = tempfile::tempdir().unwrap();
    let replay = again.path().join("replay.ini");
    fs::write(&replay, echoed).unwrap();
    let out = rgflow(&[
        "run",
        "--config",
        replay.to_str().unwrap(),
        "--out",
        again.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        fs::read_to_string(again.path().join("diagnostics.csv")).unwrap(),
        csv
    );
    assert_eq!(
        fs::read(again.path().join("final.json")).unwrap(),
        fs::read(outdir.join("final.json")).unwrap()
    );
}

#[test]
fn snapshot_round_trip_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_RUN);
    assert_eq!(code(&rgflow(&["run", "--config", &cfg])), 0);
    let path = dir.path().join("out/final.json");
    let (field, t) = rgflow::chart::read_snapshot(&path).unwrap();
    assert_eq!(t, Some(0.06));
    let copy = dir.path().join("copy.json");
    rgflow::chart::write_snapshot(&copy, &field, t).unwrap();
    assert_eq!(fs::read(&copy).unwrap(), fs::read(&path).unwrap());
    let (again, _) = rgflow::chart::read_snapshot(&copy).unwrap();
    assert_eq!(again, field);

    let out = rgflow(&[
        "check",
        "--snapshot",
        path.to_str().unwrap(),
        "--kind",
        "rg2",
        "-a",
        "0.05",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["margin"].as_f64().unwrap() > 0.9);
}

#[test]
fn run_rejects_non_parabolic_data_unless_forced() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[flow]\nkind = rg2\na = 0.6\n[geometry]\npreset = constant-curvature\ncurvature = -1\nn = 8\n[time]\ndt0 = 1e-3\nt_end = 0.01",
    );
    let out = rgflow(&["run", "--config", &cfg]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("rejected"));
    let out = rgflow(&["run", "--config", &cfg, "--force", "--json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["stop_reason"], "t_end");
}

#[test]
fn ode_preset_reports_reference_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[flow]\nkind = rg2\na = 0.1\n[geometry]\npreset = constant-curvature-ode\ncurvature = 1\nn = 8\n[time]\ndt0 = 1e-3\nt_end = 0.1",
    );
    let out = rgflow(&["run", "--config", &cfg, "--json"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["ode_max_rel_error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&rgflow(&["frobnicate"])), 2);
    assert_eq!(code(&rgflow(&["check", "--kind", "heat"])), 2);
    assert_eq!(
        code(&rgflow(&["run", "--config", "/nonexistent/run.ini"])),
        2
    );
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[time]\ncfl = -0.2");
    let out = rgflow(&["run", "--config", &cfg]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cfl"));
    let cfg = write_config(dir.path(), "[time]\ndt0 = soon");
    let out = rgflow(&["run", "--config", &cfg]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn quick_verify_passes_and_sign_fault_is_caught() {
    let out = rgflow(&["verify", "--quick", "--json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(json(&out)
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["passed"] == true));

    let out = rgflow(&["verify", "--quick", "--json", "--inject-sign-fault"]);
    assert_eq!(code(&out), 1);
    let failed: Vec<String> = json(&out)
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["passed"] == false)
        .map(|r| r["name"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(failed, ["sign-normalization"]);
}
