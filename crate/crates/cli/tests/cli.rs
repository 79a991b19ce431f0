use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use magfloquet::quantum::propagate::unit_gaussian;
use magfloquet::quantum::{GridSpec, WaveFunction};
use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magfloquet"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn run_with(config: &str, args: &[&str], out: &Path) -> Output {
    let cfg = configs().join(config);
    let mut full = vec!["--config", cfg.to_str().unwrap()];
    full.extend_from_slice(args);
    run(&full, out)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&read(dir, "manifest.json")).unwrap()
}

#[test]
fn classify_pulsed_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with("pulsed.json", &["classify"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["D"].as_f64().unwrap() + 3.635655).abs() < 1e-5);
    assert_eq!(v["regime"], "Hyperbolic");
    assert_eq!(v["zeta2_T_nonzero"], true);
    let file: Value = serde_json::from_str(&read(dir.path(), "classify.json")).unwrap();
    assert_eq!(file, v);
    let m = manifest(dir.path());
    assert_eq!(m["command"], "classify");
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(m["config"]["tolerances"]["tau_D"], 1e-9);
    assert_eq!(m["outputs"][0]["file"], "classify.json");
}

#[test]
fn elliptic_resolvent_reports_not_hyperbolic() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with("elliptic.json", &["classify"], dir.path());
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["regime"], "Elliptic");
    assert!(v["lambda"].is_null());

    let o = run_with("elliptic.json", &["resolvent"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("NotHyperbolic:"), "{}", stderr(&o));
}

#[test]
fn config_errors_name_the_key_and_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"period": 1.0, "mass": 1.0, "charge": 1.0, "profile": {"kind": "constant", "b0": 1.0}, "gird": {}}"#,
    )
    .unwrap();
    let o = run(&["--config", bad.to_str().unwrap(), "classify"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("InvalidConfig:") && err.contains("gird") && err.contains("line 1"), "{err}");

    std::fs::write(
        &bad,
        r#"{"period": -1.0, "mass": 1.0, "charge": 1.0, "profile": {"kind": "constant", "b0": 1.0}}"#,
    )
    .unwrap();
    let o = run(&["--config", bad.to_str().unwrap(), "classify"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("InvalidField:"), "{}", stderr(&o));

    let o = run(&["classify"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let o = run_with("pulsed.json", &["zeros"], &blocker.join("sub"));
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("Io:"));
}

#[test]
fn scan_grid_and_line_endings() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(
        "pulsed.json",
        &["scan", "--param1", "B0:0.5:4.0:5", "--param2", "T0:0.1:1.5:3"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = read(dir.path(), "scan.csv");
    let lines: Vec<&str> = text.split_terminator("\r\n").collect();
    assert_eq!(lines[0], "param1,param2,D,regime,lambda");
    assert_eq!(lines.len(), 16);
    assert!(!text.replace("\r\n", "").contains('\n'));
    assert!(lines[1].starts_with("0.5,0.1,"));
    assert!(lines[15].starts_with("4.0,1.5,"));
    let m = manifest(dir.path());
    assert_eq!(m["parameters"]["param1"]["name"], "B0");

    let o = run_with("pulsed.json", &["scan", "--param1", "Bdc:0:1:3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zeros_and_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with("pulsed.json", &["zeros"], dir.path());
    assert!(o.status.success());
    let text = read(dir.path(), "zeros.csv");
    assert!(text.starts_with("zeta,t,derivative\r\n1,"));

    let o = run_with(
        "pulsed.json",
        &["trajectory", "--x0", "1,0", "--p0", "0,-0.5", "--N", "12"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = read(dir.path(), "trajectory.csv");
    assert_eq!(text.lines().count(), 14);
    assert!(text.starts_with("N,x1,x2,p1,p2,norm_x\r\n0,1.0,0.0,0.0,-0.5,1.0\r\n"));
    let fit: Value = serde_json::from_str(&read(dir.path(), "growth_fit.json")).unwrap();
    assert!(fit["model"]["Exponential"]["rate"].as_f64().is_some());
}

#[test]
fn propagate_round_trips_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let g = GridSpec::new(128, 10.0).unwrap();
    let input = dir.path().join("in.bin");
    let mut bytes = Vec::new();
    unit_gaussian(g).write_binary(&mut bytes).unwrap();
    std::fs::write(&input, &bytes).unwrap();

    let out_a = dir.path().join("a");
    let o = run_with(
        "pulsed.json",
        &["propagate", "--tau", "1.2", "--s", "0.2", "--input", input.to_str().unwrap()],
        &out_a,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let a = WaveFunction::read_binary(std::fs::File::open(out_a.join("psi.bin")).unwrap()).unwrap();
    assert_eq!(a.grid(), g);

    let out_b = dir.path().join("b");
    let o = run_with(
        "pulsed.json",
        &["propagate", "--tau", "1.2", "--s", "0.2", "--method", "strang", "--input", input.to_str().unwrap()],
        &out_b,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let b = WaveFunction::read_binary(std::fs::File::open(out_b.join("psi.bin")).unwrap()).unwrap();
    assert!(a.distance(&b).unwrap() < 1e-5);
    let norms: Value = serde_json::from_str(&read(&out_b, "norms.json")).unwrap();
    assert!((norms["l2_out"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn dispersive_lists_caustic_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(
        "pulsed.json",
        &["dispersive", "--tau", "0:2:3", "--s", "0:2:3", "--grid-n", "128", "--grid-L", "10"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read(dir.path(), "dispersive.csv").lines().count() - 1;
    let m = manifest(dir.path());
    let excluded = m["excluded_caustic_pairs"].as_array().unwrap();
    // the diagonal tau = s has Gamma = 0
    assert_eq!(excluded.len(), 3);
    assert_eq!(rows + excluded.len(), 9);
    assert_eq!(m["config"]["grid"]["n"], 128);
}

#[test]
fn scattering_commands_write_expected_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with("pulsed.json", &["resolvent", "--N-max", "6"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = read(dir.path(), "resolvent.csv");
    assert!(text.starts_with("N,I_N,S_N\r\n0,"));
    assert_eq!(text.lines().count(), 8);

    let o = run_with("pulsed.json", &["cook", "--N-max", "3", "--grid-n", "128", "--grid-L", "10"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(read(dir.path(), "cook.csv").starts_with("N,C_N,increment\r\n1,"));

    let o = run_with("pulsed.json", &["sigma-r", "--R", "11", "--grid-n", "128", "--grid-L", "10"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(read(dir.path(), "sigma_r.csv").starts_with("R,sigma_R\r\n"));

    let o = run_with("pulsed.json", &["sigma-r", "--tau-im", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("EpsilonTooLarge:"));

    let o = run_with("pulsed.json", &["waveop", "--N1", "1,2", "--N2", "2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = run_with("pulsed.json", &["waveop", "--N1", "0", "--N2", "9"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("InvalidArgument:"));
}

#[test]
fn waveop_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(
        "pulsed.json",
        &["waveop", "--N1", "0", "--N2", "1", "--grid-n", "128", "--grid-L", "10", "--dt", "0.02"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = read(dir.path(), "waveop.csv");
    let lines: Vec<&str> = text.split_terminator("\r\n").collect();
    assert_eq!(lines[0], "N1,N2,defect");
    let defect: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!(defect > 0.0 && defect <= 2.0);
}

#[test]
fn outputs_are_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["scan", "--param1", "T:3:8:20", "--grid-n", "128"];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run_with("pulsed.json", &args, &a).status.success());
    assert!(run_with("pulsed.json", &args, &b).status.success());
    for name in ["scan.csv", "manifest.json"] {
        assert_eq!(read(&a, name), read(&b, name));
    }
}
