use std::path::Path;
use std::process::{Command, Output};

fn duffamp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_duffamp"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const BISTABLE: [&str; 6] = ["--gamma", "2", "--delta", "-2", "--chi", "1"];

fn with_model<'a>(cmd: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend(BISTABLE);
    v.extend(extra);
    v
}

#[test]
fn steady_three_roots() {
    let dir = tempfile::tempdir().unwrap();
    let o = duffamp(dir.path(), &with_model("steady", &["--eps-p", "0.9747"]));
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(2).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("middle") && rows[1].contains("false"));
    assert!(rows[0].contains("true") && rows[2].contains("true"));
}

#[test]
fn steady_zero_pump() {
    let dir = tempfile::tempdir().unwrap();
    let o = duffamp(dir.path(), &with_model("steady", &["--eps-p", "0"]));
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(2).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].contains(" 0.000000 "));
}

#[test]
fn monostable_curve_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = duffamp(
        dir.path(),
        &["steady", "--chi", "1", "--gamma", "2", "--delta", "-1", "--curve", "0:1.5:201", "--out", "r.csv"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "eps_p,I_p,n0,branch,stable,re_lambda_plus,im_lambda_plus,lambda_sq,phi0"
    );
    assert_eq!(lines.clone().count(), 201);
    assert!(lines.all(|l| l.contains(",single,true,")));
    let meta = std::fs::read_to_string(dir.path().join("r.csv.meta.toml")).unwrap();
    assert!(meta.contains("pump_detuning = -1.0"));
}

#[test]
fn minforce_below_empty_cavity() {
    let dir = tempfile::tempdir().unwrap();
    let o = duffamp(dir.path(), &["minforce", "--gamma", "2", "--delta", "-1", "--chi", "1"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert_eq!(csv.lines().next().unwrap(), "n0,eps_p,lambda_sq,eps_s_min,empty_cavity_ref");
    let min = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
        .filter(|x| x.is_finite())
        .fold(f64::INFINITY, f64::min);
    assert!(min < 0.5, "{min}");
}

#[test]
fn noise_theta_modes_differ() {
    let dir = tempfile::tempdir().unwrap();
    let grid = ["--detuning-range", "-1:1:5", "--n0-range", "0:0.4:5"];
    let a = duffamp(dir.path(), &with_model("noise", &[&["--theta-mode", "optimal"][..], &grid].concat()));
    let b = duffamp(dir.path(), &with_model("noise", &[&["--theta", "0.3"][..], &grid].concat()));
    assert!(a.status.success() && b.status.success());
    assert_ne!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().next().unwrap(), "delta,n0,branch,theta,S,S_total,near_critical,unphysical");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Missing parameter, bad grid, unknown flag: configuration errors.
    assert_eq!(duffamp(dir.path(), &["steady", "--gamma", "2", "--chi", "1"]).status.code(), Some(2));
    assert_eq!(duffamp(dir.path(), &with_model("gain", &["--n0-range", "0:1:1"])).status.code(), Some(2));
    assert_eq!(duffamp(dir.path(), &with_model("gain", &["--bogus"])).status.code(), Some(2));
    assert_eq!(duffamp(dir.path(), &with_model("steady", &["--eps-p", "-1"])).status.code(), Some(2));
    // A branch that does not exist on a monostable curve.
    let o = duffamp(dir.path(), &["gain", "--gamma", "2", "--delta", "-1", "--chi", "1", "--branch", "upper"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn config_file_strict_and_overridable() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[model]\ngama = 2.0\n").unwrap();
    let o = duffamp(dir.path(), &["steady", "--config", "bad.toml", "--eps-p", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gama"));

    std::fs::write(
        dir.path().join("ok.toml"),
        "[model]\ngamma = 2.0\ndelta = -2.0\nchi = 1.0\n\n[drive]\neps_p = 0.9747\n",
    )
    .unwrap();
    let from_file = duffamp(dir.path(), &["steady", "--config", "ok.toml"]);
    assert!(from_file.status.success());
    assert_eq!(stdout(&from_file).lines().count(), 5);
    // The flag wins over the file: a single root far above the window.
    let overridden = duffamp(dir.path(), &["steady", "--config", "ok.toml", "--eps-p", "2"]);
    assert_eq!(stdout(&overridden).lines().count(), 3);
}

#[test]
fn help_lists_flags() {
    let dir = tempfile::tempdir().unwrap();
    let help = stdout(&duffamp(dir.path(), &["noise", "--help"]));
    for flag in [
        "--gamma", "--delta", "--chi", "--eps-p", "--eps-s", "--signal-detuning", "--theta",
        "--theta-mode", "--lo-sideband", "--branch", "--mask-lambda-sq", "--out", "--config",
        "--n0-range", "--detuning-range", "--include-unstable", "--effective-mass", "--omega0",
        "--quality-factor", "--critical-amplitude",
    ] {
        assert!(help.contains(flag), "missing {flag}");
    }
    let help = stdout(&duffamp(dir.path(), &["verify", "--help"]));
    for flag in ["--seed", "--samples", "--report", "--config"] {
        assert!(help.contains(flag), "missing {flag}");
    }
}

#[test]
fn verify_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = duffamp(dir.path(), &["verify", "--seed", "42", "--samples", "200", "--report", "rep.toml"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 5);
    assert!(out.lines().all(|l| l.starts_with("PASS")));
    let rep: toml::Table = std::fs::read_to_string(dir.path().join("rep.toml")).unwrap().parse().unwrap();
    assert_eq!(rep["seed"].as_integer(), Some(42));
    assert_eq!(rep["passed"].as_bool(), Some(true));
    assert_eq!(rep["checks"].as_array().unwrap().len(), 5);
}
