use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn homog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homog"))
        .args(args)
        .output()
        .unwrap()
}

fn cfg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

#[test]
fn permeability_writes_csv() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().join("perm");
    let o = homog(&[
        "cell",
        "permeability",
        &cfg("disk025.toml"),
        "--n",
        "16",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("permeability.csv")).unwrap();
    assert!(csv.starts_with("row,a1,a2,eigenvalue"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn unknown_key_is_a_config_error_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        format!("lattice = {:?}\nn = 16\nbogus = 1\n", cfg("ball2d.toml")),
    )
    .unwrap();
    let o = homog(&["cell", "permeability", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.toml:3") && err.contains("bogus"), "{err}");
}

#[test]
fn usage_errors_exit_with_three() {
    assert_eq!(homog(&["nonsense"]).status.code(), Some(3));
    assert_eq!(homog(&["--help"]).status.code(), Some(0));
}

#[test]
fn validate_flags_a_hole_leaving_its_cell() {
    let dir = tempfile::tempdir().unwrap();
    let good = homog(&["geom", "validate", &cfg("translate2d.toml")]);
    assert_eq!(good.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&good.stdout).unwrap();
    assert_eq!(report["a1_inclusion"], true);

    let path = dir.path().join("far.toml");
    let text = std::fs::read_to_string(cfg("translate2d.toml"))
        .unwrap()
        .replace("delta = [0.1, 0.0]", "delta = [0.3, 0.0]")
        .replace("alpha = 0.1", "alpha = 0.3");
    std::fs::write(&path, text).unwrap();
    let bad = homog(&["geom", "validate", path.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(report["a1_inclusion"], false);
}

#[test]
fn study_report_round_trips_through_show() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().join("p");
    let o = homog(&[
        "study",
        "run",
        &cfg("poincare.toml"),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l == "poincare PASS"), "{stdout}");
    for ext in ["csv", "json", "log"] {
        assert!(dir.join(format!("poincare.{ext}")).exists());
    }
    let show = homog(&["report", "show", dir.join("poincare.csv").to_str().unwrap()]);
    assert_eq!(show.status.code(), Some(0));
    let table = String::from_utf8_lossy(&show.stdout);
    assert!(table.lines().next().unwrap().contains("lambda_min"));
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn stokes_and_darcy_write_fields() {
    let out = tempfile::tempdir().unwrap();
    let s = out.path().join("s");
    let o = homog(&[
        "solve",
        "stokes",
        &cfg("stokes2d.toml"),
        "--out",
        s.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for f in [
        "velocity.field",
        "pressure.field",
        "mask.field",
        "stokes.json",
    ] {
        assert!(s.join(f).exists(), "{f}");
    }
    let d = out.path().join("d");
    let o = homog(&[
        "darcy",
        "solve",
        &cfg("darcy2d.toml"),
        "--out",
        d.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(d.join("p0.field").exists() && d.join("u_star.field").exists());
}
