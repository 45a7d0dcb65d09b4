use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sdpsmooth"))
}

fn problem(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name).to_string_lossy().into_owned()
}

#[test]
fn full_then_smooth() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let st = bin()
        .args(["full", "--problem", "linear_ode", "--nx", "101", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let text = String::from_utf8_lossy(&st.stdout);
    assert!(text.contains("maxent    u  converged true"), "{text}");
    for f in ["solution.csv", "moments.csv", "vstar.csv", "estimate.csv", "report.json"] {
        assert!(out.join(f).exists(), "{f}");
    }

    let again = dir.path().join("smooth");
    let st = bin()
        .args(["smooth", "--problem", "linear_ode", "--moments", "2", "--solution"])
        .arg(out.join("solution.csv"))
        .arg("--out")
        .arg(&again)
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let moments = std::fs::read_to_string(again.join("moments.csv")).unwrap();
    assert_eq!(moments.lines().count(), 4);
}

#[test]
fn problem_file_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("problem = \"{}\"\nnx = 41\norder = 1\nmoments = 1\n", problem("decay.toml"))).unwrap();
    let st = bin().arg("solve").arg("--config").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let sol = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    // flag beats file
    assert_eq!(sol.lines().count(), 42);
    let st = bin().arg("solve").arg("--config").arg(&cfg).args(["--nx", "31", "--out"]).arg(dir.path()).output().unwrap();
    assert!(st.status.success());
    let sol = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert_eq!(sol.lines().count(), 32);
}

#[test]
fn errors_exit_with_two() {
    let st = bin().args(["solve", "--problem", "no_such_problem"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&st.stderr).contains("no_such_problem"));
    let st = bin().args(["solve", "--problem", "elliptic_bifur", "--nx", "5", "--order", "1"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&st.stderr).contains("relax"));
}

#[test]
fn presets_and_check() {
    let st = bin().arg("presets").output().unwrap();
    assert!(st.status.success());
    assert_eq!(String::from_utf8_lossy(&st.stdout).lines().count(), 6);
    let st = bin().arg("check").output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stdout));
}

#[test]
fn logistic_control_file_runs() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["solve", "--problem", &problem("logistic_control.toml"), "--nx", "41", "--order", "1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stdout));
}
