use std::fs;
use std::process::Command;

fn aprd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aprd"))
}

#[test]
fn unknown_case_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = aprd()
        .args(["run", "--case", "no_such_case", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no_such_case"), "{err}");
}

#[test]
fn run_writes_snapshot_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = aprd()
        .args(["run", "--case", "transport_gaussian", "--degree", "1", "--cells", "16"])
        .args(["--t-final", "0.02", "--output-times", "0.01", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let mut names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert!(names.iter().any(|n| n.ends_with("manifest.txt")), "{names:?}");
    let csvs: Vec<&String> = names.iter().filter(|n| n.ends_with(".csv")).collect();
    assert_eq!(csvs.len(), 2, "{names:?}");

    let manifest = fs::read_to_string(dir.path().join("transport_gaussian_B1_manifest.txt")).unwrap();
    assert!(manifest.contains("transport_gaussian"));
    let snap = fs::read_to_string(dir.path().join(csvs[1])).unwrap();
    // header plus one row per DoF
    assert_eq!(snap.lines().count(), 17);
}

#[test]
fn out_dir_can_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = aprd()
        .env("APRD_OUT_DIR", dir.path())
        .args([
            "converge",
            "--case",
            "transport_gaussian",
            "--degree",
            "1",
            "--cells",
            "16,32",
        ])
        .args(["--t-final", "0.02"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("transport_gaussian_convergence.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(table.starts_with("degree,h,dofs"));
}

#[test]
fn bad_scheme_name_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = aprd()
        .args(["run", "--case", "burgers_sine", "--scheme", "supg", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("supg"));
}
