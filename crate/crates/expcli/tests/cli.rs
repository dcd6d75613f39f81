use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sgim(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgim"))
        .args(args)
        .env("SGIM_OUTPUT_ROOT", root)
        .output()
        .unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn validate_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let full = configs().join("full.toml");
    let out = sgim(tmp.path(), &["validate", full.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let bad = write_config(tmp.path(), "bad.toml", "label = \"x\"\nbudget = 0\n");
    let out = sgim(tmp.path(), &["validate", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let broken = write_config(tmp.path(), "broken.toml", "label = \n");
    assert_eq!(sgim(tmp.path(), &["validate", &broken]).status.code(), Some(1));

    let missing = tmp.path().join("nope.toml");
    assert_eq!(sgim(tmp.path(), &["validate", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn usage_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(sgim(tmp.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(sgim(tmp.path(), &["--version"]).status.code(), Some(0));
    assert_eq!(sgim(tmp.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(sgim(tmp.path(), &["compare"]).status.code(), Some(1));
}

#[test]
fn run_then_compare_under_the_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "tiny.toml",
        "label = \"tiny\"\nbudget = 60\n[evaluation]\ncadence = 30\nper_dim = 2\n",
    );
    let out = sgim(tmp.path(), &["run", &cfg, "--seed", "1,2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let a = tmp.path().join("tiny-seed1");
    let b = tmp.path().join("tiny-seed2");
    assert!(a.join("choices.csv").is_file() && b.join("eval.csv").is_file());

    let out = sgim(tmp.path(), &["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let table = fs::read_to_string(tmp.path().join("comparison.csv")).unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout), table);
    assert!(table.contains("omega2,tiny,2,"));

    let out = sgim(tmp.path(), &["curves", a.to_str().unwrap(), "--bin", "20"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("curves").join("curves.csv").is_file());

    fs::remove_file(b.join("eval.csv")).unwrap();
    let out = sgim(tmp.path(), &["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mismatched runs"));
}

#[test]
fn star_run_needs_its_section() {
    let tmp = tempfile::tempdir().unwrap();
    let full = configs().join("full.toml");
    assert_eq!(sgim(tmp.path(), &["star-run", full.to_str().unwrap()]).status.code(), Some(1));
    fs::copy(configs().join("maze.txt"), tmp.path().join("maze.txt")).unwrap();
    let cfg = write_config(tmp.path(), "s.toml", "label = \"s\"\n[star]\nmaze = \"maze.txt\"\nepisodes = 50\n");
    let out = sgim(tmp.path(), &["star-run", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("s-seed0").join("star_summary.csv").is_file());
}
