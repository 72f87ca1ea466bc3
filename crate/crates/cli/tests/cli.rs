use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const DECAY: &str = r#"
kind = "linear_decay"

[sweep]
xi = [0.1, 10.0]
omegas = [4.0]
omega_eps_product = 0.5
directions = 4
samples = 100
"#;

fn nskc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nskc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn invalid_config_exits_2_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "kind = \"picard\"\n[params]\nkappa = -2.0\n",
    );
    let out = nskc(&[
        "picard",
        "--config",
        &cfg,
        "--out",
        &dir.path().join("r").display().to_string(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("params.kappa"));
    assert!(!dir.path().join("r").exists());

    let out = nskc(&["validate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn subcommand_must_match_kind() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "decay.toml", DECAY);
    let out = nskc(&[
        "strichartz",
        "--config",
        &cfg,
        "--out",
        &dir.path().display().to_string(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`kind`"));
}

#[test]
fn run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "decay.toml", DECAY);
    let root = dir.path().join("results").display().to_string();
    let out = nskc(&[
        "linear-decay",
        "--config",
        &cfg,
        "--out",
        &root,
        "--seed",
        "11",
        "--workers",
        "1",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("linear_decay pass"), "{stdout}");

    let validated = nskc(&["validate", "--config", &cfg, "--seed", "11"]);
    let hash = String::from_utf8_lossy(&validated.stdout)
        .trim()
        .rsplit(' ')
        .next()
        .unwrap()
        .to_string();
    assert!(Path::new(&root)
        .join(format!("linear_decay-{hash}"))
        .is_dir());

    let report = nskc(&["report", "--out", &root]);
    assert!(report.status.success());
    assert!(String::from_utf8_lossy(&report.stdout).contains("seed 11"));
}
