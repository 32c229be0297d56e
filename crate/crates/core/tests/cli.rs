use std::fs;
use std::process::Command;

fn cellfree() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cellfree"))
}

const TINY: [&str; 12] = [
    "--set", "L=4", "--set", "K=6", "--set", "M=8", "--set", "tau_p=3", "--set", "num_layouts=1", "--set",
    "num_fading_draws=1",
];

#[test]
fn config_file_and_overrides_produce_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "schemes = [\"gzf\"]\ncsi_modes = [\"sp\"]\nQ = 2\n").unwrap();
    let out = dir.path().join("out");
    let status = cellfree()
        .arg("--config")
        .arg(&cfg)
        .args(TINY)
        .args(["--seed", "9", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for f in ["summary.json", "point_0.csv", "sum_se.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["metadata"]["seed"], 9);
    assert_eq!(summary["metadata"]["config"]["max_cluster_size"], 2);
    assert_eq!(summary["metadata"]["config"]["num_rrh"], 4);
}

#[test]
fn invalid_key_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = cellfree()
        .args(["--set", "tau_p=300", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("pilot_dim"));
}

#[test]
fn unwritable_output_fails_before_computing() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, b"").unwrap();
    // defaults are full scale; failing fast shows the preflight runs first
    let out = cellfree().arg("--out").arg(blocker.join("sub")).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("I/O error"));
}

#[test]
fn full_scale_figure_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    let out = cellfree()
        .args(["--figure", "fig2", "--scale", "full", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn tiny_figure_preset_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = cellfree()
        .args(["--figure", "fig2"])
        .args(["--set", "L=4", "--set", "K=6", "--set", "M=8", "--set", "tau_p=3"])
        .args(["--set", "num_layouts=1", "--set", "num_fading_draws=1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("manifest.json").exists());
    let cdfs = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("cdf_"))
        .count();
    assert_eq!(cdfs, 6);
}
