//! End-to-end checks of the command-line surface: every subcommand, the
//! override flags, and the output-directory environment variable.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_deltabo"))
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("deltabo_cli_{tag}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn tiny_config(dir: &Path) -> PathBuf {
    let text = "\
objective.kind = assumption_pair
objective.seed = 5
objective.kernel_g.family = matern52
objective.kernel_g.tau2 = 1.0
objective.kernel_g.lengthscale = 1.2
objective.kernel_delta.family = se
objective.kernel_delta.tau2 = 0.8
objective.kernel_delta.lengthscale = 1.0
domain.dimension = 2
domain.lower = -1.0
domain.upper = 1.0
domain.resolution = 10
run.source_size = 12
run.horizon = 4
run.initial_observations = 1
run.replications = 3
run.source_noise_var = 0.1
run.noise_var = 0.01
run.tau2 = 0.8
run.seed = 17
output.dir = unused_default
algorithms.list = deltabo, gp_ucb
algorithms.deltabo.kernel_g.family = matern52
algorithms.deltabo.kernel_g.tau2 = 1.0
algorithms.deltabo.kernel_g.lengthscale = 1.2
algorithms.deltabo.kernel_delta.family = se
algorithms.deltabo.kernel_delta.tau2 = 0.8
algorithms.deltabo.kernel_delta.lengthscale = 1.0
algorithms.deltabo.beta.mode = constant
algorithms.deltabo.beta.value = 0.2
algorithms.gp_ucb.kernel_f.family = matern52
algorithms.gp_ucb.kernel_f.tau2 = 1.0
algorithms.gp_ucb.kernel_f.lengthscale = 1.0
algorithms.gp_ucb.beta.mode = constant
algorithms.gp_ucb.beta.value = 0.2
";
    let path = dir.join("tiny.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_aggregate_gamma_pairgen_round_trip() {
    let dir = workdir("roundtrip");
    let cfg = tiny_config(&dir);
    let out = dir.join("out");

    let status = bin()
        .args(["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", "1"])
        .status()
        .unwrap();
    assert!(status.success());
    for file in ["raw.csv", "aggregate.csv", "plot_cumulative.csv", "plot_average.csv", "manifest.txt"]
    {
        assert!(out.join(file).exists(), "{file} missing after run");
    }

    // re-aggregation from persisted traces reproduces the derived files
    let aggregate_before = std::fs::read(out.join("aggregate.csv")).unwrap();
    std::fs::remove_file(out.join("aggregate.csv")).unwrap();
    let status = bin().args(["aggregate", out.to_str().unwrap()]).status().unwrap();
    assert!(status.success());
    let aggregate_after = std::fs::read(out.join("aggregate.csv")).unwrap();
    assert_eq!(aggregate_before, aggregate_after);

    let output = bin().args(["gamma", cfg.to_str().unwrap()]).output().unwrap();
    assert!(output.status.success());
    let table = String::from_utf8(output.stdout).unwrap();
    assert!(table.contains("greedy_gamma"), "{table}");
    assert!(table.contains("deltabo.kernel_delta"), "{table}");

    let pair_path = dir.join("pair.csv");
    let status = bin()
        .args(["pairgen", cfg.to_str().unwrap(), "--out", pair_path.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let pair_text = std::fs::read_to_string(&pair_path).unwrap();
    assert!(pair_text.starts_with("index,x0,x1,g,f\n"));
    assert_eq!(pair_text.lines().count(), 101); // header + 10 x 10 grid

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn output_dir_env_var_is_honored() {
    let dir = workdir("envvar");
    let cfg = tiny_config(&dir);
    let out = dir.join("from_env");
    let status = bin()
        .args(["run", cfg.to_str().unwrap(), "--workers", "1"])
        .env("DELTABO_OUTPUT_DIR", out.to_str().unwrap())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("raw.csv").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn seed_override_changes_traces() {
    let dir = workdir("seed");
    let cfg = tiny_config(&dir);
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for (out, seed) in [(&out_a, "17"), (&out_b, "18")] {
        let status = bin()
            .args([
                "run",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--seed",
                seed,
                "--workers",
                "1",
            ])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(out_a.join("raw.csv")).unwrap();
    let b = std::fs::read(out_b.join("raw.csv")).unwrap();
    assert_ne!(a, b, "different seeds produced identical traces");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn bad_config_fails_with_diagnostic() {
    let dir = workdir("bad");
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "objective.kind = mystery\n").unwrap();
    let output = bin().args(["run", cfg.to_str().unwrap()]).output().unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("mystery"), "{stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn oversized_domain_requires_release_profile() {
    let dir = workdir("profile");
    let cfg = tiny_config(&dir);
    let text = std::fs::read_to_string(&cfg)
        .unwrap()
        .replace("domain.resolution = 10", "domain.resolution = 70");
    std::fs::write(&cfg, text).unwrap();
    let output = bin()
        .args(["pairgen", cfg.to_str().unwrap(), "--out", dir.join("p.csv").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("cap"), "{stderr}");

    let status = bin()
        .args([
            "pairgen",
            cfg.to_str().unwrap(),
            "--out",
            dir.join("p.csv").to_str().unwrap(),
            "--profile",
            "release",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    std::fs::remove_dir_all(&dir).ok();
}
