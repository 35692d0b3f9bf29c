//! End-to-end tests of the nestperc binary: exit codes, output files,
//! manifests and reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nestperc"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nestperc-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_cfg(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    std::fs::write(&path, body).unwrap();
    path
}

fn run_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn degree_tail_outputs_and_manifest() {
    let dir = tmp("degree");
    let cfg = write_cfg(
        &dir,
        "alpha = 2.0\nL = 128\nseed = 5\nh_min = 5\nh_max = 40\ndump_heights = true\n",
    );
    let out = bin()
        .args(["degree-tail", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    run_ok(&out);
    let hist = std::fs::read_to_string(dir.join("degree_hist.csv")).unwrap();
    assert!(hist.starts_with("h,count,censored_count"));
    let report = std::fs::read_to_string(dir.join("degree_tail_report.txt")).unwrap();
    assert!(report.contains("gamma-1 regression"));
    assert!(report.contains("gamma-1 target:     1.0000"));
    let manifest = std::fs::read_to_string(dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("sha256:"));
    assert!(manifest.contains("degree_hist.csv"));
    let heights = std::fs::read_to_string(dir.join("heights.txt")).unwrap();
    assert!(heights.starts_with("2 2 2 5 128"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn degree_tail_warns_outside_scale_free_region() {
    let dir = tmp("warn");
    let cfg = write_cfg(&dir, "alpha = 4.5\nL = 128\nh_min = 2\nh_max = 200\n");
    let out = bin()
        .args(["degree-tail", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    run_ok(&out);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("outside the scale-free region"), "{stderr}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn missing_key_is_usage_error_and_bad_param_is_precondition() {
    let dir = tmp("errors");
    // missing alpha
    let cfg = write_cfg(&dir, "L = 16\n");
    let out = bin()
        .args(["degree-tail", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    // invalid alpha
    let out = bin()
        .args(["percolate", "--set", "alpha=0.5", "--set", "rho=0.5"])
        .args(["--set", "p=0.5", "--set", "L=8", "--set", "n_reps=5"])
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn percolate_reproducible_and_worker_independent() {
    let dir1 = tmp("rep1");
    let dir2 = tmp("rep2");
    let base = "alpha = 1.8\nrho = 0.6\np = 0.4\nL = 16\nn_reps = 50\nseed = 99\ndump_edges = true\n";
    for (dir, workers) in [(&dir1, "1"), (&dir2, "2")] {
        let cfg = write_cfg(dir, base);
        let out = bin()
            .args(["percolate", "--config"])
            .arg(&cfg)
            .arg("--out-dir")
            .arg(dir)
            .args(["--workers", workers])
            .output()
            .unwrap();
        run_ok(&out);
    }
    let a = std::fs::read_to_string(dir1.join("replicas.csv")).unwrap();
    let b = std::fs::read_to_string(dir2.join("replicas.csv")).unwrap();
    assert_eq!(a, b, "results depend on worker count");
    let e1 = std::fs::read_to_string(dir1.join("edges.txt")).unwrap();
    let e2 = std::fs::read_to_string(dir2.join("edges.txt")).unwrap();
    assert_eq!(e1, e2);
    assert!(e1.lines().all(|l| l.ends_with(" nested")));
    assert!(a.starts_with(
        "seed,L,alpha,rho,p,model,crossing,origin_size,largest_fraction,n_open_edges"
    ));
    // a different seed changes the rows
    let dir3 = tmp("rep3");
    let cfg = write_cfg(&dir3, base);
    let out = bin()
        .args(["percolate", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&dir3)
        .args(["--seed", "100"])
        .output()
        .unwrap();
    run_ok(&out);
    let c = std::fs::read_to_string(dir3.join("replicas.csv")).unwrap();
    assert_ne!(a, c);
    for d in [dir1, dir2, dir3] {
        std::fs::remove_dir_all(&d).unwrap();
    }
}

#[test]
fn manifest_doubles_as_config() {
    let dir = tmp("remanifest");
    let cfg = write_cfg(&dir, "alpha = 1.8\nrho = 0.6\np = 0.4\nL = 12\nn_reps = 20\nseed = 3\n");
    let out = bin()
        .args(["percolate", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    run_ok(&out);
    let first = std::fs::read_to_string(dir.join("replicas.csv")).unwrap();
    // rerun straight from the manifest
    let dir2 = tmp("remanifest2");
    let out = bin()
        .args(["percolate", "--config"])
        .arg(dir.join("manifest.txt"))
        .arg("--out-dir")
        .arg(&dir2)
        .output()
        .unwrap();
    run_ok(&out);
    let second = std::fs::read_to_string(dir2.join("replicas.csv")).unwrap();
    assert_eq!(first, second);
    std::fs::remove_dir_all(&dir).unwrap();
    std::fs::remove_dir_all(&dir2).unwrap();
}

#[test]
fn phase_scan_grid_and_empty() {
    let dir = tmp("scan");
    let cfg = write_cfg(
        &dir,
        "p = 0.05\nalpha_list = 2.0,3.0\nrho_list = 0.2,0.9\nL_list = 8,16\nn_reps = 40\n",
    );
    let out = bin()
        .args(["phase-scan", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    run_ok(&out);
    let csv = std::fs::read_to_string(dir.join("phase_scan.csv")).unwrap();
    assert!(csv.starts_with("alpha,rho,p,L,n,crossing_freq,ci_low,ci_high"));
    let classes = std::fs::read_to_string(dir.join("phase_classes.csv")).unwrap();
    assert_eq!(classes.lines().count(), 5); // header + 4 cells
    let svg = std::fs::read_to_string(dir.join("phase_diagram.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));

    // empty grid: header-only CSV, still a valid SVG
    let dir2 = tmp("scan-empty");
    let cfg = write_cfg(
        &dir2,
        "p = 0.05\nalpha_min = 2\nalpha_max = 3\nalpha_steps = 0\nrho_list = 0.5\n",
    );
    let out = bin()
        .args(["phase-scan", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&dir2)
        .output()
        .unwrap();
    run_ok(&out);
    let csv = std::fs::read_to_string(dir2.join("phase_scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    let svg = std::fs::read_to_string(dir2.join("phase_diagram.svg")).unwrap();
    assert!(svg.contains("</svg>"));
    std::fs::remove_dir_all(&dir).unwrap();
    std::fs::remove_dir_all(&dir2).unwrap();
}

#[test]
fn ladder_and_compare_longrange_run() {
    let dir = tmp("ladder");
    let cfg = write_cfg(
        &dir,
        "alpha = 2.0\nrho = 0.9\np = 0.05\nk_max = 10\ntraces = 200\nk0_list = 4,8\n",
    );
    let out = bin()
        .args(["ladder", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    run_ok(&out);
    let traces = std::fs::read_to_string(dir.join("ladder_traces.csv")).unwrap();
    assert!(traces.starts_with("trace,level,outcome"));
    assert_eq!(traces.lines().count(), 1 + 200 * 10);
    let summary = std::fs::read_to_string(dir.join("ladder_summary.txt")).unwrap();
    assert!(summary.contains("trivial threshold expected"));

    let dir2 = tmp("chain");
    let cfg = write_cfg(&dir2, "alpha = 2.0\nrho = 0.25\np = 0.2\nL = 16\nn_reps = 60\n");
    let out = bin()
        .args(["compare-longrange", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&dir2)
        .output()
        .unwrap();
    run_ok(&out);
    let csv = std::fs::read_to_string(dir2.join("domination.csv")).unwrap();
    assert!(csv.starts_with("model,p_hat,ci_low,ci_high,n,L"));
    assert_eq!(csv.lines().count(), 5);
    std::fs::remove_dir_all(&dir).unwrap();
    std::fs::remove_dir_all(&dir2).unwrap();
}

#[test]
fn oracle_command_uses_cache() {
    let dir = tmp("oracle");
    let cache = dir.join("cache");
    let args = [
        "oracle",
        "--set",
        "op=edge",
        "--set",
        "alpha=2.0",
        "--set",
        "rho=0.5",
        "--set",
        "p=0.5",
        "--set",
        "u=0,0",
        "--set",
        "v=1,1",
    ];
    let out1 = bin()
        .args(args)
        .arg("--out-dir")
        .arg(&dir)
        .env("NESTPERC_CACHE_DIR", &cache)
        .output()
        .unwrap();
    run_ok(&out1);
    let v1: f64 = String::from_utf8_lossy(&out1.stdout)
        .lines()
        .last()
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(v1 > 0.0 && v1 < 1.0);
    assert!(cache.join("oracle_cache.csv").exists());
    let out2 = bin()
        .args(args)
        .arg("--out-dir")
        .arg(&dir)
        .env("NESTPERC_CACHE_DIR", &cache)
        .output()
        .unwrap();
    run_ok(&out2);
    let v2: f64 = String::from_utf8_lossy(&out2.stdout)
        .lines()
        .last()
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert_eq!(v1, v2);
    // cache file has exactly one data row (second run was a hit)
    let cache_body = std::fs::read_to_string(cache.join("oracle_cache.csv")).unwrap();
    assert_eq!(cache_body.lines().count(), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_passes_and_seed_override_keeps_it_green() {
    let dir = tmp("verify");
    for seed in ["1", "4242"] {
        let out = bin()
            .args(["verify", "--set", "n_small=4000", "--seed", seed])
            .arg("--out-dir")
            .arg(&dir)
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "seed {seed}: stdout {}\nstderr {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        );
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(stdout.contains("0 failed"), "{stdout}");
    }
    let report = std::fs::read_to_string(dir.join("verify_report.txt")).unwrap();
    assert!(report.contains("zero-function fault injection"));
    std::fs::remove_dir_all(&dir).unwrap();
}
