use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn dtc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = dtc(args);
    assert!(
        out.status.success(),
        "dtc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Data lines after the hash comment and the header.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(2)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn header(text: &str) -> &str {
    text.lines().nth(1).unwrap()
}

fn meta(dir: &Path) -> Value {
    serde_json::from_str(&read(dir, "meta.json")).unwrap()
}

#[test]
fn perfect_kicks_alternate() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().to_str().unwrap();
    run_ok(&[
        "run",
        "--out",
        out,
        "-s",
        "n_sites=6",
        "-s",
        "epsilon=0",
        "-s",
        "n_periods=64",
    ]);
    let mx = read(tmp.path(), "mx.csv");
    assert!(mx.starts_with("# config_sha256="));
    assert_eq!(header(&mx), "n,mx");
    let rows = rows(&mx);
    assert_eq!(rows.len(), 64);
    for (n, r) in rows.iter().enumerate() {
        assert_eq!(r[0].parse::<usize>().unwrap(), n);
        let m: f64 = r[1].parse().unwrap();
        let want = if n % 2 == 0 { 1.0 } else { -1.0 };
        assert!((m - want).abs() < 1e-12, "n={n}: {m}");
    }
    let spectrum = read(tmp.path(), "spectrum.csv");
    assert_eq!(header(&spectrum), "omega_tau,amplitude");
    let m = meta(tmp.path());
    let hash = m["config_sha256"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(mx.starts_with(&format!("# config_sha256={hash}\n")));
    assert_eq!(
        m["files"],
        serde_json::json!(["mx.csv", "spectrum.csv", "meta.json"])
    );
    assert!(m["summary"]["spectrum"]["kld"].as_f64().unwrap() < 1e-6);
}

#[test]
fn outputs_are_deterministic_across_thread_counts() {
    let dirs: Vec<TempDir> = (0..3).map(|_| TempDir::new().unwrap()).collect();
    let common = [
        "-s",
        "n_sites=5",
        "-s",
        "field=0.3",
        "-s",
        "n_periods=40",
        "-s",
        "noise_bound=0.05",
        "-s",
        "realizations=3",
        "-s",
        "scan.min=0",
        "-s",
        "scan.max=0.2",
        "-s",
        "scan.steps=4",
    ];
    for (dir, threads) in dirs.iter().zip(["1", "2", "4"]) {
        let mut args = vec![
            "run",
            "--out",
            dir.path().to_str().unwrap(),
            "--threads",
            threads,
            "--seed",
            "7",
        ];
        args.extend(common);
        run_ok(&args);
        let mut args = vec![
            "scan",
            "--out",
            dir.path().to_str().unwrap(),
            "--threads",
            threads,
        ];
        args.extend(common);
        run_ok(&args);
    }
    for name in [
        "mx.csv",
        "spectrum.csv",
        "phase_map.csv",
        "kld.csv",
        "meta.json",
    ] {
        let first = read(dirs[0].path(), name);
        for d in &dirs[1..] {
            assert_eq!(first, read(d.path(), name), "{name} differs");
        }
    }
}

#[test]
fn seed_changes_noisy_output() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for (dir, seed) in [(&a, "1"), (&b, "2")] {
        run_ok(&[
            "run",
            "--out",
            dir.path().to_str().unwrap(),
            "--seed",
            seed,
            "-s",
            "n_sites=4",
            "-s",
            "n_periods=20",
            "-s",
            "noise_bound=0.1",
        ]);
    }
    assert_ne!(read(a.path(), "mx.csv"), read(b.path(), "mx.csv"));
}

#[test]
fn unknown_key_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let out = dtc(&[
        "run",
        "--out",
        tmp.path().to_str().unwrap(),
        "-s",
        "n_spins=4",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    assert!(err["error"]["message"]
        .as_str()
        .unwrap()
        .contains("n_spins"));
    assert!(fs::read_dir(tmp.path()).unwrap().next().is_none());
}

#[test]
fn floquet_rejects_large_chains() {
    let tmp = TempDir::new().unwrap();
    let out = dtc(&[
        "floquet",
        "--out",
        tmp.path().to_str().unwrap(),
        "-s",
        "n_sites=40",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["message"]
        .as_str()
        .unwrap()
        .contains("at most 12"));
}

#[test]
fn config_file_round_trips() {
    let tmp = TempDir::new().unwrap();
    let printed = run_ok(&[
        "scan",
        "--print-config",
        "-s",
        "scan.parameter=j_tau",
        "-s",
        "range_exponent=1.5",
    ]);
    let text = String::from_utf8(printed.stdout).unwrap();
    let path = tmp.path().join("cfg.json");
    fs::write(&path, &text).unwrap();
    let again = run_ok(&["scan", "--print-config", "--config", path.to_str().unwrap()]);
    assert_eq!(text, String::from_utf8(again.stdout).unwrap());
    let inf = run_ok(&["run", "--print-config"]);
    assert!(String::from_utf8(inf.stdout)
        .unwrap()
        .contains("\"range_exponent\": \"inf\""));
}

#[test]
fn scan_writes_phase_map_and_kld() {
    let tmp = TempDir::new().unwrap();
    run_ok(&[
        "scan",
        "--out",
        tmp.path().to_str().unwrap(),
        "-s",
        "n_sites=4",
        "-s",
        "n_periods=32",
        "-s",
        "scan.max=0.5",
        "-s",
        "scan.steps=3",
    ]);
    let map = read(tmp.path(), "phase_map.csv");
    assert_eq!(
        header(&map),
        "param,omega_tau,amplitude_raw,amplitude_maxnorm"
    );
    assert_eq!(rows(&map).len(), 3 * 32);
    let kld = read(tmp.path(), "kld.csv");
    assert_eq!(header(&kld), "param,kld");
    let kld = rows(&kld);
    assert_eq!(kld.len(), 3);
    // ε = 0 is perfect period doubling.
    assert!(kld[0][1].parse::<f64>().unwrap() < 1e-6);
    assert!(kld[2][1].parse::<f64>().unwrap() > 1.0);
    assert_eq!(
        meta(tmp.path())["summary"]["failed_points"],
        serde_json::json!([])
    );
}

#[test]
fn floquet_writes_pairing_tables() {
    let tmp = TempDir::new().unwrap();
    run_ok(&[
        "floquet",
        "--out",
        tmp.path().to_str().unwrap(),
        "-s",
        "n_sites=4",
        "-s",
        "field=0.3",
        "-s",
        "sizes=[4,5,6]",
        "-s",
        "epsilons=[0,0.02]",
    ]);
    let q = read(tmp.path(), "quasi_energies.csv");
    assert_eq!(header(&q), "alpha,mu,parity");
    assert_eq!(rows(&q).len(), 16);
    let p = read(tmp.path(), "pairing.csv");
    assert_eq!(header(&p), "epsilon,N,mean_log_delta_0,mean_log_delta_pi");
    assert_eq!(rows(&p).len(), 6);
    let s = read(tmp.path(), "pairing_slopes.csv");
    assert_eq!(header(&s), "epsilon,slope_b0,slope_bpi");
    assert_eq!(rows(&s).len(), 2);
    assert_eq!(
        meta(tmp.path())["summary"]["gap_floor"].as_f64(),
        Some(1e-15)
    );
}

#[test]
fn lmg_writes_exact_and_closed_form() {
    let tmp = TempDir::new().unwrap();
    run_ok(&[
        "lmg",
        "--out",
        tmp.path().to_str().unwrap(),
        "-s",
        "n_sites=20",
        "-s",
        "epsilon=0.01",
        "-s",
        "n_periods=100",
    ]);
    let exact = rows(&read(tmp.path(), "mx.csv"));
    let closed = rows(&read(tmp.path(), "mx_closed_form.csv"));
    assert_eq!(exact.len(), 100);
    assert_eq!(closed.len(), 100);
    let summary = &meta(tmp.path())["summary"];
    assert!(summary["omega_1"].as_f64().unwrap() > 0.0);
    assert!(summary["within_validity"].as_bool().unwrap());
    assert!(summary["max_deviation"].as_f64().unwrap() < 1e-2);
}

#[test]
fn fit_writes_scaling_summary() {
    let tmp = TempDir::new().unwrap();
    run_ok(&[
        "fit",
        "--out",
        tmp.path().to_str().unwrap(),
        "-s",
        "n_periods=4000",
        "-s",
        "sizes=[4,5,6]",
        "-s",
        "epsilons=[0.1,0.12,0.14,0.16,0.18]",
    ]);
    let splitting = read(tmp.path(), "splitting.csv");
    assert_eq!(header(&splitting), "n_sites,epsilon,delta_omega");
    assert_eq!(rows(&splitting).len(), 15);
    assert!(tmp.path().join("scaling.csv").exists());
    let fit: Value = serde_json::from_str(&read(tmp.path(), "fit.json")).unwrap();
    for key in ["m_a", "m_b", "epsilon_star"] {
        assert!(fit[key].as_f64().unwrap().is_finite(), "{key}");
    }
    assert!(fit["m_a"].as_f64().unwrap() > 0.0);
    assert_eq!(fit["per_size"].as_array().unwrap().len(), 3);
    assert!(fit["config_sha256"].is_string());
}
