//! End-to-end runs of the `mlnoise` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mlnoise_cli::formats::{parse_noise_bin, parse_noise_csv, read_noise, write_noise_bin, write_noise_csv};
use mlnoise_cli::manifest::RunManifest;
use tempfile::TempDir;

fn mlnoise(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlnoise"))
        .args(args)
        .current_dir(dir)
        .env_remove("MLN_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Value column of the row whose first column is `key`.
fn row_value(csv: &str, key: &str) -> f64 {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .find_map(|l| l.strip_prefix(&format!("{key},")))
        .unwrap_or_else(|| panic!("no row {key} in\n{csv}"))
        .parse()
        .unwrap()
}

const GEN: [&str; 11] = [
    "generate", "--n", "1", "--t", "500", "--c", "1", "--lambda", "0.6", "--tau", "10",
];

#[test]
fn seeded_generate_is_reproducible() {
    let dir = TempDir::new().unwrap();
    for name in ["a.csv", "b.csv"] {
        let o = mlnoise(dir.path(), &[&GEN[..], &["--seed", "7", "--out", name]].concat());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    let batch = read_noise(&dir.path().join("a.csv")).unwrap();
    assert_eq!((batch.n(), batch.t()), (1, 500));

    let m = RunManifest::read(&dir.path().join("a.csv.manifest.json")).unwrap();
    assert_eq!(m.seed, Some(7));
    assert_eq!(m.t_opt, Some(512));
    assert_eq!(m.params.unwrap().lambda, 0.6);
    assert!(m.timestamp.unwrap().ends_with('Z'));
}

#[test]
fn unseeded_runs_record_a_seed_that_reproduces_them() {
    let dir = TempDir::new().unwrap();
    let o = mlnoise(dir.path(), &[&GEN[..], &["--out", "x.bin"]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    let m = RunManifest::read(&dir.path().join("x.bin.manifest.json")).unwrap();
    assert_eq!(m.format.as_deref(), Some("bin"));
    let seed = m.seed.unwrap().to_string();
    let o = mlnoise(dir.path(), &[&GEN[..], &["--out", "y.bin", "--seed", &seed]].concat());
    assert!(o.status.success());
    assert_eq!(
        fs::read(dir.path().join("x.bin")).unwrap(),
        fs::read(dir.path().join("y.bin")).unwrap()
    );
}

#[test]
fn csv_and_binary_hold_the_same_samples() {
    let dir = TempDir::new().unwrap();
    for out in ["s.csv", "s.bin"] {
        let o = mlnoise(
            dir.path(),
            &[
                "generate", "--n", "3", "--t", "64", "--c", "2", "--lambda", "1.2", "--tau", "5", "--seed", "11",
                "--out", out,
            ],
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let csv = read_noise(&dir.path().join("s.csv")).unwrap();
    let bin = read_noise(&dir.path().join("s.bin")).unwrap();
    assert_eq!(csv.data(), bin.data());

    // load and re-save in both formats: identical numbers and identical bytes
    let mut again = Vec::new();
    write_noise_bin(&mut again, &csv).unwrap();
    assert_eq!(again, fs::read(dir.path().join("s.bin")).unwrap());
    assert_eq!(parse_noise_bin(&again).unwrap().data(), csv.data());
    let text = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let header: Vec<String> = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(String::from)
        .collect();
    let mut resaved = Vec::new();
    write_noise_csv(&mut resaved, &bin, &header).unwrap();
    assert_eq!(String::from_utf8(resaved.clone()).unwrap(), text);
    assert_eq!(
        parse_noise_csv(std::str::from_utf8(&resaved).unwrap()).unwrap().data(),
        bin.data()
    );
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    for threads in ["1", "4"] {
        let out = format!("t{threads}.bin");
        let o = mlnoise(
            dir.path(),
            &[&GEN[..], &["--seed", "3", "--out", &out, "--threads", threads]].concat(),
        );
        assert!(o.status.success());
    }
    let o = Command::new(env!("CARGO_BIN_EXE_mlnoise"))
        .args([&GEN[..], &["--seed", "3", "--out", "env.bin"]].concat())
        .current_dir(dir.path())
        .env("MLN_THREADS", "8")
        .output()
        .unwrap();
    assert!(o.status.success());
    let one = fs::read(dir.path().join("t1.bin")).unwrap();
    assert_eq!(one, fs::read(dir.path().join("t4.bin")).unwrap());
    assert_eq!(one, fs::read(dir.path().join("env.bin")).unwrap());
}

#[test]
fn parameter_errors_exit_2_with_the_range() {
    let dir = TempDir::new().unwrap();
    let base = ["generate", "--n", "1", "--t", "10", "--c", "1"];
    let o = mlnoise(dir.path(), &[&base[..], &["--lambda", "2.0", "--tau", "10"]].concat());
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("(0,2)"), "{msg}");
    assert_eq!(msg.trim_end().lines().count(), 1);

    let o = mlnoise(dir.path(), &[&base[..], &["--lamda", "0.5", "--tau", "10001"]].concat());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("(0,10000]"), "{}", stderr(&o));

    let o = mlnoise(
        dir.path(),
        &[
            "generate", "--n", "1", "--t", "10", "--c", "-1", "--lambda", "1", "--tau", "1",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = mlnoise(
        dir.path(),
        &[
            "generate", "--n", "0", "--t", "10", "--c", "1", "--lambda", "1", "--tau", "1",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = mlnoise(dir.path(), &[&GEN[..], &["--threads", "0"]].concat());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("noise.csv").exists());
}

#[test]
fn exhausted_ladder_exits_3() {
    let dir = TempDir::new().unwrap();
    let o = mlnoise(
        dir.path(),
        &[
            "generate",
            "--n",
            "1",
            "--t",
            "16",
            "--c",
            "1",
            "--lambda",
            "1.8",
            "--tau",
            "20",
            "--ladder-cap",
            "128",
        ],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("no valid embedding length"));
}

#[test]
fn acft_exponential_row() {
    let dir = TempDir::new().unwrap();
    let o = mlnoise(
        dir.path(),
        &[
            "acft", "--c", "1", "--tau", "10", "--lambda", "1", "--tmax", "50", "--dt", "1",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "lag,acf"));
    assert!((row_value(&text, "10") - 0.036_787_944_1).abs() < 1e-10);
    assert_eq!(row_value(&text, "0"), 0.1);
}

#[test]
fn acf_of_a_constant_file_is_its_square() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("# constant\nt,x0,x1\n");
    for t in 0..20 {
        csv.push_str(&format!("{t},2,2\n"));
    }
    fs::write(dir.path().join("two.csv"), csv).unwrap();
    let o = mlnoise(
        dir.path(),
        &[
            "acf", "--input", "two.csv", "--tmax", "19", "--out", "acf.csv", "--svg", "acf.svg",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("acf.csv")).unwrap();
    for lag in 0..20 {
        assert_eq!(row_value(&text, &lag.to_string()), 4.0);
    }
    let m = RunManifest::read(&dir.path().join("acf.csv.manifest.json")).unwrap();
    assert_eq!((m.n, m.t, m.tmax), (Some(2), Some(20), Some(19)));
    assert!(fs::read_to_string(dir.path().join("acf.svg"))
        .unwrap()
        .starts_with("<svg"));

    let o = mlnoise(dir.path(), &["acf", "--input", "two.csv", "--tmax", "20"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn msd_theoretical_and_empirical() {
    let dir = TempDir::new().unwrap();
    let o = mlnoise(
        dir.path(),
        &[
            "msd", "--c", "1", "--tau", "10", "--lambda", "1", "--tmax", "20", "--svg", "m.svg",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!((row_value(&stdout(&o), "10") - 7.357_588_8).abs() < 1e-6);
    assert!(fs::read_to_string(dir.path().join("m.svg"))
        .unwrap()
        .contains("<polyline"));

    // a ballistic walker: constant unit steps give MSD(t) = t²
    let mut csv = String::from("t,x0\n");
    for t in 0..10 {
        csv.push_str(&format!("{t},1\n"));
    }
    fs::write(dir.path().join("ones.csv"), csv).unwrap();
    let o = mlnoise(dir.path(), &["msd", "--input", "ones.csv", "--tmax", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(row_value(&stdout(&o), "7"), 49.0);

    let o = mlnoise(dir.path(), &["msd", "--input", "ones.csv", "--tmax", "11"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mlnoise(dir.path(), &["msd", "--tmax", "11"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_input_exits_4() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.csv"), "t,x0\n0,1\n1,oops\n").unwrap();
    fs::write(dir.path().join("bad.bin"), b"MLNB\x01\x00\x00\x00garbage").unwrap();
    for input in ["bad.csv", "bad.bin", "missing.csv"] {
        let o = mlnoise(dir.path(), &["acf", "--input", input, "--tmax", "1"]);
        assert_eq!(o.status.code(), Some(4), "{input}: {}", stderr(&o));
        let o = mlnoise(dir.path(), &["msd", "--input", input, "--tmax", "1"]);
        assert_eq!(o.status.code(), Some(4), "{input}");
    }
}

#[test]
fn quick_validation_is_reproducible() {
    // the report is compared across runs, not judged: at any single seed a
    // max-over-lags check can exceed its limit by chance
    let dir = TempDir::new().unwrap();
    let a = mlnoise(dir.path(), &["validate", "--quick", "--seed", "5"]);
    let b = mlnoise(dir.path(), &["validate", "--quick", "--seed", "5"]);
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stderr(&a), stderr(&b));
    assert_eq!(a.status.code(), b.status.code());
    assert!(matches!(a.status.code(), Some(0 | 1)));
    let report = stdout(&a);
    assert!(report.starts_with("validation: seed 5, N = 200 (quick)"), "{report}");
    assert!(report.contains("46 checks, "), "{report}");
}

#[test]
fn quick_validation_passes_at_the_default_seed() {
    let dir = TempDir::new().unwrap();
    let o = mlnoise(dir.path(), &["validate", "--quick"]);
    assert!(o.status.success(), "{}\n{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("46 checks, 0 failed"));
}

#[test]
fn tampered_tolerance_fails_validation() {
    let dir = TempDir::new().unwrap();
    let o = mlnoise(dir.path(), &["validate", "--quick", "--tolerance-scale", "1e-9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
    assert!(stderr(&o).contains("check(s) failed"));
}
