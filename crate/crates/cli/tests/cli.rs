use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use skinspec_cli::render;

const DIMER: &str = "chain = { N = 12, k = 2, s = [1, 2] }\nsamples = 128\nepsilons = [1e-2, 1e-5]\n[grid]\nresolution = 40\n";

fn skinspec(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_skinspec"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("SKINSPEC_THREADS", t),
        None => cmd.env_remove("SKINSPEC_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run_all_commands(cfg: &Path, out: &Path, threads: Option<&str>) {
    for cmd in ["sigma-det", "winding-region", "pseudospectrum", "skin-report"] {
        let o = skinspec(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], threads);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "dimer.toml", DIMER);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_all_commands(&cfg, &a, None);
    run_all_commands(&cfg, &b, Some("1"));
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 11);
    for name in names {
        let name = name.to_str().unwrap();
        assert_eq!(read(&a, name), read(&b, name), "{name} differs");
    }
}

#[test]
fn every_svg_regenerates_from_its_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "dimer.toml", DIMER);
    let out = tmp.path().join("out");
    run_all_commands(&cfg, &out, None);
    let region = render::region_svg(&read(&out, "region.csv"), &read(&out, "sigma_det.csv")).unwrap();
    assert_eq!(region, read(&out, "region.svg"));
    let pseudo =
        render::pseudospectrum_svg(&read(&out, "sigma_min.csv"), &read(&out, "eigenvalues.csv"), &[1e-2, 1e-5]).unwrap();
    assert_eq!(pseudo, read(&out, "pseudospectrum.svg"));
    assert_eq!(render::modes_svg(&read(&out, "modes.csv")).unwrap(), read(&out, "modes.svg"));
}

#[test]
fn skin_report_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "dimer.toml", DIMER);
    let out = tmp.path().join("out");
    run_all_commands(&cfg, &out, None);
    let report: serde_json::Value = serde_json::from_str(&read(&out, "report.json")).unwrap();
    assert_eq!(report["modes"].as_array().unwrap().len(), 12);
    let table = read(&out, "report.csv");
    assert!(table.starts_with("lambda_re,lambda_im,winding,region,argmax_site,fitted_rho\n"));
    assert_eq!(table.lines().count(), 13);
    let modes = read(&out, "modes.csv");
    assert!(modes.starts_with("mode,lambda_re,lambda_im,index,re,im,cell,cell_max\n"));
    assert_eq!(modes.lines().count(), 1 + 12 * 12);
    assert!(read(&out, "modes.svg").contains("#999999"));
}

#[test]
fn coburn_zero_is_outside_and_far_frames_are_outside() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "coburn.toml",
        "symbol = { a = [0, 1], b = [1, 0.5], c = [1, 0.5] }\n[grid]\nre = [-1, 1]\nim = [-1, 1]\nresolution = 33\n",
    );
    let out = tmp.path().join("near");
    let o = skinspec(&["winding-region", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert!(o.status.success());
    let zero = read(&out, "region.csv").lines().find(|l| l.starts_with("0,0,")).map(str::to_string);
    assert_eq!(zero.as_deref(), Some("0,0,outside,0"));

    let far = config(
        tmp.path(),
        "far.toml",
        "symbol = { a = [0, 1], b = [1, 0.5], c = [1, 0.5] }\n[grid]\nre = [50, 60]\nim = [50, 60]\nresolution = 32\n",
    );
    let out = tmp.path().join("far");
    let o = skinspec(&["winding-region", "--config", far.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert!(o.status.success());
    assert!(read(&out, "region.csv").lines().skip(1).all(|l| l.ends_with(",outside,0")));
}

#[test]
fn symmetric_k1_curve_is_the_segment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "k1.json", r#"{"symbol": {"k": 1, "a": [0], "b": [1], "c": [1]}}"#);
    let out = tmp.path().join("out");
    let o = skinspec(&["sigma-det", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--samples", "256"], None);
    assert!(o.status.success());
    let text = read(&out, "sigma_det.csv");
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut n = 0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for row in reader.records() {
        let row = row.unwrap();
        let (re, im): (f64, f64) = (row[2].parse().unwrap(), row[3].parse().unwrap());
        assert!(im.abs() < 1e-12 && re.abs() <= 2.0 + 1e-12);
        lo = lo.min(re);
        hi = hi.max(re);
        n += 1;
    }
    assert_eq!(n, 256);
    assert!((lo + 2.0).abs() < 1e-3 && (hi - 2.0).abs() < 1e-12);
}

#[test]
fn input_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();
    let missing = skinspec(&["sigma-det", "--config", "/nonexistent.toml", "--out", out], None);
    assert_eq!(missing.status.code(), Some(2));
    let bad = config(tmp.path(), "bad.toml", "chain = { N = 4, k = 2, s = [1, 2, 3] }");
    let o = skinspec(&["skin-report", "--config", bad.to_str().unwrap(), "--out", out], None);
    assert_eq!(o.status.code(), Some(2));
    let cfg = config(tmp.path(), "dimer.toml", DIMER);
    let o = skinspec(&["winding-region", "--config", cfg.to_str().unwrap(), "--out", out, "--resolution", "8"], None);
    assert_eq!(o.status.code(), Some(2));
    let o = skinspec(&["sigma-det", "--config", cfg.to_str().unwrap(), "--out", out], Some("zero"));
    assert_eq!(o.status.code(), Some(2));
    let o = skinspec(&["sigma-det", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_reports_every_criterion() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("verify");
    let o = skinspec(&["verify", "--out", out.to_str().unwrap()], None);
    let verdicts: serde_json::Value = serde_json::from_str(&read(&out, "verify.json")).unwrap();
    let verdicts = verdicts.as_array().unwrap();
    assert_eq!(verdicts.len(), 10);
    let all_passed = verdicts.iter().all(|v| v["passed"].as_bool().unwrap());
    assert_eq!(o.status.code(), Some(if all_passed { 0 } else { 1 }));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("criterion")).count(), 10);
}
