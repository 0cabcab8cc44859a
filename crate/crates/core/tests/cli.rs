//! End-to-end runs of the `chirpsfg` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    run_env(args, out, &[])
}

fn run_env(args: &[&str], out: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chirpsfg"));
    cmd.arg("--out").arg(out).args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn json_stdout(output: &Output) -> Value {
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

fn error_of(output: &Output) -> Value {
    serde_json::from_slice::<Value>(&output.stderr).expect("stderr is JSON")["error"].clone()
}

fn reference_config() -> String {
    scenario("reference.json").display().to_string()
}

#[test]
fn upconvert_reference_scenario() {
    let dir = TempDir::new().unwrap();
    let s = json_stdout(&run(&["--config", &reference_config(), "--json", "upconvert"], dir.path()));
    assert_eq!(s["schema_version"], 1);
    assert_eq!(s["command"], "upconvert");
    assert!((s["fwhm_ghz"].as_f64().unwrap() - 32.9).abs() < 0.1);
    assert!((s["center_nm"].as_f64().unwrap() - 399.60).abs() < 0.1);
    assert!(s["deltas"]["fwhm"]["relative"].as_f64().unwrap().abs() < 0.005);

    let csv = fs::read_to_string(dir.path().join("upconvert_spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("frequency_hz,intensity"));
    let peak = lines.map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert_eq!(peak, 1.0);
    assert!(!csv.contains('\r'));
    let on_disk: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("upconvert_summary.json")).unwrap()).unwrap();
    assert_eq!(on_disk, s);
}

#[test]
fn text_output_without_json_flag() {
    let dir = TempDir::new().unwrap();
    let out = run(&["--config", &reference_config(), "upconvert"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(serde_json::from_str::<Value>(&text).is_err());
    assert!(text.contains("GHz"));
}

#[test]
fn seeded_noise_reruns_are_byte_identical() {
    let config = scenario("noisy.json").display().to_string();
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        let out = run(&["--config", &config, "upconvert"], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 3, "{names:?}");
    for name in names {
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap(), "{name:?}");
    }

    let other = TempDir::new().unwrap();
    run(&["--config", &config, "--seed", "43", "upconvert"], other.path());
    assert_ne!(fs::read(a.path().join("noisy_noisy.csv")).unwrap(), fs::read(other.path().join("noisy_noisy.csv")).unwrap());
}

#[test]
fn echoed_scenario_reproduces_the_summary() {
    let dir = TempDir::new().unwrap();
    let first = json_stdout(&run(&["--config", &reference_config(), "--json", "upconvert"], dir.path()));
    let echoed = dir.path().join("echo.json");
    fs::write(&echoed, serde_json::to_string(&first["scenario"]).unwrap()).unwrap();
    let again = json_stdout(&run(&["--config", echoed.to_str().unwrap(), "--json", "upconvert"], dir.path()));
    assert_eq!(first, again);
}

#[test]
fn delay_on_unchirped_pulses_is_rejected() {
    let dir = TempDir::new().unwrap();
    let config = scenario("unchirped_delay.json").display().to_string();
    let out = run(&["--config", &config, "upconvert"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = error_of(&out);
    assert_eq!(err["kind"], "validation");
    assert!(err["message"].as_str().unwrap().contains("A = 0"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn invalid_invocations_exit_2() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.json").display().to_string();
    let config = reference_config();
    let scan = |from: &'static str, steps: &'static str| {
        vec!["--config", config.as_str(), "scan", "--mode", "delay", "--from", from, "--to", "1ps", "--steps", steps]
    };
    let cases: Vec<(Vec<&str>, Vec<(&str, &str)>)> = vec![
        (vec!["--config", &missing, "upconvert"], vec![]),
        (scan("-1ps", "2"), vec![]),
        (scan("-1parsec", "3"), vec![]),
        (vec!["--config", &config, "upconvert"], vec![("CHIRPSFG_THREADS", "0")]),
        (vec!["--config", &config, "--grid-points", "8", "upconvert"], vec![]),
        (vec!["no-such-command"], vec![]),
    ];
    for (args, env) in cases {
        let out = run_env(&args, dir.path(), &env);
        assert_eq!(out.status.code(), Some(2), "{args:?} {env:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn under_resolved_grid_exits_3() {
    let dir = TempDir::new().unwrap();
    let out = run(&["--config", &reference_config(), "--grid-points", "1024", "upconvert"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_of(&out)["kind"], "grid_precondition");
}

#[test]
fn delay_scan_slope() {
    let dir = TempDir::new().unwrap();
    let args = ["--config", &reference_config(), "--json", "scan", "--mode", "delay", "--from", "-10ps", "--to", "10ps", "--steps", "5"];
    let s = json_stdout(&run(&args, dir.path()));
    let slope = s["fit"]["slope"].as_f64().unwrap();
    assert!(((slope + 0.0648) / 0.0648).abs() < 0.01, "{slope}");
    let table = fs::read_to_string(dir.path().join("scan_delay_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 6);
}

#[test]
fn reprate_scan_slope() {
    let dir = TempDir::new().unwrap();
    let args = ["--config", &reference_config(), "--json", "scan", "--mode", "reprate", "--from", "-1kHz", "--to", "1kHz", "--steps", "5"];
    let s = json_stdout(&run(&args, dir.path()));
    assert_eq!(s["fit"]["unit"], "nm/kHz");
    let slope = s["fit"]["slope"].as_f64().unwrap();
    assert!((slope - 0.12).abs() < 0.003, "{slope}");
    assert!(s["deltas"]["slope"]["relative"].as_f64().unwrap().abs() < 0.01);
}

#[test]
fn chirp_scan_keeps_width_times_chirp_fixed() {
    let dir = TempDir::new().unwrap();
    let args = ["--config", &reference_config(), "--json", "scan", "--mode", "chirp", "--from", "10e6fs2", "--to", "40e6fs2", "--steps", "4"];
    let s = json_stdout(&run(&args, dir.path()));
    assert!(s["fwhm_chirp_product"]["max_relative_deviation"].as_f64().unwrap() < 0.005);
}

#[test]
fn entangled_herald_and_purity() {
    let dir = TempDir::new().unwrap();
    let config = scenario("entangled.json").display().to_string();
    let traced = json_stdout(&run(&["--config", &config, "--json", "entangled"], dir.path()));
    assert!(traced["deltas"]["fwhm"]["relative"].as_f64().unwrap().abs() < 0.01);

    let herald = json_stdout(&run(&["--config", &config, "--json", "herald", "--idler", "810nm"], dir.path()));
    assert!(herald["fwhm_ghz"].as_f64().unwrap() > 0.0);

    let purity = json_stdout(&run(&["--config", &config, "--json", "purity", "--quadrature", "64"], dir.path()));
    let initial = purity["purity"]["purity_initial"].as_f64().unwrap();
    let fin = purity["purity"]["purity_final"].as_f64().unwrap();
    assert!((initial - 3f64.sqrt() / 2.0).abs() < 1e-12);
    assert!(fin >= initial);
    // 64 points cannot resolve this chirp; the command says so
    assert!(purity["warnings"][0].as_str().unwrap().contains("under-resolve"));
}

#[test]
fn analyze_fit_and_deconvolve() {
    let dir = TempDir::new().unwrap();
    let up = json_stdout(&run(&["--config", &reference_config(), "--json", "upconvert"], dir.path()));
    let input = dir.path().join("upconvert_spectrum.csv").display().to_string();
    let fit = json_stdout(&run(&["--json", "analyze", "fit", "--input", &input], dir.path()));
    let fitted = fit["fwhm_ghz"].as_f64().unwrap();
    assert!((fitted - up["fwhm_ghz"].as_f64().unwrap()).abs() < 0.05, "{fitted}");

    let dec = json_stdout(&run(
        &["--json", "analyze", "deconvolve", "--measured", "74GHz", "--measured-sigma", "4GHz", "--resolution", "60GHz", "--resolution-sigma", "4GHz"],
        dir.path(),
    ));
    assert!((dec["fwhm_ghz"].as_f64().unwrap() - 43.31).abs() < 0.01);
    assert!((dec["sigma_ghz"].as_f64().unwrap() - 8.80).abs() < 0.01);
}

#[test]
fn reproduce_paper_passes() {
    let dir = TempDir::new().unwrap();
    let out = run(&["--json", "reproduce-paper"], dir.path());
    let s = json_stdout(&out);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("reproduce_paper_summary.json").exists());
    assert!(s.to_string().contains("compressed bandwidth"));
}
