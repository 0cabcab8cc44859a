//! Subcommand implementations. Each returns the summary JSON, a short human
//! report and whether every check passed; files are written on the way.

use std::path::Path;

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use serde_json::{json, Map, Value};

use super::config::{GridSettings, NoiseSettings, Scenario};
use super::output::{spectrum_csv, table_csv, to_finite_json, write_atomic, write_json, OutputPaths};
use super::reproduce;
use super::units::{parse_flag, parse_quantity, Dimension};
use crate::entanglement::{
    entangled_chirp_metric, entangled_sfg_bandwidth, heralded_photon, purity_final, purity_final_by_quadrature,
    purity_initial_by_quadrature, quadrature_points_needed, traced_spectrum_auto, TracedPoints,
};
use crate::error::{Error, Result};
use crate::pulses::{fit_gaussian, synthesize, FrequencyGrid, GaussianFit, PulseSpec, Spectrum, SPAN_HALF_WIDTHS};
use crate::quantities::units::*;
use crate::quantities::{frequency_to_wavelength, FWHM_PER_RMS};
use crate::sfg_analytic::{bandwidth_compressed, bandwidth_general, center_wavelength, large_chirp_metric, predict, SfgReport};
use crate::sfg_numeric::{default_output_grid, delay_scan, measure_spectrum, upconvert, GridOptions, SpectrumFeatures};
use crate::spectro_analysis::{
    background_subtract, deconvolve_resolution, fit_line, fit_spectrum, read_spectrum_csv, LineFit, MeasuredWidth,
};
use crate::timing_sync::{reprate_sensitivity, timing_difference};

pub const SCHEMA_VERSION: u32 = 1;

/// Result of one command.
pub struct Report {
    pub summary: Value,
    pub text: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct Delta {
    absolute: f64,
    relative: f64,
}

impl Delta {
    fn new(numeric: f64, analytic: f64) -> Delta {
        let absolute = numeric - analytic;
        Delta { absolute, relative: absolute / analytic }
    }
}

fn header(command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), json!(command));
    m
}

fn insert<T: Serialize>(m: &mut Map<String, Value>, key: &str, v: &T) -> Result<()> {
    m.insert(key.into(), to_finite_json(v)?);
    Ok(())
}

fn paths(out: &Path, scenario: Option<&Scenario>, default_prefix: &str) -> OutputPaths {
    let prefix = scenario.and_then(|s| s.output_prefix.clone()).unwrap_or_else(|| default_prefix.to_string());
    OutputPaths { dir: out.to_path_buf(), prefix }
}

/// Input grid for `spec`: refined to satisfy the phase rule, or exactly
/// `input_points` over the standard span when refinement is off.
fn input_grid(spec: &PulseSpec, grid: &GridSettings, warnings: &mut Vec<String>, name: &str) -> Result<FrequencyGrid> {
    if grid.auto_refine {
        let g = FrequencyGrid::for_pulse(spec, grid.input_points)?;
        if g.count > grid.input_points {
            warnings.push(format!(
                "{name} grid refined from {} to {} points to resolve the chirp phase",
                grid.input_points, g.count
            ));
        }
        Ok(g)
    } else {
        let n = grid.input_points.max(16);
        let step = SPAN_HALF_WIDTHS * spec.fwhm / (n / 2 - 1) as f64;
        FrequencyGrid::anchored(spec.nu0, step, n)
    }
}

struct PairRun {
    photon_fwhm: f64,
    analytic: SfgReport,
    spectrum: Spectrum,
    numeric: SpectrumFeatures,
    grid_points: (usize, usize, usize),
    noisy: Option<(Spectrum, GaussianFit)>,
    warnings: Vec<String>,
}

fn pair_warnings(photon: &PulseSpec, laser: &PulseSpec, analytic: &SfgReport, warnings: &mut Vec<String>) -> Result<()> {
    if photon.chirp + laser.chirp != 0.0 {
        warnings.push("photon and laser chirps are not opposite; compression is partial".into());
    }
    if photon.chirp != 0.0 && large_chirp_metric(photon.chirp, photon.fwhm)? < 10.0 {
        warnings.push("A²Δν_P⁴ < 10: outside the large-chirp regime where the width falls as 1/A".into());
    }
    if analytic.overlap < 0.01 {
        warnings.push(format!("overlap {:.3e} < 0.01: output too weak for a reliable width", analytic.overlap));
    }
    Ok(())
}

fn run_pair(photon: &PulseSpec, laser: &PulseSpec, grid: &GridSettings, noise: Option<NoiseSettings>, seed: u64) -> Result<PairRun> {
    let analytic = predict(photon, laser)?;
    let mut warnings = Vec::new();
    pair_warnings(photon, laser, &analytic, &mut warnings)?;
    let gp = input_grid(photon, grid, &mut warnings, "photon")?;
    let gl = input_grid(laser, grid, &mut warnings, "laser")?;
    let p = synthesize(photon, &gp)?;
    let l = synthesize(laser, &gl)?;
    let out = default_output_grid(photon, laser, grid.output_points)?;
    let spectrum = upconvert(&p, &l, &out)?.intensity().normalized();
    let numeric = measure_spectrum(&spectrum)?;
    let noisy = match noise {
        Some(n) => Some(add_noise(&spectrum, n, seed)?),
        None => None,
    };
    Ok(PairRun { photon_fwhm: photon.fwhm, analytic, spectrum, numeric, grid_points: (gp.count, gl.count, out.count), noisy, warnings })
}

/// Unit-peak spectrum plus seeded Gaussian noise, clamped at zero as a
/// counting detector would be, and a Gaussian fit to it.
fn add_noise(spectrum: &Spectrum, noise: NoiseSettings, seed: u64) -> Result<(Spectrum, GaussianFit)> {
    let normal = Normal::new(0.0, noise.level).map_err(|e| Error::Validation(format!("noise level: {e}")))?;
    let mut rng = StdRng::seed_from_u64(seed);
    let values: Vec<f64> = spectrum.values.iter().map(|v| (v + normal.sample(&mut rng)).max(0.0)).collect();
    let noisy = Spectrum { grid: spectrum.grid, values };
    let fit = fit_gaussian(&noisy.grid.to_vec(), &noisy.values)?;
    Ok((noisy, fit))
}

fn pair_summary(command: &str, run: &PairRun, scenario: &Scenario) -> Result<Map<String, Value>> {
    let mut m = header(command);
    let n = &run.numeric;
    insert(&mut m, "fwhm_ghz", &(n.fwhm / GHZ))?;
    insert(&mut m, "center_nm", &(n.center_wl / NM))?;
    insert(&mut m, "center_thz", &(n.center_freq / THZ))?;
    insert(&mut m, "compression_ratio", &(run.photon_fwhm / n.fwhm))?;
    insert(&mut m, "analytic", &run.analytic)?;
    insert(&mut m, "numeric", n)?;
    insert(
        &mut m,
        "deltas",
        &json!({
            "fwhm": Delta::new(n.fwhm, run.analytic.fwhm),
            "center_freq": Delta::new(n.center_freq, run.analytic.center_freq),
        }),
    )?;
    let (p, l, o) = run.grid_points;
    insert(&mut m, "grid", &json!({ "photon_points": p, "laser_points": l, "output_points": o }))?;
    if let Some((_, fit)) = &run.noisy {
        insert(&mut m, "noisy_fit", fit)?;
    }
    insert(&mut m, "warnings", &run.warnings)?;
    m.insert("scenario".into(), scenario.echo());
    Ok(m)
}

fn write_pair_files(paths: &OutputPaths, run: &PairRun, summary: &Value) -> Result<()> {
    write_atomic(&paths.file("spectrum.csv"), spectrum_csv(&run.spectrum).as_bytes())?;
    if let Some((noisy, _)) = &run.noisy {
        // noisy samples keep their raw scale; the clean spectrum is the unit-peak reference
        let rows: Vec<Vec<f64>> = noisy.grid.frequencies().zip(&noisy.values).map(|(f, v)| vec![f, *v]).collect();
        write_atomic(&paths.file("noisy.csv"), table_csv(&["frequency_hz", "intensity"], &rows).as_bytes())?;
    }
    write_json(&paths.file("summary.json"), summary)
}

fn pair_text(run: &PairRun, paths: &OutputPaths) -> String {
    let n = &run.numeric;
    let a = &run.analytic;
    let mut t = format!(
        "output FWHM   {:.4} GHz (closed form {:.4} GHz)\ncentre        {:.4} nm / {:.4} THz\ncompression   {:.2}\n",
        n.fwhm / GHZ,
        a.fwhm / GHZ,
        n.center_wl / NM,
        n.center_freq / THZ,
        a.compression_ratio
    );
    if let Some((_, fit)) = &run.noisy {
        t.push_str(&format!("noisy fit     {:.4} ± {:.4} GHz\n", fit.fwhm / GHZ, fit.fwhm_sigma / GHZ));
    }
    for w in &run.warnings {
        t.push_str(&format!("warning: {w}\n"));
    }
    t.push_str(&format!("wrote {}\n", paths.file("summary.json").display()));
    t
}

pub fn upconvert_cmd(scenario: &Scenario, out: &Path) -> Result<Report> {
    let photon = scenario.pulse_photon("upconvert")?;
    let run = run_pair(&photon, &scenario.laser, &scenario.grid, scenario.noise, scenario.seed)?;
    let paths = paths(out, Some(scenario), "upconvert");
    let summary = Value::Object(pair_summary("upconvert", &run, scenario)?);
    write_pair_files(&paths, &run, &summary)?;
    Ok(Report { text: pair_text(&run, &paths), summary, passed: true })
}

pub fn herald_cmd(scenario: &Scenario, idler: Option<&str>, out: &Path) -> Result<Report> {
    let source = scenario.entangled_photon("herald")?;
    let idler_frequency = match idler {
        Some(text) => match parse_quantity(text)? {
            (v, None | Some(Dimension::Frequency)) => v,
            (v, Some(Dimension::Length)) => crate::quantities::wavelength_to_frequency(v)?,
            _ => return Err(Error::Validation(format!("--idler expects a frequency or wavelength, got {text:?}"))),
        },
        None => source.herald_frequency.unwrap_or(source.jsa.nu0),
    };
    let photon = heralded_photon(&source.jsa, idler_frequency, source.chirp)?;
    let run = run_pair(&photon, &scenario.laser, &scenario.grid, scenario.noise, scenario.seed)?;
    let paths = paths(out, Some(scenario), "herald");
    let mut m = pair_summary("herald", &run, scenario)?;
    insert(&mut m, "idler_frequency", &idler_frequency)?;
    insert(&mut m, "heralded_photon", &photon)?;
    let summary = Value::Object(m);
    write_pair_files(&paths, &run, &summary)?;
    let text = format!(
        "heralded photon at {:.4} THz, FWHM {:.2} GHz\n{}",
        photon.nu0 / THZ,
        photon.fwhm / GHZ,
        pair_text(&run, &paths)
    );
    Ok(Report { text, summary, passed: true })
}

pub fn entangled_cmd(scenario: &Scenario, out: &Path) -> Result<Report> {
    let source = scenario.entangled_photon("entangled")?;
    let laser = scenario.laser;
    let jsa = source.jsa;
    let points = TracedPoints { idler: scenario.grid.traced_points, signal: scenario.grid.traced_points };
    let spectrum = traced_spectrum_auto(&jsa, &laser, source.chirp, scenario.grid.traced_output_points, points)?;
    let numeric = measure_spectrum(&spectrum)?;
    let marginal = jsa.marginal_bandwidth();
    let sigma_l = laser.fwhm / FWHM_PER_RMS;

    let mut warnings = Vec::new();
    let balanced = source.chirp != 0.0 && source.chirp + laser.chirp == 0.0;
    let mut m = header("entangled");
    insert(&mut m, "fwhm_ghz", &(numeric.fwhm / GHZ))?;
    insert(&mut m, "center_nm", &(numeric.center_wl / NM))?;
    insert(&mut m, "center_thz", &(numeric.center_freq / THZ))?;
    insert(&mut m, "compression_ratio", &(marginal / numeric.fwhm))?;
    insert(&mut m, "numeric", &numeric)?;
    let mut text = format!("traced output FWHM {:.4} GHz, marginal {:.2} GHz\n", numeric.fwhm / GHZ, marginal / GHZ);
    if balanced {
        let fwhm = entangled_sfg_bandwidth(jsa.sigma, jsa.sigma_c, sigma_l, source.chirp)?;
        let metric = entangled_chirp_metric(jsa.sigma, source.chirp);
        if metric < 100.0 {
            warnings.push(format!("A²σ⁴ = {metric:.3e}: the closed-form width assumes a large chirp"));
        }
        insert(&mut m, "analytic", &json!({ "fwhm": fwhm, "marginal_fwhm": marginal, "chirp_metric": metric }))?;
        insert(&mut m, "deltas", &json!({ "fwhm": Delta::new(numeric.fwhm, fwhm) }))?;
        let purity = purity_final(jsa.sigma, jsa.sigma_c, sigma_l, source.chirp)?;
        insert(&mut m, "purity", &purity)?;
        text.push_str(&format!(
            "closed form {:.4} GHz\npurity {:.6} -> {:.6}\n",
            fwhm / GHZ,
            purity.purity_initial,
            purity.purity_final
        ));
    } else {
        warnings.push("signal and laser chirps are not opposite; no closed-form width or purity reported".into());
    }
    insert(&mut m, "warnings", &warnings)?;
    m.insert("scenario".into(), scenario.echo());
    let summary = Value::Object(m);
    let paths = paths(out, Some(scenario), "entangled");
    write_atomic(&paths.file("spectrum.csv"), spectrum_csv(&spectrum).as_bytes())?;
    write_json(&paths.file("summary.json"), &summary)?;
    for w in &warnings {
        text.push_str(&format!("warning: {w}\n"));
    }
    Ok(Report { text, summary, passed: true })
}

pub fn purity_cmd(scenario: &Scenario, quadrature: Option<usize>, out: &Path) -> Result<Report> {
    let source = scenario.entangled_photon("purity")?;
    let (sigma, sigma_c) = (source.jsa.sigma, source.jsa.sigma_c);
    let sigma_l = scenario.laser.fwhm / FWHM_PER_RMS;
    let report = purity_final(sigma, sigma_c, sigma_l, source.chirp)?;
    let mut warnings: Vec<String> = Vec::new();
    if source.chirp + scenario.laser.chirp != 0.0 {
        warnings.push("the closed form assumes the laser chirp is the negative of the signal chirp".into());
    }
    let mut m = header("purity");
    insert(&mut m, "purity", &report)?;
    let mut text = format!(
        "purity initial {:.8}\npurity final   {:.8}\ndifference     {:.3e}\n",
        report.purity_initial, report.purity_final, report.purity_difference
    );
    if let Some(n) = quadrature {
        if n < 16 {
            return Err(Error::validation(format!("--quadrature needs at least 16 points, got {n}")));
        }
        let needed = quadrature_points_needed(sigma, sigma_l, source.chirp);
        if n < needed {
            warnings.push(format!(
                "{n} quadrature points under-resolve the chirp phase (about {needed} needed); the quadrature final purity is unreliable"
            ));
        }
        let initial = purity_initial_by_quadrature(sigma, sigma_c, n)?;
        let fin = purity_final_by_quadrature(sigma, sigma_c, sigma_l, source.chirp, n)?;
        insert(
            &mut m,
            "quadrature",
            &json!({
                "points": n,
                "purity_initial": initial,
                "purity_final": fin,
                "deltas": {
                    "purity_initial": Delta::new(initial, report.purity_initial),
                    "purity_final": Delta::new(fin, report.purity_final),
                },
            }),
        )?;
        text.push_str(&format!("quadrature     {initial:.8} -> {fin:.8} ({n} points)\n"));
    }
    insert(&mut m, "warnings", &warnings)?;
    m.insert("scenario".into(), scenario.echo());
    let summary = Value::Object(m);
    write_json(&paths(out, Some(scenario), "purity").file("summary.json"), &summary)?;
    Ok(Report { text, summary, passed: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    Delay,
    Reprate,
    Chirp,
}

impl ScanMode {
    fn name(self) -> &'static str {
        match self {
            ScanMode::Delay => "delay",
            ScanMode::Reprate => "reprate",
            ScanMode::Chirp => "chirp",
        }
    }

    fn dimension(self) -> Dimension {
        match self {
            ScanMode::Delay => Dimension::Time,
            ScanMode::Reprate => Dimension::Frequency,
            ScanMode::Chirp => Dimension::Chirp,
        }
    }
}

/// Scan range from the command line.
pub struct ScanRange<'a> {
    pub from: Option<&'a str>,
    pub to: Option<&'a str>,
    pub steps: Option<usize>,
}

const MIN_SCAN_POINTS: usize = 3;

fn scan_points(mode: ScanMode, range: &ScanRange, scenario: &Scenario) -> Result<Vec<f64>> {
    let points = match (range.from, range.to, range.steps) {
        (Some(from), Some(to), Some(steps)) => {
            let a = parse_flag(from, mode.dimension(), "--from")?;
            let b = parse_flag(to, mode.dimension(), "--to")?;
            if steps < MIN_SCAN_POINTS {
                return Err(Error::validation(format!("a scan needs at least {MIN_SCAN_POINTS} points, got {steps}")));
            }
            (0..steps).map(|k| a + (b - a) * k as f64 / (steps - 1) as f64).collect()
        }
        (None, None, None) if mode == ScanMode::Delay => scenario.delays.clone(),
        (None, None, None) => {
            return Err(Error::validation(format!("`scan --mode {}` needs --from, --to and --steps", mode.name())))
        }
        _ => return Err(Error::validation("--from, --to and --steps go together")),
    };
    if points.len() < MIN_SCAN_POINTS {
        return Err(Error::validation(format!("a scan needs at least {MIN_SCAN_POINTS} points, got {}", points.len())));
    }
    Ok(points)
}

fn line_json(fit: &LineFit, scale: f64, unit: &str) -> Value {
    json!({
        "slope": fit.slope / scale,
        "slope_sigma": fit.slope_sigma / scale,
        "unit": unit,
        "intercept": fit.intercept,
        "intercept_sigma": fit.intercept_sigma,
        "points": fit.points,
    })
}

pub fn scan_cmd(scenario: &Scenario, mode: ScanMode, range: &ScanRange, out: &Path) -> Result<Report> {
    let photon = scenario.pulse_photon("scan")?;
    let laser = scenario.laser;
    let points = scan_points(mode, range, scenario)?;
    let opts = GridOptions { input_points: scenario.grid.input_points, output_points: scenario.grid.output_points };
    if !scenario.grid.auto_refine {
        // run the same guard as upconvert so a coarse grid fails the same way
        let mut ignored = Vec::new();
        for (spec, name) in [(&photon, "photon"), (&laser, "laser")] {
            synthesize(spec, &input_grid(spec, &scenario.grid, &mut ignored, name)?)?;
        }
    }
    let mut warnings = Vec::new();
    let mut m = header("scan");
    insert(&mut m, "mode", &mode.name())?;
    let base_delay = laser.delay - photon.delay;
    let (wl_p, wl_l) = (frequency_to_wavelength(photon.nu0)?, frequency_to_wavelength(laser.nu0)?);

    let (csv_header, rows, text): (Vec<&str>, Vec<Vec<f64>>, String) = match mode {
        ScanMode::Delay | ScanMode::Reprate => {
            let (xs, delays): (Vec<f64>, Vec<f64>) = match mode {
                ScanMode::Delay => (points.clone(), points.clone()),
                _ => {
                    let timing = scenario
                        .timing
                        .ok_or_else(|| Error::validation("`scan --mode reprate` needs a `timing` section"))?;
                    let dt0 = timing_difference(&timing);
                    let delays = points
                        .iter()
                        .map(|&d| {
                            let t = timing.with_repetition_rate(timing.repetition_rate + d);
                            t.validate().map(|_| base_delay + timing_difference(&t) - dt0)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    (points.clone(), delays)
                }
            };
            let results = delay_scan(&photon, &laser, &delays, opts)?;
            let mut rows = Vec::new();
            let (mut fx, mut fy) = (Vec::new(), Vec::new());
            for ((x, delay), r) in xs.iter().zip(&delays).zip(results) {
                match r {
                    Ok(r) => {
                        let analytic = center_wavelength(wl_p, wl_l, photon.chirp, *delay)?.exact;
                        rows.push(vec![*x, *delay, r.center_wl, r.center_freq, r.fwhm, r.peak_intensity, analytic]);
                        fx.push(*x);
                        fy.push(r.center_wl);
                    }
                    Err(e) => warnings.push(format!("point {x:e} skipped: {e}")),
                }
            }
            let fit = fit_line(&fx, &fy)?;
            let fwhms: Vec<f64> = rows.iter().map(|r| r[4]).collect();
            let spread = fwhms.iter().cloned().fold(f64::MIN, f64::max) / fwhms.iter().cloned().fold(f64::MAX, f64::min) - 1.0;
            insert(&mut m, "fwhm_variation", &spread)?;
            let (x_name, text);
            if mode == ScanMode::Delay {
                x_name = "delay_s";
                let analytic = crate::sfg_analytic::wavelength_delay_slope(wl_p, wl_l, photon.chirp)?;
                insert(&mut m, "fit", &line_json(&fit, NM_PER_PS, "nm/ps"))?;
                insert(&mut m, "analytic_slope", &(analytic / NM_PER_PS))?;
                insert(&mut m, "deltas", &json!({ "slope": Delta::new(fit.slope, analytic) }))?;
                text = format!(
                    "slope {:.5} ± {:.5} nm/ps (closed form {:.5} nm/ps)\n",
                    fit.slope / NM_PER_PS,
                    fit.slope_sigma / NM_PER_PS,
                    analytic / NM_PER_PS
                );
            } else {
                x_name = "detuning_hz";
                let timing = scenario.timing.expect("checked above");
                let wl0 = center_wavelength(wl_p, wl_l, photon.chirp, base_delay)?.exact;
                let analytic = reprate_sensitivity(wl0, photon.chirp, timing.repetition_rate, timing.n)?;
                insert(&mut m, "fit", &line_json(&fit, NM_PER_KHZ, "nm/kHz"))?;
                insert(&mut m, "analytic_slope", &(analytic / NM_PER_KHZ))?;
                insert(&mut m, "deltas", &json!({ "slope": Delta::new(fit.slope, analytic) }))?;
                text = format!(
                    "slope {:.5} ± {:.5} nm/kHz (closed form {:.5} nm/kHz)\n",
                    fit.slope / NM_PER_KHZ,
                    fit.slope_sigma / NM_PER_KHZ,
                    analytic / NM_PER_KHZ
                );
            }
            let header =
                vec![x_name, "delay_s", "center_wl_m", "center_freq_hz", "fwhm_hz", "peak_intensity", "analytic_center_wl_m"];
            let header = if mode == ScanMode::Delay {
                // the first two columns coincide for a delay scan
                rows.iter_mut().for_each(|r| {
                    r.remove(0);
                });
                header[1..].to_vec()
            } else {
                header
            };
            (header, rows, text)
        }
        ScanMode::Chirp => {
            if points.iter().any(|&a| a == 0.0) || points.iter().any(|&a| a.signum() != points[0].signum()) {
                return Err(Error::validation("chirp scan values must be non-zero and of one sign"));
            }
            let mut rows = Vec::new();
            for &a in &points {
                let p = photon.with_chirp(a);
                let l = laser.with_chirp(-a);
                let run = run_pair(&p, &l, &scenario.grid, None, scenario.seed)?;
                let closed = bandwidth_compressed(p.fwhm, l.fwhm, a)?;
                rows.push(vec![a, run.numeric.fwhm, closed, run.numeric.fwhm * a.abs()]);
            }
            let products: Vec<f64> = rows.iter().map(|r| r[3]).collect();
            let mean = products.iter().sum::<f64>() / products.len() as f64;
            let spread = products.iter().map(|p| ((p - mean) / mean).abs()).fold(0.0, f64::max);
            let inv: Vec<f64> = points.iter().map(|a| 1.0 / a.abs()).collect();
            let widths: Vec<f64> = rows.iter().map(|r| r[1]).collect();
            let fit = fit_line(&inv, &widths)?;
            let general = bandwidth_general(photon.fwhm, laser.fwhm, points[0], -points[0])?;
            insert(
                &mut m,
                "fwhm_chirp_product",
                &json!({ "mean": mean, "max_relative_deviation": spread, "unit": "Hz s2" }),
            )?;
            insert(
                &mut m,
                "fit",
                &json!({
                    "slope": fit.slope,
                    "slope_sigma": fit.slope_sigma,
                    "intercept": fit.intercept,
                    "intercept_sigma": fit.intercept_sigma,
                    "unit": "Hz s2",
                    "points": fit.points,
                }),
            )?;
            insert(&mut m, "deltas", &json!({ "first_fwhm": Delta::new(rows[0][1], general) }))?;
            let text = format!(
                "FWHM x |A| = {:.6e} Hz s2, largest deviation {:.3e}\n",
                mean, spread
            );
            (vec!["chirp_s2", "fwhm_hz", "closed_form_fwhm_hz", "fwhm_times_chirp"], rows, text)
        }
    };
    insert(&mut m, "warnings", &warnings)?;
    m.insert("scenario".into(), scenario.echo());
    let summary = Value::Object(m);
    let paths = paths(out, Some(scenario), &format!("scan_{}", mode.name()));
    write_atomic(&paths.file("table.csv"), table_csv(&csv_header, &rows).as_bytes())?;
    write_json(&paths.file("summary.json"), &summary)?;
    let mut text = text;
    for w in &warnings {
        text.push_str(&format!("warning: {w}\n"));
    }
    Ok(Report { text, summary, passed: true })
}

/// A width flag given as a frequency, or as a wavelength width when a
/// centre wavelength is known.
fn width_flag(text: &str, flag: &str, center_wl: Option<f64>) -> Result<f64> {
    match parse_quantity(text)? {
        (v, None | Some(Dimension::Frequency)) => Ok(v),
        (v, Some(Dimension::Length)) => match center_wl {
            Some(wl) => crate::quantities::bandwidth_wl_to_freq(v, wl),
            None => Err(Error::Validation(format!("{flag}: give a frequency width ({text:?} is a length)"))),
        },
        _ => Err(Error::Validation(format!("{flag}: expected a frequency width, got {text:?}"))),
    }
}

pub struct FitArgs<'a> {
    pub input: &'a Path,
    pub background: Option<&'a Path>,
    pub resolution: Option<&'a str>,
    pub resolution_sigma: Option<&'a str>,
}

pub fn analyze_fit_cmd(args: &FitArgs, out: &Path) -> Result<Report> {
    let open = |p: &Path| {
        std::fs::File::open(p).map_err(|e| Error::Validation(format!("cannot read {}: {e}", p.display())))
    };
    let signal = read_spectrum_csv(open(args.input)?)?;
    let mut warnings = Vec::new();
    let mut m = header("analyze_fit");
    let spectrum = match args.background {
        Some(bg) => {
            let sub = background_subtract(&signal, &read_spectrum_csv(open(bg)?)?)?;
            insert(&mut m, "clamped_fraction", &sub.clamped_fraction)?;
            if sub.clamped_fraction > 0.5 {
                warnings.push(format!("{:.0}% of samples at or below background", 100.0 * sub.clamped_fraction));
            }
            sub.spectrum
        }
        None => signal,
    };
    let fit = fit_spectrum(&spectrum)?;
    insert(&mut m, "fwhm_ghz", &(fit.fit.fwhm / GHZ))?;
    insert(&mut m, "fwhm_ghz_sigma", &(fit.fit.fwhm_sigma / GHZ))?;
    insert(&mut m, "center_nm", &(fit.center_wl / NM))?;
    insert(&mut m, "center_thz", &(fit.fit.center / THZ))?;
    insert(&mut m, "fwhm_nm", &(fit.fwhm_wl / NM))?;
    insert(&mut m, "fit", &fit.fit)?;
    let mut text = format!(
        "centre {:.4} nm, FWHM {:.3} ± {:.3} GHz ({:.4} nm)\n",
        fit.center_wl / NM,
        fit.fit.fwhm / GHZ,
        fit.fit.fwhm_sigma / GHZ,
        fit.fwhm_wl / NM
    );
    if let Some(res) = args.resolution {
        let r = width_flag(res, "--resolution", Some(fit.center_wl))?;
        let rs = args.resolution_sigma.map_or(Ok(0.0), |s| width_flag(s, "--resolution-sigma", Some(fit.center_wl)))?;
        let w = deconvolve_resolution(MeasuredWidth::new(fit.fit.fwhm, fit.fit.fwhm_sigma)?, MeasuredWidth::new(r, rs)?)?;
        insert(&mut m, "deconvolved", &json!({ "fwhm_ghz": w.value / GHZ, "sigma_ghz": w.sigma / GHZ }))?;
        text.push_str(&format!("deconvolved {:.3} ± {:.3} GHz\n", w.value / GHZ, w.sigma / GHZ));
    } else if args.resolution_sigma.is_some() {
        return Err(Error::validation("--resolution-sigma needs --resolution"));
    }
    insert(&mut m, "warnings", &warnings)?;
    let summary = Value::Object(m);
    write_json(&paths(out, None, "analyze_fit").file("summary.json"), &summary)?;
    Ok(Report { text, summary, passed: true })
}

pub struct DeconvolveArgs<'a> {
    pub measured: &'a str,
    pub measured_sigma: Option<&'a str>,
    pub resolution: &'a str,
    pub resolution_sigma: Option<&'a str>,
}

pub fn analyze_deconvolve_cmd(args: &DeconvolveArgs, out: &Path) -> Result<Report> {
    let get = |t: Option<&str>, flag: &str| t.map_or(Ok(0.0), |t| width_flag(t, flag, None));
    let measured = MeasuredWidth::new(width_flag(args.measured, "--measured", None)?, get(args.measured_sigma, "--measured-sigma")?)?;
    let resolution =
        MeasuredWidth::new(width_flag(args.resolution, "--resolution", None)?, get(args.resolution_sigma, "--resolution-sigma")?)?;
    let w = deconvolve_resolution(measured, resolution)?;
    let mut m = header("analyze_deconvolve");
    insert(&mut m, "fwhm_ghz", &(w.value / GHZ))?;
    insert(&mut m, "sigma_ghz", &(w.sigma / GHZ))?;
    insert(&mut m, "measured", &measured)?;
    insert(&mut m, "resolution", &resolution)?;
    let summary = Value::Object(m);
    write_json(&paths(out, None, "analyze_deconvolve").file("summary.json"), &summary)?;
    Ok(Report { text: format!("{:.3} ± {:.3} GHz\n", w.value / GHZ, w.sigma / GHZ), summary, passed: true })
}

pub fn reproduce_cmd(seed: u64, out: &Path) -> Result<Report> {
    let rows = reproduce::published_rows(seed);
    let passed = rows.iter().all(|r| r.pass);
    let mut m = header("reproduce_paper");
    insert(&mut m, "rows", &rows)?;
    insert(&mut m, "all_pass", &passed)?;
    let summary = Value::Object(m);
    write_json(&paths(out, None, "reproduce_paper").file("summary.json"), &summary)?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    let mut text = reproduce::render(&rows);
    text.push_str(&format!("{} of {} checks pass\n", rows.len() - failed, rows.len()));
    Ok(Report { text, summary, passed })
}
