//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a reproduction check failed, 2 invalid input,
//! 3 a numerical guard tripped. Errors are reported on stderr as one line of
//! JSON, `{"error":{"kind":…,"message":…,"exit_code":…}}`.

pub mod commands;
pub mod config;
pub mod output;
pub mod reproduce;
pub mod units;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{Error, Result};
use commands::{DeconvolveArgs, FitArgs, Report, ScanMode, ScanRange};
use config::Scenario;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "CHIRPSFG_THREADS";

#[derive(Debug, Parser)]
#[command(name = "chirpsfg", version, about = "Spectral compression of single photons by chirped sum-frequency generation")]
pub struct Cli {
    /// Scenario file (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Seed for noise injection and random draws.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Exact input sample count; disables automatic grid refinement.
    #[arg(long = "grid-points", global = true, value_name = "N")]
    pub grid_points: Option<usize>,
    /// Print the summary JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Delay,
    Reprate,
    Chirp,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Upconvert a chirped photon with the laser and compare with the closed forms.
    Upconvert,
    /// Sweep delay, repetition-rate detuning or chirp and fit the trend.
    Scan {
        #[arg(long, value_enum)]
        mode: Mode,
        /// First value, with units (e.g. -15ps, -1kHz, 5e6fs2).
        #[arg(long, allow_hyphen_values = true)]
        from: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        to: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Traced output spectrum of one photon of an entangled pair.
    Entangled,
    /// Upconvert the signal photon heralded by an idler detection.
    Herald {
        /// Idler detection frequency or wavelength; defaults to the scenario.
        #[arg(long, allow_hyphen_values = true)]
        idler: Option<String>,
    },
    /// Purity of the signal photon before and after upconversion.
    Purity {
        /// Also evaluate both purities by brute-force quadrature on N points per axis.
        #[arg(long, value_name = "N")]
        quadrature: Option<usize>,
    },
    /// Post-process measured spectra.
    Analyze {
        #[command(subcommand)]
        command: AnalyzeCommand,
    },
    /// Recompute the published figures and compare.
    ReproducePaper,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Gaussian fit of a two-column CSV spectrum.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        background: Option<PathBuf>,
        /// Spectrometer resolution FWHM (frequency or wavelength width).
        #[arg(long)]
        resolution: Option<String>,
        #[arg(long = "resolution-sigma")]
        resolution_sigma: Option<String>,
    },
    /// Remove a Gaussian instrument width from a measured width.
    Deconvolve {
        #[arg(long)]
        measured: String,
        #[arg(long = "measured-sigma")]
        measured_sigma: Option<String>,
        #[arg(long)]
        resolution: String,
        #[arg(long = "resolution-sigma")]
        resolution_sigma: Option<String>,
    },
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical_guard() {
        EXIT_NUMERICAL
    } else {
        EXIT_INVALID
    }
}

pub fn error_json(err: &Error) -> String {
    json!({ "error": { "kind": err.kind(), "message": err.to_string(), "exit_code": exit_code(err) } }).to_string()
}

fn load(cli: &Cli) -> Result<Scenario> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Validation("this command needs --config PATH".into()))?;
    let mut scenario = Scenario::load(path)?;
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    if let Some(n) = cli.grid_points {
        if n < 16 {
            return Err(Error::Validation(format!("--grid-points must be at least 16, got {n}")));
        }
        scenario.grid.input_points = n;
        scenario.grid.traced_points = n;
        scenario.grid.auto_refine = false;
    }
    Ok(scenario)
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Validation(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<Report> {
    configure_threads()?;
    let out = cli.out.as_path();
    match &cli.command {
        Command::Upconvert => commands::upconvert_cmd(&load(cli)?, out),
        Command::Scan { mode, from, to, steps } => {
            let mode = match mode {
                Mode::Delay => ScanMode::Delay,
                Mode::Reprate => ScanMode::Reprate,
                Mode::Chirp => ScanMode::Chirp,
            };
            let range = ScanRange { from: from.as_deref(), to: to.as_deref(), steps: *steps };
            commands::scan_cmd(&load(cli)?, mode, &range, out)
        }
        Command::Entangled => commands::entangled_cmd(&load(cli)?, out),
        Command::Herald { idler } => commands::herald_cmd(&load(cli)?, idler.as_deref(), out),
        Command::Purity { quadrature } => commands::purity_cmd(&load(cli)?, *quadrature, out),
        Command::Analyze { command } => match command {
            AnalyzeCommand::Fit { input, background, resolution, resolution_sigma } => {
                let args = FitArgs {
                    input,
                    background: background.as_deref(),
                    resolution: resolution.as_deref(),
                    resolution_sigma: resolution_sigma.as_deref(),
                };
                commands::analyze_fit_cmd(&args, out)
            }
            AnalyzeCommand::Deconvolve { measured, measured_sigma, resolution, resolution_sigma } => {
                let args = DeconvolveArgs {
                    measured,
                    measured_sigma: measured_sigma.as_deref(),
                    resolution,
                    resolution_sigma: resolution_sigma.as_deref(),
                };
                commands::analyze_deconvolve_cmd(&args, out)
            }
        },
        Command::ReproducePaper => commands::reproduce_cmd(cli.seed.unwrap_or(0), out),
    }
}

/// Parse `args`, run, print, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let body = if cli.json {
                format!("{}\n", serde_json::to_string_pretty(&report.summary).expect("summary is valid JSON"))
            } else {
                report.text
            };
            // a closed stdout (e.g. piped into head) is not an error
            let _ = std::io::stdout().write_all(body.as_bytes());
            if report.passed {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}
