//! Scenario files.
//!
//! A scenario is one JSON document. Quantities are SI numbers or
//! unit-suffixed strings (see [`super::units`]). The echo written into every
//! summary uses plain SI numbers and reads back to the same scenario.

use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Map, Value};

use super::units::{Dimension, RawQuantity};
use crate::entanglement::{JsaSpec, DEFAULT_TRACED_POINTS};
use crate::error::{Error, Result};
use crate::pulses::{PulseSpec, DEFAULT_INPUT_POINTS};
use crate::quantities::{bandwidth_wl_to_freq, frequency_to_wavelength, wavelength_to_frequency};
use crate::sfg_numeric::DEFAULT_OUTPUT_POINTS;
use crate::timing_sync::PathTiming;

/// Output samples of the traced entangled spectrum unless overridden.
pub const DEFAULT_TRACED_OUTPUT_POINTS: usize = 401;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPulse {
    center: RawQuantity,
    fwhm: RawQuantity,
    #[serde(default)]
    chirp: Option<RawQuantity>,
    #[serde(default)]
    delay: Option<RawQuantity>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJsa {
    center: RawQuantity,
    sigma: RawQuantity,
    sigma_c: RawQuantity,
    #[serde(default)]
    chirp: Option<RawQuantity>,
    #[serde(default)]
    herald_frequency: Option<RawQuantity>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    input_points: Option<usize>,
    output_points: Option<usize>,
    traced_points: Option<usize>,
    traced_output_points: Option<usize>,
    auto_refine: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTiming {
    t1: RawQuantity,
    t1p: RawQuantity,
    t2: RawQuantity,
    n: u32,
    repetition_rate: RawQuantity,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    level: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    photon: Option<RawPulse>,
    #[serde(default)]
    photon_jsa: Option<RawJsa>,
    laser: RawPulse,
    #[serde(default)]
    delays: Vec<RawQuantity>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    timing: Option<RawTiming>,
    #[serde(default)]
    noise: Option<RawNoise>,
    #[serde(default)]
    output_prefix: Option<String>,
}

/// Entangled photon source with the signal chirp and an optional heralding
/// frequency for the idler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JsaPhoton {
    pub jsa: JsaSpec,
    /// s²
    pub chirp: f64,
    /// Hz
    pub herald_frequency: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhotonModel {
    Pulse(PulseSpec),
    Entangled(JsaPhoton),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSettings {
    pub input_points: usize,
    pub output_points: usize,
    pub traced_points: usize,
    pub traced_output_points: usize,
    /// Raise the input sample count until the phase rule holds. When off, a
    /// grid that under-resolves the chirp is an error.
    pub auto_refine: bool,
}

impl Default for GridSettings {
    fn default() -> Self {
        GridSettings {
            input_points: DEFAULT_INPUT_POINTS,
            output_points: DEFAULT_OUTPUT_POINTS,
            traced_points: DEFAULT_TRACED_POINTS,
            traced_output_points: DEFAULT_TRACED_OUTPUT_POINTS,
            auto_refine: true,
        }
    }
}

/// Gaussian noise added to the unit-peak output spectrum before fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSettings {
    /// Standard deviation relative to the peak.
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub photon: PhotonModel,
    pub laser: PulseSpec,
    /// Δτ values for delay scans, s.
    pub delays: Vec<f64>,
    pub grid: GridSettings,
    pub seed: u64,
    pub timing: Option<PathTiming>,
    pub noise: Option<NoiseSettings>,
    /// Prefix of the files written to the output directory.
    pub output_prefix: Option<String>,
}

fn optional(q: &Option<RawQuantity>, dim: Dimension, field: &str) -> Result<f64> {
    q.as_ref().map_or(Ok(0.0), |q| q.resolve(dim, field))
}

/// Centre given as a frequency or a wavelength, returned in Hz.
fn resolve_center(q: &RawQuantity, field: &str) -> Result<f64> {
    match q.resolve_any()? {
        (v, None | Some(Dimension::Frequency)) => Ok(v),
        (v, Some(Dimension::Length)) => wavelength_to_frequency(v),
        (_, Some(_)) => Err(Error::validation(format!("{field}: expected a frequency or a wavelength, got {q}"))),
    }
}

/// Width given as a frequency or as a wavelength width around `nu0`.
fn resolve_width(q: &RawQuantity, nu0: f64, field: &str) -> Result<f64> {
    match q.resolve_any()? {
        (v, None | Some(Dimension::Frequency)) => Ok(v),
        (v, Some(Dimension::Length)) => bandwidth_wl_to_freq(v, frequency_to_wavelength(nu0)?),
        (_, Some(_)) => Err(Error::validation(format!("{field}: expected a frequency or wavelength width, got {q}"))),
    }
}

fn resolve_pulse(raw: &RawPulse, name: &str) -> Result<PulseSpec> {
    let nu0 = resolve_center(&raw.center, &format!("{name}.center"))?;
    let spec = PulseSpec {
        nu0,
        fwhm: resolve_width(&raw.fwhm, nu0, &format!("{name}.fwhm"))?,
        chirp: optional(&raw.chirp, Dimension::Chirp, &format!("{name}.chirp"))?,
        delay: optional(&raw.delay, Dimension::Time, &format!("{name}.delay"))?,
    };
    spec.validate().map_err(|e| Error::Validation(format!("{name}: {e}")))?;
    Ok(spec)
}

fn resolve_jsa(raw: &RawJsa) -> Result<JsaPhoton> {
    let jsa = JsaSpec {
        nu0: resolve_center(&raw.center, "photon_jsa.center")?,
        sigma: raw.sigma.resolve(Dimension::Frequency, "photon_jsa.sigma")?,
        sigma_c: raw.sigma_c.resolve(Dimension::Frequency, "photon_jsa.sigma_c")?,
    };
    jsa.validate().map_err(|e| Error::Validation(format!("photon_jsa: {e}")))?;
    let herald_frequency = match &raw.herald_frequency {
        Some(q) => Some(resolve_center(q, "photon_jsa.herald_frequency")?),
        None => None,
    };
    Ok(JsaPhoton { jsa, chirp: optional(&raw.chirp, Dimension::Chirp, "photon_jsa.chirp")?, herald_frequency })
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Scenario> {
        let raw: RawScenario =
            serde_json::from_str(text).map_err(|e| Error::Validation(format!("invalid scenario: {e}")))?;
        let photon = match (&raw.photon, &raw.photon_jsa) {
            (Some(p), None) => PhotonModel::Pulse(resolve_pulse(p, "photon")?),
            (None, Some(j)) => PhotonModel::Entangled(resolve_jsa(j)?),
            _ => return Err(Error::validation("scenario needs exactly one of `photon` and `photon_jsa`")),
        };
        let laser = resolve_pulse(&raw.laser, "laser")?;
        if let PhotonModel::Pulse(p) = photon {
            if p.chirp == 0.0 && laser.delay != p.delay {
                return Err(Error::validation(format!(
                    "photon chirp is zero but the pulses are offset by {:e} s; with A = 0 a delay has no defined frequency shift",
                    laser.delay - p.delay
                )));
            }
        }
        let delays = raw
            .delays
            .iter()
            .enumerate()
            .map(|(i, q)| q.resolve(Dimension::Time, &format!("delays[{i}]")))
            .collect::<Result<Vec<_>>>()?;

        let defaults = GridSettings::default();
        let grid = GridSettings {
            input_points: raw.grid.input_points.unwrap_or(defaults.input_points),
            output_points: raw.grid.output_points.unwrap_or(defaults.output_points),
            traced_points: raw.grid.traced_points.unwrap_or(defaults.traced_points),
            traced_output_points: raw.grid.traced_output_points.unwrap_or(defaults.traced_output_points),
            auto_refine: raw.grid.auto_refine.unwrap_or(defaults.auto_refine),
        };
        if grid.input_points < 16 || grid.output_points < 16 || grid.traced_points < 16 || grid.traced_output_points < 16 {
            return Err(Error::validation("grid point counts must be at least 16"));
        }

        let timing = match &raw.timing {
            Some(t) => Some(PathTiming::new(
                t.t1.resolve(Dimension::Time, "timing.t1")?,
                t.t1p.resolve(Dimension::Time, "timing.t1p")?,
                t.t2.resolve(Dimension::Time, "timing.t2")?,
                t.n,
                t.repetition_rate.resolve(Dimension::Frequency, "timing.repetition_rate")?,
            )?),
            None => None,
        };
        let noise = match &raw.noise {
            Some(n) if n.level >= 0.0 && n.level.is_finite() => Some(NoiseSettings { level: n.level }),
            Some(n) => return Err(Error::validation(format!("noise.level must be non-negative, got {}", n.level))),
            None => None,
        };
        if let Some(prefix) = &raw.output_prefix {
            if prefix.is_empty() || prefix.contains(['/', '\\']) {
                return Err(Error::validation(format!("output_prefix must be a plain file-name prefix, got {prefix:?}")));
            }
        }
        Ok(Scenario {
            photon,
            laser,
            delays,
            grid,
            seed: raw.seed.unwrap_or(0),
            timing,
            noise,
            output_prefix: raw.output_prefix,
        })
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Scenario::from_json_str(&text)
    }

    /// The pulse photon, or a validation error naming `command`.
    pub fn pulse_photon(&self, command: &str) -> Result<PulseSpec> {
        match self.photon {
            PhotonModel::Pulse(p) => Ok(p),
            PhotonModel::Entangled(_) => Err(Error::validation(format!("`{command}` needs a `photon` pulse, not `photon_jsa`"))),
        }
    }

    pub fn entangled_photon(&self, command: &str) -> Result<JsaPhoton> {
        match self.photon {
            PhotonModel::Entangled(j) => Ok(j),
            PhotonModel::Pulse(_) => Err(Error::validation(format!("`{command}` needs a `photon_jsa` source, not `photon`"))),
        }
    }

    /// The scenario with SI numbers in place of unit strings.
    pub fn echo(&self) -> Value {
        fn pulse(p: &PulseSpec) -> Value {
            json!({ "center": p.nu0, "fwhm": p.fwhm, "chirp": p.chirp, "delay": p.delay })
        }
        let mut out = Map::new();
        match &self.photon {
            PhotonModel::Pulse(p) => {
                out.insert("photon".into(), pulse(p));
            }
            PhotonModel::Entangled(j) => {
                let mut m = Map::new();
                m.insert("center".into(), json!(j.jsa.nu0));
                m.insert("sigma".into(), json!(j.jsa.sigma));
                m.insert("sigma_c".into(), json!(j.jsa.sigma_c));
                m.insert("chirp".into(), json!(j.chirp));
                if let Some(h) = j.herald_frequency {
                    m.insert("herald_frequency".into(), json!(h));
                }
                out.insert("photon_jsa".into(), Value::Object(m));
            }
        }
        out.insert("laser".into(), pulse(&self.laser));
        out.insert("delays".into(), json!(self.delays));
        out.insert(
            "grid".into(),
            json!({
                "input_points": self.grid.input_points,
                "output_points": self.grid.output_points,
                "traced_points": self.grid.traced_points,
                "traced_output_points": self.grid.traced_output_points,
                "auto_refine": self.grid.auto_refine,
            }),
        );
        out.insert("seed".into(), json!(self.seed));
        if let Some(t) = &self.timing {
            out.insert(
                "timing".into(),
                json!({ "t1": t.t1, "t1p": t.t1p, "t2": t.t2, "n": t.n, "repetition_rate": t.repetition_rate }),
            );
        }
        if let Some(n) = &self.noise {
            out.insert("noise".into(), json!({ "level": n.level }));
        }
        if let Some(p) = &self.output_prefix {
            out.insert("output_prefix".into(), json!(p));
        }
        Value::Object(out)
    }
}
