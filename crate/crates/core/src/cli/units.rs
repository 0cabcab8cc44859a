//! Unit-suffixed quantities in configuration files and flags.
//!
//! A value is either a bare number, taken in SI units of the field's
//! dimension, or a string such as `"1740 GHz"`, `"811.11nm"` or
//! `"25.8e6 fs2"`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantities::units::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    Length,
    Time,
    /// Spectral phase curvature, s².
    Chirp,
}

impl Dimension {
    fn name(self) -> &'static str {
        match self {
            Dimension::Frequency => "frequency",
            Dimension::Length => "length",
            Dimension::Time => "time",
            Dimension::Chirp => "chirp (s²)",
        }
    }
}

const UNITS: &[(&str, Dimension, f64)] = &[
    ("Hz", Dimension::Frequency, HZ),
    ("kHz", Dimension::Frequency, KHZ),
    ("MHz", Dimension::Frequency, MHZ),
    ("GHz", Dimension::Frequency, GHZ),
    ("THz", Dimension::Frequency, THZ),
    ("m", Dimension::Length, M),
    ("mm", Dimension::Length, MM),
    ("um", Dimension::Length, UM),
    ("µm", Dimension::Length, UM),
    ("nm", Dimension::Length, NM),
    ("pm", Dimension::Length, PM),
    ("s", Dimension::Time, S),
    ("ms", Dimension::Time, MS),
    ("us", Dimension::Time, US),
    ("µs", Dimension::Time, US),
    ("ns", Dimension::Time, NS),
    ("ps", Dimension::Time, PS),
    ("fs", Dimension::Time, FS),
    ("s2", Dimension::Chirp, S2),
    ("s^2", Dimension::Chirp, S2),
    ("s²", Dimension::Chirp, S2),
    ("ps2", Dimension::Chirp, PS2),
    ("ps^2", Dimension::Chirp, PS2),
    ("ps²", Dimension::Chirp, PS2),
    ("fs2", Dimension::Chirp, FS2),
    ("fs^2", Dimension::Chirp, FS2),
    ("fs²", Dimension::Chirp, FS2),
];

/// Split `"25.8e6 fs2"` into the value and its unit, converted to SI.
pub fn parse_quantity(text: &str) -> Result<(f64, Option<Dimension>)> {
    let text = text.trim();
    let split = (1..=text.len())
        .rev()
        .filter(|&i| text.is_char_boundary(i))
        .find(|&i| text[..i].trim_end().parse::<f64>().is_ok())
        .ok_or_else(|| Error::validation(format!("cannot read a number from {text:?}")))?;
    let number: f64 = text[..split].trim_end().parse().expect("checked above");
    let unit = text[split..].trim();
    if !number.is_finite() {
        return Err(Error::validation(format!("quantity {text:?} is not finite")));
    }
    if unit.is_empty() {
        return Ok((number, None));
    }
    let (_, dim, factor) = UNITS
        .iter()
        .find(|(name, _, _)| *name == unit)
        .ok_or_else(|| Error::validation(format!("unknown unit {unit:?} in {text:?}")))?;
    Ok((number * factor, Some(*dim)))
}

/// A number or unit-suffixed string as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawQuantity {
    Number(f64),
    Text(String),
}

impl RawQuantity {
    /// SI value and the dimension named by its unit, if any.
    pub fn resolve_any(&self) -> Result<(f64, Option<Dimension>)> {
        match self {
            RawQuantity::Number(v) if v.is_finite() => Ok((*v, None)),
            RawQuantity::Number(v) => Err(Error::validation(format!("quantity {v} is not finite"))),
            RawQuantity::Text(s) => parse_quantity(s),
        }
    }

    /// SI value, requiring the unit (if given) to have dimension `dim`.
    pub fn resolve(&self, dim: Dimension, field: &str) -> Result<f64> {
        let (value, found) = self.resolve_any()?;
        match found {
            Some(d) if d != dim => Err(Error::validation(format!(
                "{field}: expected a {}, got a {} ({self})",
                dim.name(),
                d.name()
            ))),
            _ => Ok(value),
        }
    }
}

impl std::fmt::Display for RawQuantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RawQuantity::Number(v) => write!(f, "{v}"),
            RawQuantity::Text(s) => write!(f, "{s:?}"),
        }
    }
}

/// Parse a command-line flag value of dimension `dim`.
pub fn parse_flag(text: &str, dim: Dimension, flag: &str) -> Result<f64> {
    RawQuantity::Text(text.to_string()).resolve(dim, flag)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        ((a - b) / b).abs() < 1e-14
    }

    #[test]
    fn suffixes() {
        let (v, d) = parse_quantity("1740 GHz").unwrap();
        assert!(close(v, 1.74e12));
        assert_eq!(d, Some(Dimension::Frequency));
        let (v, d) = parse_quantity("25.8e6 fs2").unwrap();
        assert!(close(v, 2.58e-23));
        assert_eq!(d, Some(Dimension::Chirp));
        let (v, _) = parse_quantity("811.11nm").unwrap();
        assert!(close(v, 811.11e-9));
        let (v, _) = parse_quantity("-15ps").unwrap();
        assert!(close(v, -15e-12));
        assert_eq!(parse_quantity(" 3.5 ").unwrap(), (3.5, None));
        assert!(close(parse_quantity("1e-3 s^2").unwrap().0, 1e-3));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_quantity("GHz").is_err());
        assert!(parse_quantity("12 furlongs").is_err());
        assert!(parse_quantity("inf Hz").is_err());
        let q = RawQuantity::Text("5 ps".into());
        assert!(q.resolve(Dimension::Frequency, "fwhm").is_err());
        assert!(close(q.resolve(Dimension::Time, "delay").unwrap(), 5e-12));
        assert_eq!(RawQuantity::Number(2.0).resolve(Dimension::Chirp, "chirp").unwrap(), 2.0);
    }
}
