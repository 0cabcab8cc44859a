//! Files written by the commands. Every write goes to a temporary file in
//! the target directory and is renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::pulses::Spectrum;

pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::validation(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// JSON value of `v` after checking that no number became null, which is
/// how serde_json encodes NaN and infinities.
pub fn to_finite_json<T: Serialize>(v: &T) -> Result<Value> {
    let value = serde_json::to_value(v)?;
    if let Some(path) = find_null(&value, String::new()) {
        return Err(Error::Measurement(format!("non-finite value at {path}")));
    }
    Ok(value)
}

fn find_null(v: &Value, path: String) -> Option<String> {
    match v {
        Value::Null => Some(if path.is_empty() { "<root>".into() } else { path }),
        Value::Array(items) => items.iter().enumerate().find_map(|(i, x)| find_null(x, format!("{path}[{i}]"))),
        Value::Object(map) => map.iter().find_map(|(k, x)| find_null(x, if path.is_empty() { k.clone() } else { format!("{path}.{k}") })),
        _ => None,
    }
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Shortest representation that reads back to the same `f64`, switching to
/// exponent notation for very large or small magnitudes.
pub fn format_f64(v: f64) -> String {
    serde_json::to_string(&v).expect("finite floats serialize")
}

/// `frequency_hz,intensity` with intensity normalized to unit peak.
pub fn spectrum_csv(spectrum: &Spectrum) -> String {
    let s = spectrum.normalized();
    let mut out = String::from("frequency_hz,intensity\n");
    for (nu, v) in s.grid.frequencies().zip(&s.values) {
        let _ = writeln!(out, "{},{}", format_f64(nu), format_f64(*v));
    }
    out
}

/// CSV with a header row and one line per record; values use the shortest
/// representation that reads back exactly.
pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Output directory plus file-name prefix.
#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub dir: PathBuf,
    pub prefix: String,
}

impl OutputPaths {
    pub fn file(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}_{suffix}", self.prefix))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::FrequencyGrid;

    #[test]
    fn csv_round_trips() {
        let grid = FrequencyGrid::new(1e14, 0.1, 16).unwrap();
        let values: Vec<f64> = (0..16).map(|k| 2.0 * (1.0 + k as f64).recip()).collect();
        let csv = spectrum_csv(&Spectrum { grid, values });
        assert!(csv.starts_with("frequency_hz,intensity\n"));
        assert!(!csv.contains('\r'));
        let first = csv.lines().nth(1).unwrap();
        assert_eq!(first, "100000000000000.0,1.0");
        assert_eq!(format_f64(1.4579470849842173e-11), "1.4579470849842173e-11");
        let third: Vec<f64> = csv.lines().nth(3).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(third[1], 1.0 / 3.0);
        assert_eq!(third[0], grid.frequency(2));
    }

    #[test]
    fn non_finite_rejected() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            b: Vec<f64>,
        }
        assert!(to_finite_json(&S { a: 1.0, b: vec![2.0] }).is_ok());
        let err = to_finite_json(&S { a: 1.0, b: vec![f64::NAN] }).unwrap_err();
        assert!(err.to_string().contains("b[0]"));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
