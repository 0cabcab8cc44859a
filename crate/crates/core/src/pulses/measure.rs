use crate::error::{Error, Result};

/// Location and height of a spectral peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub position: f64,
    pub value: f64,
}

fn check_samples(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Measurement(format!("{} abscissae for {} samples", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::Measurement(format!("need at least 3 samples, got {}", x.len())));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Measurement("abscissae must be strictly increasing".into()));
    }
    Ok(())
}

fn interior_argmax(y: &[f64]) -> Result<usize> {
    let (i, &max) = y
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (k, v)| if *v > *acc.1 { (k, v) } else { acc });
    if !(max > 0.0) {
        return Err(Error::Measurement("spectrum has no positive maximum".into()));
    }
    if i == 0 || i == y.len() - 1 {
        return Err(Error::Measurement(format!("peak at boundary sample {i}")));
    }
    Ok(i)
}

/// Full width at half maximum from linearly interpolated half-maximum
/// crossings on either side of the global maximum.
pub fn measure_fwhm(x: &[f64], y: &[f64]) -> Result<f64> {
    check_samples(x, y)?;
    let i = interior_argmax(y)?;
    let half = 0.5 * y[i];
    let cross = |a: usize, b: usize| x[a] + (half - y[a]) / (y[b] - y[a]) * (x[b] - x[a]);

    let left = (0..i)
        .rev()
        .find(|&j| y[j] <= half)
        .map(|j| cross(j, j + 1))
        .ok_or_else(|| Error::Measurement("no half-maximum crossing below the peak".into()))?;
    let right = (i + 1..y.len())
        .find(|&j| y[j] <= half)
        .map(|j| cross(j - 1, j))
        .ok_or_else(|| Error::Measurement("no half-maximum crossing above the peak".into()))?;
    Ok(right - left)
}

/// Peak position and height, refined by a parabola through the logarithm of
/// the three samples around the maximum (exact for Gaussian samples).
pub fn measure_peak(x: &[f64], y: &[f64]) -> Result<Peak> {
    check_samples(x, y)?;
    let i = interior_argmax(y)?;
    let (ym, y0, yp) = (y[i - 1], y[i], y[i + 1]);
    if ym > 0.0 && yp > 0.0 {
        let (lm, l0, lp) = (ym.ln(), y0.ln(), yp.ln());
        let curvature = lm - 2.0 * l0 + lp;
        if curvature < 0.0 {
            let delta = 0.5 * (lm - lp) / curvature;
            let h = 0.5 * (x[i + 1] - x[i - 1]);
            return Ok(Peak {
                position: x[i] + delta * h,
                value: (l0 - 0.25 * (lm - lp) * delta).exp(),
            });
        }
    }
    Ok(Peak { position: x[i], value: y0 })
}

/// Intensity-weighted mean abscissa.
pub fn centroid(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::Measurement("centroid needs matching, non-empty samples".into()));
    }
    let total: f64 = y.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Measurement("centroid of a non-positive spectrum".into()));
    }
    Ok(x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / total)
}
