use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 200;
const PARAM_TOLERANCE: f64 = 1e-10;
const MIN_SAMPLES: usize = 8;

/// Result of fitting `y = offset + amplitude · exp(-4 ln2 (x - center)² / fwhm²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub center_sigma: f64,
    pub fwhm_sigma: f64,
    pub amplitude_sigma: f64,
    pub offset_sigma: f64,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl GaussianFit {
    pub fn evaluate(&self, x: f64) -> f64 {
        let d = x - self.center;
        self.offset + self.amplitude * (-4.0 * LN_2 * d * d / (self.fwhm * self.fwhm)).exp()
    }
}

type Mat4 = [[f64; 4]; 4];

/// Solve `m · x = b` by Gaussian elimination with partial pivoting.
fn solve4(mut m: Mat4, mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    Some(x)
}

fn invert4(m: &Mat4) -> Option<Mat4> {
    let mut inv = [[0.0; 4]; 4];
    for col in 0..4 {
        let mut e = [0.0; 4];
        e[col] = 1.0;
        let x = solve4(*m, e)?;
        for row in 0..4 {
            inv[row][col] = x[row];
        }
    }
    Some(inv)
}

struct Normalized {
    u: Vec<f64>,
    v: Vec<f64>,
    x_shift: f64,
    x_scale: f64,
    y_scale: f64,
}

// p = [center, fwhm, amplitude, offset] in normalized coordinates
fn model(p: &[f64; 4], u: f64) -> (f64, [f64; 4]) {
    let d = u - p[0];
    let w2 = p[1] * p[1];
    let e = (-4.0 * LN_2 * d * d / w2).exp();
    let ce = p[2] * e;
    let jac = [ce * 8.0 * LN_2 * d / w2, ce * 8.0 * LN_2 * d * d / (w2 * p[1]), e, 1.0];
    (p[3] + ce, jac)
}

fn cost(data: &Normalized, p: &[f64; 4]) -> f64 {
    data.u.iter().zip(&data.v).map(|(&u, &v)| (v - model(p, u).0).powi(2)).sum()
}

/// Least-squares Gaussian fit by damped Gauss-Newton (Levenberg-Marquardt)
/// with an analytic Jacobian, seeded from the centroid and variance of the
/// background-subtracted samples.
pub fn fit_gaussian(x: &[f64], y: &[f64]) -> Result<GaussianFit> {
    if x.len() != y.len() {
        return Err(Error::validation(format!("{} abscissae for {} samples", x.len(), y.len())));
    }
    if x.len() < MIN_SAMPLES {
        return Err(Error::validation(format!("fit needs at least {MIN_SAMPLES} samples, got {}", x.len())));
    }
    if y.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::validation("fit samples must be finite and non-negative"));
    }

    let (xmin, xmax) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let ymax = y.iter().copied().fold(0.0, f64::max);
    let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);
    if !(xmax > xmin) || !(ymax > 0.0) || (ymax - ymin) <= 1e-12 * ymax {
        return Err(Error::Fit { reason: "degenerate data (zero width or constant)".into(), residual_norm: 0.0 });
    }
    let x_shift = 0.5 * (xmin + xmax);
    let x_scale = xmax - xmin;
    let data = Normalized {
        u: x.iter().map(|v| (v - x_shift) / x_scale).collect(),
        v: y.iter().map(|v| v / ymax).collect(),
        x_shift,
        x_scale,
        y_scale: ymax,
    };

    let base = data.v.iter().copied().fold(f64::INFINITY, f64::min);
    let lifted: Vec<f64> = data.v.iter().map(|v| v - base).collect();
    let mass: f64 = lifted.iter().sum();
    let mean = data.u.iter().zip(&lifted).map(|(u, w)| u * w).sum::<f64>() / mass;
    let var = data.u.iter().zip(&lifted).map(|(u, w)| (u - mean).powi(2) * w).sum::<f64>() / mass;
    if !(var > 0.0) {
        return Err(Error::Fit { reason: "zero-variance seed".into(), residual_norm: 0.0 });
    }
    let peak = lifted.iter().copied().fold(0.0, f64::max);
    let mut p = [mean, var.sqrt() * 2.0 * (2.0 * LN_2).sqrt(), peak, base];
    let mut current = cost(&data, &p);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for (&u, &v) in data.u.iter().zip(&data.v) {
            let (f, j) = model(&p, u);
            let r = v - f;
            for a in 0..4 {
                jtr[a] += j[a] * r;
                for b in 0..4 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let scale = [p[1].abs(), p[1].abs(), p[2].abs(), p[2].abs()];
        loop {
            let mut damped = jtj;
            for a in 0..4 {
                damped[a][a] += lambda * jtj[a][a].max(1e-30);
            }
            let step = match solve4(damped, jtr) {
                Some(s) => s,
                None => {
                    lambda *= 10.0;
                    if lambda > 1e20 {
                        break;
                    }
                    continue;
                }
            };
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]];
            let trial_cost = cost(&data, &trial);
            if trial_cost.is_finite() && trial_cost <= current {
                let small = (0..4).all(|a| step[a].abs() <= PARAM_TOLERANCE * (p[a].abs() + scale[a]));
                p = trial;
                current = trial_cost;
                lambda = (lambda / 10.0).max(1e-12);
                converged = small;
                break;
            }
            lambda *= 10.0;
            if lambda > 1e20 {
                // No descent direction left at working precision: stationary point.
                converged = true;
                break;
            }
        }
        if converged {
            break;
        }
    }

    let residual_norm = current.sqrt() * data.y_scale;
    if !converged {
        return Err(Error::Fit { reason: format!("no convergence in {MAX_ITERATIONS} iterations"), residual_norm });
    }
    if !(p[1].abs() > 0.0) || !p.iter().all(|v| v.is_finite()) {
        return Err(Error::Fit { reason: "collapsed to zero width".into(), residual_norm });
    }

    let mut jtj = [[0.0; 4]; 4];
    for &u in &data.u {
        let (_, j) = model(&p, u);
        for a in 0..4 {
            for b in 0..4 {
                jtj[a][b] += j[a] * j[b];
            }
        }
    }
    let dof = (data.u.len() - 4) as f64;
    let s2 = current / dof;
    let cov = invert4(&jtj).ok_or_else(|| Error::Fit { reason: "singular covariance".into(), residual_norm })?;
    let sd = |k: usize| (s2 * cov[k][k]).max(0.0).sqrt();

    Ok(GaussianFit {
        center: data.x_shift + p[0] * data.x_scale,
        fwhm: p[1].abs() * data.x_scale,
        amplitude: p[2] * data.y_scale,
        offset: p[3] * data.y_scale,
        center_sigma: sd(0) * data.x_scale,
        fwhm_sigma: sd(1) * data.x_scale,
        amplitude_sigma: sd(2) * data.y_scale,
        offset_sigma: sd(3) * data.y_scale,
        residual_norm,
        iterations,
    })
}
