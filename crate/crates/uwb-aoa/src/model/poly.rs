//! Per-zone polynomial correction: least-squares fit of the angle
//! estimation error against the raw angle estimate, one polynomial per
//! arrival zone.

use super::ModelError;
use crate::features::Zone;
use serde::{Deserialize, Serialize};

/// Polynomial correction curve for one zone. Coefficients are in ascending
/// powers of the raw estimate in degrees; evaluation is restricted to the
/// abscissa interval seen during fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZonePolynomial {
    pub zone: Zone,
    pub coefficients: Vec<f64>,
    /// Closed interval of raw estimates the fit is valid on, degrees.
    pub valid_interval: (f64, f64),
}

impl ZonePolynomial {
    /// Predicted error angle at `raw` degrees, or `None` outside the valid
    /// interval (with a small tolerance for boundary roundoff).
    pub fn evaluate(&self, raw: f64) -> Option<f64> {
        let (lo, hi) = self.valid_interval;
        if raw < lo - 1e-9 || raw > hi + 1e-9 {
            return None;
        }
        Some(self.evaluate_unchecked(raw))
    }

    /// Evaluates at `raw` clamped into the valid interval.
    pub fn evaluate_clamped(&self, raw: f64) -> f64 {
        let (lo, hi) = self.valid_interval;
        self.evaluate_unchecked(raw.clamp(lo, hi))
    }

    fn evaluate_unchecked(&self, raw: f64) -> f64 {
        // Horner in the scaled variable used for fitting.
        let u = raw / ABSCISSA_SCALE;
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }
}

/// Raw estimates live in [-90, 90]; fitting in u = raw/90 keeps the normal
/// equations well conditioned up to degree 5.
const ABSCISSA_SCALE: f64 = 90.0;

/// Least-squares polynomial fit of (raw estimate, error angle) samples from
/// one zone. Needs at least degree+1 distinct abscissae.
pub fn fit_zone_polynomial(
    zone: Zone,
    samples: &[(f64, f64)],
    degree: usize,
) -> Result<ZonePolynomial, ModelError> {
    if degree > 5 {
        return Err(ModelError::InvalidArchitecture(
            "polynomial degree is limited to 5",
        ));
    }
    let mut distinct: Vec<f64> = samples.iter().map(|(x, _)| *x).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < degree + 1 {
        return Err(ModelError::DegenerateFit);
    }

    let m = degree + 1;
    // Normal equations in the scaled variable.
    let mut ata = vec![0.0; m * m];
    let mut atb = vec![0.0; m];
    for &(x, y) in samples {
        let u = x / ABSCISSA_SCALE;
        let mut powers = vec![1.0; m];
        for k in 1..m {
            powers[k] = powers[k - 1] * u;
        }
        for r in 0..m {
            atb[r] += powers[r] * y;
            for c in 0..m {
                ata[r * m + c] += powers[r] * powers[c];
            }
        }
    }

    let coefficients = solve_symmetric(&mut ata, &mut atb, m)?;
    let lo = distinct.first().copied().unwrap();
    let hi = distinct.last().copied().unwrap();
    Ok(ZonePolynomial {
        zone,
        coefficients,
        valid_interval: (lo, hi),
    })
}

/// Gaussian elimination with partial pivoting; a vanishing pivot means the
/// design matrix is rank deficient.
fn solve_symmetric(a: &mut [f64], b: &mut [f64], m: usize) -> Result<Vec<f64>, ModelError> {
    let scale = a
        .iter()
        .map(|v| v.abs())
        .fold(0.0_f64, f64::max)
        .max(1e-300);
    for col in 0..m {
        let mut pivot_row = col;
        let mut pivot_val = a[col * m + col].abs();
        for row in col + 1..m {
            let v = a[row * m + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = row;
            }
        }
        if pivot_val < 1e-12 * scale {
            return Err(ModelError::DegenerateFit);
        }
        if pivot_row != col {
            for k in 0..m {
                a.swap(col * m + k, pivot_row * m + k);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * m + col];
        for row in col + 1..m {
            let factor = a[row * m + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..m {
                a[row * m + k] -= factor * a[col * m + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let mut acc = b[row];
        for k in row + 1..m {
            acc -= a[row * m + k] * x[k];
        }
        x[row] = acc / a[row * m + row];
    }
    Ok(x)
}
