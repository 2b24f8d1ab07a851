//! Phase models relating the angle of arrival to the measured phase
//! difference between two antennas.
//!
//! The forward far-field model projects the incident plane wave onto the
//! antenna baseline; the near-field model places a point source on a circle
//! around the array center and takes exact path-length differences. Both
//! report the extra travel distance, its time equivalent, and the resulting
//! carrier phase difference (unwrapped and wrapped).

use crate::angle::{Angle, AngleError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact SI speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error, PartialEq)]
pub enum PropagationError {
    #[error("invalid antenna geometry: {0}")]
    InvalidGeometry(&'static str),
    #[error("PDoA maps outside the arcsine domain; clamped estimate is {clamped}")]
    ArcsineDomain { clamped: Angle },
    #[error("near-field radius {radius} m does not exceed half the effective spacing {half_spacing} m")]
    SourceTooClose { radius: f64, half_spacing: f64 },
    #[error(transparent)]
    Angle(#[from] AngleError),
}

/// Dual-antenna array geometry.
///
/// `antenna_spacing` is the nominal spacing used by the angle estimator;
/// `effective_spacing_delta` perturbs the spacing seen by the physical wave
/// (a scalar stand-in for antenna delay / phase-center displacement) and is
/// deliberately invisible to [`aoa_from_pdoa`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaGeometry {
    /// Carrier frequency in Hz.
    pub carrier_frequency: f64,
    /// Nominal antenna spacing in meters.
    pub antenna_spacing: f64,
    /// Effective-spacing perturbation in meters (default 0).
    #[serde(default)]
    pub effective_spacing_delta: f64,
}

impl AntennaGeometry {
    pub fn new(
        carrier_frequency: f64,
        antenna_spacing: f64,
        effective_spacing_delta: f64,
    ) -> Result<Self, PropagationError> {
        if !(carrier_frequency.is_finite() && carrier_frequency > 0.0) {
            return Err(PropagationError::InvalidGeometry(
                "carrier_frequency must be positive",
            ));
        }
        if !(antenna_spacing.is_finite() && antenna_spacing > 0.0) {
            return Err(PropagationError::InvalidGeometry(
                "antenna_spacing must be positive",
            ));
        }
        if !effective_spacing_delta.is_finite()
            || antenna_spacing + effective_spacing_delta <= 0.0
        {
            return Err(PropagationError::InvalidGeometry(
                "antenna_spacing + effective_spacing_delta must be positive",
            ));
        }
        Ok(AntennaGeometry {
            carrier_frequency,
            antenna_spacing,
            effective_spacing_delta,
        })
    }

    /// Geometry with the ideal half-wavelength spacing for `carrier_frequency`.
    pub fn half_wavelength(carrier_frequency: f64) -> Result<Self, PropagationError> {
        let spacing = SPEED_OF_LIGHT / (2.0 * carrier_frequency);
        AntennaGeometry::new(carrier_frequency, spacing, 0.0)
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// Spacing experienced by the propagating wave: nominal + perturbation.
    pub fn effective_spacing(&self) -> f64 {
        self.antenna_spacing + self.effective_spacing_delta
    }
}

/// A point source rotated on a circle of `radius` around the array center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearFieldSource {
    pub radius: f64,
    pub incident_angle: Angle,
}

/// Geometric outcome of one propagation evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationResult {
    /// Extra travel distance to the far antenna, meters (signed).
    pub path_delta: f64,
    /// `path_delta` expressed as time, seconds.
    pub time_delta: f64,
    /// Carrier phase difference in degrees before wrapping.
    pub phase_delta_unwrapped: f64,
    /// Phase difference as the hardware would report it, in (-180, +180].
    pub phase_delta_wrapped: Angle,
}

fn result_from_path(geom: &AntennaGeometry, path_delta: f64) -> PropagationResult {
    let time_delta = path_delta / SPEED_OF_LIGHT;
    let phase_delta_unwrapped = 360.0 * geom.carrier_frequency * time_delta;
    PropagationResult {
        path_delta,
        time_delta,
        phase_delta_unwrapped,
        phase_delta_wrapped: Angle::from_finite(phase_delta_unwrapped),
    }
}

/// Mirrors back-side angles onto the front half: a two-antenna array cannot
/// tell ψ from 180° - ψ, so |ψ| > 90° is folded to sign(ψ)·(180° - |ψ|).
fn fold_to_front(aoa: Angle) -> f64 {
    let d = aoa.degrees();
    if d.abs() <= 90.0 {
        d
    } else {
        (180.0 - d.abs()).copysign(d)
    }
}

/// Far-field (plane wave) phase difference for a given true angle of arrival.
///
/// Back-side angles produce exactly the result of their front-side mirror
/// angle (front-back ambiguity).
pub fn pdoa_far_field(geom: &AntennaGeometry, true_aoa: Angle) -> PropagationResult {
    let front = fold_to_front(true_aoa);
    let path_delta = geom.effective_spacing() * front.to_radians().sin();
    result_from_path(geom, path_delta)
}

/// Inverts the far-field model: angle of arrival from a measured PDoA.
///
/// Uses the nominal spacing only; the estimator has no knowledge of the
/// effective-spacing perturbation. A PDoA outside the arcsine domain is an
/// error carrying the clamped estimate (diagnostic of wrap-around or noise);
/// use [`aoa_from_pdoa_clamped`] to clamp silently but flagged.
pub fn aoa_from_pdoa(geom: &AntennaGeometry, pdoa: Angle) -> Result<Angle, PropagationError> {
    let arg = pdoa.degrees() * geom.wavelength() / (360.0 * geom.antenna_spacing);
    // A few ulps of grace: an argument this close to ±1 is rounding noise
    // from the forward model, not a wrap diagnostic.
    const GRACE: f64 = 1e-12;
    if arg.abs() > 1.0 + GRACE {
        let clamped = Angle::from_finite(90.0_f64.copysign(arg));
        return Err(PropagationError::ArcsineDomain { clamped });
    }
    Ok(Angle::from_finite(
        arg.clamp(-1.0, 1.0).asin().to_degrees(),
    ))
}

/// Clamping variant of [`aoa_from_pdoa`]; the flag reports whether the
/// arcsine argument was out of domain.
pub fn aoa_from_pdoa_clamped(geom: &AntennaGeometry, pdoa: Angle) -> (Angle, bool) {
    match aoa_from_pdoa(geom, pdoa) {
        Ok(a) => (a, false),
        Err(PropagationError::ArcsineDomain { clamped }) => (clamped, true),
        Err(_) => unreachable!("aoa_from_pdoa only fails with ArcsineDomain"),
    }
}

/// The noise-free estimate the naive estimator would produce for a true
/// angle: forward model, wrap, clamped inversion. This is the folded
/// reference curve against which measured sweeps are plotted.
pub fn expected_aoa_estimate(geom: &AntennaGeometry, true_aoa: Angle) -> Angle {
    let prop = pdoa_far_field(geom, true_aoa);
    aoa_from_pdoa_clamped(geom, prop.phase_delta_wrapped).0
}

/// True angle (degrees) at which the wrapped far-field phase first crosses
/// ±180°, i.e. arcsin(λ / (2 d_eff)). `None` when the phase never reaches
/// ±180° within the front half.
pub fn wrap_onset(geom: &AntennaGeometry) -> Option<Angle> {
    let arg = geom.wavelength() / (2.0 * geom.effective_spacing());
    if arg >= 1.0 {
        None
    } else {
        Some(Angle::from_finite(arg.asin().to_degrees()))
    }
}

/// Exact path-length difference for a source at finite distance.
///
/// Antennas sit at (∓d_eff/2, 0, 0); the source at radius·(sin ψ, 0, cos ψ).
pub fn pdoa_near_field(
    geom: &AntennaGeometry,
    src: &NearFieldSource,
) -> Result<PropagationResult, PropagationError> {
    let half_spacing = geom.effective_spacing() / 2.0;
    if !(src.radius.is_finite() && src.radius > half_spacing) {
        return Err(PropagationError::SourceTooClose {
            radius: src.radius,
            half_spacing,
        });
    }
    let sx = src.radius * src.incident_angle.sin();
    let sz = src.radius * src.incident_angle.cos();
    // hypot keeps the collinear case exact up to representation rounding.
    let to_near_antenna = (sx - half_spacing).hypot(sz);
    let to_far_antenna = (sx + half_spacing).hypot(sz);
    let path_delta = to_far_antenna - to_near_antenna;
    Ok(result_from_path(geom, path_delta))
}

/// Time-domain UWB pulse: scale · (t/τ) · exp(-2π (t/τ)²) · sin(2π f₀ t).
pub fn uwb_pulse(t: f64, amplitude_scale: f64, tau: f64, center_frequency: f64) -> f64 {
    uwb_pulse_envelope(t, amplitude_scale, tau) * (2.0 * std::f64::consts::PI * center_frequency * t).sin()
}

/// Envelope of [`uwb_pulse`]: scale · (t/τ) · exp(-2π (t/τ)²).
///
/// Peaks at t = τ / (2√π).
pub fn uwb_pulse_envelope(t: f64, amplitude_scale: f64, tau: f64) -> f64 {
    assert!(tau > 0.0, "pulse width must be positive");
    let x = t / tau;
    amplitude_scale * x * (-2.0 * std::f64::consts::PI * x * x).exp()
}
