//! Turns measurement records into model inputs and training targets.
//!
//! Scalar channels (PDoA, TDoA) are standardized to zero mean / unit
//! variance on the training set; the ranging distance estimate is min-max
//! scaled to [0, 1]; impulse-response windows are divided by a single
//! per-record magnitude maximum. Regression targets are the sine and cosine
//! of the angle-estimation error plus the scaled true distance;
//! classification targets are the four 90°-wide arrival zones.

use crate::angle::{angular_difference, Angle};
use crate::channel::MeasurementRecord;
use crate::propagation::{aoa_from_pdoa_clamped, AntennaGeometry};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("CIR window [fp-{before}, fp+{after}] out of bounds for first path {first_path}")]
    WindowOutOfBounds {
        first_path: usize,
        before: usize,
        after: usize,
    },
}

/// The four 90°-wide angle-of-arrival sectors, centered on 0°, 90°, 180°
/// and 270°. Boundaries are left-closed: [-45°, 45°) is the center zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Zone {
    Z0 = 0,
    Z90 = 1,
    Z180 = 2,
    Z270 = 3,
}

impl Zone {
    pub const ALL: [Zone; 4] = [Zone::Z0, Zone::Z90, Zone::Z180, Zone::Z270];

    pub fn from_angle(angle: Angle) -> Zone {
        let mut deg = angle.degrees();
        if deg < -45.0 {
            deg += 360.0;
        }
        match ((deg + 45.0) / 90.0).floor() as i64 {
            0 => Zone::Z0,
            1 => Zone::Z90,
            2 => Zone::Z180,
            _ => Zone::Z270,
        }
    }

    pub fn from_index(index: usize) -> Option<Zone> {
        Zone::ALL.get(index).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn center(self) -> Angle {
        Angle::from_finite(match self {
            Zone::Z0 => 0.0,
            Zone::Z90 => 90.0,
            Zone::Z180 => 180.0,
            Zone::Z270 => 270.0,
        })
    }
}

impl std::fmt::Display for Zone {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Zone::Z0 => write!(f, "Z0"),
            Zone::Z90 => write!(f, "Z90"),
            Zone::Z180 => write!(f, "Z180"),
            Zone::Z270 => write!(f, "Z270"),
        }
    }
}

/// Which feature groups enter the model input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureFlags {
    pub pdoa: bool,
    pub tdoa: bool,
    pub twr_distance: bool,
    pub power_ratio: bool,
    pub cir_a: bool,
    pub cir_b: bool,
}

impl Default for FeatureFlags {
    fn default() -> Self {
        FeatureFlags {
            pdoa: true,
            tdoa: true,
            twr_distance: true,
            power_ratio: true,
            cir_a: true,
            cir_b: true,
        }
    }
}

impl FeatureFlags {
    pub fn scalars_only() -> Self {
        FeatureFlags {
            cir_a: false,
            cir_b: false,
            ..FeatureFlags::default()
        }
    }
}

/// Zero-mean / unit-variance scaler parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardScaler {
    pub mean: f64,
    pub std: f64,
    /// Set when the training column had (numerically) zero variance;
    /// `std` is stored as 1 so scaling maps the column to zero.
    pub degenerate: bool,
}

impl StandardScaler {
    fn fit(values: impl Iterator<Item = f64> + Clone) -> StandardScaler {
        let (mut n, mut sum) = (0usize, 0.0);
        for v in values.clone() {
            n += 1;
            sum += v;
        }
        let mean = sum / n as f64;
        let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        if std < 1e-12 {
            StandardScaler {
                mean,
                std: 1.0,
                degenerate: true,
            }
        } else {
            StandardScaler {
                mean,
                std,
                degenerate: false,
            }
        }
    }

    pub fn apply(&self, value: f64) -> f64 {
        (value - self.mean) / self.std
    }
}

/// Min-max scaler mapping the training range onto [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: f64,
    pub max: f64,
    pub degenerate: bool,
}

impl MinMaxScaler {
    fn fit(values: impl Iterator<Item = f64>) -> MinMaxScaler {
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        let degenerate = !(max > min);
        MinMaxScaler { min, max, degenerate }
    }

    pub fn apply(&self, value: f64) -> f64 {
        if self.degenerate {
            0.0
        } else {
            (value - self.min) / (self.max - self.min)
        }
    }
}

/// Fitted preprocessing parameters; serialized alongside trained models so
/// inference is self-contained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    /// CIR samples kept before the first path.
    pub window_before: usize,
    /// CIR samples kept after the first path.
    pub window_after: usize,
    pub include: FeatureFlags,
    pub pdoa_scaler: StandardScaler,
    pub tdoa_scaler: StandardScaler,
    pub twr_distance_scaler: MinMaxScaler,
    /// Scaler for the regression target (true distance).
    pub target_distance_scaler: MinMaxScaler,
}

impl FeatureSpec {
    /// Number of complex CIR samples per windowed antenna.
    pub fn window_len(&self) -> usize {
        self.window_before + self.window_after + 1
    }

    /// Total feature vector length.
    pub fn feature_len(&self) -> usize {
        let f = self.include;
        let scalars = [f.pdoa, f.tdoa, f.twr_distance, f.power_ratio]
            .iter()
            .filter(|&&on| on)
            .count();
        let cirs = [f.cir_a, f.cir_b].iter().filter(|&&on| on).count();
        scalars + cirs * 2 * self.window_len()
    }
}

/// Fits all scalers on the training records.
pub fn fit_scalers(
    train: &[MeasurementRecord],
    include: FeatureFlags,
    window_before: usize,
    window_after: usize,
) -> Result<FeatureSpec, FeatureError> {
    if train.is_empty() {
        return Err(FeatureError::EmptyTrainingSet);
    }
    Ok(FeatureSpec {
        window_before,
        window_after,
        include,
        pdoa_scaler: StandardScaler::fit(train.iter().map(|r| r.pdoa.degrees())),
        tdoa_scaler: StandardScaler::fit(train.iter().map(|r| r.tdoa)),
        twr_distance_scaler: MinMaxScaler::fit(train.iter().map(|r| r.distance_estimate)),
        target_distance_scaler: MinMaxScaler::fit(train.iter().map(|r| r.true_distance)),
    })
}

/// Model-ready input vector of fixed length [`FeatureSpec::feature_len`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

/// Extracts one feature vector. Scalar order is pdoa, tdoa, twr_distance,
/// power_ratio, followed by the windowed CIRs (antenna A then B) as
/// interleaved re/im pairs, all divided by one per-record magnitude maximum
/// taken over the windowed samples.
pub fn extract(
    record: &MeasurementRecord,
    spec: &FeatureSpec,
) -> Result<FeatureVector, FeatureError> {
    let mut values = Vec::with_capacity(spec.feature_len());
    let include = spec.include;
    if include.pdoa {
        values.push(spec.pdoa_scaler.apply(record.pdoa.degrees()));
    }
    if include.tdoa {
        values.push(spec.tdoa_scaler.apply(record.tdoa));
    }
    if include.twr_distance {
        values.push(spec.twr_distance_scaler.apply(record.distance_estimate));
    }
    if include.power_ratio {
        values.push(record.first_path_power_ratio);
    }

    if include.cir_a || include.cir_b {
        let mut windows = Vec::with_capacity(2);
        for (on, cir) in [(include.cir_a, &record.cir_a), (include.cir_b, &record.cir_b)] {
            if !on {
                continue;
            }
            if !cir.supports_window(spec.window_before, spec.window_after) {
                return Err(FeatureError::WindowOutOfBounds {
                    first_path: cir.first_path_index,
                    before: spec.window_before,
                    after: spec.window_after,
                });
            }
            let fp = cir.first_path_index;
            windows.push(&cir.samples[fp - spec.window_before..=fp + spec.window_after]);
        }
        let max_mag = windows
            .iter()
            .flat_map(|w| w.iter())
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max);
        let scale = if max_mag > 0.0 { 1.0 / max_mag } else { 0.0 };
        for window in windows {
            for sample in window {
                values.push(sample.re * scale);
                values.push(sample.im * scale);
            }
        }
    }

    debug_assert_eq!(values.len(), spec.feature_len());
    Ok(FeatureVector { values })
}

/// Batch extraction; records whose CIR window does not fit are skipped and
/// counted. `kept` holds the index of the source record for each vector.
pub struct ExtractionOutcome {
    pub features: Vec<FeatureVector>,
    pub kept: Vec<usize>,
    pub skipped: usize,
}

pub fn extract_all(records: &[MeasurementRecord], spec: &FeatureSpec) -> ExtractionOutcome {
    let mut features = Vec::with_capacity(records.len());
    let mut kept = Vec::with_capacity(records.len());
    let mut skipped = 0;
    for (idx, record) in records.iter().enumerate() {
        match extract(record, spec) {
            Ok(v) => {
                features.push(v);
                kept.push(idx);
            }
            Err(FeatureError::WindowOutOfBounds { .. }) => skipped += 1,
            Err(_) => skipped += 1,
        }
    }
    ExtractionOutcome {
        features,
        kept,
        skipped,
    }
}

/// Supervised targets for one record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetVector {
    /// Sine of the angle-estimation error.
    pub sin_err: f64,
    /// Cosine of the angle-estimation error.
    pub cos_err: f64,
    /// True distance mapped through the target scaler.
    pub true_distance_scaled: f64,
    /// Zone containing the true angle of arrival.
    pub zone: Zone,
    /// Set when the PDoA fell outside the arcsine domain and the error was
    /// computed against the clamped estimate.
    pub clamped: bool,
}

impl TargetVector {
    /// The error angle encoded in (sin_err, cos_err), degrees.
    pub fn error_angle(&self) -> f64 {
        self.sin_err.atan2(self.cos_err).to_degrees()
    }
}

/// Builds the regression/classification targets for one record.
///
/// The error is `true_aoa - estimate` with a wrap-safe difference, where the
/// estimate is the naive inversion of the measured PDoA (clamped when out of
/// domain, mirroring what a deployed estimator would feed the corrector).
pub fn make_targets(
    record: &MeasurementRecord,
    geom: &AntennaGeometry,
    spec: &FeatureSpec,
) -> TargetVector {
    let (estimate, clamped) = aoa_from_pdoa_clamped(geom, record.pdoa);
    let err = angular_difference(record.true_aoa, estimate).to_radians();
    TargetVector {
        sin_err: err.sin(),
        cos_err: err.cos(),
        true_distance_scaled: spec.target_distance_scaler.apply(record.true_distance),
        zone: Zone::from_angle(record.true_aoa),
        clamped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{synthesize_record, ChannelProfile};
    use crate::propagation::AntennaGeometry;

    fn geom() -> AntennaGeometry {
        AntennaGeometry::half_wavelength(6.4896e9).unwrap()
    }

    fn record_at(aoa: f64, distance: f64, seed: u64) -> MeasurementRecord {
        synthesize_record(
            &geom(),
            &ChannelProfile::calibrated_indoor(),
            Angle::new(aoa).unwrap(),
            distance,
            seed,
        )
        .unwrap()
    }

    fn train_set() -> Vec<MeasurementRecord> {
        let mut v = Vec::new();
        for (i, aoa) in [-120.0, -60.0, 0.0, 45.0, 90.0, 170.0].iter().enumerate() {
            for (j, d) in [1.0, 3.0, 5.0].iter().enumerate() {
                v.push(record_at(*aoa, *d, (i * 10 + j) as u64));
            }
        }
        v
    }

    #[test]
    fn zone_assignment_partitions_the_circle() {
        let mut deg = -179.75;
        while deg <= 180.0 {
            let z = Zone::from_angle(Angle::new(deg).unwrap());
            let hits = Zone::ALL
                .iter()
                .filter(|cand| **cand == z)
                .count();
            assert_eq!(hits, 1);
            deg += 0.25;
        }
        let cases = [
            (-45.0, Zone::Z270, false),
            (-45.0, Zone::Z0, true),
            (0.0, Zone::Z0, true),
            (44.999, Zone::Z0, true),
            (45.0, Zone::Z90, true),
            (100.0, Zone::Z90, true),
            (135.0, Zone::Z180, true),
            (180.0, Zone::Z180, true),
            (224.999, Zone::Z180, true),
            (225.0, Zone::Z270, true),
            (-100.0, Zone::Z270, true),
        ];
        for (deg, zone, expected) in cases {
            let got = Zone::from_angle(Angle::new(deg).unwrap()) == zone;
            assert_eq!(got, expected, "angle {deg} vs {zone}");
        }
    }

    #[test]
    fn feature_length_and_window_indices() {
        let train = train_set();
        let spec = fit_scalers(&train, FeatureFlags::default(), 5, 100).unwrap();
        assert_eq!(spec.window_len(), 106);
        assert_eq!(spec.feature_len(), 4 + 2 * 212);
        let v = extract(&train[0], &spec).unwrap();
        assert_eq!(v.values.len(), 428);

        let pdoa_only = FeatureSpec {
            include: FeatureFlags {
                pdoa: true,
                tdoa: false,
                twr_distance: false,
                power_ratio: false,
                cir_a: false,
                cir_b: false,
            },
            ..spec
        };
        assert_eq!(pdoa_only.feature_len(), 1);
        assert_eq!(extract(&train[0], &pdoa_only).unwrap().values.len(), 1);
    }

    #[test]
    fn extraction_is_deterministic() {
        let train = train_set();
        let spec = fit_scalers(&train, FeatureFlags::default(), 5, 100).unwrap();
        let a = extract(&train[3], &spec).unwrap();
        let b = extract(&train[3], &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn standardized_columns_have_zero_mean_unit_variance() {
        let train = train_set();
        let spec = fit_scalers(&train, FeatureFlags::default(), 5, 100).unwrap();
        let scaled: Vec<f64> = train
            .iter()
            .map(|r| spec.pdoa_scaler.apply(r.pdoa.degrees()))
            .collect();
        let n = scaled.len() as f64;
        let mean = scaled.iter().sum::<f64>() / n;
        let var = scaled.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-9);
        assert!((var - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_column_is_flagged_and_zeroed() {
        let mut train = train_set();
        for r in &mut train {
            r.tdoa = 42e-12;
        }
        let spec = fit_scalers(&train, FeatureFlags::default(), 5, 100).unwrap();
        assert!(spec.tdoa_scaler.degenerate);
        assert!(spec.tdoa_scaler.apply(42e-12).abs() < 1e-12);
    }

    #[test]
    fn min_max_scaler_examples() {
        let mut train = train_set();
        train.truncate(3);
        train[0].distance_estimate = 1.0;
        train[1].distance_estimate = 3.0;
        train[2].distance_estimate = 5.0;
        let spec = fit_scalers(&train, FeatureFlags::default(), 5, 100).unwrap();
        let s = &spec.twr_distance_scaler;
        assert_eq!(s.apply(1.0), 0.0);
        assert_eq!(s.apply(3.0), 0.5);
        assert_eq!(s.apply(5.0), 1.0);
    }

    #[test]
    fn extract_ignores_samples_outside_window() {
        let train = train_set();
        let spec = fit_scalers(&train, FeatureFlags::default(), 5, 100).unwrap();
        let mut record = train[2].clone();
        let before = extract(&record, &spec).unwrap();
        let fp = record.cir_a.first_path_index;
        record.cir_a.samples[fp + 101] = num_complex::Complex64::new(999.0, -999.0);
        record.cir_a.samples[fp - 6] = num_complex::Complex64::new(-999.0, 999.0);
        let after = extract(&record, &spec).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn window_out_of_bounds_is_counted_as_skip() {
        let train = train_set();
        let spec = fit_scalers(&train, FeatureFlags::default(), 5, 100).unwrap();
        let mut record = train[0].clone();
        record.cir_a.first_path_index = 3;
        assert!(matches!(
            extract(&record, &spec),
            Err(FeatureError::WindowOutOfBounds { first_path: 3, .. })
        ));
        let records = vec![train[0].clone(), record, train[1].clone()];
        let outcome = extract_all(&records, &spec);
        assert_eq!(outcome.features.len(), 2);
        assert_eq!(outcome.kept, vec![0, 2]);
        assert_eq!(outcome.skipped, 1);
    }

    #[test]
    fn fit_scalers_rejects_empty_train() {
        assert_eq!(
            fit_scalers(&[], FeatureFlags::default(), 5, 100).unwrap_err(),
            FeatureError::EmptyTrainingSet
        );
    }

    #[test]
    fn targets_zero_error() {
        let train = train_set();
        let spec = fit_scalers(&train, FeatureFlags::default(), 5, 100).unwrap();
        // Noise-free record at 30°: estimate equals truth.
        let clean = synthesize_record(
            &geom(),
            &ChannelProfile::default(),
            Angle::new(30.0).unwrap(),
            3.0,
            0,
        )
        .unwrap();
        let t = make_targets(&clean, &geom(), &spec);
        assert!(t.sin_err.abs() < 1e-9);
        assert!((t.cos_err - 1.0).abs() < 1e-9);
        assert!(!t.clamped);
        assert_eq!(t.zone, Zone::Z0);
    }

    #[test]
    fn targets_encode_error_angle_exactly() {
        for err_deg in [-150.0_f64, -30.0, 0.5, 30.0, 89.0, 179.0] {
            let (s, c) = (err_deg.to_radians().sin(), err_deg.to_radians().cos());
            let recovered = s.atan2(c).to_degrees();
            assert!((recovered - err_deg).abs() < 1e-12);
        }
        // e = 30° → (0.5, 0.866025…)
        let t30 = 30.0_f64.to_radians();
        assert!((t30.sin() - 0.5).abs() < 1e-12);
        assert!((t30.cos() - 0.866_025_403_784_438_6).abs() < 1e-12);
    }

    #[test]
    fn targets_unit_circle_invariant() {
        let train = train_set();
        let spec = fit_scalers(&train, FeatureFlags::default(), 5, 100).unwrap();
        for r in &train {
            let t = make_targets(r, &geom(), &spec);
            assert!((t.sin_err * t.sin_err + t.cos_err * t.cos_err - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn back_side_targets_are_clamp_flagged_when_out_of_domain() {
        // Out-of-domain PDoA requires a nominal spacing below λ/2 (otherwise
        // any wrapped phase stays inside the arcsine domain). Keep the same
        // effective spacing but a short nominal one, and sample near the
        // wrap onset where noisy phases land beyond the domain edge.
        let g = AntennaGeometry::new(6.4896e9, 0.0225, 0.0083).unwrap();
        let spec = fit_scalers(&train_set(), FeatureFlags::default(), 5, 100).unwrap();
        let mut found_clamped = false;
        for seed in 0..40 {
            let r = synthesize_record(
                &g,
                &ChannelProfile::calibrated_indoor(),
                Angle::new(48.0).unwrap(),
                3.0,
                seed,
            )
            .unwrap();
            let t = make_targets(&r, &g, &spec);
            if t.clamped {
                found_clamped = true;
                assert!(t.error_angle().is_finite());
            }
        }
        assert!(found_clamped, "expected at least one clamped target near the wrap onset");
    }
}
