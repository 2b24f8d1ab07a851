//! Canonical angle handling: wrapping into (-180, +180], shortest-arc
//! differences, and circular statistics.
//!
//! All public values are in degrees; radians only appear inside
//! trigonometric calls. The wrap boundary is inclusive on +180 so that a
//! straight-back direction has exactly one representation.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AngleError {
    #[error("angle value is not finite: {0}")]
    NonFinite(f64),
    #[error("empty sample set")]
    EmptyInput,
    #[error("circular mean undefined: resultant vector is (numerically) zero")]
    UndefinedMean,
}

/// A planar angle in degrees, always held in the canonical range (-180, +180].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Angle(f64);

/// Reduces `x` (degrees) into (-180, +180]. Errors on non-finite input.
pub fn wrap_degrees(x: f64) -> Result<Angle, AngleError> {
    if !x.is_finite() {
        return Err(AngleError::NonFinite(x));
    }
    Ok(Angle(wrap_raw(x)))
}

/// Wrapping core for values already known to be finite.
pub(crate) fn wrap_raw(x: f64) -> f64 {
    let r = x.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360.0 for tiny negative inputs;
    // the branch below folds that back to 0.
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    /// Checked constructor; wraps into the canonical range.
    pub fn new(degrees: f64) -> Result<Self, AngleError> {
        wrap_degrees(degrees)
    }

    /// Constructor for values produced by internal arithmetic on finite inputs.
    pub(crate) fn from_finite(degrees: f64) -> Self {
        debug_assert!(degrees.is_finite());
        Angle(wrap_raw(degrees))
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }

    pub fn sin(self) -> f64 {
        self.radians().sin()
    }

    pub fn cos(self) -> f64 {
        self.radians().cos()
    }

    /// Adds an offset in degrees, re-wrapping the result.
    pub fn offset(self, degrees: f64) -> Self {
        Angle::from_finite(self.0 + degrees)
    }
}

impl std::ops::Neg for Angle {
    type Output = Angle;
    fn neg(self) -> Angle {
        Angle::from_finite(-self.0)
    }
}

impl std::fmt::Display for Angle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}°", self.0)
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(deserializer)?;
        wrap_degrees(v).map_err(serde::de::Error::custom)
    }
}

/// Signed shortest-arc difference `a - b` in degrees, in (-180, +180].
///
/// Wrap-safe: (179°, -179°) gives -2, never 358.
pub fn angular_difference(a: Angle, b: Angle) -> f64 {
    wrap_raw(a.0 - b.0)
}

/// Circular mean and standard deviation of a set of angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularStats {
    pub mean: Angle,
    /// Directional std in degrees, sqrt(-2 ln R) with R the mean resultant length.
    pub std_deg: f64,
    pub count: usize,
}

/// Mean direction and dispersion from the unit-vector sum.
///
/// The std estimator is the standard directional-statistics form
/// sqrt(-2 ln R) (radians, converted to degrees). For small dispersion it
/// coincides with the ordinary standard deviation.
pub fn circular_mean_std(samples: &[Angle]) -> Result<CircularStats, AngleError> {
    if samples.is_empty() {
        return Err(AngleError::EmptyInput);
    }
    let mut sum_sin = 0.0;
    let mut sum_cos = 0.0;
    for s in samples {
        sum_sin += s.sin();
        sum_cos += s.cos();
    }
    let n = samples.len() as f64;
    let resultant = (sum_sin.hypot(sum_cos)) / n;
    if resultant < 1e-12 {
        return Err(AngleError::UndefinedMean);
    }
    let mean = Angle::from_finite(sum_sin.atan2(sum_cos).to_degrees());
    // Guard against resultant > 1 from rounding (single sample, identical samples).
    let r = resultant.min(1.0);
    let std_deg = (-2.0 * r.ln()).sqrt().to_degrees();
    Ok(CircularStats {
        mean,
        std_deg,
        count: samples.len(),
    })
}

/// Arithmetic mean/std over the wrapped representative values, i.e. ignoring
/// circular topology. Misleading near the ±180 boundary; provided for
/// comparison with the circular estimator, which is the default everywhere.
pub fn linear_mean_std(samples: &[Angle]) -> Result<(f64, f64), AngleError> {
    if samples.is_empty() {
        return Err(AngleError::EmptyInput);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().map(|a| a.0).sum::<f64>() / n;
    let var = samples.iter().map(|a| (a.0 - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_degrees(350.0).unwrap().degrees(), -10.0);
        assert_eq!(wrap_degrees(180.0).unwrap().degrees(), 180.0);
        assert_eq!(wrap_degrees(-540.0).unwrap().degrees(), 180.0);
        assert_eq!(wrap_degrees(-180.0).unwrap().degrees(), 180.0);
        assert_eq!(wrap_degrees(0.0).unwrap().degrees(), 0.0);
    }

    #[test]
    fn wrap_rejects_non_finite() {
        assert!(matches!(
            wrap_degrees(f64::NAN),
            Err(AngleError::NonFinite(_))
        ));
        assert!(matches!(
            wrap_degrees(f64::INFINITY),
            Err(AngleError::NonFinite(_))
        ));
    }

    #[test]
    fn difference_examples() {
        let a = Angle::new(179.0).unwrap();
        let b = Angle::new(-179.0).unwrap();
        assert_eq!(angular_difference(a, b), -2.0);
        assert_eq!(angular_difference(a, a), 0.0);
        let p = Angle::new(90.0).unwrap();
        let q = Angle::new(-90.0).unwrap();
        assert_eq!(angular_difference(p, q), 180.0);
    }

    #[test]
    fn circular_mean_across_boundary() {
        let samples = [Angle::new(179.0).unwrap(), Angle::new(-179.0).unwrap()];
        let stats = circular_mean_std(&samples).unwrap();
        assert_eq!(stats.mean.degrees(), 180.0);
        assert_eq!(stats.count, 2);
    }

    #[test]
    fn circular_mean_vector_sum_oracle() {
        // Oracle: explicit unit-vector sum of [0, 0, 90] is (2, 1);
        // the mean direction is atan2(1, 2).
        let expected = 1.0_f64.atan2(2.0).to_degrees();
        let samples = [
            Angle::new(0.0).unwrap(),
            Angle::new(0.0).unwrap(),
            Angle::new(90.0).unwrap(),
        ];
        let stats = circular_mean_std(&samples).unwrap();
        assert!((stats.mean.degrees() - expected).abs() < 1e-12);
        assert!((stats.mean.degrees() - 26.565_051_177_077_99).abs() < 1e-9);
    }

    #[test]
    fn circular_mean_rejects_empty_and_zero_resultant() {
        assert_eq!(circular_mean_std(&[]).unwrap_err(), AngleError::EmptyInput);
        let antipodal = [Angle::new(0.0).unwrap(), Angle::new(180.0).unwrap()];
        assert_eq!(
            circular_mean_std(&antipodal).unwrap_err(),
            AngleError::UndefinedMean
        );
    }

    #[test]
    fn single_sample_has_zero_std() {
        let stats = circular_mean_std(&[Angle::new(42.5).unwrap()]).unwrap();
        assert_eq!(stats.std_deg, 0.0);
        assert_eq!(stats.mean.degrees(), 42.5);
    }

    fn wrapped_gaussian(n: usize, mean: f64, std: f64, seed: u64) -> Vec<Angle> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Normal::new(mean, std).unwrap();
        (0..n)
            .map(|_| Angle::new(dist.sample(&mut rng)).unwrap())
            .collect()
    }

    #[test]
    fn circular_std_recovers_gaussian_sigma() {
        // Monte-Carlo oracle: 3000 draws from a wrapped Gaussian with
        // sigma = 2.45 degrees must come back within ±0.15.
        let samples = wrapped_gaussian(3000, 0.0, 2.45, 0xC1AC);
        let stats = circular_mean_std(&samples).unwrap();
        assert!(
            (stats.std_deg - 2.45).abs() < 0.15,
            "std {} not within 2.45 ± 0.15",
            stats.std_deg
        );
    }

    #[test]
    fn circular_std_also_holds_near_boundary() {
        let samples = wrapped_gaussian(3000, 180.0, 2.45, 0xB0B);
        let stats = circular_mean_std(&samples).unwrap();
        assert!((stats.std_deg - 2.45).abs() < 0.15);
        assert!(angular_difference(stats.mean, Angle::new(180.0).unwrap()).abs() < 0.25);
    }

    #[test]
    fn group_averaging_shrinks_std_as_sqrt_n() {
        let sigma = 2.45;
        let n_groups = 300;
        let group = 10;
        let samples = wrapped_gaussian(n_groups * group, 0.0, sigma, 77);
        let means: Vec<Angle> = samples
            .chunks(group)
            .map(|c| circular_mean_std(c).unwrap().mean)
            .collect();
        let std_of_means = circular_mean_std(&means).unwrap().std_deg;
        let expected = sigma / (group as f64).sqrt();
        assert!(
            (std_of_means - expected).abs() / expected < 0.20,
            "std of 10-sample means {} vs expected {}",
            std_of_means,
            expected
        );
    }

    #[test]
    fn linear_stats_match_circular_away_from_boundary() {
        let samples = wrapped_gaussian(2000, 20.0, 3.0, 5);
        let (lin_mean, lin_std) = linear_mean_std(&samples).unwrap();
        let circ = circular_mean_std(&samples).unwrap();
        assert!((lin_mean - circ.mean.degrees()).abs() < 0.3);
        assert!((lin_std - circ.std_deg).abs() < 0.1);
    }

    proptest! {
        #[test]
        fn wrap_is_idempotent(x in -1.0e6..1.0e6_f64) {
            let once = wrap_degrees(x).unwrap().degrees();
            let twice = wrap_raw(once);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn wrap_is_periodic(x in -1000.0..1000.0_f64, k in -3i32..=3) {
            let shifted = wrap_degrees(x + 360.0 * k as f64).unwrap().degrees();
            let base = wrap_degrees(x).unwrap().degrees();
            // x + 360k is not exact in floats; allow rounding slack.
            let d = wrap_raw(shifted - base).abs();
            prop_assert!(d < 1e-9, "x={} k={} -> {} vs {}", x, k, shifted, base);
        }

        #[test]
        fn wrap_lands_in_canonical_range(x in -1.0e9..1.0e9_f64) {
            let w = wrap_degrees(x).unwrap().degrees();
            prop_assert!(w > -180.0 && w <= 180.0);
        }

        #[test]
        fn difference_is_antisymmetric(a in -180.0..180.0_f64, b in -180.0..180.0_f64) {
            let x = Angle::new(a).unwrap();
            let y = Angle::new(b).unwrap();
            let s = wrap_raw(angular_difference(x, y) + angular_difference(y, x));
            prop_assert!(s.abs() < 1e-9);
        }

        #[test]
        fn difference_is_bounded(a in -5000.0..5000.0_f64, b in -5000.0..5000.0_f64) {
            let x = Angle::new(a).unwrap();
            let y = Angle::new(b).unwrap();
            let d = angular_difference(x, y);
            prop_assert!(d > -180.0 && d <= 180.0);
        }

        #[test]
        fn circular_mean_rotates_with_samples(r in -180.0..180.0_f64) {
            // Samples clustered enough that the resultant never vanishes.
            let base: Vec<Angle> = [-40.0, -10.0, 5.0, 30.0, 55.0]
                .iter()
                .map(|&d| Angle::new(d).unwrap())
                .collect();
            let rotated: Vec<Angle> = base.iter().map(|a| a.offset(r)).collect();
            let m0 = circular_mean_std(&base).unwrap().mean;
            let m1 = circular_mean_std(&rotated).unwrap().mean;
            let err = angular_difference(m1, m0.offset(r)).abs();
            prop_assert!(err < 1e-6, "rotation {} -> mean err {}", r, err);
        }
    }
}
