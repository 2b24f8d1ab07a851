//! Synthetic dual-antenna measurement records: channel impulse responses,
//! PDoA/TDoA diagnostics, ranging timestamps and ground truth.
//!
//! The channel is a sparse tap-delay line. Each tap (and the direct path)
//! arrives from its own direction, so the inter-antenna phase of every tap
//! follows the far-field model at that tap's incidence angle. This is what
//! makes the impulse responses carry information beyond the folded PDoA:
//! reflections break the front-back mirror symmetry of the direct path.

use crate::angle::{Angle, AngleError};
use crate::propagation::{
    aoa_from_pdoa, pdoa_far_field, uwb_pulse_envelope, AntennaGeometry, SPEED_OF_LIGHT,
};
use crate::twr::{estimate_distance, synthesize_twr, TwrError, TwrExchange};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fixed CIR length (complex samples per antenna).
pub const CIR_LEN: usize = 512;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("invalid channel profile: {0}")]
    InvalidProfile(&'static str),
    #[error("invalid pose: {0}")]
    InvalidPose(&'static str),
    #[error("invalid CIR: {0}")]
    InvalidCir(&'static str),
    #[error("CIRs are not comparable: {0}")]
    MismatchedCirs(&'static str),
    #[error("first-path amplitude below the noise floor")]
    LowSignal,
    #[error("invalid sweep: {0}")]
    InvalidSweep(&'static str),
    #[error(transparent)]
    Twr(#[from] TwrError),
    #[error(transparent)]
    Angle(#[from] AngleError),
}

/// Channel impulse response of one antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct Cir {
    pub samples: Vec<Complex64>,
    /// Time between CIR samples, seconds.
    pub sample_period: f64,
    /// Index of the first (earliest) signal path.
    pub first_path_index: usize,
}

impl Cir {
    pub fn new(
        samples: Vec<Complex64>,
        sample_period: f64,
        first_path_index: usize,
    ) -> Result<Self, ChannelError> {
        if samples.len() != CIR_LEN {
            return Err(ChannelError::InvalidCir("expected exactly 512 samples"));
        }
        if !(sample_period.is_finite() && sample_period > 0.0) {
            return Err(ChannelError::InvalidCir("sample period must be positive"));
        }
        if first_path_index >= CIR_LEN {
            return Err(ChannelError::InvalidCir("first path index out of range"));
        }
        Ok(Cir {
            samples,
            sample_period,
            first_path_index,
        })
    }

    /// Whether a `[fp - before, fp + after]` window fits inside the CIR.
    pub fn supports_window(&self, before: usize, after: usize) -> bool {
        self.first_path_index >= before && self.first_path_index + after < CIR_LEN
    }
}

/// Per-record quality annotations, stored as a compact bit set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QualityFlags(u8);

impl QualityFlags {
    pub const NEGATIVE_DISTANCE: QualityFlags = QualityFlags(1);
    pub const CIR_WINDOW_SHORT: QualityFlags = QualityFlags(1 << 1);
    pub const PDOA_OUT_OF_DOMAIN: QualityFlags = QualityFlags(1 << 2);

    pub fn contains(self, other: QualityFlags) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn insert(&mut self, other: QualityFlags) {
        self.0 |= other.0;
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_bits(bits: u8) -> QualityFlags {
        QualityFlags(bits)
    }
}

/// One multipath echo. `direction_offset` is the arrival direction of the
/// echo relative to the direct path; as the array rotates, the echo's
/// incidence angle moves with the true angle of arrival.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultipathTap {
    /// Delay after the first path, seconds (strictly positive).
    pub excess_delay: f64,
    /// Field amplitude relative to the direct path, in (0, 1).
    pub relative_amplitude: f64,
    /// Intrinsic reflection phase.
    pub phase: Angle,
    /// Arrival direction relative to the direct path.
    pub direction_offset: Angle,
}

/// Synthesis parameters for one propagation environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelProfile {
    pub multipath_taps: Vec<MultipathTap>,
    /// Std of the Gaussian noise on the reported PDoA, degrees.
    pub pdoa_noise_std: f64,
    /// Std of the Gaussian noise on the reported TDoA, seconds.
    pub tdoa_noise_std: f64,
    /// Std of the complex noise per CIR sample component, relative to the
    /// unit-amplitude first path.
    pub amplitude_noise_std: f64,
    /// CIR sample period, seconds.
    pub sample_period: f64,
    /// CIR index at which a zero-distance first path would sit.
    pub first_path_base_index: usize,
    /// UWB pulse width parameter τ, seconds.
    pub pulse_width: f64,
    /// Relative field gain for a wave arriving from straight behind;
    /// 1.0 means a perfectly symmetric antenna.
    pub back_lobe_gain: f64,
    /// TWR responder turnaround time, seconds.
    pub reply_time: f64,
    /// TWR responder clock drift.
    pub responder_drift: f64,
    /// TWR antenna delay baked into timestamps, seconds.
    pub antenna_delay: f64,
    /// Std of the Gaussian timing noise on the round-trip time, seconds.
    pub twr_time_noise_std: f64,
}

impl Default for ChannelProfile {
    /// Clean line-of-sight profile: no multipath, no noise.
    fn default() -> Self {
        ChannelProfile {
            multipath_taps: Vec::new(),
            pdoa_noise_std: 0.0,
            tdoa_noise_std: 0.0,
            amplitude_noise_std: 0.0,
            sample_period: 1e-9,
            first_path_base_index: 64,
            pulse_width: 4e-9,
            back_lobe_gain: 1.0,
            reply_time: 500e-9,
            responder_drift: 0.0,
            antenna_delay: 0.0,
            twr_time_noise_std: 0.0,
        }
    }
}

impl ChannelProfile {
    /// Office-like profile with two wall echoes and noise levels calibrated
    /// so the broadside AoA estimate scatters with σ ≈ 2.45° at
    /// half-wavelength spacing (PDoA σ of 7.70°).
    pub fn calibrated_indoor() -> Self {
        ChannelProfile {
            multipath_taps: vec![
                MultipathTap {
                    excess_delay: 6e-9,
                    relative_amplitude: 0.5,
                    phase: Angle::from_finite(40.0),
                    direction_offset: Angle::from_finite(25.0),
                },
                MultipathTap {
                    excess_delay: 13.5e-9,
                    relative_amplitude: 0.35,
                    phase: Angle::from_finite(-100.0),
                    direction_offset: Angle::from_finite(-40.0),
                },
            ],
            pdoa_noise_std: 7.70,
            tdoa_noise_std: 20e-12,
            amplitude_noise_std: 0.01,
            back_lobe_gain: 0.85,
            twr_time_noise_std: 0.2e-9,
            ..ChannelProfile::default()
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let mut prev = 0.0;
        for tap in &self.multipath_taps {
            if !(tap.excess_delay.is_finite() && tap.excess_delay > prev) {
                return Err(ChannelError::InvalidProfile(
                    "tap excess delays must be strictly positive and ascending",
                ));
            }
            if !(tap.relative_amplitude > 0.0 && tap.relative_amplitude < 1.0) {
                return Err(ChannelError::InvalidProfile(
                    "tap amplitudes must lie in (0, 1)",
                ));
            }
            prev = tap.excess_delay;
        }
        if self.pdoa_noise_std < 0.0
            || self.tdoa_noise_std < 0.0
            || self.amplitude_noise_std < 0.0
            || self.twr_time_noise_std < 0.0
        {
            return Err(ChannelError::InvalidProfile("noise stds must be >= 0"));
        }
        if !(self.sample_period > 0.0 && self.pulse_width > 0.0) {
            return Err(ChannelError::InvalidProfile(
                "sample period and pulse width must be positive",
            ));
        }
        if self.first_path_base_index >= CIR_LEN {
            return Err(ChannelError::InvalidProfile(
                "first path base index out of CIR range",
            ));
        }
        if !(self.back_lobe_gain > 0.0 && self.back_lobe_gain <= 1.0) {
            return Err(ChannelError::InvalidProfile(
                "back lobe gain must lie in (0, 1]",
            ));
        }
        if self.reply_time <= 0.0 {
            return Err(ChannelError::InvalidProfile("reply time must be positive"));
        }
        Ok(())
    }

    /// Field gain for a wave arriving at `incidence`; smooth front-to-back
    /// roll-off reaching `back_lobe_gain` at ±180°.
    fn antenna_gain(&self, incidence: Angle) -> f64 {
        1.0 - (1.0 - self.back_lobe_gain) * (1.0 - incidence.cos()) / 2.0
    }
}

/// One complete TWR exchange as logged by the dual-antenna side.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub pdoa: Angle,
    /// Arrival-time difference between the antennas, seconds.
    pub tdoa: f64,
    pub cir_a: Cir,
    pub cir_b: Cir,
    pub twr: TwrExchange,
    /// On-device distance estimate, meters.
    pub distance_estimate: f64,
    /// Fraction of received power in the earliest path, (0, 1].
    pub first_path_power_ratio: f64,
    pub true_aoa: Angle,
    pub true_distance: f64,
    pub valid_flags: QualityFlags,
}

struct PathContribution {
    arrival_a: f64,
    arrival_b: f64,
    amplitude: f64,
    /// Carrier phase at antenna A, degrees.
    phase_a: f64,
    /// Carrier phase at antenna B, degrees.
    phase_b: f64,
}

/// Deterministic per-record seed for sweep synthesis.
pub fn derive_record_seed(master: u64, pose_index: u64, repetition: u64) -> u64 {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let a = splitmix64(master ^ splitmix64(pose_index.wrapping_add(0x51_7C_C1B7)));
    splitmix64(a ^ splitmix64(repetition.wrapping_add(0x2545_F491_4F6C_DD1D)))
}

/// Synthesizes one measurement record. Deterministic for a fixed seed: the
/// noise draw order is pdoa, tdoa, round-trip, CIR A, CIR B.
pub fn synthesize_record(
    geom: &AntennaGeometry,
    profile: &ChannelProfile,
    true_aoa: Angle,
    true_distance: f64,
    seed: u64,
) -> Result<MeasurementRecord, ChannelError> {
    profile.validate()?;
    if !(true_distance.is_finite() && true_distance > 0.0) {
        return Err(ChannelError::InvalidPose("distance must be positive"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let period = profile.sample_period;
    let tof = true_distance / SPEED_OF_LIGHT;
    let direct_time = profile.first_path_base_index as f64 * period + tof;
    let first_path_index = (direct_time / period).round() as usize;

    // Direct path plus echoes; every path carries the inter-antenna phase of
    // its own incidence angle.
    let direct = pdoa_far_field(geom, true_aoa);
    let f = geom.carrier_frequency;
    let mut paths = Vec::with_capacity(1 + profile.multipath_taps.len());
    {
        let half = direct.time_delta / 2.0;
        let g = profile.antenna_gain(true_aoa);
        paths.push(PathContribution {
            arrival_a: direct_time + half,
            arrival_b: direct_time - half,
            amplitude: g,
            phase_a: -360.0 * f * (direct_time + half),
            phase_b: -360.0 * f * (direct_time - half),
        });
    }
    for tap in &profile.multipath_taps {
        let incidence = true_aoa.offset(tap.direction_offset.degrees());
        let prop = pdoa_far_field(geom, incidence);
        let half = prop.time_delta / 2.0;
        let t_tap = direct_time + tap.excess_delay;
        let g = profile.antenna_gain(incidence);
        paths.push(PathContribution {
            arrival_a: t_tap + half,
            arrival_b: t_tap - half,
            amplitude: tap.relative_amplitude * g,
            phase_a: -360.0 * f * (t_tap + half) + tap.phase.degrees(),
            phase_b: -360.0 * f * (t_tap - half) + tap.phase.degrees(),
        });
    }

    // Measured quantities.
    let pdoa_noise = sample_normal(&mut rng, profile.pdoa_noise_std);
    let pdoa = Angle::from_finite(direct.phase_delta_unwrapped + pdoa_noise);
    let tdoa = direct.time_delta + sample_normal(&mut rng, profile.tdoa_noise_std);

    let mut twr = synthesize_twr(
        true_distance,
        profile.reply_time,
        profile.responder_drift,
        profile.antenna_delay,
    )?;
    twr.round_trip_time += sample_normal(&mut rng, profile.twr_time_noise_std);
    if twr.round_trip_time < twr.reply_time {
        twr.round_trip_time = twr.reply_time;
    }
    let est = estimate_distance(&twr, profile.antenna_delay)?;

    let cir_a = render_cir(profile, &paths, AntennaSide::A, first_path_index, &mut rng)?;
    let cir_b = render_cir(profile, &paths, AntennaSide::B, first_path_index, &mut rng)?;

    let first_path_power_ratio = first_path_power_ratio(&cir_a);

    let mut flags = QualityFlags::default();
    if est.negative {
        flags.insert(QualityFlags::NEGATIVE_DISTANCE);
    }
    if !cir_a.supports_window(5, 100) {
        flags.insert(QualityFlags::CIR_WINDOW_SHORT);
    }
    if aoa_from_pdoa(geom, pdoa).is_err() {
        flags.insert(QualityFlags::PDOA_OUT_OF_DOMAIN);
    }

    Ok(MeasurementRecord {
        pdoa,
        tdoa,
        cir_a,
        cir_b,
        twr,
        distance_estimate: est.meters,
        first_path_power_ratio,
        true_aoa,
        true_distance,
        valid_flags: flags,
    })
}

fn sample_normal(rng: &mut ChaCha8Rng, std: f64) -> f64 {
    if std == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, std).expect("validated std").sample(rng)
}

enum AntennaSide {
    A,
    B,
}

fn render_cir(
    profile: &ChannelProfile,
    paths: &[PathContribution],
    side: AntennaSide,
    first_path_index: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Cir, ChannelError> {
    let period = profile.sample_period;
    let tau = profile.pulse_width;
    // Normalize the pulse shape so a unit-amplitude path peaks at 1.
    let peak_time = tau / (2.0 * std::f64::consts::PI.sqrt());
    let peak_value = uwb_pulse_envelope(peak_time, 1.0, tau);
    let support = 6.0 * tau;

    let mut samples = vec![Complex64::new(0.0, 0.0); CIR_LEN];
    for path in paths {
        let (arrival, phase_deg) = match side {
            AntennaSide::A => (path.arrival_a, path.phase_a),
            AntennaSide::B => (path.arrival_b, path.phase_b),
        };
        let rotor = Complex64::from_polar(path.amplitude, phase_deg.to_radians());
        let lo = ((arrival - support) / period).floor().max(0.0) as usize;
        let hi = (((arrival + support) / period).ceil() as usize).min(CIR_LEN - 1);
        for (i, sample) in samples.iter_mut().enumerate().take(hi + 1).skip(lo) {
            let dt = i as f64 * period - arrival;
            let shape = uwb_pulse_envelope(dt + peak_time, 1.0, tau) / peak_value;
            *sample += rotor * shape;
        }
    }
    if profile.amplitude_noise_std > 0.0 {
        let dist = Normal::new(0.0, profile.amplitude_noise_std).expect("validated std");
        for sample in &mut samples {
            *sample += Complex64::new(dist.sample(rng), dist.sample(rng));
        }
    }
    Cir::new(samples, period, first_path_index.min(CIR_LEN - 1))
}

/// Fraction of CIR energy in the immediate neighbourhood of the first path.
fn first_path_power_ratio(cir: &Cir) -> f64 {
    let fp = cir.first_path_index;
    let lo = fp.saturating_sub(1);
    let hi = (fp + 3).min(CIR_LEN - 1);
    let first: f64 = cir.samples[lo..=hi].iter().map(|c| c.norm_sqr()).sum();
    let total: f64 = cir.samples.iter().map(|c| c.norm_sqr()).sum();
    if total <= 0.0 {
        return 1.0;
    }
    (first / total).clamp(f64::MIN_POSITIVE, 1.0)
}

/// Diagnostic recomputation of the PDoA from the two impulse responses:
/// phase of the complex cross-term at the first-path sample.
pub fn measure_pdoa_from_cirs(cir_a: &Cir, cir_b: &Cir) -> Result<Angle, ChannelError> {
    if cir_a.sample_period != cir_b.sample_period {
        return Err(ChannelError::MismatchedCirs("sample periods differ"));
    }
    if cir_a.first_path_index != cir_b.first_path_index {
        return Err(ChannelError::MismatchedCirs("first path indices differ"));
    }
    let fp = cir_a.first_path_index;
    let cross = cir_b.samples[fp] * cir_a.samples[fp].conj();
    if cross.norm_sqr() < 1e-24 {
        return Err(ChannelError::LowSignal);
    }
    Ok(Angle::from_finite(cross.arg().to_degrees()))
}

/// Full rotation sweep: one record per (distance × angle × repetition).
///
/// Per-record seeds derive from (master seed, pose index, repetition), so
/// synthesis order never changes the outcome.
pub fn sweep_dataset(
    geom: &AntennaGeometry,
    profile: &ChannelProfile,
    distances: &[f64],
    angle_step: f64,
    records_per_pose: usize,
    seed: u64,
) -> Result<Vec<MeasurementRecord>, ChannelError> {
    if !(angle_step > 0.0 && angle_step.is_finite()) {
        return Err(ChannelError::InvalidSweep("angle step must be positive"));
    }
    let n_angles = 360.0 / angle_step;
    if (n_angles - n_angles.round()).abs() > 1e-9 {
        return Err(ChannelError::InvalidSweep("angle step must divide 360"));
    }
    let n_angles = n_angles.round() as usize;
    if records_per_pose == 0 {
        return Err(ChannelError::InvalidSweep(
            "records per pose must be at least 1",
        ));
    }

    let mut records = Vec::with_capacity(distances.len() * n_angles * records_per_pose);
    for (d_idx, &distance) in distances.iter().enumerate() {
        for a_idx in 0..n_angles {
            let aoa = Angle::from_finite(a_idx as f64 * angle_step);
            let pose_index = (d_idx * n_angles + a_idx) as u64;
            for rep in 0..records_per_pose {
                let record_seed = derive_record_seed(seed, pose_index, rep as u64);
                records.push(synthesize_record(
                    geom, profile, aoa, distance, record_seed,
                )?);
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::aoa_from_pdoa_clamped;

    fn half_wave() -> AntennaGeometry {
        AntennaGeometry::half_wavelength(6.4896e9).unwrap()
    }

    #[test]
    fn noiseless_record_matches_forward_model() {
        let geom = half_wave();
        let profile = ChannelProfile::default();
        let rec =
            synthesize_record(&geom, &profile, Angle::new(30.0).unwrap(), 3.0, 1).unwrap();
        assert!((rec.pdoa.degrees() - 90.0).abs() < 1e-9, "pdoa {}", rec.pdoa);
        let measured = measure_pdoa_from_cirs(&rec.cir_a, &rec.cir_b).unwrap();
        assert!(
            (measured.degrees() - rec.pdoa.degrees()).abs() < 0.5,
            "cir phase {} vs pdoa {}",
            measured,
            rec.pdoa
        );
        assert!((rec.distance_estimate - 3.0).abs() < 1e-9);
        assert!(rec.valid_flags.is_empty());
    }

    #[test]
    fn back_side_record_mirrors_front_side() {
        let geom = half_wave();
        let profile = ChannelProfile::default();
        let front =
            synthesize_record(&geom, &profile, Angle::new(30.0).unwrap(), 3.0, 7).unwrap();
        let back =
            synthesize_record(&geom, &profile, Angle::new(150.0).unwrap(), 3.0, 7).unwrap();
        assert_eq!(front.pdoa.degrees(), back.pdoa.degrees());
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let geom = half_wave();
        let profile = ChannelProfile::calibrated_indoor();
        let a = synthesize_record(&geom, &profile, Angle::new(72.0).unwrap(), 2.5, 99).unwrap();
        let b = synthesize_record(&geom, &profile, Angle::new(72.0).unwrap(), 2.5, 99).unwrap();
        assert_eq!(a, b);
        let c = synthesize_record(&geom, &profile, Angle::new(72.0).unwrap(), 2.5, 100).unwrap();
        assert_ne!(a.pdoa.degrees(), c.pdoa.degrees());
    }

    #[test]
    fn first_path_index_tracks_distance() {
        let geom = half_wave();
        let profile = ChannelProfile::default();
        let rec = synthesize_record(&geom, &profile, Angle::ZERO, 3.0, 1).unwrap();
        // 3 m is ~10 ns of flight on top of the base index of 64.
        assert_eq!(rec.cir_a.first_path_index, 74);
        let far = synthesize_record(&geom, &profile, Angle::ZERO, 120.0, 1).unwrap();
        assert!(far
            .valid_flags
            .contains(QualityFlags::CIR_WINDOW_SHORT));
    }

    #[test]
    fn measured_pdoa_from_rotated_cir() {
        let geom = half_wave();
        let profile = ChannelProfile::default();
        let rec = synthesize_record(&geom, &profile, Angle::ZERO, 2.0, 5).unwrap();
        let rotor = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2);
        let mut rotated = rec.cir_a.clone();
        for s in &mut rotated.samples {
            *s *= rotor;
        }
        let phase = measure_pdoa_from_cirs(&rec.cir_a, &rotated).unwrap();
        assert!((phase.degrees() - 90.0).abs() < 1e-9);
        let zero = measure_pdoa_from_cirs(&rec.cir_a, &rec.cir_a).unwrap();
        assert_eq!(zero.degrees(), 0.0);
    }

    #[test]
    fn empty_cir_is_low_signal() {
        let cir = Cir::new(
            vec![Complex64::new(0.0, 0.0); CIR_LEN],
            1e-9,
            64,
        )
        .unwrap();
        assert_eq!(
            measure_pdoa_from_cirs(&cir, &cir).unwrap_err(),
            ChannelError::LowSignal
        );
    }

    #[test]
    fn naive_estimate_recovers_truth_inside_onset() {
        let geom = AntennaGeometry::new(6.4896e9, 0.023114, 0.0077).unwrap();
        let profile = ChannelProfile::default();
        for psi in [-40.0, -15.0, 0.0, 20.0, 45.0] {
            let rec =
                synthesize_record(&geom, &profile, Angle::new(psi).unwrap(), 3.0, 3).unwrap();
            let (est, flagged) = aoa_from_pdoa_clamped(&geom, rec.pdoa);
            assert!(!flagged);
            // Delta-d bias is expected; the estimate must follow the folded
            // reference curve, not the truth, so compare against that curve.
            let reference = crate::propagation::expected_aoa_estimate(&geom, rec.true_aoa);
            assert!(
                (est.degrees() - reference.degrees()).abs() < 1e-9,
                "psi {} est {} ref {}",
                psi,
                est,
                reference
            );
        }
    }

    #[test]
    fn power_ratio_decreases_with_multipath_amplitude() {
        let geom = half_wave();
        let mut ratios = Vec::new();
        for amp in [0.2, 0.5, 0.8] {
            let profile = ChannelProfile {
                multipath_taps: vec![MultipathTap {
                    excess_delay: 8e-9,
                    relative_amplitude: amp,
                    phase: Angle::ZERO,
                    direction_offset: Angle::new(30.0).unwrap(),
                }],
                ..ChannelProfile::default()
            };
            let rec = synthesize_record(&geom, &profile, Angle::ZERO, 2.0, 11).unwrap();
            ratios.push(rec.first_path_power_ratio);
        }
        assert!(ratios[0] > ratios[1] && ratios[1] > ratios[2], "{ratios:?}");
    }

    #[test]
    fn sweep_shapes() {
        let geom = half_wave();
        let profile = ChannelProfile::default();
        let four = sweep_dataset(&geom, &profile, &[3.0], 90.0, 1, 0).unwrap();
        assert_eq!(four.len(), 4);
        let angles: Vec<f64> = four.iter().map(|r| r.true_aoa.degrees()).collect();
        assert_eq!(angles, vec![0.0, 90.0, 180.0, -90.0]);

        let empty = sweep_dataset(&geom, &profile, &[], 90.0, 1, 0).unwrap();
        assert!(empty.is_empty());

        let multi = sweep_dataset(&geom, &profile, &[1.0, 2.0], 45.0, 3, 0).unwrap();
        assert_eq!(multi.len(), 2 * 8 * 3);

        assert!(sweep_dataset(&geom, &profile, &[1.0], 70.0, 1, 0).is_err());
        assert!(sweep_dataset(&geom, &profile, &[1.0], 90.0, 0, 0).is_err());
    }

    #[test]
    fn sweep_is_deterministic() {
        let geom = half_wave();
        let profile = ChannelProfile::calibrated_indoor();
        let a = sweep_dataset(&geom, &profile, &[1.5], 120.0, 2, 42).unwrap();
        let b = sweep_dataset(&geom, &profile, &[1.5], 120.0, 2, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn profile_validation_catches_bad_taps() {
        let mut p = ChannelProfile::default();
        p.multipath_taps = vec![MultipathTap {
            excess_delay: -1e-9,
            relative_amplitude: 0.5,
            phase: Angle::ZERO,
            direction_offset: Angle::ZERO,
        }];
        assert!(p.validate().is_err());
        p.multipath_taps = vec![MultipathTap {
            excess_delay: 1e-9,
            relative_amplitude: 1.5,
            phase: Angle::ZERO,
            direction_offset: Angle::ZERO,
        }];
        assert!(p.validate().is_err());
        assert!(synthesize_record(
            &half_wave(),
            &ChannelProfile::default(),
            Angle::ZERO,
            -2.0,
            0
        )
        .is_err());
    }
}
