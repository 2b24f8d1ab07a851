//! Evaluation metrics: wrap-safe angle errors over angular windows,
//! classification precision/recall, and the fixed-pose stability
//! experiment, plus machine-readable report emission.

use crate::angle::{angular_difference, circular_mean_std, Angle, AngleError};
use crate::features::Zone;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("length mismatch: {truths} truths vs {estimates} estimates")]
    LengthMismatch { truths: usize, estimates: usize },
    #[error("stability experiment needs at least {needed} records, got {got}")]
    InsufficientRecords { needed: usize, got: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("cannot parse report: {0}")]
    Parse(String),
    #[error(transparent)]
    Angle(#[from] AngleError),
}

/// Angular window; membership is wrap-safe. A half width of 180° covers the
/// full circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleWindow {
    pub center: Angle,
    pub half_width: f64,
}

impl AngleWindow {
    pub fn new(center: Angle, half_width: f64) -> Self {
        AngleWindow { center, half_width }
    }

    pub fn full_circle() -> Self {
        AngleWindow {
            center: Angle::ZERO,
            half_width: 180.0,
        }
    }

    pub fn contains(&self, angle: Angle) -> bool {
        angular_difference(angle, self.center).abs() <= self.half_width
    }
}

/// Angle-error statistics for records whose TRUE angle lies in the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowMetrics {
    pub window: AngleWindow,
    pub mse_deg2: f64,
    pub rmse_deg: f64,
    pub mae_deg: f64,
    pub median_ae_deg: f64,
    pub count: usize,
}

/// Wrap-safe angle errors (estimate minus truth) over one window.
pub fn angle_errors(
    truths: &[Angle],
    estimates: &[Angle],
    window: &AngleWindow,
) -> Result<WindowMetrics, MetricsError> {
    if truths.len() != estimates.len() {
        return Err(MetricsError::LengthMismatch {
            truths: truths.len(),
            estimates: estimates.len(),
        });
    }
    let mut abs_errors: Vec<f64> = Vec::new();
    let mut sq_sum = 0.0;
    for (t, e) in truths.iter().zip(estimates) {
        if !window.contains(*t) {
            continue;
        }
        let err = angular_difference(*e, *t);
        sq_sum += err * err;
        abs_errors.push(err.abs());
    }
    let count = abs_errors.len();
    if count == 0 {
        return Ok(WindowMetrics {
            window: *window,
            mse_deg2: 0.0,
            rmse_deg: 0.0,
            mae_deg: 0.0,
            median_ae_deg: 0.0,
            count: 0,
        });
    }
    let n = count as f64;
    let mse = sq_sum / n;
    let mae = abs_errors.iter().sum::<f64>() / n;
    abs_errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if count % 2 == 0 {
        0.5 * (abs_errors[count / 2 - 1] + abs_errors[count / 2])
    } else {
        abs_errors[count / 2]
    };
    Ok(WindowMetrics {
        window: *window,
        mse_deg2: mse,
        rmse_deg: mse.sqrt(),
        mae_deg: mae,
        median_ae_deg: median,
        count,
    })
}

/// One-vs-rest precision and recall for one zone. `precision` is absent
/// when the class was never predicted, `recall` when it never occurs in the
/// truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub zone: Zone,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub support: usize,
}

pub fn precision_recall(
    truths: &[Zone],
    predicted: &[Zone],
) -> Result<Vec<ClassMetrics>, MetricsError> {
    if truths.len() != predicted.len() {
        return Err(MetricsError::LengthMismatch {
            truths: truths.len(),
            estimates: predicted.len(),
        });
    }
    let mut out = Vec::with_capacity(4);
    for zone in Zone::ALL {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fn_ = 0usize;
        for (t, p) in truths.iter().zip(predicted) {
            match (*t == zone, *p == zone) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => {}
            }
        }
        let precision = if tp + fp > 0 {
            Some(tp as f64 / (tp + fp) as f64)
        } else {
            None
        };
        let recall = if tp + fn_ > 0 {
            Some(tp as f64 / (tp + fn_) as f64)
        } else {
            None
        };
        out.push(ClassMetrics {
            zone,
            precision,
            recall,
            support: tp + fn_,
        });
    }
    Ok(out)
}

/// Raw vs group-averaged circular spread at a fixed pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityMetrics {
    pub std_raw_deg: f64,
    pub std_avg_deg: f64,
    pub group_size: usize,
    pub group_count: usize,
}

/// Circular std of raw estimates and of non-overlapping `group_size`-sample
/// circular means. Requires at least 10 groups' worth of records.
pub fn stability_experiment(
    estimates: &[Angle],
    group_size: usize,
) -> Result<StabilityMetrics, MetricsError> {
    let needed = 10 * group_size.max(1);
    if estimates.len() < needed {
        return Err(MetricsError::InsufficientRecords {
            needed,
            got: estimates.len(),
        });
    }
    let raw = circular_mean_std(estimates)?;
    let means: Vec<Angle> = estimates
        .chunks_exact(group_size)
        .map(|chunk| circular_mean_std(chunk).map(|s| s.mean))
        .collect::<Result<_, _>>()?;
    let averaged = circular_mean_std(&means)?;
    Ok(StabilityMetrics {
        std_raw_deg: raw.std_deg,
        std_avg_deg: averaged.std_deg,
        group_size,
        group_count: means.len(),
    })
}

/// Full evaluation report. Field names are a stable contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MetricsReport {
    /// Records that entered the evaluation.
    pub total_records: usize,
    /// Records skipped because their feature window did not fit.
    pub skipped_records: usize,
    pub windows: Vec<WindowMetrics>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub classification: Option<Vec<ClassMetrics>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stability: Option<StabilityMetrics>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub per_zone_regression_mse_deg2: Option<Vec<(Zone, f64)>>,
}

/// Writes a report as deterministic JSON.
pub fn emit_report(report: &MetricsReport, path: &Path) -> Result<(), MetricsError> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    std::fs::write(path, json + "\n")?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<MetricsReport, MetricsError> {
    let raw = std::fs::read_to_string(path)?;
    serde_json::from_str(&raw).map_err(|e| MetricsError::Parse(e.to_string()))
}

/// One plot-table row per (pose, repetition): the measured sweep next to
/// the folded reference curve, ready for plotting estimate against truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotRow {
    pub true_distance_m: f64,
    pub true_aoa_deg: f64,
    pub pdoa_deg: f64,
    pub raw_estimate_deg: f64,
    pub reference_deg: f64,
    pub corrected_deg: Option<f64>,
}

/// CSV plot table with a fixed header.
pub fn write_plot_table(rows: &[PlotRow], path: &Path) -> Result<(), MetricsError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        out,
        "true_distance_m,true_aoa_deg,pdoa_deg,raw_estimate_deg,reference_deg,corrected_deg"
    )?;
    for r in rows {
        match r.corrected_deg {
            Some(c) => writeln!(
                out,
                "{},{},{},{},{},{}",
                r.true_distance_m, r.true_aoa_deg, r.pdoa_deg, r.raw_estimate_deg, r.reference_deg, c
            )?,
            None => writeln!(
                out,
                "{},{},{},{},{},",
                r.true_distance_m, r.true_aoa_deg, r.pdoa_deg, r.raw_estimate_deg, r.reference_deg
            )?,
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn deg(values: &[f64]) -> Vec<Angle> {
        values.iter().map(|&d| Angle::new(d).unwrap()).collect()
    }

    #[test]
    fn basic_error_statistics() {
        let truths = deg(&[0.0, 0.0]);
        let estimates = deg(&[3.0, -3.0]);
        let m = angle_errors(&truths, &estimates, &AngleWindow::full_circle()).unwrap();
        assert_eq!(m.mse_deg2, 9.0);
        assert_eq!(m.mae_deg, 3.0);
        assert_eq!(m.rmse_deg, 3.0);
        assert_eq!(m.median_ae_deg, 3.0);
        assert_eq!(m.count, 2);
    }

    #[test]
    fn errors_are_wrap_safe() {
        let truths = deg(&[179.0]);
        let estimates = deg(&[-179.0]);
        let m = angle_errors(&truths, &estimates, &AngleWindow::full_circle()).unwrap();
        assert_eq!(m.mae_deg, 2.0);
        assert_eq!(m.mse_deg2, 4.0);
    }

    #[test]
    fn window_filters_by_true_angle() {
        let truths = deg(&[0.0, 30.0, 120.0]);
        let estimates = deg(&[5.0, 35.0, 100.0]);
        let w = AngleWindow::new(Angle::ZERO, 45.0);
        let m = angle_errors(&truths, &estimates, &w).unwrap();
        // The 120° record is outside even though its estimate error is big.
        assert_eq!(m.count, 2);
        assert_eq!(m.mse_deg2, 25.0);
    }

    #[test]
    fn window_membership_wraps() {
        let w = AngleWindow::new(Angle::new(180.0).unwrap(), 45.0);
        assert!(w.contains(Angle::new(179.0).unwrap()));
        assert!(w.contains(Angle::new(-170.0).unwrap()));
        assert!(!w.contains(Angle::new(90.0).unwrap()));
    }

    #[test]
    fn full_circle_window_equals_unwindowed() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let truths: Vec<Angle> = (0..200)
            .map(|_| Angle::new(rng.gen_range(-180.0..180.0)).unwrap())
            .collect();
        let estimates: Vec<Angle> = truths
            .iter()
            .map(|t| t.offset(rng.gen_range(-5.0..5.0)))
            .collect();
        let full = angle_errors(&truths, &estimates, &AngleWindow::full_circle()).unwrap();
        assert_eq!(full.count, truths.len());
        // Manual unwindowed mse.
        let mse: f64 = truths
            .iter()
            .zip(&estimates)
            .map(|(t, e)| angular_difference(*e, *t).powi(2))
            .sum::<f64>()
            / truths.len() as f64;
        assert!((full.mse_deg2 - mse).abs() < 1e-12);
    }

    #[test]
    fn mse_dominates_mae_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let truths: Vec<Angle> = (0..50)
                .map(|_| Angle::new(rng.gen_range(-180.0..180.0)).unwrap())
                .collect();
            let estimates: Vec<Angle> = truths
                .iter()
                .map(|t| t.offset(rng.gen_range(-30.0..30.0)))
                .collect();
            let m = angle_errors(&truths, &estimates, &AngleWindow::full_circle()).unwrap();
            assert!(m.mse_deg2 >= m.mae_deg * m.mae_deg - 1e-9);
        }
    }

    #[test]
    fn metrics_are_permutation_invariant() {
        let truths = deg(&[0.0, 10.0, 20.0, 30.0, 40.0]);
        let estimates = deg(&[1.0, 12.0, 17.0, 33.0, 38.0]);
        let a = angle_errors(&truths, &estimates, &AngleWindow::full_circle()).unwrap();
        let perm = [4, 2, 0, 3, 1];
        let tp: Vec<Angle> = perm.iter().map(|&i| truths[i]).collect();
        let ep: Vec<Angle> = perm.iter().map(|&i| estimates[i]).collect();
        let b = angle_errors(&tp, &ep, &AngleWindow::full_circle()).unwrap();
        assert_eq!(a.mse_deg2, b.mse_deg2);
        assert_eq!(a.mae_deg, b.mae_deg);
        assert_eq!(a.median_ae_deg, b.median_ae_deg);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let truths = deg(&[0.0]);
        let estimates = deg(&[0.0, 1.0]);
        assert!(matches!(
            angle_errors(&truths, &estimates, &AngleWindow::full_circle()),
            Err(MetricsError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn perfect_classification() {
        let truths = vec![Zone::Z0, Zone::Z90, Zone::Z180, Zone::Z270];
        let m = precision_recall(&truths, &truths).unwrap();
        for c in m {
            assert_eq!(c.precision, Some(1.0));
            assert_eq!(c.recall, Some(1.0));
            assert_eq!(c.support, 1);
        }
    }

    #[test]
    fn all_predicted_center_on_balanced_truth() {
        let truths = vec![Zone::Z0, Zone::Z90, Zone::Z180, Zone::Z270];
        let predicted = vec![Zone::Z0; 4];
        let m = precision_recall(&truths, &predicted).unwrap();
        assert_eq!(m[0].precision, Some(0.25));
        assert_eq!(m[0].recall, Some(1.0));
        // Other classes are never predicted: precision absent, recall 0.
        for c in &m[1..] {
            assert_eq!(c.precision, None);
            assert_eq!(c.recall, Some(0.0));
        }
    }

    #[test]
    fn constructed_confusion_gives_expected_precision() {
        // 90 correct Z0 predictions, 10 Z90 records predicted as Z0.
        let mut truths = vec![Zone::Z0; 90];
        truths.extend(vec![Zone::Z90; 10]);
        let predicted = vec![Zone::Z0; 100];
        let m = precision_recall(&truths, &predicted).unwrap();
        assert_eq!(m[0].precision, Some(0.9));
        assert_eq!(m[0].recall, Some(1.0));
        // Absent class: recall reported as absent.
        assert_eq!(m[2].support, 0);
        assert_eq!(m[2].recall, None);
    }

    #[test]
    fn stability_zero_noise_is_zero() {
        let estimates = vec![Angle::new(12.5).unwrap(); 200];
        let s = stability_experiment(&estimates, 10).unwrap();
        assert_eq!(s.std_raw_deg, 0.0);
        assert_eq!(s.std_avg_deg, 0.0);
        assert_eq!(s.group_count, 20);
    }

    #[test]
    fn stability_requires_enough_records() {
        let estimates = vec![Angle::ZERO; 99];
        assert!(matches!(
            stability_experiment(&estimates, 10),
            Err(MetricsError::InsufficientRecords { needed: 100, got: 99 })
        ));
    }

    #[test]
    fn report_round_trips_through_its_reader() {
        let report = MetricsReport {
            total_records: 10,
            skipped_records: 1,
            windows: vec![WindowMetrics {
                window: AngleWindow::new(Angle::ZERO, 45.0),
                mse_deg2: 1.5,
                rmse_deg: 1.224744871391589,
                mae_deg: 1.0,
                median_ae_deg: 0.8,
                count: 5,
            }],
            classification: Some(vec![ClassMetrics {
                zone: Zone::Z0,
                precision: Some(0.9),
                recall: None,
                support: 0,
            }]),
            stability: Some(StabilityMetrics {
                std_raw_deg: 2.4,
                std_avg_deg: 0.8,
                group_size: 10,
                group_count: 30,
            }),
            per_zone_regression_mse_deg2: Some(vec![(Zone::Z0, 0.5), (Zone::Z180, 99.0)]),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        emit_report(&report, &path).unwrap();
        assert_eq!(read_report(&path).unwrap(), report);
    }

    #[test]
    fn plot_table_has_one_row_per_entry() {
        let rows: Vec<PlotRow> = (0..7)
            .map(|i| PlotRow {
                true_distance_m: 3.0,
                true_aoa_deg: i as f64,
                pdoa_deg: 2.0 * i as f64,
                raw_estimate_deg: i as f64 + 0.5,
                reference_deg: i as f64,
                corrected_deg: if i % 2 == 0 { Some(i as f64) } else { None },
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plot.csv");
        write_plot_table(&rows, &path).unwrap();
        let contents = std::fs::read_to_string(&path).unwrap();
        assert_eq!(contents.lines().count(), 8); // header + 7 rows
        assert!(contents.starts_with("true_distance_m,"));
    }
}
