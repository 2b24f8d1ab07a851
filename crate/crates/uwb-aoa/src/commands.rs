//! Implementations behind the command-line subcommands. Each command reads
//! a resolved [`RunConfig`], produces its artifacts under an output
//! directory, and echoes the configuration next to them. All outputs are
//! byte-deterministic for a fixed (config, seed).

use crate::angle::{angular_difference, Angle};
use crate::channel::{sweep_dataset, MeasurementRecord};
use crate::config::{ConfigError, ModelKind, RunConfig, TrainTask};
use crate::dataset::{
    apply_quality_filters, import_records, read_records, split, write_manifest, write_records,
    DatasetError, DatasetSource, ImportMapping,
};
use crate::features::{extract_all, fit_scalers, make_targets, FeatureError, Zone};
use crate::metrics::{
    angle_errors, emit_report, precision_recall, read_report, stability_experiment, AngleWindow,
    MetricsError, MetricsReport, PlotRow, WindowMetrics,
};
use crate::model::{
    classify_zone, fit_zone_polynomial, predict_angle_correction, save_model, train_gbt,
    train_mlp, CorrectionModel, GbtConfig, GbtEnsemble, GbtTask, Loss, MlpArchitecture,
    ModelError, OutputActivation, SavedModel, TrainConfig, ZonePolynomial,
};
use crate::propagation::{aoa_from_pdoa_clamped, expected_aoa_estimate, AntennaGeometry};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Command failure with its process exit code: 2 for usage/config trouble,
/// 3 for runtime/training trouble.
#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) => 2,
            CommandError::Runtime(_) => 3,
        }
    }
}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        CommandError::Config(e.to_string())
    }
}

impl From<DatasetError> for CommandError {
    fn from(e: DatasetError) -> Self {
        CommandError::Config(e.to_string())
    }
}

impl From<crate::channel::ChannelError> for CommandError {
    fn from(e: crate::channel::ChannelError) -> Self {
        CommandError::Config(e.to_string())
    }
}

impl From<FeatureError> for CommandError {
    fn from(e: FeatureError) -> Self {
        CommandError::Config(e.to_string())
    }
}

impl From<ModelError> for CommandError {
    fn from(e: ModelError) -> Self {
        CommandError::Runtime(e.to_string())
    }
}

impl From<MetricsError> for CommandError {
    fn from(e: MetricsError) -> Self {
        CommandError::Runtime(e.to_string())
    }
}

fn io_runtime(e: std::io::Error) -> CommandError {
    CommandError::Runtime(e.to_string())
}

fn prepare_out_dir(config: &RunConfig, out_dir: &Path) -> Result<(), CommandError> {
    std::fs::create_dir_all(out_dir).map_err(io_runtime)?;
    std::fs::write(out_dir.join("resolved_config.toml"), config.to_toml())
        .map_err(io_runtime)?;
    Ok(())
}

#[derive(Debug)]
pub struct SimulateSummary {
    pub synthesized: usize,
    pub kept: usize,
    pub dataset_path: PathBuf,
    pub manifest_path: PathBuf,
}

/// Synthesizes the configured sweep, filters it, and writes the canonical
/// dataset plus its manifest.
pub fn cmd_simulate(config: &RunConfig, out_dir: &Path) -> Result<SimulateSummary, CommandError> {
    config.validate()?;
    prepare_out_dir(config, out_dir)?;
    let geom = config.geometry.build()?;
    let records = sweep_dataset(
        &geom,
        &config.channel,
        &config.sweep.distances_m,
        config.sweep.angle_step_deg,
        config.sweep.records_per_pose,
        config.seed,
    )?;
    let synthesized = records.len();
    let (kept, mut manifest) =
        apply_quality_filters(records, &config.filters, DatasetSource::Synthetic);
    manifest.split_seed = config.split.seed;
    let dataset_path = out_dir.join("dataset.txt");
    let manifest_path = out_dir.join("manifest.json");
    write_records(&kept, &dataset_path)?;
    write_manifest(&manifest, &manifest_path)?;
    Ok(SimulateSummary {
        synthesized,
        kept: manifest.kept_count,
        dataset_path,
        manifest_path,
    })
}

#[derive(Debug)]
pub struct ImportSummary {
    pub imported: usize,
    pub kept: usize,
    pub dataset_path: PathBuf,
    pub manifest_path: PathBuf,
}

/// Imports an external CSV capture through a column-mapping file.
pub fn cmd_import(
    config: &RunConfig,
    source: &Path,
    mapping_path: &Path,
    out_dir: &Path,
) -> Result<ImportSummary, CommandError> {
    config.validate()?;
    prepare_out_dir(config, out_dir)?;
    let mapping = ImportMapping::from_file(mapping_path)?;
    let records = import_records(source, &mapping)?;
    let imported = records.len();
    let (kept, mut manifest) =
        apply_quality_filters(records, &config.filters, DatasetSource::Imported);
    manifest.split_seed = config.split.seed;
    let dataset_path = out_dir.join("dataset.txt");
    let manifest_path = out_dir.join("manifest.json");
    write_records(&kept, &dataset_path)?;
    write_manifest(&manifest, &manifest_path)?;
    Ok(ImportSummary {
        imported,
        kept: manifest.kept_count,
        dataset_path,
        manifest_path,
    })
}

#[derive(Debug)]
pub struct TrainSummary {
    pub model_path: PathBuf,
    pub model_bytes: u64,
    pub train_records: usize,
    pub skipped_records: usize,
    pub final_epoch_loss: Option<f64>,
}

/// Trains the configured model on the train side of the split and writes
/// the self-contained model container plus a training log.
pub fn cmd_train(
    config: &RunConfig,
    dataset_path: &Path,
    out_dir: &Path,
) -> Result<TrainSummary, CommandError> {
    config.validate()?;
    prepare_out_dir(config, out_dir)?;
    let geom = config.geometry.build()?;
    let records = read_records(dataset_path)?;
    let (kept, _) = apply_quality_filters(records, &config.filters, DatasetSource::Synthetic);
    let (train, _test) = split(kept, &config.split)?;

    let spec = fit_scalers(
        &train,
        config.features.include,
        config.features.window_before,
        config.features.window_after,
    )?;

    let mut final_epoch_loss = None;
    let mut skipped = 0usize;
    let used: usize;

    let model: CorrectionModel = match config.train.model {
        ModelKind::Poly => {
            // Raw-estimate domain: no feature vectors involved.
            let mut per_zone: BTreeMap<Zone, Vec<(f64, f64)>> = BTreeMap::new();
            for record in &train {
                let (raw, _) = aoa_from_pdoa_clamped(&geom, record.pdoa);
                let err = angular_difference(record.true_aoa, raw);
                per_zone
                    .entry(Zone::from_angle(record.true_aoa))
                    .or_default()
                    .push((raw.degrees(), err));
            }
            used = train.len();
            let mut polys: Vec<ZonePolynomial> = Vec::new();
            for (zone, samples) in per_zone {
                polys.push(fit_zone_polynomial(zone, &samples, config.train.poly_degree)?);
            }
            CorrectionModel::ZonePolynomials(polys)
        }
        ModelKind::Mlp | ModelKind::Gbt => {
            let extraction = extract_all(&train, &spec);
            skipped = extraction.skipped;
            used = extraction.features.len();
            if extraction.features.is_empty() {
                return Err(CommandError::Config(
                    "no training records survive feature extraction".to_string(),
                ));
            }
            let targets: Vec<crate::features::TargetVector> = extraction
                .kept
                .iter()
                .map(|&i| make_targets(&train[i], &geom, &spec))
                .collect();

            match (config.train.model, config.train.task) {
                (ModelKind::Mlp, task) => {
                    let (output, activation, loss, rows): (usize, _, _, Vec<Vec<f64>>) =
                        match task {
                            TrainTask::Regression => (
                                3,
                                OutputActivation::Identity,
                                Loss::SquaredError,
                                targets
                                    .iter()
                                    .map(|t| vec![t.sin_err, t.cos_err, t.true_distance_scaled])
                                    .collect(),
                            ),
                            TrainTask::ZoneClassify => (
                                4,
                                OutputActivation::Softmax,
                                Loss::CrossEntropy,
                                targets
                                    .iter()
                                    .map(|t| {
                                        let mut row = vec![0.0; 4];
                                        row[t.zone.index()] = 1.0;
                                        row
                                    })
                                    .collect(),
                            ),
                        };
                    let mut arch = MlpArchitecture::new(
                        spec.feature_len(),
                        config.train.hidden.clone(),
                        output,
                        activation,
                    );
                    arch.dropout = config.train.dropout.clone();
                    let cfg = TrainConfig {
                        seed: config.seed,
                        epochs: config.train.epochs,
                        batch_size: config.train.batch_size,
                        learning_rate: config.train.learning_rate,
                        momentum: config.train.momentum,
                        early_stop_patience: config.train.early_stop_patience,
                        loss,
                    };
                    let (model, log) = train_mlp(&arch, &extraction.features, &rows, &cfg)?;
                    final_epoch_loss = log.epoch_losses.last().copied();
                    let log_json =
                        serde_json::to_string_pretty(&log).expect("log serializes");
                    std::fs::write(out_dir.join("training_log.json"), log_json + "\n")
                        .map_err(io_runtime)?;
                    CorrectionModel::Mlp(model)
                }
                (ModelKind::Gbt, task) => {
                    let gbt_cfg = GbtConfig {
                        n_estimators: config.train.n_estimators,
                        max_depth: config.train.max_depth,
                        learning_rate: config.train.gbt_learning_rate,
                    };
                    let columns: Vec<Vec<f64>> = match task {
                        TrainTask::Regression => vec![
                            targets.iter().map(|t| t.sin_err).collect(),
                            targets.iter().map(|t| t.cos_err).collect(),
                            targets.iter().map(|t| t.true_distance_scaled).collect(),
                        ],
                        TrainTask::ZoneClassify => (0..4)
                            .map(|k| {
                                targets
                                    .iter()
                                    .map(|t| if t.zone.index() == k { 1.0 } else { 0.0 })
                                    .collect()
                            })
                            .collect(),
                    };
                    let mut models = Vec::with_capacity(columns.len());
                    for column in &columns {
                        models.push(train_gbt(&extraction.features, column, &gbt_cfg)?);
                    }
                    CorrectionModel::Gbt(GbtEnsemble {
                        models,
                        task: match task {
                            TrainTask::Regression => GbtTask::Regression,
                            TrainTask::ZoneClassify => GbtTask::Classification,
                        },
                    })
                }
                (ModelKind::Poly, _) => unreachable!("handled above"),
            }
        }
    };

    let saved = SavedModel {
        feature_spec: spec,
        geometry: geom,
        model,
    };
    let model_path = out_dir.join("model.uwbm");
    let model_bytes = save_model(&saved, &model_path)?;
    Ok(TrainSummary {
        model_path,
        model_bytes,
        train_records: used,
        skipped_records: skipped,
        final_epoch_loss,
    })
}

#[derive(Debug)]
pub struct EvaluateSummary {
    pub report_path: PathBuf,
    pub plot_path: PathBuf,
    pub report: MetricsReport,
}

/// Evaluates the naive estimator or a trained model on the test side of the
/// split, writing the metrics report and the plot table.
pub fn cmd_evaluate(
    config: &RunConfig,
    dataset_path: &Path,
    model_path: Option<&Path>,
    out_dir: &Path,
) -> Result<EvaluateSummary, CommandError> {
    config.validate()?;
    prepare_out_dir(config, out_dir)?;
    let records = read_records(dataset_path)?;
    let (kept, _) = apply_quality_filters(records, &config.filters, DatasetSource::Synthetic);
    let (_train, test) = split(kept, &config.split)?;

    let loaded = match model_path {
        Some(p) => Some(crate::model::load_model(p).map_err(|e| match e {
            ModelError::Io(io) => CommandError::Config(io.to_string()),
            other => CommandError::Runtime(other.to_string()),
        })?),
        None => None,
    };
    let geom = loaded
        .as_ref()
        .map(|(m, _)| m.geometry)
        .map(Ok)
        .unwrap_or_else(|| config.geometry.build().map_err(CommandError::from))?;

    let evaluation = evaluate_records(config, &geom, loaded.as_ref().map(|(m, _)| m), &test)?;

    let report_path = out_dir.join("report.json");
    let plot_path = out_dir.join("plot_table.csv");
    emit_report(&evaluation.report, &report_path)?;
    crate::metrics::write_plot_table(&evaluation.plot_rows, &plot_path)?;
    Ok(EvaluateSummary {
        report_path,
        plot_path,
        report: evaluation.report,
    })
}

pub(crate) struct Evaluation {
    pub report: MetricsReport,
    pub plot_rows: Vec<PlotRow>,
}

/// Shared evaluation core: naive estimates, optional model corrections,
/// window metrics, classification metrics, stability, per-zone regression.
pub(crate) fn evaluate_records(
    config: &RunConfig,
    geom: &AntennaGeometry,
    model: Option<&SavedModel>,
    test: &[MeasurementRecord],
) -> Result<Evaluation, CommandError> {
    let mut truths: Vec<Angle> = Vec::new();
    let mut estimates: Vec<Angle> = Vec::new();
    let mut plot_rows: Vec<PlotRow> = Vec::new();
    let mut true_zones: Vec<Zone> = Vec::new();
    let mut predicted_zones: Vec<Zone> = Vec::new();
    let mut skipped = 0usize;

    for record in test {
        let (raw, _) = aoa_from_pdoa_clamped(geom, record.pdoa);
        let reference = expected_aoa_estimate(geom, record.true_aoa);
        let mut corrected: Option<Angle> = None;

        if let Some(saved) = model {
            match &saved.model {
                CorrectionModel::ZonePolynomials(polys) => {
                    // Routed by true zone: this isolates regression quality
                    // from classifier quality.
                    let zone = Zone::from_angle(record.true_aoa);
                    if let Some(poly) = polys.iter().find(|p| p.zone == zone) {
                        let err = poly.evaluate_clamped(raw.degrees());
                        corrected = Some(raw.offset(err));
                    }
                }
                other => match crate::features::extract(record, &saved.feature_spec) {
                    Err(_) => {
                        skipped += 1;
                        continue;
                    }
                    Ok(features) => {
                        if matches!(other, CorrectionModel::Mlp(m) if m.output_activation == OutputActivation::Softmax)
                            || matches!(other, CorrectionModel::Gbt(e) if e.task == GbtTask::Classification)
                        {
                            let c = classify_zone(other, &features.values)?;
                            true_zones.push(Zone::from_angle(record.true_aoa));
                            predicted_zones.push(c.zone);
                        } else {
                            let (c, _flag) =
                                predict_angle_correction(other, &features.values, raw)?;
                            corrected = Some(c);
                        }
                    }
                },
            }
        }

        truths.push(record.true_aoa);
        estimates.push(corrected.unwrap_or(raw));
        plot_rows.push(PlotRow {
            true_distance_m: record.true_distance,
            true_aoa_deg: record.true_aoa.degrees(),
            pdoa_deg: record.pdoa.degrees(),
            raw_estimate_deg: raw.degrees(),
            reference_deg: reference.degrees(),
            corrected_deg: corrected.map(|c| c.degrees()),
        });
    }

    let mut windows: Vec<WindowMetrics> = Vec::new();
    for w in &config.evaluate.windows {
        let window = AngleWindow::new(
            Angle::new(w.center_deg).map_err(|e| CommandError::Config(e.to_string()))?,
            w.half_width_deg,
        );
        windows.push(angle_errors(&truths, &estimates, &window)?);
    }

    let classification = if true_zones.is_empty() {
        None
    } else {
        Some(precision_recall(&true_zones, &predicted_zones)?)
    };

    // Stability on the most-populated pose, when it is deep enough.
    let mut by_pose: BTreeMap<(u64, u64), Vec<Angle>> = BTreeMap::new();
    for (record, est) in test.iter().zip(&estimates) {
        by_pose
            .entry((
                record.true_distance.to_bits(),
                record.true_aoa.degrees().to_bits(),
            ))
            .or_default()
            .push(*est);
    }
    let group = config.evaluate.stability_group_size;
    let stability = by_pose
        .values()
        .max_by_key(|v| v.len())
        .filter(|v| v.len() >= 10 * group.max(1))
        .map(|v| stability_experiment(v, group))
        .transpose()?;

    // Per-zone corrected MSE for the polynomial model.
    let per_zone = match model.map(|m| &m.model) {
        Some(CorrectionModel::ZonePolynomials(_)) => {
            let mut out = Vec::new();
            for zone in Zone::ALL {
                let pairs: Vec<(Angle, Angle)> = truths
                    .iter()
                    .zip(&estimates)
                    .filter(|(t, _)| Zone::from_angle(**t) == zone)
                    .map(|(t, e)| (*t, *e))
                    .collect();
                let t: Vec<Angle> = pairs.iter().map(|p| p.0).collect();
                let e: Vec<Angle> = pairs.iter().map(|p| p.1).collect();
                let m = angle_errors(&t, &e, &AngleWindow::full_circle())?;
                out.push((zone, m.mse_deg2));
            }
            Some(out)
        }
        _ => None,
    };

    Ok(Evaluation {
        report: MetricsReport {
            total_records: truths.len(),
            skipped_records: skipped,
            windows,
            classification,
            stability,
            per_zone_regression_mse_deg2: per_zone,
        },
        plot_rows,
    })
}

/// Renders a saved report as a human-readable summary.
pub fn cmd_report(report_path: &Path) -> Result<String, CommandError> {
    let report = read_report(report_path).map_err(|e| match e {
        MetricsError::Io(io) => CommandError::Config(io.to_string()),
        other => CommandError::Config(other.to_string()),
    })?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "records evaluated: {} (skipped: {})",
        report.total_records, report.skipped_records
    );
    let _ = writeln!(
        out,
        "{:>10} {:>10} {:>12} {:>10} {:>10} {:>12} {:>8}",
        "center", "half-width", "mse[deg^2]", "rmse[deg]", "mae[deg]", "median[deg]", "count"
    );
    for w in &report.windows {
        let _ = writeln!(
            out,
            "{:>10.2} {:>10.2} {:>12.4} {:>10.4} {:>10.4} {:>12.4} {:>8}",
            w.window.center.degrees(),
            w.window.half_width,
            w.mse_deg2,
            w.rmse_deg,
            w.mae_deg,
            w.median_ae_deg,
            w.count
        );
    }
    if let Some(classes) = &report.classification {
        let _ = writeln!(out, "zone classification:");
        for c in classes {
            let fmt = |v: Option<f64>| {
                v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "absent".to_string())
            };
            let _ = writeln!(
                out,
                "  {:>4}: precision {} recall {} support {}",
                c.zone.to_string(),
                fmt(c.precision),
                fmt(c.recall),
                c.support
            );
        }
    }
    if let Some(s) = &report.stability {
        let _ = writeln!(
            out,
            "stability: raw std {:.4}°, {}-sample-average std {:.4}° over {} groups",
            s.std_raw_deg, s.group_size, s.std_avg_deg, s.group_count
        );
    }
    if let Some(zones) = &report.per_zone_regression_mse_deg2 {
        let _ = writeln!(out, "per-zone corrected MSE [deg^2]:");
        for (zone, mse) in zones {
            let _ = writeln!(out, "  {zone}: {mse:.4}");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::WindowConfig;

    fn tiny_config() -> RunConfig {
        let mut config = RunConfig::default();
        config.sweep.distances_m = vec![2.0];
        config.sweep.angle_step_deg = 30.0;
        config.sweep.records_per_pose = 4;
        config.split.group_by_pose = false;
        config.train.hidden = vec![8];
        config.train.epochs = 3;
        config.train.n_estimators = 3;
        config.train.max_depth = 2;
        config.features.include = crate::features::FeatureFlags::scalars_only();
        config
    }

    #[test]
    fn simulate_train_evaluate_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config();
        let sim = cmd_simulate(&config, dir.path()).unwrap();
        assert_eq!(sim.synthesized, 12 * 4);
        assert!(sim.dataset_path.exists());
        assert!(dir.path().join("resolved_config.toml").exists());

        let train_dir = dir.path().join("train");
        let summary = cmd_train(&config, &sim.dataset_path, &train_dir).unwrap();
        assert!(summary.model_path.exists());
        assert!(summary.model_bytes > 0);
        assert!(summary.final_epoch_loss.is_some());

        let eval_dir = dir.path().join("eval");
        let eval = cmd_evaluate(
            &config,
            &sim.dataset_path,
            Some(&summary.model_path),
            &eval_dir,
        )
        .unwrap();
        assert!(eval.report_path.exists());
        assert!(eval.plot_path.exists());
        assert!(eval.report.total_records > 0);

        let text = cmd_report(&eval.report_path).unwrap();
        assert!(text.contains("records evaluated"));
    }

    #[test]
    fn evaluate_naive_zero_noise_center_window_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = tiny_config();
        config.channel = crate::channel::ChannelProfile::default();
        config.geometry.effective_spacing_delta_m = 0.0;
        config.evaluate.windows = vec![WindowConfig {
            center_deg: 0.0,
            half_width_deg: 45.0,
        }];
        let sim = cmd_simulate(&config, dir.path()).unwrap();
        let eval = cmd_evaluate(&config, &sim.dataset_path, None, &dir.path().join("e")).unwrap();
        let w = &eval.report.windows[0];
        assert!(w.count > 0);
        assert!(w.mse_deg2 < 1e-12, "zero-noise naive MSE {}", w.mse_deg2);
    }

    #[test]
    fn missing_dataset_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config();
        let err = cmd_train(&config, Path::new("/nonexistent/data.txt"), dir.path())
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn gbt_training_path_works() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = tiny_config();
        config.train.model = ModelKind::Gbt;
        let sim = cmd_simulate(&config, dir.path()).unwrap();
        let summary = cmd_train(&config, &sim.dataset_path, &dir.path().join("t")).unwrap();
        let (loaded, _) = crate::model::load_model(&summary.model_path).unwrap();
        match loaded.model {
            CorrectionModel::Gbt(e) => {
                assert_eq!(e.models.len(), 3);
                assert_eq!(e.models[0].n_estimators(), 3);
            }
            other => panic!("expected GBT, got {other:?}"),
        }
    }

    #[test]
    fn zone_classifier_training_path_works() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = tiny_config();
        config.train.task = TrainTask::ZoneClassify;
        config.train.epochs = 10;
        let sim = cmd_simulate(&config, dir.path()).unwrap();
        let summary = cmd_train(&config, &sim.dataset_path, &dir.path().join("t")).unwrap();
        let eval = cmd_evaluate(
            &config,
            &sim.dataset_path,
            Some(&summary.model_path),
            &dir.path().join("e"),
        )
        .unwrap();
        assert!(eval.report.classification.is_some());
    }

    #[test]
    fn poly_training_path_works() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = tiny_config();
        config.train.model = ModelKind::Poly;
        config.train.poly_degree = 2;
        // More angles per zone so every zone has enough distinct abscissae.
        config.sweep.angle_step_deg = 10.0;
        let sim = cmd_simulate(&config, dir.path()).unwrap();
        let summary = cmd_train(&config, &sim.dataset_path, &dir.path().join("t")).unwrap();
        let eval = cmd_evaluate(
            &config,
            &sim.dataset_path,
            Some(&summary.model_path),
            &dir.path().join("e"),
        )
        .unwrap();
        let zones = eval.report.per_zone_regression_mse_deg2.unwrap();
        assert_eq!(zones.len(), 4);
    }

    #[test]
    fn commands_are_byte_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config();
        let a = cmd_simulate(&config, &dir.path().join("a")).unwrap();
        let b = cmd_simulate(&config, &dir.path().join("b")).unwrap();
        let bytes_a = std::fs::read(&a.dataset_path).unwrap();
        let bytes_b = std::fs::read(&b.dataset_path).unwrap();
        assert_eq!(bytes_a, bytes_b);
        assert_eq!(
            std::fs::read(a.manifest_path).unwrap(),
            std::fs::read(b.manifest_path).unwrap()
        );
    }
}
