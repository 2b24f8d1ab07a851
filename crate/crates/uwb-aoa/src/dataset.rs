//! Dataset serialization, quality filtering, train/test splitting, and the
//! import adapter for externally captured logs.
//!
//! Canonical on-disk format: a version line, a tab-separated header naming
//! every column, then one record per line. Scalars are written with Rust's
//! shortest round-trip float formatting; the two impulse responses travel as
//! base64-encoded little-endian f64 pairs (re, im interleaved), so a
//! write/read cycle is bit-exact.

use crate::angle::Angle;
use crate::channel::{Cir, ChannelError, MeasurementRecord, QualityFlags, CIR_LEN};
use crate::features::Zone;
use crate::twr::TwrExchange;
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

/// Device time unit used to express raw TWR register values, seconds
/// (1 / (128 · 499.2 MHz) ≈ 15.65 ps).
pub const DEVICE_TIME_UNIT: f64 = 1.0 / 63_897_600_000.0;

const FORMAT_TAG: &str = "#uwb-aoa-dataset v1";

const COLUMNS: [&str; 16] = [
    "pdoa_deg",
    "tdoa_s",
    "round_trip_s",
    "reply_s",
    "responder_drift",
    "antenna_delay_s",
    "distance_est_m",
    "first_path_power_ratio",
    "true_aoa_deg",
    "true_distance_m",
    "flags",
    "sample_period_s",
    "cir_a_first_path",
    "cir_b_first_path",
    "cir_a_b64",
    "cir_b_b64",
];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: bad value for '{field}': {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },
    #[error("missing required column '{column}'")]
    Schema { column: String },
    #[error("unknown column '{column}' (strict mode)")]
    UnknownColumn { column: String },
    #[error("unsupported dataset format: '{found}'")]
    Version { found: String },
    #[error("train fraction {0} outside (0, 1)")]
    InvalidSplitFraction(f64),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("import mapping is missing required field '{field}'")]
    MappingField { field: String },
    #[error("cannot parse import mapping: {0}")]
    MappingParse(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Where a dataset came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Synthetic,
    Imported,
}

/// Bookkeeping for one filtered dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub record_count: usize,
    pub kept_count: usize,
    /// Dropped records per filter rule; kept + dropped = record_count.
    pub filter_counts: BTreeMap<String, usize>,
    pub split_seed: u64,
    pub source: DatasetSource,
}

/// Quality-filter thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSpec {
    /// Records with |TDoA| above this are dropped, seconds.
    pub tdoa_max: f64,
    /// Records whose round-trip time, in raw device units, falls below this
    /// are dropped.
    pub twr_min_raw: f64,
    /// Seconds per raw device unit.
    pub twr_tick: f64,
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec {
            tdoa_max: 1e-9,
            twr_min_raw: 1000.0,
            twr_tick: DEVICE_TIME_UNIT,
        }
    }
}

/// Drops records violating the TDoA or raw-TWR rule, recording per-rule
/// counts. A record violating both is counted once, under the TDoA rule.
pub fn apply_quality_filters(
    records: Vec<MeasurementRecord>,
    spec: &FilterSpec,
    source: DatasetSource,
) -> (Vec<MeasurementRecord>, DatasetManifest) {
    let record_count = records.len();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut kept = Vec::with_capacity(record_count);
    for record in records {
        if record.tdoa.abs() > spec.tdoa_max {
            *counts.entry("tdoa_max".to_string()).or_insert(0) += 1;
        } else if record.twr.round_trip_time / spec.twr_tick < spec.twr_min_raw {
            *counts.entry("twr_min".to_string()).or_insert(0) += 1;
        } else {
            kept.push(record);
        }
    }
    let manifest = DatasetManifest {
        record_count,
        kept_count: kept.len(),
        filter_counts: counts,
        split_seed: 0,
        source,
    };
    (kept, manifest)
}

/// Stratification key for train/test splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StratifyBy {
    None,
    AngleZone,
    Distance,
}

/// Train/test split parameters.
///
/// `group_by_pose` keeps all repetitions of one (distance, angle) pose on
/// the same side of the split, preventing leakage between nearly identical
/// records; it is the default. Exact `round(fraction · n)` sizes are only
/// guaranteed with grouping off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub stratify_by: StratifyBy,
    pub group_by_pose: bool,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.6,
            stratify_by: StratifyBy::None,
            group_by_pose: true,
            seed: 0,
        }
    }
}

/// Deterministic partition of `records` into (train, test).
pub fn split(
    records: Vec<MeasurementRecord>,
    spec: &SplitSpec,
) -> Result<(Vec<MeasurementRecord>, Vec<MeasurementRecord>), DatasetError> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(DatasetError::InvalidSplitFraction(spec.train_fraction));
    }
    if records.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }

    // Strata are visited in sorted key order so the outcome does not depend
    // on record order within the input.
    let mut strata: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (idx, record) in records.iter().enumerate() {
        let key = match spec.stratify_by {
            StratifyBy::None => 0,
            StratifyBy::AngleZone => Zone::from_angle(record.true_aoa) as u64,
            StratifyBy::Distance => record.true_distance.to_bits(),
        };
        strata.entry(key).or_default().push(idx);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut in_train = vec![false; records.len()];
    for indices in strata.values() {
        let target = (spec.train_fraction * indices.len() as f64).round() as usize;
        if spec.group_by_pose {
            let mut groups: BTreeMap<(u64, u64), Vec<usize>> = BTreeMap::new();
            for &idx in indices {
                let r = &records[idx];
                let key = (r.true_distance.to_bits(), r.true_aoa.degrees().to_bits());
                groups.entry(key).or_default().push(idx);
            }
            let mut group_list: Vec<Vec<usize>> = groups.into_values().collect();
            group_list.shuffle(&mut rng);
            let mut assigned = 0usize;
            for group in group_list {
                if assigned < target {
                    assigned += group.len();
                    for idx in group {
                        in_train[idx] = true;
                    }
                }
            }
        } else {
            let mut shuffled = indices.clone();
            shuffled.shuffle(&mut rng);
            for &idx in shuffled.iter().take(target) {
                in_train[idx] = true;
            }
        }
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (idx, record) in records.into_iter().enumerate() {
        if in_train[idx] {
            train.push(record);
        } else {
            test.push(record);
        }
    }
    Ok((train, test))
}

// ───────────────────────── canonical serialization ─────────────────────────

fn encode_cir_samples(cir: &Cir) -> String {
    let mut bytes = Vec::with_capacity(CIR_LEN * 16);
    for s in &cir.samples {
        bytes.extend_from_slice(&s.re.to_le_bytes());
        bytes.extend_from_slice(&s.im.to_le_bytes());
    }
    BASE64.encode(bytes)
}

fn decode_cir_samples(
    encoded: &str,
    line: usize,
    field: &str,
) -> Result<Vec<Complex64>, DatasetError> {
    let bytes = BASE64.decode(encoded).map_err(|e| DatasetError::Parse {
        line,
        field: field.to_string(),
        message: e.to_string(),
    })?;
    if bytes.len() != CIR_LEN * 16 {
        return Err(DatasetError::Parse {
            line,
            field: field.to_string(),
            message: format!("expected {} bytes, got {}", CIR_LEN * 16, bytes.len()),
        });
    }
    let mut samples = Vec::with_capacity(CIR_LEN);
    for chunk in bytes.chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        samples.push(Complex64::new(re, im));
    }
    Ok(samples)
}

/// Writes records in the canonical format.
pub fn write_records(records: &[MeasurementRecord], path: &Path) -> Result<(), DatasetError> {
    let file = std::fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{FORMAT_TAG}")?;
    writeln!(out, "{}", COLUMNS.join("\t"))?;
    let mut row = String::new();
    for r in records {
        row.clear();
        write!(
            row,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.pdoa.degrees(),
            r.tdoa,
            r.twr.round_trip_time,
            r.twr.reply_time,
            r.twr.responder_drift,
            r.twr.antenna_delay,
            r.distance_estimate,
            r.first_path_power_ratio,
            r.true_aoa.degrees(),
            r.true_distance,
            r.valid_flags.bits(),
            r.cir_a.sample_period,
            r.cir_a.first_path_index,
            r.cir_b.first_path_index,
            encode_cir_samples(&r.cir_a),
            encode_cir_samples(&r.cir_b),
        )
        .expect("string write");
        writeln!(out, "{row}")?;
    }
    out.flush()?;
    Ok(())
}

fn parse_value<T: FromStr>(raw: &str, line: usize, field: &str) -> Result<T, DatasetError>
where
    T::Err: std::fmt::Display,
{
    raw.parse().map_err(|e: T::Err| DatasetError::Parse {
        line,
        field: field.to_string(),
        message: e.to_string(),
    })
}

struct HeaderIndex {
    positions: BTreeMap<String, usize>,
    width: usize,
}

impl HeaderIndex {
    fn parse(header: &str, strict: bool, required: &[&str]) -> Result<Self, DatasetError> {
        let names: Vec<&str> = header.split('\t').collect();
        let mut positions = BTreeMap::new();
        for (i, name) in names.iter().enumerate() {
            if strict && !COLUMNS.contains(name) {
                return Err(DatasetError::UnknownColumn {
                    column: name.to_string(),
                });
            }
            positions.insert(name.to_string(), i);
        }
        for col in required {
            if !positions.contains_key(*col) {
                return Err(DatasetError::Schema {
                    column: col.to_string(),
                });
            }
        }
        Ok(HeaderIndex {
            positions,
            width: names.len(),
        })
    }

    fn get<'a>(&self, fields: &[&'a str], column: &str) -> &'a str {
        fields[self.positions[column]]
    }
}

/// Reads a canonical dataset, ignoring unknown columns.
pub fn read_records(path: &Path) -> Result<Vec<MeasurementRecord>, DatasetError> {
    read_records_opts(path, false)
}

/// Reads a canonical dataset; in strict mode unknown columns are an error.
pub fn read_records_opts(
    path: &Path,
    strict: bool,
) -> Result<Vec<MeasurementRecord>, DatasetError> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let tag = lines.next().transpose()?.unwrap_or_default();
    if tag != FORMAT_TAG {
        return Err(DatasetError::Version { found: tag });
    }
    let header = lines.next().transpose()?.ok_or(DatasetError::Version {
        found: "missing header".to_string(),
    })?;
    let index = HeaderIndex::parse(&header, strict, &COLUMNS)?;

    let mut records = Vec::new();
    for (offset, line) in lines.enumerate() {
        let line_no = offset + 3; // 1-based, after tag and header
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != index.width {
            return Err(DatasetError::Parse {
                line: line_no,
                field: "<row>".to_string(),
                message: format!("expected {} fields, got {}", index.width, fields.len()),
            });
        }
        let get = |col: &str| index.get(&fields, col);
        let pdoa_deg: f64 = parse_value(get("pdoa_deg"), line_no, "pdoa_deg")?;
        let pdoa = Angle::new(pdoa_deg).map_err(|e| DatasetError::Parse {
            line: line_no,
            field: "pdoa_deg".to_string(),
            message: e.to_string(),
        })?;
        let true_aoa_deg: f64 = parse_value(get("true_aoa_deg"), line_no, "true_aoa_deg")?;
        let true_aoa = Angle::new(true_aoa_deg).map_err(|e| DatasetError::Parse {
            line: line_no,
            field: "true_aoa_deg".to_string(),
            message: e.to_string(),
        })?;
        let sample_period: f64 = parse_value(get("sample_period_s"), line_no, "sample_period_s")?;
        let cir_a = Cir::new(
            decode_cir_samples(get("cir_a_b64"), line_no, "cir_a_b64")?,
            sample_period,
            parse_value(get("cir_a_first_path"), line_no, "cir_a_first_path")?,
        )?;
        let cir_b = Cir::new(
            decode_cir_samples(get("cir_b_b64"), line_no, "cir_b_b64")?,
            sample_period,
            parse_value(get("cir_b_first_path"), line_no, "cir_b_first_path")?,
        )?;
        records.push(MeasurementRecord {
            pdoa,
            tdoa: parse_value(get("tdoa_s"), line_no, "tdoa_s")?,
            cir_a,
            cir_b,
            twr: TwrExchange {
                round_trip_time: parse_value(get("round_trip_s"), line_no, "round_trip_s")?,
                reply_time: parse_value(get("reply_s"), line_no, "reply_s")?,
                responder_drift: parse_value(get("responder_drift"), line_no, "responder_drift")?,
                antenna_delay: parse_value(get("antenna_delay_s"), line_no, "antenna_delay_s")?,
            },
            distance_estimate: parse_value(get("distance_est_m"), line_no, "distance_est_m")?,
            first_path_power_ratio: parse_value(
                get("first_path_power_ratio"),
                line_no,
                "first_path_power_ratio",
            )?,
            true_aoa,
            true_distance: parse_value(get("true_distance_m"), line_no, "true_distance_m")?,
            valid_flags: QualityFlags::from_bits(parse_value(get("flags"), line_no, "flags")?),
        });
    }
    Ok(records)
}

/// Writes a manifest next to its dataset as pretty JSON.
pub fn write_manifest(manifest: &DatasetManifest, path: &Path) -> Result<(), DatasetError> {
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    std::fs::write(path, json + "\n")?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<DatasetManifest, DatasetError> {
    let raw = std::fs::read_to_string(path)?;
    serde_json::from_str(&raw).map_err(|e| DatasetError::MappingParse(e.to_string()))
}

// ───────────────────────────── import adapter ─────────────────────────────

/// Column mapping for importing an external CSV capture.
///
/// `columns` maps canonical field names to source column names; `scale`
/// holds optional per-field multiplicative unit conversions; `options`
/// supplies constants the source does not carry.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ImportMapping {
    pub columns: BTreeMap<String, String>,
    #[serde(default)]
    pub scale: BTreeMap<String, f64>,
    #[serde(default)]
    pub options: ImportOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImportOptions {
    pub sample_period_s: f64,
    pub responder_drift: f64,
    pub antenna_delay_s: f64,
}

impl Default for ImportOptions {
    fn default() -> Self {
        ImportOptions {
            sample_period_s: 1e-9,
            responder_drift: 0.0,
            antenna_delay_s: 0.0,
        }
    }
}

const REQUIRED_IMPORT_FIELDS: [&str; 7] = [
    "pdoa",
    "tdoa",
    "round_trip",
    "reply",
    "distance_estimate",
    "true_aoa",
    "true_distance",
];

impl ImportMapping {
    pub fn from_toml_str(raw: &str) -> Result<Self, DatasetError> {
        let mapping: ImportMapping =
            toml::from_str(raw).map_err(|e| DatasetError::MappingParse(e.to_string()))?;
        for field in REQUIRED_IMPORT_FIELDS {
            if !mapping.columns.contains_key(field) {
                return Err(DatasetError::MappingField {
                    field: field.to_string(),
                });
            }
        }
        Ok(mapping)
    }

    pub fn from_file(path: &Path) -> Result<Self, DatasetError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    fn scale_for(&self, field: &str) -> f64 {
        self.scale.get(field).copied().unwrap_or(1.0)
    }
}

/// Imports an external CSV capture using a column mapping.
///
/// CIR columns are optional; records without them get zeroed impulse
/// responses flagged `CIR_WINDOW_SHORT` so the feature stage skips them.
pub fn import_records(
    path: &Path,
    mapping: &ImportMapping,
) -> Result<Vec<MeasurementRecord>, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| DatasetError::MappingParse(e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| DatasetError::MappingParse(e.to_string()))?
        .clone();
    let col_index = |canonical: &str| -> Result<Option<usize>, DatasetError> {
        match mapping.columns.get(canonical) {
            None => Ok(None),
            Some(source) => headers
                .iter()
                .position(|h| h == source)
                .map(Some)
                .ok_or_else(|| DatasetError::Schema {
                    column: canonical.to_string(),
                }),
        }
    };

    let mut required = BTreeMap::new();
    for field in REQUIRED_IMPORT_FIELDS {
        let idx = col_index(field)?.ok_or_else(|| DatasetError::MappingField {
            field: field.to_string(),
        })?;
        required.insert(field, idx);
    }
    let opt_power = col_index("first_path_power_ratio")?;
    let opt_cir_a = col_index("cir_a")?;
    let opt_cir_b = col_index("cir_b")?;
    let opt_fp_a = col_index("cir_a_first_path")?;
    let opt_fp_b = col_index("cir_b_first_path")?;

    let mut records = Vec::new();
    for (row_idx, row) in reader.records().enumerate() {
        let line_no = row_idx + 2; // 1-based with header
        let row = row.map_err(|e| DatasetError::Parse {
            line: line_no,
            field: "<row>".to_string(),
            message: e.to_string(),
        })?;
        let scalar = |field: &str| -> Result<f64, DatasetError> {
            let idx = required[field];
            let raw = row.get(idx).ok_or_else(|| DatasetError::Parse {
                line: line_no,
                field: field.to_string(),
                message: "missing cell".to_string(),
            })?;
            let value: f64 = parse_value(raw, line_no, field)?;
            Ok(value * mapping.scale_for(field))
        };

        let pdoa = Angle::new(scalar("pdoa")?).map_err(|e| DatasetError::Parse {
            line: line_no,
            field: "pdoa".to_string(),
            message: e.to_string(),
        })?;
        let true_aoa = Angle::new(scalar("true_aoa")?).map_err(|e| DatasetError::Parse {
            line: line_no,
            field: "true_aoa".to_string(),
            message: e.to_string(),
        })?;

        let period = mapping.options.sample_period_s;
        let parse_cir = |col: Option<usize>,
                         fp_col: Option<usize>,
                         field: &str|
         -> Result<Option<Cir>, DatasetError> {
            let Some(idx) = col else { return Ok(None) };
            let raw = row.get(idx).ok_or_else(|| DatasetError::Parse {
                line: line_no,
                field: field.to_string(),
                message: "missing cell".to_string(),
            })?;
            let samples = decode_cir_samples(raw, line_no, field)?;
            let fp = match fp_col {
                Some(fi) => parse_value(row.get(fi).unwrap_or(""), line_no, field)?,
                None => 0,
            };
            Ok(Some(Cir::new(samples, period, fp)?))
        };
        let cir_a = parse_cir(opt_cir_a, opt_fp_a, "cir_a")?;
        let cir_b = parse_cir(opt_cir_b, opt_fp_b, "cir_b")?;
        let have_cirs = cir_a.is_some() && cir_b.is_some();
        let zero_cir = || {
            Cir::new(vec![Complex64::new(0.0, 0.0); CIR_LEN], period, 0).expect("valid zero CIR")
        };
        let cir_a = cir_a.unwrap_or_else(zero_cir);
        let cir_b = cir_b.unwrap_or_else(zero_cir);

        let distance_estimate = scalar("distance_estimate")?;
        let mut flags = QualityFlags::default();
        if distance_estimate < 0.0 {
            flags.insert(QualityFlags::NEGATIVE_DISTANCE);
        }
        if !have_cirs || !cir_a.supports_window(5, 100) {
            flags.insert(QualityFlags::CIR_WINDOW_SHORT);
        }

        let power = match opt_power {
            Some(idx) => {
                let raw = row.get(idx).unwrap_or("");
                let v: f64 = parse_value(raw, line_no, "first_path_power_ratio")?;
                v * mapping.scale_for("first_path_power_ratio")
            }
            None => 1.0,
        };

        records.push(MeasurementRecord {
            pdoa,
            tdoa: scalar("tdoa")?,
            cir_a,
            cir_b,
            twr: TwrExchange {
                round_trip_time: scalar("round_trip")?,
                reply_time: scalar("reply")?,
                responder_drift: mapping.options.responder_drift,
                antenna_delay: mapping.options.antenna_delay_s,
            },
            distance_estimate,
            first_path_power_ratio: power,
            true_aoa,
            true_distance: scalar("true_distance")?,
            valid_flags: flags,
        });
    }
    Ok(records)
}
