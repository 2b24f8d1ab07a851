//! Versioned binary model container.
//!
//! Layout: 8-byte magic, u32 version, length-prefixed JSON header holding
//! the feature spec and antenna geometry, a model-kind tag, then the dense
//! model payload (little-endian throughout).

use super::gbt::{GbtModel, RegressionTree, TreeNode};
use super::mlp::{Layer, MlpModel, OutputActivation};
use super::poly::ZonePolynomial;
use super::{CorrectionModel, GbtEnsemble, GbtTask, ModelError, SavedModel};
use crate::features::{FeatureSpec, Zone};
use crate::propagation::AntennaGeometry;
use serde::{Deserialize, Serialize};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"UWBAOAMD";
const VERSION: u32 = 1;

const KIND_MLP: u8 = 1;
const KIND_GBT: u8 = 2;
const KIND_POLY: u8 = 3;

#[derive(Serialize, Deserialize)]
struct Header {
    feature_spec: FeatureSpec,
    geometry: AntennaGeometry,
}

pub(super) fn save(saved: &SavedModel, path: &Path) -> Result<u64, ModelError> {
    let file = std::fs::File::create(path)?;
    let mut w = CountingWriter {
        inner: BufWriter::new(file),
        written: 0,
    };
    w.bytes(MAGIC)?;
    w.u32(VERSION)?;
    let header = serde_json::to_vec(&Header {
        feature_spec: saved.feature_spec.clone(),
        geometry: saved.geometry,
    })
    .expect("header serializes");
    w.u64(header.len() as u64)?;
    w.bytes(&header)?;

    match &saved.model {
        CorrectionModel::Mlp(m) => {
            w.u8(KIND_MLP)?;
            write_mlp(&mut w, m)?;
        }
        CorrectionModel::Gbt(e) => {
            w.u8(KIND_GBT)?;
            write_gbt(&mut w, e)?;
        }
        CorrectionModel::ZonePolynomials(polys) => {
            w.u8(KIND_POLY)?;
            w.u32(polys.len() as u32)?;
            for p in polys {
                w.u8(p.zone.index() as u8)?;
                w.u32(p.coefficients.len() as u32)?;
                for c in &p.coefficients {
                    w.f64(*c)?;
                }
                w.f64(p.valid_interval.0)?;
                w.f64(p.valid_interval.1)?;
            }
        }
    }
    w.inner.flush()?;
    Ok(w.written)
}

pub(super) fn load(path: &Path) -> Result<(SavedModel, u64), ModelError> {
    let size = std::fs::metadata(path)?.len();
    let file = std::fs::File::open(path)?;
    let mut r = Reader {
        inner: BufReader::new(file),
    };
    let mut magic = [0u8; 8];
    r.bytes(&mut magic)?;
    if &magic != MAGIC {
        return Err(ModelError::Corrupt("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(ModelError::VersionMismatch { found: version });
    }
    let header_len = r.u64()? as usize;
    if header_len > 64 * 1024 * 1024 {
        return Err(ModelError::Corrupt("implausible header length".into()));
    }
    let mut header_bytes = vec![0u8; header_len];
    r.bytes(&mut header_bytes)?;
    let header: Header = serde_json::from_slice(&header_bytes)
        .map_err(|e| ModelError::Corrupt(format!("header: {e}")))?;

    let model = match r.u8()? {
        KIND_MLP => CorrectionModel::Mlp(read_mlp(&mut r)?),
        KIND_GBT => CorrectionModel::Gbt(read_gbt(&mut r)?),
        KIND_POLY => {
            let count = r.u32()? as usize;
            let mut polys = Vec::with_capacity(count.min(1024));
            for _ in 0..count {
                let zone = Zone::from_index(r.u8()? as usize)
                    .ok_or_else(|| ModelError::Corrupt("bad zone index".into()))?;
                let n = r.u32()? as usize;
                if n > 64 {
                    return Err(ModelError::Corrupt("implausible coefficient count".into()));
                }
                let mut coefficients = Vec::with_capacity(n);
                for _ in 0..n {
                    coefficients.push(r.f64()?);
                }
                let lo = r.f64()?;
                let hi = r.f64()?;
                polys.push(ZonePolynomial {
                    zone,
                    coefficients,
                    valid_interval: (lo, hi),
                });
            }
            CorrectionModel::ZonePolynomials(polys)
        }
        other => return Err(ModelError::Corrupt(format!("unknown model kind {other}"))),
    };
    Ok((
        SavedModel {
            feature_spec: header.feature_spec,
            geometry: header.geometry,
            model,
        },
        size,
    ))
}

fn write_mlp(w: &mut CountingWriter, m: &MlpModel) -> Result<(), ModelError> {
    w.u8(match m.output_activation {
        OutputActivation::Identity => 0,
        OutputActivation::Softmax => 1,
    })?;
    w.u32(m.dropout.len() as u32)?;
    for d in &m.dropout {
        w.f64(*d)?;
    }
    w.u32(m.layers.len() as u32)?;
    for layer in &m.layers {
        w.u32(layer.rows as u32)?;
        w.u32(layer.cols as u32)?;
        for v in &layer.weights {
            w.f64(*v)?;
        }
        for v in &layer.biases {
            w.f64(*v)?;
        }
    }
    Ok(())
}

fn read_mlp(r: &mut Reader) -> Result<MlpModel, ModelError> {
    let output_activation = match r.u8()? {
        0 => OutputActivation::Identity,
        1 => OutputActivation::Softmax,
        other => {
            return Err(ModelError::Corrupt(format!(
                "unknown output activation {other}"
            )))
        }
    };
    let n_dropout = r.u32()? as usize;
    if n_dropout > 8 {
        return Err(ModelError::Corrupt("implausible dropout count".into()));
    }
    let mut dropout = Vec::with_capacity(n_dropout);
    for _ in 0..n_dropout {
        dropout.push(r.f64()?);
    }
    let n_layers = r.u32()? as usize;
    if n_layers == 0 || n_layers > 8 {
        return Err(ModelError::Corrupt("implausible layer count".into()));
    }
    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let rows = r.u32()? as usize;
        let cols = r.u32()? as usize;
        if rows == 0 || cols == 0 || rows.saturating_mul(cols) > 64 * 1024 * 1024 {
            return Err(ModelError::Corrupt("implausible layer shape".into()));
        }
        let mut weights = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            weights.push(r.f64()?);
        }
        let mut biases = Vec::with_capacity(rows);
        for _ in 0..rows {
            biases.push(r.f64()?);
        }
        layers.push(Layer {
            rows,
            cols,
            weights,
            biases,
        });
    }
    Ok(MlpModel {
        layers,
        output_activation,
        dropout,
    })
}

fn write_gbt(w: &mut CountingWriter, e: &GbtEnsemble) -> Result<(), ModelError> {
    w.u8(match e.task {
        GbtTask::Regression => 0,
        GbtTask::Classification => 1,
    })?;
    w.u32(e.models.len() as u32)?;
    for m in &e.models {
        w.f64(m.base_prediction)?;
        w.f64(m.learning_rate)?;
        w.u32(m.max_depth as u32)?;
        w.u32(m.trees.len() as u32)?;
        for tree in &m.trees {
            w.u32(tree.nodes.len() as u32)?;
            for node in &tree.nodes {
                match node {
                    TreeNode::Leaf { value } => {
                        w.u8(0)?;
                        w.f64(*value)?;
                    }
                    TreeNode::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        w.u8(1)?;
                        w.u32(*feature)?;
                        w.f64(*threshold)?;
                        w.u32(*left)?;
                        w.u32(*right)?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn read_gbt(r: &mut Reader) -> Result<GbtEnsemble, ModelError> {
    let task = match r.u8()? {
        0 => GbtTask::Regression,
        1 => GbtTask::Classification,
        other => return Err(ModelError::Corrupt(format!("unknown GBT task {other}"))),
    };
    let n_models = r.u32()? as usize;
    if n_models == 0 || n_models > 64 {
        return Err(ModelError::Corrupt("implausible model count".into()));
    }
    let mut models = Vec::with_capacity(n_models);
    for _ in 0..n_models {
        let base_prediction = r.f64()?;
        let learning_rate = r.f64()?;
        let max_depth = r.u32()? as usize;
        let n_trees = r.u32()? as usize;
        if n_trees > 1 << 20 {
            return Err(ModelError::Corrupt("implausible tree count".into()));
        }
        let mut trees = Vec::with_capacity(n_trees);
        for _ in 0..n_trees {
            let n_nodes = r.u32()? as usize;
            if n_nodes == 0 || n_nodes > 1 << 24 {
                return Err(ModelError::Corrupt("implausible node count".into()));
            }
            let mut nodes = Vec::with_capacity(n_nodes);
            for _ in 0..n_nodes {
                match r.u8()? {
                    0 => nodes.push(TreeNode::Leaf { value: r.f64()? }),
                    1 => {
                        let feature = r.u32()?;
                        let threshold = r.f64()?;
                        let left = r.u32()?;
                        let right = r.u32()?;
                        if left as usize >= n_nodes || right as usize >= n_nodes {
                            return Err(ModelError::Corrupt("child index out of range".into()));
                        }
                        nodes.push(TreeNode::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        });
                    }
                    other => {
                        return Err(ModelError::Corrupt(format!("unknown node tag {other}")))
                    }
                }
            }
            trees.push(RegressionTree { nodes });
        }
        models.push(GbtModel {
            base_prediction,
            learning_rate,
            max_depth,
            trees,
        });
    }
    Ok(GbtEnsemble { models, task })
}

struct CountingWriter {
    inner: BufWriter<std::fs::File>,
    written: u64,
}

impl CountingWriter {
    fn bytes(&mut self, b: &[u8]) -> Result<(), ModelError> {
        self.inner.write_all(b)?;
        self.written += b.len() as u64;
        Ok(())
    }
    fn u8(&mut self, v: u8) -> Result<(), ModelError> {
        self.bytes(&[v])
    }
    fn u32(&mut self, v: u32) -> Result<(), ModelError> {
        self.bytes(&v.to_le_bytes())
    }
    fn u64(&mut self, v: u64) -> Result<(), ModelError> {
        self.bytes(&v.to_le_bytes())
    }
    fn f64(&mut self, v: f64) -> Result<(), ModelError> {
        self.bytes(&v.to_le_bytes())
    }
}

struct Reader {
    inner: BufReader<std::fs::File>,
}

impl Reader {
    fn bytes(&mut self, buf: &mut [u8]) -> Result<(), ModelError> {
        self.inner
            .read_exact(buf)
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::UnexpectedEof => {
                    ModelError::Corrupt("unexpected end of file".into())
                }
                _ => ModelError::Io(e),
            })
    }
    fn u8(&mut self) -> Result<u8, ModelError> {
        let mut b = [0u8; 1];
        self.bytes(&mut b)?;
        Ok(b[0])
    }
    fn u32(&mut self) -> Result<u32, ModelError> {
        let mut b = [0u8; 4];
        self.bytes(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }
    fn u64(&mut self) -> Result<u64, ModelError> {
        let mut b = [0u8; 8];
        self.bytes(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }
    fn f64(&mut self) -> Result<f64, ModelError> {
        let mut b = [0u8; 8];
        self.bytes(&mut b)?;
        Ok(f64::from_le_bytes(b))
    }
}
