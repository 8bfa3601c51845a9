//! Binary model bundle.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | content |
//! |---|---|---|
//! | 0 | 8 | magic `SWBUNDLE` |
//! | 8 | 4 | `u32` format version (currently 1) |
//! | 12 | 8 | `u64` header length `L` in bytes |
//! | 20 | L | UTF-8 JSON header |
//! | 20 + L | 8·N | tensor data, `f64` little-endian |
//!
//! The header lists every tensor as `{name, shape, offset, len}` where
//! `offset` is the byte offset from the start of the tensor data and `len`
//! the element count; multi-dimensional tensors are row-major. The file ends
//! exactly after the last tensor.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::train::{ModelConfig, TrainSummary, TwoStageModel};
use super::{LogisticGate, LstmParams, RecurrentRegressor};
use crate::error::{Error, Result};
use crate::features::ScalerParams;

pub const BUNDLE_MAGIC: [u8; 8] = *b"SWBUNDLE";
pub const BUNDLE_VERSION: u32 = 1;
const PREAMBLE: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
    pub len: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GateHeader {
    features: Vec<String>,
    c: f64,
    class_weights: [f64; 2],
    tau: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RegressorHeader {
    features: Vec<String>,
    n_in: usize,
    hidden: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    horizon: usize,
    seed: u64,
    features: Vec<String>,
    gate: GateHeader,
    regressor: RegressorHeader,
    baseline: RegressorHeader,
    config: ModelConfig,
    summary: TrainSummary,
    tensors: Vec<TensorEntry>,
}

fn push(tensors: &mut Vec<TensorEntry>, data: &mut Vec<f64>, name: &str, shape: Vec<usize>, values: &[f64]) {
    tensors.push(TensorEntry { name: name.into(), shape, offset: data.len() * 8, len: values.len() });
    data.extend_from_slice(values);
}

fn reg_header(r: &RecurrentRegressor<f64>) -> RegressorHeader {
    RegressorHeader { features: r.features.clone(), n_in: r.params.n_in, hidden: r.params.hidden }
}

pub fn encode_bundle(model: &TwoStageModel) -> Result<Vec<u8>> {
    let mut tensors = Vec::new();
    let mut data = Vec::new();
    let w = model.features.len();
    push(&mut tensors, &mut data, "scaler.min", vec![w], &model.scaler.min);
    push(&mut tensors, &mut data, "scaler.max", vec![w], &model.scaler.max);
    push(&mut tensors, &mut data, "gate.weights", vec![model.gate.weights.len()], &model.gate.weights);
    push(&mut tensors, &mut data, "gate.intercept", vec![1], &[model.gate.intercept]);
    for (prefix, reg) in [("regressor", &model.regressor), ("baseline", &model.baseline)] {
        for ((name, shape), t) in LstmParams::<f64>::tensor_names().iter().zip(reg.params.shapes()).zip(reg.params.tensors()) {
            push(&mut tensors, &mut data, &format!("{prefix}.{name}"), shape, t);
        }
    }
    let header = Header {
        horizon: model.horizon,
        seed: model.seed,
        features: model.features.clone(),
        gate: GateHeader {
            features: model.gate.features.clone(),
            c: model.gate.c,
            class_weights: model.gate.class_weights,
            tau: model.gate.tau,
        },
        regressor: reg_header(&model.regressor),
        baseline: reg_header(&model.baseline),
        config: model.config.clone(),
        summary: model.summary.clone(),
        tensors,
    };
    let json = serde_json::to_vec(&header)?;
    let mut out = Vec::with_capacity(PREAMBLE + json.len() + data.len() * 8);
    out.extend_from_slice(&BUNDLE_MAGIC);
    out.extend_from_slice(&BUNDLE_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Bundle(msg.into())
}

pub fn decode_bundle(bytes: &[u8]) -> Result<TwoStageModel> {
    if bytes.len() < PREAMBLE || bytes[..8] != BUNDLE_MAGIC {
        return Err(bad("not a model bundle (bad magic)"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != BUNDLE_VERSION {
        return Err(bad(format!("unsupported bundle version {version}")));
    }
    let hlen = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
    let body = PREAMBLE.checked_add(hlen).filter(|&e| e <= bytes.len()).ok_or_else(|| bad("truncated header"))?;
    let header: Header = serde_json::from_slice(&bytes[PREAMBLE..body])?;
    let data = &bytes[body..];
    let mut expected_end = 0;
    let get = |name: &str| -> Result<Vec<f64>> {
        let e = header.tensors.iter().find(|t| t.name == name).ok_or_else(|| bad(format!("tensor `{name}` missing")))?;
        if e.shape.iter().product::<usize>() != e.len {
            return Err(bad(format!("tensor `{name}` shape does not match its length")));
        }
        let end = e.offset.checked_add(e.len * 8).filter(|&x| x <= data.len()).ok_or_else(|| bad(format!("tensor `{name}` out of bounds")))?;
        Ok(data[e.offset..end].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
    };
    for e in &header.tensors {
        expected_end = expected_end.max(e.offset + e.len * 8);
    }
    if expected_end != data.len() {
        return Err(bad(format!("tensor data holds {} bytes, header describes {expected_end}", data.len())));
    }
    let w = header.features.len();
    let scaler = ScalerParams { min: get("scaler.min")?, max: get("scaler.max")? };
    if scaler.min.len() != w || scaler.max.len() != w {
        return Err(bad("scaler width differs from the feature list"));
    }
    let intercept = get("gate.intercept")?;
    let gate = LogisticGate {
        features: header.gate.features.clone(),
        weights: get("gate.weights")?,
        intercept: *intercept.first().ok_or_else(|| bad("empty gate intercept"))?,
        c: header.gate.c,
        class_weights: header.gate.class_weights,
        tau: header.gate.tau,
    };
    gate.validate().map_err(|e| bad(e.to_string()))?;
    let regressor = |prefix: &str, h: &RegressorHeader| -> Result<RecurrentRegressor<f64>> {
        let mut p = LstmParams::zeros(h.n_in, h.hidden);
        for (name, t) in LstmParams::<f64>::tensor_names().iter().zip(p.tensors_mut()) {
            *t = get(&format!("{prefix}.{name}"))?;
        }
        p.check_shapes().map_err(|e| bad(format!("{prefix}: {e}")))?;
        if h.features.len() != h.n_in {
            return Err(bad(format!("{prefix}: feature list length differs from input width")));
        }
        Ok(RecurrentRegressor { features: h.features.clone(), params: p })
    };
    Ok(TwoStageModel {
        regressor: regressor("regressor", &header.regressor)?,
        baseline: regressor("baseline", &header.baseline)?,
        features: header.features,
        scaler,
        gate,
        horizon: header.horizon,
        seed: header.seed,
        config: header.config,
        summary: header.summary,
    })
}

pub fn write_bundle(path: &Path, model: &TwoStageModel) -> Result<()> {
    std::fs::write(path, encode_bundle(model)?)?;
    Ok(())
}

pub fn read_bundle(path: &Path) -> Result<TwoStageModel> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    decode_bundle(&std::fs::read(path)?)
}
