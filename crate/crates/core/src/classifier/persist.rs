//! `CGLR` model files: magic, then little-endian `version u32, C u32, d u32`,
//! scaler mean and std (`d` f64 each), weights (`C×d` f64), bias (`C` f64),
//! training meta (`iterations u32, objective f64, lambda f64, converged u8`)
//! and a CRC-32 over everything after the magic.

use std::fs;
use std::path::Path;

use super::{CalibratedModel, FeatureScaler, TrainingMeta};
use crate::embed_store::Reader;
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 4] = b"CGLR";
pub const MODEL_VERSION: u32 = 1;

impl CalibratedModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.n_classes as u32).to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        let floats = self
            .scaler
            .mean
            .iter()
            .chain(&self.scaler.std)
            .chain(&self.weights)
            .chain(&self.bias);
        for v in floats {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&(self.meta.iterations as u32).to_le_bytes());
        out.extend_from_slice(&self.meta.objective.to_le_bytes());
        out.extend_from_slice(&self.meta.lambda.to_le_bytes());
        out.push(u8::from(self.meta.converged));
        let crc = crc32fast::hash(&out[MODEL_MAGIC.len()..]);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 || &bytes[..4] != MODEL_MAGIC {
            return Err(Error::Format("not a CGLR model file".into()));
        }
        let (body, crc_bytes) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(crc_bytes.try_into().expect("4 bytes"));
        let computed = crc32fast::hash(&body[4..]);
        if stored != computed {
            return Err(Error::Checksum { stored, computed });
        }
        let mut r = Reader::new(&body[4..]);
        let version = r.u32()?;
        if version != MODEL_VERSION {
            return Err(Error::Format(format!(
                "unsupported model version {version}"
            )));
        }
        let c = r.u32()? as usize;
        let d = r.u32()? as usize;
        let mut floats = |k: usize| -> Result<Vec<f64>> { (0..k).map(|_| r.f64()).collect() };
        let mean = floats(d)?;
        let std = floats(d)?;
        let weights = floats(c * d)?;
        let bias = floats(c)?;
        let meta = TrainingMeta {
            iterations: r.u32()? as usize,
            objective: r.f64()?,
            lambda: r.f64()?,
            converged: r.u8()? != 0,
        };
        if !r.is_done() {
            return Err(Error::Format("trailing bytes in model file".into()));
        }
        CalibratedModel::from_parts(weights, bias, FeatureScaler { mean, std }, meta)
    }
}

pub fn write_model(model: &CalibratedModel, path: &Path) -> Result<()> {
    fs::write(path, model.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: &Path) -> Result<CalibratedModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    CalibratedModel::from_bytes(&bytes)
}
