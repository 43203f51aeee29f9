//! Binary tensor container shared by checkpoints and prune masks.
//!
//! Layout: `b"ACTG"`, version byte `0x01`, header length as `u64` LE, UTF-8
//! JSON header, then the raw payload. Tensor offsets in the header are byte
//! offsets into the payload; `f32` data is little-endian, masks use one byte
//! per element.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ModelConfig, ModelWeights};
use crate::autodiff::Tensor;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"ACTG";
pub const CHECKPOINT_VERSION: u8 = 0x01;
const PREAMBLE: usize = 4 + 1 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DType {
    F32,
    Bool,
}

impl DType {
    fn size(self) -> usize {
        match self {
            DType::F32 => 4,
            DType::Bool => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ManifestEntry {
    name: String,
    shape: Vec<usize>,
    dtype: DType,
    offset: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    kind: String,
    config: ModelConfig,
    tensors: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    F32(Vec<f32>),
    Bool(Vec<bool>),
}

impl Payload {
    fn dtype(&self) -> DType {
        match self {
            Payload::F32(_) => DType::F32,
            Payload::Bool(_) => DType::Bool,
        }
    }

    fn len(&self) -> usize {
        match self {
            Payload::F32(v) => v.len(),
            Payload::Bool(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContainerEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub payload: Payload,
}

pub fn encode_container(
    kind: &str,
    config: &ModelConfig,
    entries: &[ContainerEntry],
) -> Result<Vec<u8>> {
    let mut offset = 0u64;
    let mut tensors = Vec::with_capacity(entries.len());
    for e in entries {
        let numel: usize = e.shape.iter().product();
        if numel != e.payload.len() {
            return Err(Error::Shape(format!(
                "{}: shape {:?} but {} values",
                e.name,
                e.shape,
                e.payload.len()
            )));
        }
        tensors.push(ManifestEntry {
            name: e.name.clone(),
            shape: e.shape.clone(),
            dtype: e.payload.dtype(),
            offset,
        });
        offset += (numel * e.payload.dtype().size()) as u64;
    }
    let header = serde_json::to_vec(&Header {
        kind: kind.to_string(),
        config: *config,
        tensors,
    })
    .map_err(|e| Error::Format(e.to_string()))?;

    let mut out = Vec::with_capacity(PREAMBLE + header.len() + offset as usize);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.push(CHECKPOINT_VERSION);
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(&header);
    for e in entries {
        match &e.payload {
            Payload::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            Payload::Bool(v) => out.extend(v.iter().map(|&b| u8::from(b))),
        }
    }
    Ok(out)
}

pub(crate) fn decode_container(bytes: &[u8]) -> Result<(String, ModelConfig, Vec<ContainerEntry>)> {
    if bytes.len() < PREAMBLE {
        return Err(Error::Format(format!("file is {} bytes, shorter than the preamble", bytes.len())));
    }
    if &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", &bytes[..4])));
    }
    if bytes[4] != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("unsupported version {:#04x}", bytes[4])));
    }
    let header_len = u64::from_le_bytes(bytes[5..13].try_into().expect("8 bytes")) as usize;
    let payload_start = PREAMBLE
        .checked_add(header_len)
        .filter(|&end| end <= bytes.len())
        .ok_or_else(|| Error::Format(format!("header length {header_len} exceeds file size")))?;
    let header: Header = serde_json::from_slice(&bytes[PREAMBLE..payload_start])
        .map_err(|e| Error::Format(format!("header: {e}")))?;
    let payload = &bytes[payload_start..];

    let mut expected_offset = 0usize;
    let mut entries = Vec::with_capacity(header.tensors.len());
    for m in header.tensors {
        let numel: usize = m.shape.iter().product();
        let size = numel * m.dtype.size();
        if m.offset as usize != expected_offset {
            return Err(Error::Format(format!(
                "{}: offset {} but expected {expected_offset}",
                m.name, m.offset
            )));
        }
        let end = expected_offset + size;
        if end > payload.len() {
            return Err(Error::Format(format!(
                "truncated: {} needs bytes up to {end}, payload has {}",
                m.name,
                payload.len()
            )));
        }
        let raw = &payload[expected_offset..end];
        let data = match m.dtype {
            DType::F32 => Payload::F32(
                raw.chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                    .collect(),
            ),
            DType::Bool => Payload::Bool(
                raw.iter()
                    .map(|&b| match b {
                        0 => Ok(false),
                        1 => Ok(true),
                        other => Err(Error::Format(format!("{}: mask byte {other}", m.name))),
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        entries.push(ContainerEntry {
            name: m.name,
            shape: m.shape,
            payload: data,
        });
        expected_offset = end;
    }
    if expected_offset != payload.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after the last tensor",
            payload.len() - expected_offset
        )));
    }
    Ok((header.kind, header.config, entries))
}

pub fn write_container(
    path: impl AsRef<Path>,
    kind: &str,
    config: &ModelConfig,
    entries: &[ContainerEntry],
) -> Result<()> {
    let bytes = encode_container(kind, config, entries)?;
    fs::write(path.as_ref(), bytes).map_err(|e| Error::io(path.as_ref(), e))
}

pub fn read_container(path: impl AsRef<Path>) -> Result<(String, ModelConfig, Vec<ContainerEntry>)> {
    let bytes = fs::read(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    decode_container(&bytes)
}

impl ModelWeights {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let entries: Vec<ContainerEntry> = self
            .named_tensors()
            .into_iter()
            .map(|(name, t)| ContainerEntry {
                name,
                shape: t.shape().to_vec(),
                payload: Payload::F32(t.data().to_vec()),
            })
            .collect();
        encode_container("checkpoint", &self.config, &entries)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (kind, config, entries) = decode_container(bytes)?;
        if kind != "checkpoint" {
            return Err(Error::Format(format!("expected a checkpoint, found `{kind}`")));
        }
        config
            .validate()
            .map_err(|e| Error::Format(format!("embedded config: {e}")))?;
        let expected = ModelWeights::expected_shapes(&config);
        if entries.len() != expected.len() {
            return Err(Error::Format(format!(
                "{} tensors but the config implies {}",
                entries.len(),
                expected.len()
            )));
        }
        let mut model = ModelWeights::init(config)?;
        for ((entry, (name, shape)), (_, slot)) in
            entries.into_iter().zip(&expected).zip(model.named_tensors_mut())
        {
            if &entry.name != name || &entry.shape != shape {
                return Err(Error::Format(format!(
                    "tensor `{}` {:?} does not match expected `{name}` {shape:?}",
                    entry.name, entry.shape
                )));
            }
            let Payload::F32(data) = entry.payload else {
                return Err(Error::Format(format!("tensor `{name}` is not f32")));
            };
            *slot = Tensor::new(shape.clone(), data)?;
        }
        Ok(model)
    }
}

pub fn save_checkpoint(model: &ModelWeights, path: impl AsRef<Path>) -> Result<()> {
    let bytes = model.to_bytes()?;
    fs::write(path.as_ref(), bytes).map_err(|e| Error::io(path.as_ref(), e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelWeights> {
    let bytes = fs::read(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    ModelWeights::from_bytes(&bytes)
}
