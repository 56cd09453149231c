//! Layout: 8-byte magic, little-endian `u32` header length, JSON header,
//! then the payload as little-endian `f64`s.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::write_atomic;
use crate::error::{Error, Result};
use crate::genome::{Genome, GenomeDims};
use crate::numerics::{LayerSpec, Mlp};
use crate::training::{GanModel, Prior, TrainConfig};

pub const FORMAT_VERSION: u32 = 1;
pub const MAGIC_GENOME: &[u8; 8] = b"GLGENOME";
pub const MAGIC_MODEL: &[u8; 8] = b"GLMODEL\0";
pub const MAGIC_CHECKPOINT: &[u8; 8] = b"GLCKPT\0\0";
const DTYPE: &str = "f64le";

fn encode<H: Serialize>(magic: &[u8; 8], header: &H, payload: &[f64]) -> Result<Vec<u8>> {
    let header = serde_json::to_vec(header)?;
    let header_len = u32::try_from(header.len()).map_err(|_| Error::Header("header too large".into()))?;
    let mut bytes = Vec::with_capacity(12 + header.len() + 8 * payload.len());
    bytes.extend_from_slice(magic);
    bytes.extend_from_slice(&header_len.to_le_bytes());
    bytes.extend_from_slice(&header);
    for v in payload {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    Ok(bytes)
}

trait Header: DeserializeOwned {
    fn payload_len(&self) -> usize;
}

fn decode<H: Header>(path: &Path, magic: &[u8; 8]) -> Result<(H, Vec<f64>)> {
    let bytes = fs::read(path)?;
    let truncated = |detail: String| Error::Truncated {
        path: path.to_path_buf(),
        detail,
    };
    let prefix = bytes.len().min(8);
    if bytes[..prefix] != magic[..prefix] {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            expected: String::from_utf8_lossy(magic).trim_end_matches('\0').to_string(),
        });
    }
    if bytes.len() < 12 {
        return Err(truncated(format!("{} bytes, shorter than the fixed preamble", bytes.len())));
    }
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = &bytes[12..];
    if body.len() < header_len {
        return Err(truncated(format!("header declares {header_len} bytes, {} present", body.len())));
    }
    let raw: serde_json::Value =
        serde_json::from_slice(&body[..header_len]).map_err(|e| Error::Header(e.to_string()))?;
    let found = raw
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Header("missing format_version".into()))?;
    if found != FORMAT_VERSION as u64 {
        return Err(Error::VersionMismatch {
            found: u32::try_from(found).unwrap_or(u32::MAX),
            expected: FORMAT_VERSION,
        });
    }
    if raw.get("dtype").and_then(|v| v.as_str()) != Some(DTYPE) {
        return Err(Error::Header(format!("dtype must be {DTYPE}")));
    }
    let header: H = serde_json::from_value(raw).map_err(|e| Error::Header(e.to_string()))?;
    let payload_bytes = &body[header_len..];
    let expected = header.payload_len();
    if payload_bytes.len() < 8 * expected {
        return Err(truncated(format!(
            "payload has {} bytes, header declares {} values",
            payload_bytes.len(),
            expected
        )));
    }
    if payload_bytes.len() > 8 * expected {
        return Err(Error::Header(format!(
            "{} trailing payload bytes",
            payload_bytes.len() - 8 * expected
        )));
    }
    let payload = payload_bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((header, payload))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenomeHeader {
    format_version: u32,
    n_g: usize,
    n_v: usize,
    d_g: usize,
    seed: u64,
    dtype: String,
}

impl Header for GenomeHeader {
    fn payload_len(&self) -> usize {
        self.n_g * self.n_v * self.d_g
    }
}

pub fn save_genome(path: &Path, genome: &Genome) -> Result<()> {
    let dims = genome.dims();
    let header = GenomeHeader {
        format_version: FORMAT_VERSION,
        n_g: dims.n_g,
        n_v: dims.n_v,
        d_g: dims.d_g,
        seed: genome.seed(),
        dtype: DTYPE.into(),
    };
    write_atomic(path, &encode(MAGIC_GENOME, &header, genome.embeddings())?)
}

pub fn load_genome(path: &Path) -> Result<Genome> {
    let (h, payload) = decode::<GenomeHeader>(path, MAGIC_GENOME)?;
    Genome::from_parts(GenomeDims::new(h.n_g, h.n_v, h.d_g)?, h.seed, payload)
}

/// Network shapes; parameters live in the payload in the order genome,
/// generator, discriminator, mapping.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelLayout {
    prior: Prior,
    dims: GenomeDims,
    genome_seed: u64,
    generator: Vec<LayerSpec>,
    discriminator: Vec<LayerSpec>,
    mapping: Option<Vec<LayerSpec>>,
}

fn param_len(layers: &[LayerSpec]) -> usize {
    layers.iter().map(|l| (l.inputs + 1) * l.outputs).sum()
}

impl ModelLayout {
    fn of(model: &GanModel) -> Self {
        Self {
            prior: model.prior,
            dims: model.dims(),
            genome_seed: model.genome.seed(),
            generator: model.generator.layers().to_vec(),
            discriminator: model.discriminator.layers().to_vec(),
            mapping: model.mapping.as_ref().map(|m| m.layers().to_vec()),
        }
    }

    fn payload_len(&self) -> usize {
        self.dims.embedding_len()
            + param_len(&self.generator)
            + param_len(&self.discriminator)
            + self.mapping.as_deref().map_or(0, param_len)
    }

    fn payload(model: &GanModel) -> Vec<f64> {
        let mut p = model.genome.embeddings().to_vec();
        p.extend_from_slice(model.generator.params());
        p.extend_from_slice(model.discriminator.params());
        if let Some(m) = &model.mapping {
            p.extend_from_slice(m.params());
        }
        p
    }

    fn build(self, payload: Vec<f64>) -> Result<GanModel> {
        let mut rest = payload.as_slice();
        let mut take = |n: usize| {
            let (head, tail) = rest.split_at(n);
            rest = tail;
            head.to_vec()
        };
        let genome = Genome::from_parts(self.dims, self.genome_seed, take(self.dims.embedding_len()))?;
        let generator = Mlp::from_parts(self.generator.clone(), take(param_len(&self.generator)))?;
        let discriminator = Mlp::from_parts(self.discriminator.clone(), take(param_len(&self.discriminator)))?;
        let mapping = match self.mapping {
            Some(layers) => {
                let n = param_len(&layers);
                Some(Mlp::from_parts(layers, take(n))?)
            }
            None => None,
        };
        let model = GanModel {
            prior: self.prior,
            genome,
            generator,
            discriminator,
            mapping,
        };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelHeader {
    format_version: u32,
    dtype: String,
    #[serde(flatten)]
    layout: ModelLayout,
}

impl Header for ModelHeader {
    fn payload_len(&self) -> usize {
        self.layout.payload_len()
    }
}

pub fn save_model(path: &Path, model: &GanModel) -> Result<()> {
    let header = ModelHeader {
        format_version: FORMAT_VERSION,
        dtype: DTYPE.into(),
        layout: ModelLayout::of(model),
    };
    write_atomic(path, &encode(MAGIC_MODEL, &header, &ModelLayout::payload(model))?)
}

pub fn load_model(path: &Path) -> Result<GanModel> {
    let (h, payload) = decode::<ModelHeader>(path, MAGIC_MODEL)?;
    h.layout.build(payload)
}

/// Everything needed to resume analysis of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: TrainConfig,
    pub model: GanModel,
    pub step: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointHeader {
    format_version: u32,
    dtype: String,
    step: usize,
    config: TrainConfig,
    model: ModelLayout,
}

impl Header for CheckpointHeader {
    fn payload_len(&self) -> usize {
        self.model.payload_len()
    }
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let header = CheckpointHeader {
        format_version: FORMAT_VERSION,
        dtype: DTYPE.into(),
        step: ckpt.step,
        config: ckpt.config.clone(),
        model: ModelLayout::of(&ckpt.model),
    };
    write_atomic(path, &encode(MAGIC_CHECKPOINT, &header, &ModelLayout::payload(&ckpt.model))?)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let (h, payload) = decode::<CheckpointHeader>(path, MAGIC_CHECKPOINT)?;
    Ok(Checkpoint {
        config: h.config,
        step: h.step,
        model: h.model.build(payload)?,
    })
}
