//! Analytic attribute oracles and Monte Carlo sample batches.
//!
//! Attributes stand in for image classifiers: each maps a generated point to
//! the probability that a binary attribute is present.

mod conditional;
mod stats;

pub use conditional::{conditional_distributions, sample_conditional, ConditionalSpec, PositionDistributions};
pub use stats::{estimate_stats, exact_stats, AttributeStats, EXACT_ENUMERATION_LIMIT};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::{sample_sequence, GeneSequence};
use crate::numerics::{sigmoid, RandomStream};
use crate::training::dataset::nearest;
use crate::training::{GanModel, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AttributeKind {
    /// `logistic(β · (normal · x + offset))`
    HalfPlane {
        normal: [f64; 2],
        offset: f64,
        sharpness: f64,
    },
    /// `logistic(β · (radius - |x - center|))`
    Radial {
        center: Point,
        radius: f64,
        sharpness: f64,
    },
    /// 1 when `modes[target]` is the nearest mode, else 0.
    NearestMode { modes: Vec<Point>, target: usize },
}

// Unknown fields are rejected by `AttributeKind`, which receives everything
// except `id` through the flatten.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeDef {
    pub id: String,
    #[serde(flatten)]
    pub kind: AttributeKind,
}

impl AttributeDef {
    pub fn half_plane(id: &str, normal: [f64; 2], offset: f64, sharpness: f64) -> Self {
        Self {
            id: id.to_string(),
            kind: AttributeKind::HalfPlane {
                normal,
                offset,
                sharpness,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("attribute `{}`: {msg}", self.id)));
        match &self.kind {
            AttributeKind::HalfPlane {
                normal, sharpness, ..
            } => {
                if !(*sharpness > 0.0) {
                    return bad("sharpness must be positive");
                }
                if normal[0] == 0.0 && normal[1] == 0.0 {
                    return bad("normal must be nonzero");
                }
            }
            AttributeKind::Radial {
                radius, sharpness, ..
            } => {
                if !(*sharpness > 0.0) {
                    return bad("sharpness must be positive");
                }
                if !radius.is_finite() {
                    return bad("radius must be finite");
                }
            }
            AttributeKind::NearestMode { modes, target } => {
                if *target >= modes.len() {
                    return bad("target mode out of range");
                }
            }
        }
        Ok(())
    }

    /// Probability that the attribute is present at `p`.
    pub fn eval(&self, p: Point) -> f64 {
        match &self.kind {
            AttributeKind::HalfPlane {
                normal,
                offset,
                sharpness,
            } => sigmoid(sharpness * (normal[0] * p[0] + normal[1] * p[1] + offset)),
            AttributeKind::Radial {
                center,
                radius,
                sharpness,
            } => {
                let dist = ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt();
                sigmoid(sharpness * (radius - dist))
            }
            AttributeKind::NearestMode { modes, target } => {
                if nearest(modes, p) == *target {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

pub fn eval_attribute(attr: &AttributeDef, p: Point) -> f64 {
    attr.eval(p)
}

pub(crate) fn validate_attributes(attrs: &[AttributeDef]) -> Result<()> {
    let mut ids = std::collections::HashSet::new();
    for a in attrs {
        a.validate()?;
        if !ids.insert(a.id.as_str()) {
            return Err(Error::InvalidConfig(format!("duplicate attribute id `{}`", a.id)));
        }
    }
    Ok(())
}

/// Generated samples scored by every attribute and the discriminator.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub attribute_ids: Vec<String>,
    pub sequences: Vec<GeneSequence>,
    pub points: Vec<Point>,
    /// `probabilities[n][l]`.
    pub probabilities: Vec<Vec<f64>>,
    pub logits: Vec<f64>,
    /// Seed of the stream that produced the sequences, when known.
    pub seed: Option<u64>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    /// Generates and scores the given sequences.
    pub fn from_sequences(model: &GanModel, sequences: Vec<GeneSequence>, attrs: &[AttributeDef]) -> Result<Self> {
        validate_attributes(attrs)?;
        let mut points = Vec::with_capacity(sequences.len());
        let mut probabilities = Vec::with_capacity(sequences.len());
        let mut logits = Vec::with_capacity(sequences.len());
        for s in &sequences {
            let p = model.generate(s)?;
            probabilities.push(attrs.iter().map(|a| a.eval(p)).collect());
            logits.push(model.discriminate(p)?);
            points.push(p);
        }
        Ok(Self {
            attribute_ids: attrs.iter().map(|a| a.id.clone()).collect(),
            sequences,
            points,
            probabilities,
            logits,
            seed: None,
        })
    }

    /// Column of attribute `l`.
    pub fn attribute_column(&self, l: usize) -> Vec<f64> {
        self.probabilities.iter().map(|row| row[l]).collect()
    }
}

/// Samples `n` uniform sequences from `rng`, generates and scores them.
pub fn collect_samples(model: &GanModel, n: usize, attrs: &[AttributeDef], rng: &mut RandomStream) -> Result<SampleBatch> {
    let dims = model.dims();
    let sequences = (0..n).map(|_| sample_sequence(&dims, rng)).collect();
    SampleBatch::from_sequences(model, sequences, attrs)
}
