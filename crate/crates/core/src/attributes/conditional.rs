//! Per-position variant distributions given desired attribute values.
//!
//! For position `i`, variant `j` gets weight `Π_l q_l(j)^(1/T)`, where
//! `q_l(j)` is `p(a_l | k_i = j)` when attribute `l` is wanted present and
//! `1 - p(a_l | k_i = j)` when wanted absent. The uniform prior over variants
//! cancels in the normalization.

use serde::{Deserialize, Serialize};

use super::stats::AttributeStats;
use crate::error::{Error, Result};
use crate::genome::GeneSequence;
use crate::numerics::RandomStream;

// Below this the linear-space product is recomputed in log space.
const UNDERFLOW_GUARD: f64 = 1e-200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalSpec {
    /// `(attribute id, desired value)`.
    pub conditions: Vec<(String, bool)>,
    /// Sharpening temperature; `0` means the argmax limit.
    pub temperature: f64,
}

impl ConditionalSpec {
    pub fn unconditional() -> Self {
        Self {
            conditions: Vec::new(),
            temperature: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(Error::InvalidConfig(format!("temperature {}", self.temperature)));
        }
        let mut seen = std::collections::HashSet::new();
        for (id, _) in &self.conditions {
            if !seen.insert(id) {
                return Err(Error::InvalidConfig(format!("attribute `{id}` conditioned twice")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionDistributions {
    pub rows: Vec<Vec<f64>>,
}

impl PositionDistributions {
    pub fn uniform(n_g: usize, n_v: usize) -> Self {
        Self {
            rows: vec![vec![1.0 / n_v as f64; n_v]; n_g],
        }
    }

    /// Most likely variant per position (lowest index on ties).
    pub fn argmax(&self) -> GeneSequence {
        GeneSequence(self.rows.iter().map(|r| argmax(r)).collect())
    }
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = j;
        }
    }
    best
}

pub fn conditional_distributions(stats: &AttributeStats, spec: &ConditionalSpec) -> Result<PositionDistributions> {
    spec.validate()?;
    let conds = spec
        .conditions
        .iter()
        .map(|(id, want)| Ok((stats.attribute_index(id)?, *want)))
        .collect::<Result<Vec<_>>>()?;
    let dims = stats.dims;
    let t = spec.temperature;
    let mut rows = Vec::with_capacity(dims.n_g);
    for i in 0..dims.n_g {
        let q = |l: usize, want: bool, j: usize| {
            let p = stats.p(l, i, j);
            if want {
                p
            } else {
                1.0 - p
            }
        };
        let log_w: Vec<f64> = (0..dims.n_v)
            .map(|j| conds.iter().map(|&(l, want)| q(l, want, j).ln()).sum())
            .collect();
        let best = argmax(&log_w);
        if log_w[best] == f64::NEG_INFINITY {
            return Err(Error::ZeroRow { position: i });
        }
        if t == 0.0 {
            let mut row = vec![0.0; dims.n_v];
            row[best] = 1.0;
            rows.push(row);
            continue;
        }
        let inv_t = 1.0 / t;
        let mut w: Vec<f64> = (0..dims.n_v)
            .map(|j| conds.iter().map(|&(l, want)| q(l, want, j).powf(inv_t)).product())
            .collect();
        if w[best] < UNDERFLOW_GUARD {
            let top = log_w[best] * inv_t;
            w = log_w.iter().map(|lw| (lw * inv_t - top).exp()).collect();
        }
        let total: f64 = w.iter().sum();
        rows.push(w.iter().map(|x| x / total).collect());
    }
    Ok(PositionDistributions { rows })
}

/// Independent categorical draw per position. Rows whose entries are all
/// equal use the same uniform index draw as `sample_sequence`, so an
/// unconditioned spec reproduces unconditional sampling exactly.
pub fn sample_conditional(dists: &PositionDistributions, rng: &mut RandomStream) -> GeneSequence {
    GeneSequence(
        dists
            .rows
            .iter()
            .map(|row| {
                if row.iter().all(|&p| p == row[0]) {
                    return rng.index(row.len());
                }
                let u = rng.uniform();
                let mut acc = 0.0;
                let mut last_positive = 0;
                for (j, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        last_positive = j;
                    }
                    acc += p;
                    if u < acc {
                        return j;
                    }
                }
                last_positive
            })
            .collect(),
    )
}
