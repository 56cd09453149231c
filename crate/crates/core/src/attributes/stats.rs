use num_bigint::BigUint;

use super::{validate_attributes, AttributeDef, SampleBatch};
use crate::error::{Error, Result};
use crate::genome::{capacity, enumerate_sequences, GenomeDims};
use crate::training::GanModel;

/// Largest genome `exact_stats` will enumerate.
pub const EXACT_ENUMERATION_LIMIT: u64 = 100_000;

/// Per-variant attribute probabilities `p(a_l | k_i = j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeStats {
    pub dims: GenomeDims,
    pub attribute_ids: Vec<String>,
    /// Flat `[l][i][j]`.
    table: Vec<f64>,
    /// Flat `[i][j]`.
    counts: Vec<usize>,
    pub alpha: f64,
    pub global_means: Vec<f64>,
}

impl AttributeStats {
    pub fn from_parts(
        dims: GenomeDims,
        attribute_ids: Vec<String>,
        table: Vec<f64>,
        counts: Vec<usize>,
        alpha: f64,
        global_means: Vec<f64>,
    ) -> Result<Self> {
        let l = attribute_ids.len();
        let cells = dims.n_g * dims.n_v;
        if table.len() != l * cells {
            return Err(Error::ShapeMismatch {
                expected: l * cells,
                actual: table.len(),
            });
        }
        if counts.len() != cells {
            return Err(Error::ShapeMismatch {
                expected: cells,
                actual: counts.len(),
            });
        }
        if global_means.len() != l {
            return Err(Error::ShapeMismatch {
                expected: l,
                actual: global_means.len(),
            });
        }
        if table.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidConfig("attribute probabilities must lie in [0, 1]".into()));
        }
        Ok(Self {
            dims,
            attribute_ids,
            table,
            counts,
            alpha,
            global_means,
        })
    }

    pub fn num_attributes(&self) -> usize {
        self.attribute_ids.len()
    }

    pub fn attribute_index(&self, id: &str) -> Result<usize> {
        self.attribute_ids
            .iter()
            .position(|a| a == id)
            .ok_or_else(|| Error::UnknownAttribute(id.to_string()))
    }

    pub fn p(&self, l: usize, i: usize, j: usize) -> f64 {
        self.table[(l * self.dims.n_g + i) * self.dims.n_v + j]
    }

    /// `p(a_l | k_i = ·)` over all variants.
    pub fn row(&self, l: usize, i: usize) -> &[f64] {
        let start = (l * self.dims.n_g + i) * self.dims.n_v;
        &self.table[start..start + self.dims.n_v]
    }

    pub fn count(&self, i: usize, j: usize) -> usize {
        self.counts[i * self.dims.n_v + j]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Cells with no contributing samples.
    pub fn empty_cells(&self) -> Vec<(usize, usize)> {
        (0..self.dims.n_g)
            .flat_map(|i| (0..self.dims.n_v).map(move |j| (i, j)))
            .filter(|&(i, j)| self.count(i, j) == 0)
            .collect()
    }
}

/// Monte Carlo estimate with pseudo-count smoothing toward the batch mean:
/// `(Σ_{k_i = j} p + α·mean) / (count + α)`. With `α = 0`, empty cells are
/// set to the batch mean (see [`AttributeStats::empty_cells`]).
pub fn estimate_stats(batch: &SampleBatch, dims: GenomeDims, alpha: f64) -> Result<AttributeStats> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidConfig(format!("pseudo-count {alpha}")));
    }
    let l_count = batch.attribute_ids.len();
    let cells = dims.n_g * dims.n_v;
    let mut sums = vec![0.0; l_count * cells];
    let mut counts = vec![0usize; cells];
    let mut totals = vec![0.0; l_count];
    for (seq, probs) in batch.sequences.iter().zip(&batch.probabilities) {
        if seq.len() != dims.n_g || seq.0.iter().any(|&j| j >= dims.n_v) {
            return Err(Error::IndexOutOfRange(format!("sequence {seq} for dims {dims:?}")));
        }
        for (i, &j) in seq.0.iter().enumerate() {
            counts[i * dims.n_v + j] += 1;
            for (l, &p) in probs.iter().enumerate() {
                sums[(l * dims.n_g + i) * dims.n_v + j] += p;
            }
        }
        for (t, &p) in totals.iter_mut().zip(probs) {
            *t += p;
        }
    }
    let n = batch.len();
    let global_means: Vec<f64> = totals
        .iter()
        .map(|t| if n > 0 { t / n as f64 } else { 0.0 })
        .collect();
    let mut table = vec![0.0; l_count * cells];
    for l in 0..l_count {
        for cell in 0..cells {
            let idx = l * cells + cell;
            let c = counts[cell];
            table[idx] = if c == 0 && alpha == 0.0 {
                global_means[l]
            } else {
                (sums[idx] + alpha * global_means[l]) / (c as f64 + alpha)
            };
        }
    }
    AttributeStats::from_parts(dims, batch.attribute_ids.clone(), table, counts, alpha, global_means)
}

/// Ground truth by enumerating every sequence with uniform weight.
pub fn exact_stats(model: &GanModel, attrs: &[AttributeDef]) -> Result<AttributeStats> {
    validate_attributes(attrs)?;
    let dims = model.dims();
    let cap = capacity(&dims);
    if cap > BigUint::from(EXACT_ENUMERATION_LIMIT) {
        return Err(Error::CapacityTooLarge {
            capacity: cap.to_string(),
            limit: EXACT_ENUMERATION_LIMIT,
        });
    }
    let l_count = attrs.len();
    let mut sums = vec![vec![vec![0.0; dims.n_v]; dims.n_g]; l_count];
    let mut totals = vec![0.0; l_count];
    let mut n = 0usize;
    for seq in enumerate_sequences(dims) {
        let point = model.generate(&seq)?;
        for (l, attr) in attrs.iter().enumerate() {
            let p = attr.eval(point);
            for (i, &j) in seq.0.iter().enumerate() {
                sums[l][i][j] += p;
            }
            totals[l] += p;
        }
        n += 1;
    }
    // every cell holds exactly n / n_v sequences
    let per_cell = n / dims.n_v;
    let mut table = Vec::with_capacity(l_count * dims.n_g * dims.n_v);
    for plane in &sums {
        for row in plane {
            table.extend(row.iter().map(|s| s / per_cell as f64));
        }
    }
    AttributeStats::from_parts(
        dims,
        attrs.iter().map(|a| a.id.clone()).collect(),
        table,
        vec![per_cell; dims.n_g * dims.n_v],
        0.0,
        totals.iter().map(|t| t / n as f64).collect(),
    )
}
