use serde::{Deserialize, Serialize};

use crate::attributes::SampleBatch;
use crate::error::{Error, Result};
use crate::genome::{Genome, GenomeDims, Replacement};
use crate::training::GanModel;

/// Mean discriminator logit per `(position, variant)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealnessTable {
    pub dims: GenomeDims,
    /// Flat `[i][j]`.
    values: Vec<f64>,
    counts: Vec<usize>,
    pub global_mean: f64,
}

impl RealnessTable {
    pub fn from_parts(dims: GenomeDims, values: Vec<f64>, counts: Vec<usize>, global_mean: f64) -> Result<Self> {
        let cells = dims.n_g * dims.n_v;
        for len in [values.len(), counts.len()] {
            if len != cells {
                return Err(Error::ShapeMismatch {
                    expected: cells,
                    actual: len,
                });
            }
        }
        Ok(Self {
            dims,
            values,
            counts,
            global_mean,
        })
    }

    pub fn r(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dims.n_v + j]
    }

    pub fn count(&self, i: usize, j: usize) -> usize {
        self.counts[i * self.dims.n_v + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dims.n_v..(i + 1) * self.dims.n_v]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn empty_cells(&self) -> Vec<(usize, usize)> {
        (0..self.dims.n_g)
            .flat_map(|i| (0..self.dims.n_v).map(move |j| (i, j)))
            .filter(|&(i, j)| self.count(i, j) == 0)
            .collect()
    }
}

/// Averages the batch's discriminator logits per variant. Empty cells get the
/// batch mean and a zero count.
pub fn realness_table(model: &GanModel, batch: &SampleBatch) -> Result<RealnessTable> {
    let dims = model.dims();
    if batch.logits.len() != batch.len() {
        return Err(Error::ShapeMismatch {
            expected: batch.len(),
            actual: batch.logits.len(),
        });
    }
    let cells = dims.n_g * dims.n_v;
    let mut sums = vec![0.0; cells];
    let mut counts = vec![0usize; cells];
    for (seq, &logit) in batch.sequences.iter().zip(&batch.logits) {
        if seq.len() != dims.n_g || seq.0.iter().any(|&j| j >= dims.n_v) {
            return Err(Error::IndexOutOfRange(format!("sequence {seq} for dims {dims:?}")));
        }
        for (i, &j) in seq.0.iter().enumerate() {
            sums[i * dims.n_v + j] += logit;
            counts[i * dims.n_v + j] += 1;
        }
    }
    let global_mean = if batch.is_empty() {
        0.0
    } else {
        batch.logits.iter().sum::<f64>() / batch.len() as f64
    };
    let values = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c == 0 { global_mean } else { s / c as f64 })
        .collect();
    RealnessTable::from_parts(dims, values, counts, global_mean)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruningPlan {
    pub x: usize,
    pub n_g: usize,
    pub replacements: Vec<Replacement>,
}

impl PruningPlan {
    pub fn is_empty(&self) -> bool {
        self.replacements.is_empty()
    }

    pub fn victims(&self, position: usize) -> Vec<usize> {
        self.at(position).map(|r| r.victim).collect()
    }

    pub fn donors(&self, position: usize) -> Vec<usize> {
        self.at(position).map(|r| r.donor).collect()
    }

    fn at(&self, position: usize) -> impl Iterator<Item = &Replacement> {
        self.replacements.iter().filter(move |r| r.position == position)
    }

    pub fn apply(&self, genome: &Genome) -> Result<Genome> {
        genome.apply_variant_replacement(&self.replacements)
    }
}

/// Pairs the `x` lowest-realness variants of each position with the `x`
/// highest: the lowest is replaced by the highest, the second lowest by the
/// second highest, and so on. Ties sort by lower index.
pub fn pruning_plan(table: &RealnessTable, x: usize) -> Result<PruningPlan> {
    let dims = table.dims;
    if 2 * x > dims.n_v {
        return Err(Error::PruneTooWide { x, n_v: dims.n_v });
    }
    let mut replacements = Vec::with_capacity(x * dims.n_g);
    for i in 0..dims.n_g {
        let row = table.row(i);
        let mut order: Vec<usize> = (0..dims.n_v).collect();
        order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
        for k in 0..x {
            replacements.push(Replacement {
                position: i,
                victim: order[k],
                donor: order[dims.n_v - 1 - k],
            });
        }
    }
    Ok(PruningPlan {
        x,
        n_g: dims.n_g,
        replacements,
    })
}

/// Copy of `model` with the plan applied to its genome.
pub fn prune_model(model: &GanModel, plan: &PruningPlan) -> Result<GanModel> {
    let mut pruned = model.clone();
    pruned.genome = plan.apply(&model.genome)?;
    Ok(pruned)
}
