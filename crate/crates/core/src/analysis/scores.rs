use serde::{Deserialize, Serialize};

use crate::attributes::AttributeStats;
use crate::genome::GenomeDims;

/// Mean absolute standard score of every position, per attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneScoreTable {
    pub dims: GenomeDims,
    pub attribute_ids: Vec<String>,
    /// `scores[l][i]`, the mean over variants of `|p - μ| / σ`.
    pub scores: Vec<Vec<f64>>,
    /// `sums[l][i]`, the same quantity summed instead of averaged.
    pub sums: Vec<Vec<f64>>,
    pub mu: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
}

impl GeneScoreTable {
    pub fn score(&self, l: usize, i: usize) -> f64 {
        self.scores[l][i]
    }

    /// Positions ordered from most to least influential for attribute `l`.
    pub fn ranking(&self, l: usize) -> Vec<usize> {
        rank_desc(&self.scores[l])
    }

    pub fn sum_ranking(&self, l: usize) -> Vec<usize> {
        rank_desc(&self.sums[l])
    }

    pub fn top_position(&self, l: usize) -> usize {
        self.ranking(l)[0]
    }
}

fn rank_desc(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

/// `(score, sum, μ, σ)` of one row with population standard deviation.
pub(crate) fn row_score(row: &[f64]) -> (f64, f64, f64, f64) {
    let n = row.len() as f64;
    let mu = row.iter().sum::<f64>() / n;
    let sigma = (row.iter().map(|p| (p - mu).powi(2)).sum::<f64>() / n).sqrt();
    if sigma == 0.0 {
        return (0.0, 0.0, mu, 0.0);
    }
    let sum: f64 = row.iter().map(|p| (p - mu).abs() / sigma).sum();
    (sum / n, sum, mu, sigma)
}

pub fn gene_scores(stats: &AttributeStats) -> GeneScoreTable {
    let dims = stats.dims;
    let l_count = stats.num_attributes();
    let mut table = GeneScoreTable {
        dims,
        attribute_ids: stats.attribute_ids.clone(),
        scores: vec![vec![0.0; dims.n_g]; l_count],
        sums: vec![vec![0.0; dims.n_g]; l_count],
        mu: vec![vec![0.0; dims.n_g]; l_count],
        sigma: vec![vec![0.0; dims.n_g]; l_count],
    };
    for l in 0..l_count {
        for i in 0..dims.n_g {
            let (s, sum, mu, sigma) = row_score(stats.row(l, i));
            table.scores[l][i] = s;
            table.sums[l][i] = sum;
            table.mu[l][i] = mu;
            table.sigma[l][i] = sigma;
        }
    }
    table
}
