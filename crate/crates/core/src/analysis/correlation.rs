use serde::{Deserialize, Serialize};

use crate::attributes::SampleBatch;

/// Pearson correlations between attribute-probability columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub attribute_ids: Vec<String>,
    /// Row-major `L × L`.
    pub values: Vec<f64>,
    /// Columns with zero variance; their off-diagonal entries are 0.
    pub constant: Vec<bool>,
}

impl CorrelationMatrix {
    pub fn len(&self) -> usize {
        self.attribute_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attribute_ids.is_empty()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.len() + b]
    }
}

/// Pearson coefficient, or `None` if either column is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len().min(b.len());
    let constant = |c: &[f64]| c[..n].iter().all(|&v| v == c[0]);
    if n < 2 || constant(a) || constant(b) {
        return None;
    }
    let ma = a[..n].iter().sum::<f64>() / n as f64;
    let mb = b[..n].iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let (da, db) = (a[k] - ma, b[k] - mb);
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

pub fn attribute_correlation(batch: &SampleBatch) -> CorrelationMatrix {
    let l = batch.attribute_ids.len();
    let columns: Vec<Vec<f64>> = (0..l).map(|k| batch.attribute_column(k)).collect();
    let constant: Vec<bool> = columns.iter().map(|c| pearson(c, c).is_none()).collect();
    let mut values = vec![0.0; l * l];
    for a in 0..l {
        values[a * l + a] = 1.0;
        for b in a + 1..l {
            let r = pearson(&columns[a], &columns[b]).unwrap_or(0.0);
            values[a * l + b] = r;
            values[b * l + a] = r;
        }
    }
    CorrelationMatrix {
        attribute_ids: batch.attribute_ids.clone(),
        values,
        constant,
    }
}
