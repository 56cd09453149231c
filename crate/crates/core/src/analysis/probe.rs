//! Small MLP classifiers that try to read a binary attribute off a latent
//! code. Higher held-out accuracy means the attribute is more linearly (or at
//! least simply) encoded in that representation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sigmoid, softplus, Activation, AdamConfig, AdamState, Mlp, RandomStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Stop after this many epochs without a drop in validation loss. The
    /// parameters with the lowest validation loss are kept either way.
    pub patience: Option<usize>,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            hidden: vec![32, 32],
            epochs: 200,
            batch_size: 32,
            learning_rate: 1e-3,
            patience: Some(20),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl SplitSizes {
    pub fn for_len(n: usize) -> Self {
        let train = n * 8 / 10;
        let val = n / 10;
        Self {
            train,
            val,
            test: n - train - val,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub test_accuracy: f64,
    /// Test accuracy of always predicting the training majority class.
    pub majority_baseline: f64,
    /// The training labels held a single class; no probe was fitted.
    pub degenerate: bool,
    pub best_epoch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub attribute_ids: Vec<String>,
    pub split: SplitSizes,
    pub genome: Vec<ProbeResult>,
    pub baseline: Vec<ProbeResult>,
}

impl ProbeReport {
    pub fn mean_accuracy(results: &[ProbeResult]) -> f64 {
        if results.is_empty() {
            return 0.0;
        }
        results.iter().map(|r| r.test_accuracy).sum::<f64>() / results.len() as f64
    }
}

struct Split {
    train: Vec<usize>,
    val: Vec<usize>,
    test: Vec<usize>,
}

fn split_indices(n: usize, rng: &mut RandomStream) -> Split {
    let mut idx: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut idx);
    let s = SplitSizes::for_len(n);
    let test = idx.split_off(s.train + s.val);
    let val = idx.split_off(s.train);
    Split { train: idx, val, test }
}

/// Per-feature mean and std from the training rows.
fn standardizer(xs: &[Vec<f64>], rows: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let d = xs[0].len();
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for &r in rows {
        for (m, v) in mean.iter_mut().zip(&xs[r]) {
            *m += v / n;
        }
    }
    let mut std = vec![0.0; d];
    for &r in rows {
        for k in 0..d {
            std[k] += (xs[r][k] - mean[k]).powi(2) / n;
        }
    }
    let std = std.into_iter().map(|v| if v > 0.0 { v.sqrt() } else { 1.0 }).collect();
    (mean, std)
}

fn mean_bce(mlp: &Mlp, xs: &[Vec<f64>], labels: &[bool], rows: &[usize]) -> Result<f64> {
    let mut total = 0.0;
    for &r in rows {
        let z = mlp.predict(&xs[r])?[0];
        total += if labels[r] { softplus(-z) } else { softplus(z) };
    }
    Ok(total / rows.len().max(1) as f64)
}

fn accuracy(mlp: &Mlp, xs: &[Vec<f64>], labels: &[bool], rows: &[usize]) -> Result<f64> {
    if rows.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0;
    for &r in rows {
        let z = mlp.predict(&xs[r])?[0];
        if (z > 0.0) == labels[r] {
            correct += 1;
        }
    }
    Ok(correct as f64 / rows.len() as f64)
}

/// Trains one probe on a split drawn from `rng` and reports held-out accuracy.
pub fn probe_attribute(latents: &[Vec<f64>], labels: &[bool], config: &ProbeConfig, rng: &RandomStream) -> Result<ProbeResult> {
    if latents.len() != labels.len() {
        return Err(Error::ShapeMismatch {
            expected: latents.len(),
            actual: labels.len(),
        });
    }
    if latents.len() < 3 * config.batch_size.max(1) {
        return Err(Error::InvalidConfig(format!(
            "probe needs at least {} samples, got {}",
            3 * config.batch_size.max(1),
            latents.len()
        )));
    }
    let d = latents[0].len();
    if d == 0 || latents.iter().any(|x| x.len() != d) {
        return Err(Error::InvalidConfig("latents must share a positive width".into()));
    }
    let split = split_indices(latents.len(), &mut rng.split("split"));
    let positives = split.train.iter().filter(|&&r| labels[r]).count();
    let majority = 2 * positives >= split.train.len();
    let majority_baseline =
        split.test.iter().filter(|&&r| labels[r] == majority).count() as f64 / split.test.len() as f64;
    if positives == 0 || positives == split.train.len() {
        return Ok(ProbeResult {
            test_accuracy: majority_baseline,
            majority_baseline,
            degenerate: true,
            best_epoch: 0,
        });
    }

    let (mean, std) = standardizer(latents, &split.train);
    let xs: Vec<Vec<f64>> = latents
        .iter()
        .map(|x| x.iter().zip(&mean).zip(&std).map(|((v, m), s)| (v - m) / s).collect())
        .collect();

    let mut widths = vec![d];
    widths.extend(&config.hidden);
    widths.push(1);
    let mut mlp = Mlp::new(&widths, Activation::leaky(), Activation::Identity, &mut rng.split("init"))?;
    let mut adam = AdamState::new(
        AdamConfig {
            learning_rate: config.learning_rate,
            ..AdamConfig::default()
        },
        mlp.param_count(),
    );
    let mut order_rng = rng.split("order");
    let mut order = split.train.clone();
    let mut best = (mean_bce(&mlp, &xs, labels, &split.val)?, mlp.params().to_vec(), 0);
    let mut since_best = 0;
    for epoch in 1..=config.epochs {
        order_rng.shuffle(&mut order);
        for chunk in order.chunks(config.batch_size.max(1)) {
            let mut grad = mlp.zero_grad();
            let scale = 1.0 / chunk.len() as f64;
            for &r in chunk {
                let (out, cache) = mlp.forward(&xs[r])?;
                let target = if labels[r] { 1.0 } else { 0.0 };
                mlp.backward_acc(&cache, &[(sigmoid(out[0]) - target) * scale], &mut grad)?;
            }
            adam.step(mlp.params_mut(), &grad)?;
        }
        let val = mean_bce(&mlp, &xs, labels, &split.val)?;
        if val < best.0 {
            best = (val, mlp.params().to_vec(), epoch);
            since_best = 0;
        } else {
            since_best += 1;
            if config.patience.is_some_and(|p| since_best >= p) {
                break;
            }
        }
    }
    mlp.params_mut().copy_from_slice(&best.1);
    Ok(ProbeResult {
        test_accuracy: accuracy(&mlp, &xs, labels, &split.test)?,
        majority_baseline,
        degenerate: false,
        best_epoch: best.2,
    })
}

/// Latent codes and the attribute probabilities of the points they generate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProbeData {
    pub latents: Vec<Vec<f64>>,
    /// `probabilities[n][l]`.
    pub probabilities: Vec<Vec<f64>>,
}

impl ProbeData {
    /// Labels for attribute `l`: probability thresholded at 0.5.
    pub fn labels(&self, l: usize) -> Vec<bool> {
        self.probabilities.iter().map(|p| p[l] >= 0.5).collect()
    }
}

/// Probes every attribute on both representations. Both representations of
/// attribute `l` share one random stream, so identical inputs give identical
/// results.
pub fn disentanglement_probe(
    genome: &ProbeData,
    baseline: &ProbeData,
    attribute_ids: &[String],
    config: &ProbeConfig,
) -> Result<ProbeReport> {
    let n = genome.latents.len();
    for data in [genome, baseline] {
        for len in [data.latents.len(), data.probabilities.len()] {
            if len != n {
                return Err(Error::ShapeMismatch { expected: n, actual: len });
            }
        }
        if data.probabilities.iter().any(|p| p.len() != attribute_ids.len()) {
            return Err(Error::ShapeMismatch {
                expected: attribute_ids.len(),
                actual: data.probabilities.first().map_or(0, Vec::len),
            });
        }
    }
    let root = RandomStream::new(config.seed);
    let mut genome_results = Vec::with_capacity(attribute_ids.len());
    let mut baseline_results = Vec::with_capacity(attribute_ids.len());
    for l in 0..attribute_ids.len() {
        let rng = root.split_indexed("probe", l as u64);
        genome_results.push(probe_attribute(&genome.latents, &genome.labels(l), config, &rng)?);
        baseline_results.push(probe_attribute(&baseline.latents, &baseline.labels(l), config, &rng)?);
    }
    Ok(ProbeReport {
        attribute_ids: attribute_ids.to_vec(),
        split: SplitSizes::for_len(n),
        genome: genome_results,
        baseline: baseline_results,
    })
}
