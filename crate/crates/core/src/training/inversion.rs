//! Projection of target points into the genome and codebook fine-tuning.
//!
//! Projection optimizes a free continuous latent per target, starting from
//! the mean of randomly assembled codes, then snaps it to the nearest variant
//! per position. Inversion additionally fine-tunes the genome (and optionally
//! the generator) so the snapped sequences reproduce their targets, while a
//! preservation term keeps the outputs of a frozen batch of random sequences
//! in place.

use serde::{Deserialize, Serialize};

use super::dataset::Point;
use super::model::GanModel;
use crate::error::{Error, Result};
use crate::genome::{route_gradient, sample_sequence, GeneSequence, LatentCode, Metric};
use crate::numerics::{AdamConfig, AdamState, RandomStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InversionConfig {
    pub latent_steps: usize,
    pub latent_lr: f64,
    /// Random codes averaged to initialize each free latent.
    pub init_samples: usize,
    pub metric: Metric,
    pub finetune_steps: usize,
    pub finetune_lr: f64,
    pub finetune_generator: bool,
    /// Weight of the preservation term. `f64::INFINITY` freezes the model.
    pub lambda_pres: f64,
    pub preservation_batch: usize,
    /// Acceptable mean output drift on the preservation batch.
    pub preservation_tolerance: f64,
    pub seed: u64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            latent_steps: 500,
            latent_lr: 0.05,
            init_samples: 64,
            metric: Metric::Euclidean,
            finetune_steps: 300,
            finetune_lr: 1e-3,
            finetune_generator: false,
            lambda_pres: 1.0,
            preservation_batch: 64,
            preservation_tolerance: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub latents: Vec<LatentCode>,
    /// Squared reconstruction error of each optimized continuous latent.
    pub continuous_errors: Vec<f64>,
    pub sequences: Vec<GeneSequence>,
    /// Per-position snap distances for each target.
    pub snap_distances: Vec<Vec<f64>>,
    /// Squared reconstruction error after snapping.
    pub snapped_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    pub model: GanModel,
    pub projection: Projection,
    /// Fine-tuning objective before the first update.
    pub initial_loss: f64,
    /// Squared reconstruction error per target after fine-tuning.
    pub errors: Vec<f64>,
    /// Mean Euclidean output drift over the frozen preservation batch.
    pub preservation_drift: f64,
    pub preservation_sequences: Vec<GeneSequence>,
    /// `preservation_drift <= preservation_tolerance`.
    pub preserved: bool,
}

fn sq_dist(a: &[f64], b: Point) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Continuous optimization followed by nearest-variant snapping.
pub fn project_targets(model: &GanModel, targets: &[Point], config: &InversionConfig) -> Result<Projection> {
    model.generate(&GeneSequence(vec![0; model.dims().n_g]))?;
    let dims = model.dims();
    let d = dims.latent_dim();
    let mut rng = RandomStream::new(config.seed).split("projection-init");
    let mut mean = vec![0.0; d];
    let n_init = config.init_samples.max(1);
    for _ in 0..n_init {
        let code = model.genome.assemble(&sample_sequence(&dims, &mut rng))?;
        for (m, v) in mean.iter_mut().zip(&code.0) {
            *m += v / n_init as f64;
        }
    }
    let gen = &model.generator;
    let mut out = Projection {
        latents: Vec::new(),
        continuous_errors: Vec::new(),
        sequences: Vec::new(),
        snap_distances: Vec::new(),
        snapped_errors: Vec::new(),
    };
    for (t, &target) in targets.iter().enumerate() {
        let mut z = mean.clone();
        let mut opt = AdamState::new(
            AdamConfig {
                learning_rate: config.latent_lr,
                ..AdamConfig::default()
            },
            d,
        );
        for step in 0..config.latent_steps {
            let (y, cache) = gen.forward(&z)?;
            let err = sq_dist(&y, target);
            if !err.is_finite() {
                return Err(Error::NonFiniteLoss {
                    step,
                    what: format!("projection of target {t}"),
                });
            }
            let dy = [2.0 * (y[0] - target[0]), 2.0 * (y[1] - target[1])];
            let dz = gen.input_gradient(&cache, &dy)?.gradient;
            opt.step(&mut z, &dz)?;
        }
        let err = sq_dist(&gen.predict(&z)?, target);
        let code = LatentCode(z);
        let (seq, dist) = model.genome.snap_nearest(&code, config.metric)?;
        let snapped = sq_dist(&gen.predict(&model.genome.assemble(&seq)?.0)?, target);
        out.latents.push(code);
        out.continuous_errors.push(err);
        out.sequences.push(seq);
        out.snap_distances.push(dist);
        out.snapped_errors.push(snapped);
    }
    Ok(out)
}

/// Fine-tuning objective and gradients for the current model.
struct Objective {
    loss: f64,
    genome_grad: Vec<f64>,
    generator_grad: Vec<f64>,
}

fn objective(
    model: &GanModel,
    targets: &[Point],
    seqs: &[GeneSequence],
    frozen: &[(GeneSequence, Point)],
    lambda: f64,
) -> Result<Objective> {
    let dims = model.dims();
    let gen = &model.generator;
    let mut genome_grad = vec![0.0; dims.embedding_len()];
    let mut generator_grad = gen.zero_grad();
    let mut loss = 0.0;
    let mut accumulate = |seq: &GeneSequence, target: Point, weight: f64| -> Result<()> {
        let code = model.genome.assemble(seq)?;
        let (y, cache) = gen.forward(&code.0)?;
        loss += weight * sq_dist(&y, target);
        let dy = [2.0 * weight * (y[0] - target[0]), 2.0 * weight * (y[1] - target[1])];
        let dz = gen.backward_acc(&cache, &dy, &mut generator_grad)?;
        route_gradient(&dims, seq, &dz, &mut genome_grad);
        Ok(())
    };
    let nt = targets.len().max(1) as f64;
    for (seq, &t) in seqs.iter().zip(targets) {
        accumulate(seq, t, 1.0 / nt)?;
    }
    if lambda > 0.0 {
        let np = frozen.len().max(1) as f64;
        for (seq, y0) in frozen {
            accumulate(seq, *y0, lambda / np)?;
        }
    }
    Ok(Objective {
        loss,
        genome_grad,
        generator_grad,
    })
}

/// Projects, snaps (euclidean), and fine-tunes the model on the snapped
/// sequences with a preservation penalty on a frozen random batch.
pub fn inversion_finetune(model: &GanModel, targets: &[Point], config: &InversionConfig) -> Result<Inversion> {
    let mut cfg = config.clone();
    cfg.metric = Metric::Euclidean;
    let projection = project_targets(model, targets, &cfg)?;
    let seqs = projection.sequences.clone();

    let dims = model.dims();
    let mut rng = RandomStream::new(config.seed).split("preservation");
    let frozen: Vec<(GeneSequence, Point)> = (0..config.preservation_batch)
        .map(|_| {
            let s = sample_sequence(&dims, &mut rng);
            let y = model.generate(&s)?;
            Ok((s, y))
        })
        .collect::<Result<_>>()?;

    let mut tuned = model.clone();
    let initial_loss = {
        let lam = if config.lambda_pres.is_finite() { config.lambda_pres } else { 0.0 };
        objective(&tuned, targets, &seqs, &frozen, lam)?.loss
    };
    if config.lambda_pres.is_finite() {
        let adam = AdamConfig {
            learning_rate: config.finetune_lr,
            ..AdamConfig::default()
        };
        let mut genome_opt = AdamState::new(adam, dims.embedding_len());
        let mut gen_opt = AdamState::new(adam, tuned.generator.param_count());
        for step in 0..config.finetune_steps {
            let obj = objective(&tuned, targets, &seqs, &frozen, config.lambda_pres)?;
            if !obj.loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    step,
                    what: "inversion fine-tuning".into(),
                });
            }
            genome_opt.step(tuned.genome.embeddings_mut(), &obj.genome_grad)?;
            if config.finetune_generator {
                gen_opt.step(tuned.generator.params_mut(), &obj.generator_grad)?;
            }
        }
    }

    let errors = seqs
        .iter()
        .zip(targets)
        .map(|(s, &t)| Ok(sq_dist(&tuned.generate(s)?, t)))
        .collect::<Result<Vec<_>>>()?;
    let preservation_drift = if frozen.is_empty() {
        0.0
    } else {
        let mut total = 0.0;
        for (s, y0) in &frozen {
            total += sq_dist(&tuned.generate(s)?, *y0).sqrt();
        }
        total / frozen.len() as f64
    };
    Ok(Inversion {
        model: tuned,
        projection,
        initial_loss,
        errors,
        preservation_drift,
        preserved: preservation_drift <= config.preservation_tolerance,
        preservation_sequences: frozen.into_iter().map(|(s, _)| s).collect(),
    })
}
