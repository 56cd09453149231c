//! Alternating discriminator / generator updates.

use log::{debug, info};
use serde::{Deserialize, Serialize};

use super::dataset::{nearest, Point, ToyDataset};
use super::loss::{discriminator_loss, generator_loss_gaussian, generator_loss_genome, DiscriminatorLoss, GeneratorLoss};
use super::model::{GanModel, Prior, TrainConfig};
use crate::error::{Error, Result};
use crate::genome::{sample_sequence, GeneSequence};
use crate::numerics::{AdamConfig, AdamState, RandomStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    /// Last step of the interval (1-based).
    pub step: usize,
    pub d_loss: f64,
    pub g_loss: f64,
    /// Mean discriminator logit on real points.
    pub d_real_mean: f64,
    /// Mean discriminator logit on generated points.
    pub d_fake_mean: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub records: Vec<LogRecord>,
    /// Generated samples per nearest data mode at the end of training.
    pub mode_coverage: Vec<usize>,
    pub steps_completed: usize,
}

#[derive(Debug, Default, Clone, Copy)]
struct Interval {
    n: usize,
    d_loss: f64,
    g_loss: f64,
    real: f64,
    fake: f64,
}

/// What the generator consumed in one step.
#[derive(Debug, Clone)]
pub enum GeneratorInputs {
    Sequences(Vec<GeneSequence>),
    Gaussian(Vec<Vec<f64>>),
}

#[derive(Debug, Clone)]
pub struct GeneratorStep {
    pub inputs: GeneratorInputs,
    pub loss: GeneratorLoss,
}

pub struct Trainer<'a> {
    config: TrainConfig,
    data: &'a ToyDataset,
    model: GanModel,
    generator_opt: AdamState,
    discriminator_opt: AdamState,
    genome_opt: AdamState,
    mapping_opt: Option<AdamState>,
    rng: RandomStream,
    step: usize,
    interval: Interval,
    report: TrainReport,
}

impl<'a> Trainer<'a> {
    pub fn new(config: &TrainConfig, data: &'a ToyDataset) -> Result<Self> {
        if data.points.is_empty() {
            return Err(Error::InvalidConfig("dataset is empty".into()));
        }
        let model = GanModel::init(config)?;
        let adam = |lr: f64| AdamConfig {
            learning_rate: lr,
            beta1: config.beta1,
            beta2: config.beta2,
            epsilon: 1e-8,
        };
        let generator_opt = AdamState::new(adam(config.generator_lr), model.generator.param_count());
        let discriminator_opt = AdamState::new(adam(config.discriminator_lr), model.discriminator.param_count());
        let genome_opt = AdamState::new(adam(config.genome_lr), model.genome.embeddings().len());
        let mapping_opt = model
            .mapping
            .as_ref()
            .map(|m| AdamState::new(adam(config.generator_lr), m.param_count()));
        Ok(Self {
            config: config.clone(),
            data,
            model,
            generator_opt,
            discriminator_opt,
            genome_opt,
            mapping_opt,
            rng: RandomStream::new(config.seed).split("train"),
            step: 0,
            interval: Interval::default(),
            report: TrainReport::default(),
        })
    }

    pub fn model(&self) -> &GanModel {
        &self.model
    }

    pub fn steps_done(&self) -> usize {
        self.step
    }

    fn sample_real(&mut self) -> Vec<Point> {
        let n = self.data.points.len();
        (0..self.config.batch_size)
            .map(|_| self.data.points[self.rng.index(n)])
            .collect()
    }

    fn sample_inputs(&mut self) -> GeneratorInputs {
        let b = self.config.batch_size;
        let dims = self.model.dims();
        match self.model.prior {
            Prior::Genome => GeneratorInputs::Sequences((0..b).map(|_| sample_sequence(&dims, &mut self.rng)).collect()),
            _ => GeneratorInputs::Gaussian((0..b).map(|_| self.rng.gaussian_vec(dims.latent_dim())).collect()),
        }
    }

    fn generate_inputs(&self, inputs: &GeneratorInputs) -> Result<Vec<Point>> {
        match inputs {
            GeneratorInputs::Sequences(seqs) => seqs.iter().map(|s| self.model.generate(s)).collect(),
            GeneratorInputs::Gaussian(zs) => zs
                .iter()
                .map(|z| {
                    let w = match &self.model.mapping {
                        Some(m) => m.predict(z)?,
                        None => z.clone(),
                    };
                    let y = self.model.generator.predict(&w)?;
                    Ok([y[0], y[1]])
                })
                .collect(),
        }
    }

    fn check_finite(&self, value: f64, what: &str) -> Result<()> {
        if value.is_finite() {
            return Ok(());
        }
        Err(Error::Diverged {
            step: self.step,
            what: what.to_string(),
            report: Box::new(self.report.clone()),
        })
    }

    /// One discriminator update on a fresh real batch and a fresh fake batch.
    pub fn discriminator_step(&mut self) -> Result<DiscriminatorLoss> {
        let real = self.sample_real();
        let inputs = self.sample_inputs();
        let fake = self.generate_inputs(&inputs)?;
        let out = discriminator_loss(&self.model.discriminator, &real, &fake, self.config.r1_gamma)?;
        self.check_finite(out.loss, "discriminator loss")?;
        self.discriminator_opt
            .step(self.model.discriminator.params_mut(), &out.grad)?;
        Ok(out)
    }

    /// One generator update; for the genome prior the genome is updated too.
    pub fn generator_step(&mut self) -> Result<GeneratorStep> {
        let inputs = self.sample_inputs();
        let loss = match &inputs {
            GeneratorInputs::Sequences(seqs) => generator_loss_genome(
                &self.model.generator,
                &self.model.discriminator,
                &self.model.genome,
                seqs,
            )?,
            GeneratorInputs::Gaussian(zs) => generator_loss_gaussian(
                &self.model.generator,
                self.model.mapping.as_ref(),
                &self.model.discriminator,
                zs,
            )?,
        };
        self.check_finite(loss.loss, "generator loss")?;
        self.generator_opt
            .step(self.model.generator.params_mut(), &loss.generator_grad)?;
        if self.model.prior == Prior::Genome {
            self.genome_opt
                .step(self.model.genome.embeddings_mut(), &loss.genome_grad)?;
        }
        if let (Some(map), Some(opt), Some(g)) = (self.model.mapping.as_mut(), self.mapping_opt.as_mut(), &loss.mapping_grad) {
            opt.step(map.params_mut(), g)?;
        }
        Ok(GeneratorStep { inputs, loss })
    }

    /// Discriminator step, generator step, bookkeeping.
    pub fn step(&mut self) -> Result<()> {
        let d = self.discriminator_step()?;
        let g = self.generator_step()?;
        self.step += 1;
        let iv = &mut self.interval;
        iv.n += 1;
        iv.d_loss += d.loss;
        iv.g_loss += g.loss.loss;
        iv.real += d.real_mean;
        iv.fake += d.fake_mean;
        if self.step.is_multiple_of(self.config.log_every) || self.step == self.config.steps {
            self.flush_interval();
        }
        Ok(())
    }

    fn flush_interval(&mut self) {
        let iv = std::mem::take(&mut self.interval);
        if iv.n == 0 {
            return;
        }
        let n = iv.n as f64;
        let rec = LogRecord {
            step: self.step,
            d_loss: iv.d_loss / n,
            g_loss: iv.g_loss / n,
            d_real_mean: iv.real / n,
            d_fake_mean: iv.fake / n,
        };
        debug!(
            "step {} d_loss {:.4} g_loss {:.4} real {:.3} fake {:.3}",
            rec.step, rec.d_loss, rec.g_loss, rec.d_real_mean, rec.d_fake_mean
        );
        self.report.records.push(rec);
    }

    pub fn finish(mut self) -> Result<(GanModel, TrainReport)> {
        self.flush_interval();
        let mut rng = RandomStream::new(self.config.seed).split("coverage");
        let centers = &self.data.spec.centers;
        let mut coverage = vec![0usize; centers.len()];
        let dims = self.model.dims();
        for _ in 0..self.config.coverage_samples {
            let p = match self.model.prior {
                Prior::Genome => self.model.generate(&sample_sequence(&dims, &mut rng))?,
                _ => self.model.gaussian_prior_generate(&mut rng)?,
            };
            coverage[nearest(centers, p)] += 1;
        }
        self.report.mode_coverage = coverage;
        self.report.steps_completed = self.step;
        Ok((self.model, self.report))
    }
}

/// Trains from scratch for `config.steps` alternating updates.
pub fn train_gan(config: &TrainConfig, data: &ToyDataset) -> Result<(GanModel, TrainReport)> {
    let mut trainer = Trainer::new(config, data)?;
    for _ in 0..config.steps {
        trainer.step()?;
        if trainer.steps_done() % (config.log_every * 10) == 0 {
            if let Some(r) = trainer.report.records.last() {
                info!(
                    "step {}/{}: d_loss {:.4} g_loss {:.4}",
                    r.step, config.steps, r.d_loss, r.g_loss
                );
            }
        }
    }
    trainer.finish()
}
