//! Adversarial training of the genome and generator on 2-D mixtures, the
//! Gaussian-prior baselines, and codebook inversion.

pub mod dataset;
pub mod inversion;
pub mod loss;
pub mod model;
pub mod trainer;

pub use dataset::{make_dataset, MixtureSpec, Point, ToyDataset};
pub use inversion::{inversion_finetune, project_targets, Inversion, InversionConfig, Projection};
pub use loss::{discriminator_loss, generator_loss_gaussian, generator_loss_genome};
pub use model::{GanModel, Prior, TrainConfig};
pub use trainer::{train_gan, GeneratorInputs, LogRecord, TrainReport, Trainer};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{GeneSequence, GenomeDims};
    use crate::numerics::{finite_diff_check_probes, Mlp, RandomStream};

    fn cfg(steps: usize) -> TrainConfig {
        TrainConfig {
            dims: GenomeDims { n_g: 3, n_v: 8, d_g: 2 },
            steps,
            batch_size: 4,
            generator_hidden: vec![16, 16],
            discriminator_hidden: vec![16, 16],
            seed: 21,
            log_every: 5,
            coverage_samples: 100,
            ..TrainConfig::default()
        }
    }

    fn data() -> ToyDataset {
        make_dataset(&MixtureSpec::two_modes(0.2, 256), 3).unwrap()
    }

    #[test]
    fn zero_steps_returns_initialization() {
        let c = cfg(0);
        let (m, report) = train_gan(&c, &data()).unwrap();
        assert_eq!(m, GanModel::init(&c).unwrap());
        assert!(report.records.is_empty());
        assert_eq!(report.mode_coverage.iter().sum::<usize>(), 100);
    }

    #[test]
    fn first_generator_step_only_moves_selected_variants() {
        let c = cfg(1);
        let d = data();
        let mut t = Trainer::new(&c, &d).unwrap();
        t.discriminator_step().unwrap();
        let before = t.model().genome.clone();
        let step = t.generator_step().unwrap();
        let GeneratorInputs::Sequences(seqs) = &step.inputs else {
            panic!("genome prior expected");
        };
        let dims = before.dims();
        let after = &t.model().genome;
        let mut touched = 0;
        for i in 0..dims.n_g {
            for j in 0..dims.n_v {
                let selected = seqs.iter().any(|s| s.0[i] == j);
                let off = dims.offset(i, j);
                let g = &step.loss.genome_grad[off..off + dims.d_g];
                if selected {
                    touched += 1;
                } else {
                    assert!(g.iter().all(|&v| v == 0.0));
                    assert_eq!(before.variant(i, j), after.variant(i, j));
                }
            }
        }
        assert!(touched > 0 && touched < dims.n_g * dims.n_v);
    }

    #[test]
    fn zero_rates_are_fixed_point() {
        let mut c = cfg(10);
        c.generator_lr = 0.0;
        c.discriminator_lr = 0.0;
        c.genome_lr = 0.0;
        c.r1_gamma = 0.0;
        let (m, _) = train_gan(&c, &data()).unwrap();
        assert_eq!(m, GanModel::init(&c).unwrap());
    }

    #[test]
    fn training_is_bit_reproducible() {
        let c = cfg(25);
        let d = data();
        let (a, ra) = train_gan(&c, &d).unwrap();
        let (b, rb) = train_gan(&c, &d).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert_eq!(ra.records.len(), 5);
        assert_eq!(ra.records.last().unwrap().step, 25);
        assert_ne!(a, GanModel::init(&c).unwrap());
    }

    #[test]
    fn gaussian_priors_train() {
        for prior in [Prior::Gaussian, Prior::GaussianMapping] {
            let mut c = cfg(10);
            c.prior = prior;
            let (m, r) = train_gan(&c, &data()).unwrap();
            assert_eq!(m.prior, prior);
            assert_eq!(r.steps_completed, 10);
            // genome is untouched under gaussian priors
            assert_eq!(m.genome, GanModel::init(&c).unwrap().genome);
        }
    }

    #[test]
    fn empty_dataset_rejected() {
        let mut d = data();
        d.points.clear();
        assert!(Trainer::new(&cfg(1), &d).is_err());
    }

    fn probes(rng: &mut RandomStream, n: usize) -> Vec<usize> {
        (0..50).map(|_| rng.index(n)).collect()
    }

    #[test]
    fn discriminator_loss_gradient_with_r1() {
        let m = GanModel::init(&cfg(0)).unwrap();
        let mut rng = RandomStream::new(4);
        let real: Vec<Point> = (0..3).map(|_| [rng.gaussian(), rng.gaussian()]).collect();
        let fake: Vec<Point> = (0..3).map(|_| [rng.gaussian(), rng.gaussian()]).collect();
        let out = discriminator_loss(&m.discriminator, &real, &fake, 2.0).unwrap();
        let layers = m.discriminator.layers().to_vec();
        let f = |p: &[f64]| {
            let d = Mlp::from_parts(layers.clone(), p.to_vec()).unwrap();
            discriminator_loss(&d, &real, &fake, 2.0).unwrap().loss
        };
        let idx = probes(&mut rng, m.discriminator.param_count());
        let err = finite_diff_check_probes(f, m.discriminator.params(), &out.grad, 1e-6, &idx);
        assert!(err <= 1e-5, "{err}");
    }

    #[test]
    fn generator_pipeline_gradient() {
        let m = GanModel::init(&cfg(0)).unwrap();
        let seqs = vec![GeneSequence(vec![0, 3, 7]), GeneSequence(vec![5, 3, 1])];
        let out = generator_loss_genome(&m.generator, &m.discriminator, &m.genome, &seqs).unwrap();
        let mut rng = RandomStream::new(6);
        let dims = m.dims();
        let f = |e: &[f64]| {
            let g = crate::genome::Genome::from_parts(dims, 0, e.to_vec()).unwrap();
            generator_loss_genome(&m.generator, &m.discriminator, &g, &seqs).unwrap().loss
        };
        let idx = probes(&mut rng, dims.embedding_len());
        let err = finite_diff_check_probes(f, m.genome.embeddings(), &out.genome_grad, 1e-6, &idx);
        assert!(err <= 1e-5, "{err}");
    }
}
