use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::Point;
use crate::error::{Error, Result};
use crate::genome::{GeneSequence, Genome, GenomeDims, LatentCode};
use crate::numerics::{Activation, Mlp, RandomStream};

/// Where the generator's input comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prior {
    /// Concatenated genome variants.
    Genome,
    /// `z ~ N(0, I)` fed straight to the generator.
    Gaussian,
    /// `z ~ N(0, I)` pushed through a learned mapping network first.
    GaussianMapping,
}

impl Prior {
    pub fn name(self) -> &'static str {
        match self {
            Prior::Genome => "genome",
            Prior::Gaussian => "gaussian",
            Prior::GaussianMapping => "gaussian-mapping",
        }
    }
}

impl fmt::Display for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Prior {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "genome" => Ok(Prior::Genome),
            "gaussian" => Ok(Prior::Gaussian),
            "gaussian-mapping" => Ok(Prior::GaussianMapping),
            other => Err(Error::InvalidConfig(format!("unknown prior `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub dims: GenomeDims,
    pub prior: Prior,
    pub steps: usize,
    pub batch_size: usize,
    pub generator_lr: f64,
    pub discriminator_lr: f64,
    pub genome_lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub r1_gamma: f64,
    pub seed: u64,
    pub generator_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    /// Number of affine layers in the mapping network (gaussian-mapping prior).
    pub mapping_layers: usize,
    pub log_every: usize,
    /// Generated samples used for the final mode-coverage histogram.
    pub coverage_samples: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dims: GenomeDims {
                n_g: 8,
                n_v: 16,
                d_g: 4,
            },
            prior: Prior::Genome,
            steps: 20_000,
            batch_size: 64,
            generator_lr: 1e-3,
            discriminator_lr: 1e-3,
            genome_lr: 1e-3,
            beta1: 0.5,
            beta2: 0.99,
            r1_gamma: 1.0,
            seed: 0,
            generator_hidden: vec![64, 64, 64],
            discriminator_hidden: vec![64, 64, 64],
            mapping_layers: 2,
            log_every: 100,
            coverage_samples: 1000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.dims.validate()?;
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be positive".into()));
        }
        if self.log_every == 0 {
            return Err(Error::InvalidConfig("log interval must be positive".into()));
        }
        for (name, v) in [
            ("generator_lr", self.generator_lr),
            ("discriminator_lr", self.discriminator_lr),
            ("genome_lr", self.genome_lr),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!("{name} = {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::InvalidConfig("Adam betas must lie in [0, 1)".into()));
        }
        if !self.r1_gamma.is_finite() || self.r1_gamma < 0.0 {
            return Err(Error::InvalidConfig(format!("r1_gamma = {}", self.r1_gamma)));
        }
        if self.prior == Prior::GaussianMapping && self.mapping_layers == 0 {
            return Err(Error::InvalidConfig("mapping network needs at least one layer".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GanModel {
    pub prior: Prior,
    /// Always present; for Gaussian priors it only fixes the latent width.
    pub genome: Genome,
    pub generator: Mlp,
    pub discriminator: Mlp,
    pub mapping: Option<Mlp>,
}

impl GanModel {
    /// Fresh initialization. Every part draws from its own child of
    /// `RandomStream::new(config.seed)`.
    pub fn init(config: &TrainConfig) -> Result<Self> {
        config.validate()?;
        let root = RandomStream::new(config.seed);
        let d = config.dims.latent_dim();
        let genome_seed = root.split("genome").next_u64();
        let genome = Genome::init(config.dims, genome_seed)?;

        let mut widths = vec![d];
        widths.extend(&config.generator_hidden);
        widths.push(2);
        let generator = Mlp::new(
            &widths,
            Activation::leaky(),
            Activation::Identity,
            &mut root.split("generator"),
        )?;

        let mut widths = vec![2];
        widths.extend(&config.discriminator_hidden);
        widths.push(1);
        let discriminator = Mlp::new(
            &widths,
            Activation::leaky(),
            Activation::Identity,
            &mut root.split("discriminator"),
        )?;

        let mapping = match config.prior {
            Prior::GaussianMapping => Some(Mlp::new(
                &vec![d; config.mapping_layers + 1],
                Activation::leaky(),
                Activation::Identity,
                &mut root.split("mapping"),
            )?),
            _ => None,
        };
        let model = Self {
            prior: config.prior,
            genome,
            generator,
            discriminator,
            mapping,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.genome.dims().latent_dim();
        if self.generator.input_dim() != d || self.generator.output_dim() != 2 {
            return Err(Error::InvalidConfig(format!(
                "generator must map {d} -> 2, got {} -> {}",
                self.generator.input_dim(),
                self.generator.output_dim()
            )));
        }
        if self.discriminator.input_dim() != 2 || self.discriminator.output_dim() != 1 {
            return Err(Error::InvalidConfig("discriminator must map 2 -> 1".into()));
        }
        match (&self.mapping, self.prior) {
            (Some(m), Prior::GaussianMapping) => {
                if m.input_dim() != d || m.output_dim() != d {
                    return Err(Error::InvalidConfig(format!("mapping must map {d} -> {d}")));
                }
            }
            (None, Prior::GaussianMapping) => {
                return Err(Error::InvalidConfig("gaussian-mapping prior without mapping network".into()))
            }
            (Some(_), _) => {
                return Err(Error::InvalidConfig("mapping network present for non-mapping prior".into()))
            }
            (None, _) => {}
        }
        Ok(())
    }

    pub fn dims(&self) -> GenomeDims {
        self.genome.dims()
    }

    fn require_genome(&self) -> Result<()> {
        if self.prior != Prior::Genome {
            return Err(Error::PriorMismatch {
                expected: Prior::Genome.name(),
                actual: self.prior.name(),
            });
        }
        Ok(())
    }

    /// Generator output for a latent code.
    pub fn generate_code(&self, code: &LatentCode) -> Result<Point> {
        let y = self.generator.predict(&code.0)?;
        Ok([y[0], y[1]])
    }

    /// `G(V_k)`.
    pub fn generate(&self, seq: &GeneSequence) -> Result<Point> {
        self.require_genome()?;
        self.generate_code(&self.genome.assemble(seq)?)
    }

    /// Generator input for a Gaussian prior: `z`, or `Mapping(z)` when a
    /// mapping network is present. Consumes `d` Gaussian draws.
    pub fn gaussian_latent(&self, rng: &mut RandomStream) -> Result<Vec<f64>> {
        if self.prior == Prior::Genome {
            return Err(Error::PriorMismatch {
                expected: "gaussian",
                actual: self.prior.name(),
            });
        }
        let z = rng.gaussian_vec(self.dims().latent_dim());
        match &self.mapping {
            Some(m) => m.predict(&z),
            None => Ok(z),
        }
    }

    pub fn gaussian_prior_generate(&self, rng: &mut RandomStream) -> Result<Point> {
        let w = self.gaussian_latent(rng)?;
        self.generate_code(&LatentCode(w))
    }

    /// Discriminator logit.
    pub fn discriminate(&self, p: Point) -> Result<f64> {
        Ok(self.discriminator.predict(&p)?[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::LayerSpec;

    fn constant_generator(d: usize, bias: [f64; 2]) -> Mlp {
        let mut params = vec![0.0; 2 * d];
        params.extend(bias);
        Mlp::from_parts(
            vec![LayerSpec {
                inputs: d,
                outputs: 2,
                activation: Activation::Identity,
            }],
            params,
        )
        .unwrap()
    }

    fn small_config(prior: Prior) -> TrainConfig {
        TrainConfig {
            dims: GenomeDims { n_g: 2, n_v: 3, d_g: 2 },
            prior,
            generator_hidden: vec![8],
            discriminator_hidden: vec![8],
            ..TrainConfig::default()
        }
    }

    #[test]
    fn generate_is_pure_and_constant_map_works() {
        let mut m = GanModel::init(&small_config(Prior::Genome)).unwrap();
        let k = GeneSequence(vec![1, 2]);
        assert_eq!(m.generate(&k).unwrap(), m.generate(&k).unwrap());
        let a = GeneSequence(vec![0, 0]);
        let code = m.genome.interpolate(&a, &k, 0.0).unwrap();
        assert_eq!(m.generate_code(&code).unwrap(), m.generate(&a).unwrap());
        m.generator = constant_generator(4, [1.5, -0.5]);
        for s in [vec![0, 0], vec![2, 1]] {
            assert_eq!(m.generate(&GeneSequence(s)).unwrap(), [1.5, -0.5]);
        }
    }

    #[test]
    fn prior_mismatch_errors() {
        let g = GanModel::init(&small_config(Prior::Gaussian)).unwrap();
        assert!(matches!(
            g.generate(&GeneSequence(vec![0, 0])),
            Err(Error::PriorMismatch { .. })
        ));
        let d = GanModel::init(&small_config(Prior::Genome)).unwrap();
        assert!(d.gaussian_prior_generate(&mut RandomStream::new(0)).is_err());
    }

    #[test]
    fn gaussian_prior_pass_through() {
        let mut m = GanModel::init(&small_config(Prior::Gaussian)).unwrap();
        let mut a = RandomStream::new(5);
        let mut b = RandomStream::new(5);
        assert_eq!(m.gaussian_latent(&mut a).unwrap(), b.gaussian_vec(4));
        m.generator = constant_generator(4, [0.25, 3.0]);
        assert_eq!(m.gaussian_prior_generate(&mut a).unwrap(), [0.25, 3.0]);
    }

    #[test]
    fn identity_mapping_constant_generator() {
        let mut m = GanModel::init(&small_config(Prior::GaussianMapping)).unwrap();
        let mut eye = vec![0.0; 16];
        for i in 0..4 {
            eye[i * 4 + i] = 1.0;
        }
        eye.extend([0.0; 4]);
        m.mapping = Some(
            Mlp::from_parts(
                vec![LayerSpec { inputs: 4, outputs: 4, activation: Activation::Identity }],
                eye,
            )
            .unwrap(),
        );
        let mut a = RandomStream::new(8);
        let mut b = RandomStream::new(8);
        assert_eq!(m.gaussian_latent(&mut a).unwrap(), b.gaussian_vec(4));
        m.generator = constant_generator(4, [-1.0, 2.0]);
        assert_eq!(m.gaussian_prior_generate(&mut a).unwrap(), [-1.0, 2.0]);
    }

    #[test]
    fn gaussian_latent_mean_near_zero() {
        let m = GanModel::init(&small_config(Prior::Gaussian)).unwrap();
        let mut rng = RandomStream::new(31);
        let n = 100_000;
        let mut sum = [0.0; 4];
        for _ in 0..n {
            for (s, v) in sum.iter_mut().zip(m.gaussian_latent(&mut rng).unwrap()) {
                *s += v;
            }
        }
        for s in sum {
            assert!((s / n as f64).abs() < 0.02);
        }
    }

    #[test]
    fn init_is_reproducible() {
        let c = small_config(Prior::GaussianMapping);
        assert_eq!(GanModel::init(&c).unwrap(), GanModel::init(&c).unwrap());
        let mut bad = c.clone();
        bad.batch_size = 0;
        assert!(GanModel::init(&bad).is_err());
    }
}
