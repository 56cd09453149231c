//! Non-saturating logistic GAN losses with R1, as pure batch functions.
//!
//! Discriminator: `mean softplus(-D(x_real)) + mean softplus(D(x_fake)) + γ/2 · mean |∇ₓD(x_real)|²`.
//! Generator: `mean softplus(-D(G(input)))`.

use super::dataset::Point;
use crate::error::Result;
use crate::genome::{route_gradient, GeneSequence, Genome};
use crate::numerics::{sigmoid, softplus, Mlp};

#[derive(Debug, Clone)]
pub struct DiscriminatorLoss {
    /// Total loss including the R1 term.
    pub loss: f64,
    pub r1: f64,
    pub grad: Vec<f64>,
    pub real_mean: f64,
    pub fake_mean: f64,
}

pub fn discriminator_loss(disc: &Mlp, real: &[Point], fake: &[Point], r1_gamma: f64) -> Result<DiscriminatorLoss> {
    let mut grad = disc.zero_grad();
    let mut loss = 0.0;
    let mut r1 = 0.0;
    let mut real_sum = 0.0;
    let mut fake_sum = 0.0;
    let nr = real.len().max(1) as f64;
    let nf = fake.len().max(1) as f64;
    for p in real {
        let (out, cache) = disc.forward(p)?;
        let logit = out[0];
        real_sum += logit;
        loss += softplus(-logit) / nr;
        disc.backward_acc(&cache, &[-sigmoid(-logit) / nr], &mut grad)?;
        if r1_gamma > 0.0 {
            let ig = disc.input_gradient(&cache, &[1.0])?;
            let sq: f64 = ig.gradient.iter().map(|g| g * g).sum();
            r1 += 0.5 * r1_gamma * sq / nr;
            let gbar: Vec<f64> = ig.gradient.iter().map(|g| r1_gamma * g / nr).collect();
            disc.input_gradient_backward(&cache, &ig, &gbar, &mut grad)?;
        }
    }
    for p in fake {
        let (out, cache) = disc.forward(p)?;
        let logit = out[0];
        fake_sum += logit;
        loss += softplus(logit) / nf;
        disc.backward_acc(&cache, &[sigmoid(logit) / nf], &mut grad)?;
    }
    Ok(DiscriminatorLoss {
        loss: loss + r1,
        r1,
        grad,
        real_mean: real_sum / nr,
        fake_mean: fake_sum / nf,
    })
}

#[derive(Debug, Clone)]
pub struct GeneratorLoss {
    pub loss: f64,
    pub generator_grad: Vec<f64>,
    /// Genome gradient (genome prior) or empty.
    pub genome_grad: Vec<f64>,
    /// Mapping-network gradient (gaussian-mapping prior).
    pub mapping_grad: Option<Vec<f64>>,
    pub fake_mean: f64,
}

/// Loss over generator inputs; returns the gradient for each input as well.
fn generator_core(gen: &Mlp, disc: &Mlp, inputs: &[Vec<f64>]) -> Result<(f64, Vec<f64>, Vec<Vec<f64>>, f64)> {
    let n = inputs.len().max(1) as f64;
    let mut grad = gen.zero_grad();
    let mut loss = 0.0;
    let mut fake_sum = 0.0;
    let mut input_grads = Vec::with_capacity(inputs.len());
    for x in inputs {
        let (y, gcache) = gen.forward(x)?;
        let (out, dcache) = disc.forward(&y)?;
        let logit = out[0];
        fake_sum += logit;
        loss += softplus(-logit) / n;
        let dy = disc.input_gradient(&dcache, &[-sigmoid(-logit) / n])?.gradient;
        input_grads.push(gen.backward_acc(&gcache, &dy, &mut grad)?);
    }
    Ok((loss, grad, input_grads, fake_sum / n))
}

/// Generator loss for genome-assembled codes. Only variants selected by
/// some sequence in the batch receive gradient.
pub fn generator_loss_genome(gen: &Mlp, disc: &Mlp, genome: &Genome, seqs: &[GeneSequence]) -> Result<GeneratorLoss> {
    let codes = seqs
        .iter()
        .map(|s| genome.assemble(s).map(|c| c.0))
        .collect::<Result<Vec<_>>>()?;
    let (loss, generator_grad, code_grads, fake_mean) = generator_core(gen, disc, &codes)?;
    let dims = genome.dims();
    let mut genome_grad = vec![0.0; dims.embedding_len()];
    for (s, g) in seqs.iter().zip(&code_grads) {
        route_gradient(&dims, s, g, &mut genome_grad);
    }
    Ok(GeneratorLoss {
        loss,
        generator_grad,
        genome_grad,
        mapping_grad: None,
        fake_mean,
    })
}

/// Generator loss for Gaussian draws `zs`, optionally through a mapping network.
pub fn generator_loss_gaussian(gen: &Mlp, mapping: Option<&Mlp>, disc: &Mlp, zs: &[Vec<f64>]) -> Result<GeneratorLoss> {
    let Some(map) = mapping else {
        let (loss, generator_grad, _, fake_mean) = generator_core(gen, disc, zs)?;
        return Ok(GeneratorLoss {
            loss,
            generator_grad,
            genome_grad: Vec::new(),
            mapping_grad: None,
            fake_mean,
        });
    };
    let mut ws = Vec::with_capacity(zs.len());
    let mut caches = Vec::with_capacity(zs.len());
    for z in zs {
        let (w, c) = map.forward(z)?;
        ws.push(w);
        caches.push(c);
    }
    let (loss, generator_grad, w_grads, fake_mean) = generator_core(gen, disc, &ws)?;
    let mut mgrad = map.zero_grad();
    for (c, g) in caches.iter().zip(&w_grads) {
        map.backward_acc(c, g, &mut mgrad)?;
    }
    Ok(GeneratorLoss {
        loss,
        generator_grad,
        genome_grad: Vec::new(),
        mapping_grad: Some(mgrad),
        fake_mean,
    })
}
