//! Compositional discrete latent codebooks for toy adversarial generators.
//!
//! A [`Genome`] holds `n_g` gene positions with `n_v` learnable variants each.
//! Sampling one variant per position and concatenating them gives a latent
//! code with `n_v^n_g` possible values from only `n_v * n_g * d_g` parameters.
//! The crate trains such a genome jointly with a small generator on 2-D
//! mixtures, then analyses it: per-variant attribute statistics, Bayesian
//! conditional sampling with temperature, gene importance scores,
//! realness-based pruning, projection and interpolation.

pub mod analysis;
pub mod attributes;
pub mod error;
pub mod genome;
pub mod io;
pub mod numerics;

pub use error::{Error, Result};
pub use genome::{GeneSequence, Genome, GenomeDims, LatentCode, Metric, Replacement};
pub use numerics::RandomStream;
pub mod training;
