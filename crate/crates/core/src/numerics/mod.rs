//! Deterministic numerics: random streams, dense kernels, MLPs, Adam and
//! finite-difference checks.

pub mod adam;
pub mod gradcheck;
pub mod mlp;
pub mod rng;
pub mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use gradcheck::{finite_diff_check, finite_diff_check_probes};
pub use mlp::{sigmoid, softplus, Activation, ForwardCache, InputGradient, LayerSpec, Mlp};
pub use rng::{box_muller, RandomStream};
pub use tensor::{DenseMatrix, DenseVector};
