//! Post-hoc analyses of a trained genome: which positions control an
//! attribute, which variants the discriminator dislikes, how well attributes
//! can be read off a latent code, and how attributes co-vary.

mod correlation;
mod probe;
mod realness;
mod scores;

pub use correlation::{attribute_correlation, pearson, CorrelationMatrix};
pub use probe::{disentanglement_probe, probe_attribute, ProbeConfig, ProbeData, ProbeReport, ProbeResult, SplitSizes};
pub use realness::{prune_model, pruning_plan, realness_table, PruningPlan, RealnessTable};
pub use scores::{gene_scores, GeneScoreTable};
