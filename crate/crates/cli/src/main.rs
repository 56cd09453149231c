use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "genelab", version, about = "Train and analyse compositional latent codebooks on 2-D toy data")]
struct Cli {
    #[command(flatten)]
    shared: Shared,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Shared {
    /// Run configuration (JSON). Defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed of the command's random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Checkpoint to read (train writes it). Defaults to OUT/checkpoint.bin.
    #[arg(long, global = true)]
    checkpoint: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train the genome, generator and discriminator on the configured mixture.
    Train(TrainArgs),
    /// Draw uniformly random gene sequences and generate them.
    Sample(SampleArgs),
    /// Estimate per-variant attribute probabilities.
    Stats(StatsArgs),
    /// Sample conditioned on desired attribute values.
    CondSample(CondArgs),
    /// Score how strongly each gene position controls each attribute.
    GeneScores(StatsArgs),
    /// Replace the least realistic variants with copies of the most realistic ones.
    Prune(PruneArgs),
    /// Interpolate between two random gene sequences.
    Interp(InterpArgs),
    /// Project target points onto the genome.
    Project(ProjectArgs),
    /// Project, then fine-tune the genome towards the targets.
    Invert(ProjectArgs),
    /// Probe how well attributes can be predicted from latent codes.
    Probe(ProbeArgs),
    /// Pearson correlation between attributes over generated samples.
    Correlate(StatsArgs),
    /// Combinatorial capacity of a genome.
    Capacity(CapacityArgs),
    /// Scatter plot of the dataset and generated samples (SVG).
    Plot(PlotArgs),
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    ng: Option<usize>,
    #[arg(long)]
    nv: Option<usize>,
    #[arg(long)]
    dg: Option<usize>,
    /// genome | gaussian | gaussian-mapping
    #[arg(long)]
    prior: Option<genelab::training::Prior>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Number of samples.
    #[arg(long, default_value_t = 1000)]
    n: usize,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Monte Carlo batch size.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Pseudo-count pulling sparse cells toward the batch mean.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Read statistics from this CSV instead of estimating them.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CondArgs {
    /// Desired attribute value, e.g. `x>0=1`. Repeatable.
    #[arg(long = "cond", value_parser = parse_condition)]
    conditions: Vec<(String, bool)>,
    /// Sharpening temperature; 0 picks the most likely variant.
    #[arg(long, default_value_t = 1.0)]
    temp: f64,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[command(flatten)]
    stats: StatsArgs,
}

#[derive(Args, Debug)]
pub struct PruneArgs {
    /// Variants replaced per position.
    #[arg(long)]
    x: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

#[derive(Args, Debug)]
pub struct InterpArgs {
    #[arg(long)]
    seed_a: u64,
    #[arg(long)]
    seed_b: u64,
    /// Number of segments; outputs steps + 1 points.
    #[arg(long, default_value_t = 20)]
    steps: usize,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    /// CSV with `x` and `y` columns.
    #[arg(long)]
    targets: PathBuf,
    #[arg(long)]
    metric: Option<genelab::Metric>,
    /// Preservation weight; `inf` freezes the model.
    #[arg(long)]
    lambda_pres: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    /// Checkpoint trained with the gaussian-mapping prior.
    #[arg(long)]
    baseline: PathBuf,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
}

#[derive(Args, Debug)]
pub struct CapacityArgs {
    #[arg(long)]
    ng: usize,
    #[arg(long)]
    nv: usize,
    #[arg(long, default_value_t = 1)]
    dg: usize,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// Plot the `x`,`y` columns of this CSV instead of dataset + samples.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
}

fn parse_condition(s: &str) -> Result<(String, bool), String> {
    let (id, v) = s.rsplit_once('=').ok_or_else(|| format!("expected ATTR=0|1, got `{s}`"))?;
    let v = match v {
        "1" => true,
        "0" => false,
        _ => return Err(format!("condition value must be 0 or 1, got `{v}`")),
    };
    if id.is_empty() {
        return Err("empty attribute id".into());
    }
    Ok((id.to_string(), v))
}

impl Shared {
    pub fn out_dir(&self, config: &genelab::io::RunConfig) -> PathBuf {
        self.out
            .clone()
            .or_else(|| config.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn checkpoint_path(&self, out: &Path) -> PathBuf {
        self.checkpoint.clone().unwrap_or_else(|| out.join("checkpoint.bin"))
    }

    pub fn run_config(&self) -> Result<genelab::io::RunConfig> {
        match &self.config {
            Some(p) => genelab::io::RunConfig::load(p).with_context(|| format!("reading config {}", p.display())),
            None => Ok(genelab::io::RunConfig::default()),
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let s = &cli.shared;
    match cli.command {
        Command::Train(a) => commands::train(s, a),
        Command::Sample(a) => commands::sample(s, a),
        Command::Stats(a) => commands::stats(s, a),
        Command::CondSample(a) => commands::cond_sample(s, a),
        Command::GeneScores(a) => commands::gene_scores(s, a),
        Command::Prune(a) => commands::prune(s, a),
        Command::Interp(a) => commands::interp(s, a),
        Command::Project(a) => commands::project(s, a, false),
        Command::Invert(a) => commands::project(s, a, true),
        Command::Probe(a) => commands::probe(s, a),
        Command::Correlate(a) => commands::correlate(s, a),
        Command::Capacity(a) => commands::capacity(a),
        Command::Plot(a) => commands::plot(s, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("STYLEGENES_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

pub(crate) fn ensure(cond: bool, msg: impl Into<String>) -> Result<()> {
    if !cond {
        bail!("{}", msg.into());
    }
    Ok(())
}
