use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use log::info;
use serde_json::json;

use genelab::analysis::{self, ProbeData, ProbeReport};
use genelab::attributes::{
    collect_samples, conditional_distributions, estimate_stats, sample_conditional, AttributeStats, ConditionalSpec,
    SampleBatch,
};
use genelab::genome::{capacity as genome_capacity, sample_sequence, scientific, trainable_param_count};
use genelab::io::{self, Checkpoint, RunConfig};
use genelab::training::{self, make_dataset, GanModel, Point, Prior};
use genelab::{GeneSequence, GenomeDims, LatentCode, RandomStream};

use crate::{ensure, CapacityArgs, CondArgs, InterpArgs, PlotArgs, ProbeArgs, ProjectArgs, PruneArgs, SampleArgs, Shared, StatsArgs, TrainArgs};

struct Loaded {
    config: RunConfig,
    out: std::path::PathBuf,
    ckpt: Checkpoint,
    seed: u64,
}

fn open(s: &Shared) -> Result<Loaded> {
    let config = s.run_config()?;
    let out = s.out_dir(&config);
    let path = s.checkpoint_path(&out);
    let ckpt = io::load_checkpoint(&path).with_context(|| format!("loading checkpoint {}", path.display()))?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    Ok(Loaded {
        config,
        out,
        ckpt,
        seed: s.seed.unwrap_or(0),
    })
}

fn sample_stream(seed: u64) -> RandomStream {
    RandomStream::new(seed).split("sample")
}

/// Generated points from either prior.
fn generate_points(model: &GanModel, n: usize, rng: &mut RandomStream) -> Result<Vec<Point>> {
    let dims = model.dims();
    (0..n)
        .map(|_| {
            Ok(match model.prior {
                Prior::Genome => model.generate(&sample_sequence(&dims, rng))?,
                _ => model.gaussian_prior_generate(rng)?,
            })
        })
        .collect()
}

fn print_frequencies(batch: &SampleBatch) {
    for (l, id) in batch.attribute_ids.iter().enumerate() {
        let col = batch.attribute_column(l);
        let present = col.iter().filter(|&&p| p >= 0.5).count();
        let n = col.len().max(1) as f64;
        println!(
            "  {id:<14} frequency {:.4}  mean probability {:.4}",
            present as f64 / n,
            col.iter().sum::<f64>() / n
        );
    }
}

fn obtain_stats(c: &Loaded, args: &StatsArgs) -> Result<AttributeStats> {
    let dims = c.ckpt.model.dims();
    if let Some(p) = &args.stats {
        return io::read_stats_csv(p, dims, args.alpha).with_context(|| format!("reading {}", p.display()));
    }
    let mut rng = RandomStream::new(c.seed).split("stats");
    let batch = collect_samples(&c.ckpt.model, args.samples, &c.config.attributes, &mut rng)?;
    Ok(estimate_stats(&batch, dims, args.alpha)?)
}

pub fn train(s: &Shared, a: TrainArgs) -> Result<()> {
    let mut config = s.run_config()?;
    let t = &mut config.train;
    if let Some(v) = s.seed {
        t.seed = v;
    }
    if let Some(v) = a.steps {
        t.steps = v;
    }
    if let Some(v) = a.batch {
        t.batch_size = v;
    }
    if let Some(v) = a.prior {
        t.prior = v;
    }
    t.dims = GenomeDims {
        n_g: a.ng.unwrap_or(t.dims.n_g),
        n_v: a.nv.unwrap_or(t.dims.n_v),
        d_g: a.dg.unwrap_or(t.dims.d_g),
    };
    config.validate()?;
    let out = s.out_dir(&config);
    let data = make_dataset(&config.dataset, config.dataset_seed)?;
    info!("training {} steps on {} points", config.train.steps, data.points.len());
    let (model, report) = training::train_gan(&config.train, &data)?;
    let ckpt_path = s.checkpoint_path(&out);
    io::save_checkpoint(
        &ckpt_path,
        &Checkpoint {
            config: config.train.clone(),
            model,
            step: report.steps_completed,
        },
    )?;
    io::write_train_log_csv(&out.join("train_log.csv"), &report.records)?;
    io::write_json(&out.join("train_report.json"), &report)?;
    config.save(&out.join("config.json"))?;
    println!("trained {} steps", report.steps_completed);
    println!("mode coverage {:?}", report.mode_coverage);
    if let Some(last) = report.records.last() {
        println!(
            "final d_loss {:.4} g_loss {:.4} D(real) {:.4} D(fake) {:.4}",
            last.d_loss, last.g_loss, last.d_real_mean, last.d_fake_mean
        );
    }
    println!("checkpoint {}", ckpt_path.display());
    Ok(())
}

pub fn sample(s: &Shared, a: SampleArgs) -> Result<()> {
    let c = open(s)?;
    let model = &c.ckpt.model;
    let mut rng = sample_stream(c.seed);
    let path = c.out.join("samples.csv");
    if model.prior == Prior::Genome {
        let dims = model.dims();
        let seqs = (0..a.n).map(|_| sample_sequence(&dims, &mut rng)).collect();
        let batch = SampleBatch::from_sequences(model, seqs, &c.config.attributes)?;
        io::write_samples_csv(&path, &batch)?;
        println!("{} samples -> {}", batch.len(), path.display());
        print_frequencies(&batch);
    } else {
        let points = generate_points(model, a.n, &mut rng)?;
        let rows: Vec<_> = points.iter().enumerate().map(|(k, p)| (vec![k.to_string()], *p)).collect();
        io::write_points_csv(&path, &["index"], &rows)?;
        println!("{} samples -> {}", points.len(), path.display());
    }
    Ok(())
}

pub fn stats(s: &Shared, a: StatsArgs) -> Result<()> {
    let c = open(s)?;
    let st = obtain_stats(&c, &a)?;
    let path = c.out.join("stats.csv");
    io::write_stats_csv(&path, &st)?;
    let empty = st.empty_cells().len();
    println!(
        "stats for {} attributes over {} cells -> {}",
        st.num_attributes(),
        st.counts().len(),
        path.display()
    );
    if empty > 0 {
        println!("  {empty} cells had no samples");
    }
    for (l, id) in st.attribute_ids.iter().enumerate() {
        println!("  {id:<14} batch mean {:.4}", st.global_means[l]);
    }
    Ok(())
}

pub fn cond_sample(s: &Shared, a: CondArgs) -> Result<()> {
    let c = open(s)?;
    let st = obtain_stats(&c, &a.stats)?;
    let spec = ConditionalSpec {
        conditions: a.conditions.clone(),
        temperature: a.temp,
    };
    let dists = conditional_distributions(&st, &spec)?;
    let mut rng = sample_stream(c.seed);
    let seqs: Vec<GeneSequence> = (0..a.n).map(|_| sample_conditional(&dists, &mut rng)).collect();
    let batch = SampleBatch::from_sequences(&c.ckpt.model, seqs, &c.config.attributes)?;
    let path = c.out.join("cond_samples.csv");
    io::write_samples_csv(&path, &batch)?;
    let conds: Vec<String> = a.conditions.iter().map(|(id, v)| format!("{id}={}", *v as u8)).collect();
    println!(
        "{} samples at T={} given [{}] -> {}",
        batch.len(),
        a.temp,
        conds.join(", "),
        path.display()
    );
    print_frequencies(&batch);
    Ok(())
}

pub fn gene_scores(s: &Shared, a: StatsArgs) -> Result<()> {
    let c = open(s)?;
    let st = obtain_stats(&c, &a)?;
    let scores = analysis::gene_scores(&st);
    let path = c.out.join("gene_scores.csv");
    io::write_gene_scores_csv(&path, &scores)?;
    println!("gene scores -> {}", path.display());
    for (l, id) in scores.attribute_ids.iter().enumerate() {
        let top = scores.top_position(l);
        println!("  {id:<14} top position {top} (score {:.4})", scores.score(l, top));
    }
    Ok(())
}

fn mean_logit(model: &GanModel, seqs: &[GeneSequence]) -> Result<f64> {
    let mut total = 0.0;
    for q in seqs {
        total += model.discriminate(model.generate(q)?)?;
    }
    Ok(total / seqs.len().max(1) as f64)
}

pub fn prune(s: &Shared, a: PruneArgs) -> Result<()> {
    let c = open(s)?;
    let model = &c.ckpt.model;
    let dims = model.dims();
    let batch = collect_samples(model, a.samples, &[], &mut RandomStream::new(c.seed).split("realness"))?;
    let table = analysis::realness_table(model, &batch)?;
    let plan = analysis::pruning_plan(&table, a.x)?;
    let pruned = analysis::prune_model(model, &plan)?;

    let mut rng = RandomStream::new(c.seed).split("evaluate");
    let fresh: Vec<GeneSequence> = (0..a.samples).map(|_| sample_sequence(&dims, &mut rng)).collect();
    let before = mean_logit(model, &fresh)?;
    let after = mean_logit(&pruned, &fresh)?;

    io::write_realness_csv(&c.out.join("realness.csv"), &table)?;
    io::write_json(&c.out.join("pruning_plan.json"), &plan)?;
    let pruned_path = c.out.join("pruned.bin");
    io::save_checkpoint(
        &pruned_path,
        &Checkpoint {
            model: pruned,
            ..c.ckpt.clone()
        },
    )?;
    println!("pruned {} variants per position ({} replacements)", a.x, plan.replacements.len());
    println!("mean discriminator logit {before:.4} -> {after:.4}");
    println!("pruned checkpoint {}", pruned_path.display());
    Ok(())
}

pub fn interp(s: &Shared, a: InterpArgs) -> Result<()> {
    let c = open(s)?;
    ensure(a.steps >= 1, "--steps must be at least 1")?;
    let model = &c.ckpt.model;
    let dims = model.dims();
    let sa = sample_sequence(&dims, &mut RandomStream::new(a.seed_a));
    let sb = sample_sequence(&dims, &mut RandomStream::new(a.seed_b));
    let mut rows = Vec::with_capacity(a.steps + 1);
    for k in 0..=a.steps {
        let t = k as f64 / a.steps as f64;
        let p = model.generate_code(&model.genome.interpolate(&sa, &sb, t)?)?;
        rows.push((vec![t.to_string()], p));
    }
    let path = c.out.join("interp.csv");
    io::write_points_csv(&path, &["t"], &rows)?;
    println!("interpolated {sa} -> {sb} in {} steps -> {}", a.steps, path.display());
    Ok(())
}

pub fn project(s: &Shared, a: ProjectArgs, finetune: bool) -> Result<()> {
    let c = open(s)?;
    let targets = io::read_points_csv(&a.targets).with_context(|| format!("reading {}", a.targets.display()))?;
    let mut cfg = c.config.inversion.clone();
    if let Some(m) = a.metric {
        cfg.metric = m;
    }
    if let Some(l) = a.lambda_pres {
        cfg.lambda_pres = l;
    }
    if let Some(seed) = s.seed {
        cfg.seed = seed;
    }
    let model = &c.ckpt.model;
    if !finetune {
        let proj = training::project_targets(model, &targets, &cfg)?;
        let rows: Vec<_> = targets
            .iter()
            .enumerate()
            .map(|(k, t)| {
                let p = model.generate(&proj.sequences[k])?;
                Ok((
                    vec![
                        t[0].to_string(),
                        t[1].to_string(),
                        proj.sequences[k].to_string(),
                        proj.continuous_errors[k].to_string(),
                        proj.snapped_errors[k].to_string(),
                    ],
                    p,
                ))
            })
            .collect::<Result<_>>()?;
        let path = c.out.join("projection.csv");
        io::write_points_csv(
            &path,
            &["target_x", "target_y", "sequence", "continuous_error", "snapped_error"],
            &rows,
        )?;
        println!(
            "projected {} targets ({} metric): mean continuous error {:.5}, snapped {:.5} -> {}",
            targets.len(),
            cfg.metric,
            mean(&proj.continuous_errors),
            mean(&proj.snapped_errors),
            path.display()
        );
        return Ok(());
    }
    let inv = training::inversion_finetune(model, &targets, &cfg)?;
    let rows: Vec<_> = targets
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let p = inv.model.generate(&inv.projection.sequences[k])?;
            Ok((
                vec![
                    t[0].to_string(),
                    t[1].to_string(),
                    inv.projection.sequences[k].to_string(),
                    inv.projection.snapped_errors[k].to_string(),
                    inv.errors[k].to_string(),
                ],
                p,
            ))
        })
        .collect::<Result<_>>()?;
    let path = c.out.join("inversion.csv");
    io::write_points_csv(
        &path,
        &["target_x", "target_y", "sequence", "snapped_error", "finetuned_error"],
        &rows,
    )?;
    let ckpt_path = c.out.join("inverted.bin");
    io::save_checkpoint(
        &ckpt_path,
        &Checkpoint {
            model: inv.model.clone(),
            ..c.ckpt.clone()
        },
    )?;
    io::write_json(
        &c.out.join("inversion.json"),
        &json!({
            "targets": targets.len(),
            "metric": cfg.metric,
            "lambda_pres": if cfg.lambda_pres.is_finite() { json!(cfg.lambda_pres) } else { json!("inf") },
            "initial_loss": inv.initial_loss,
            "mean_snapped_error": mean(&inv.projection.snapped_errors),
            "mean_finetuned_error": mean(&inv.errors),
            "preservation_drift": inv.preservation_drift,
            "preservation_tolerance": cfg.preservation_tolerance,
            "preserved": inv.preserved,
        }),
    )?;
    println!(
        "inverted {} targets: error {:.5} -> {:.5}, preservation drift {:.5}",
        targets.len(),
        mean(&inv.projection.snapped_errors),
        mean(&inv.errors),
        inv.preservation_drift
    );
    println!("fine-tuned checkpoint {}", ckpt_path.display());
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

pub fn probe(s: &Shared, a: ProbeArgs) -> Result<()> {
    let c = open(s)?;
    let base = io::load_checkpoint(&a.baseline).with_context(|| format!("loading baseline {}", a.baseline.display()))?;
    let model = &c.ckpt.model;
    ensure(model.prior == Prior::Genome, "the main checkpoint must use the genome prior")?;
    ensure(base.model.prior != Prior::Genome, "the baseline checkpoint must use a gaussian prior")?;
    ensure(
        base.model.dims().latent_dim() == model.dims().latent_dim(),
        "genome and baseline latent widths differ",
    )?;
    let attrs = &c.config.attributes;
    let dims = model.dims();

    let mut rng = RandomStream::new(c.seed).split("probe-genome");
    let mut genome = ProbeData::default();
    for _ in 0..a.samples {
        let code = model.genome.assemble(&sample_sequence(&dims, &mut rng))?;
        let p = model.generate_code(&code)?;
        genome.probabilities.push(attrs.iter().map(|at| at.eval(p)).collect());
        genome.latents.push(code.0);
    }
    let mut rng = RandomStream::new(c.seed).split("probe-baseline");
    let mut baseline = ProbeData::default();
    for _ in 0..a.samples {
        let w = base.model.gaussian_latent(&mut rng)?;
        let p = base.model.generate_code(&LatentCode(w.clone()))?;
        baseline.probabilities.push(attrs.iter().map(|at| at.eval(p)).collect());
        baseline.latents.push(w);
    }
    let mut cfg = c.config.probe.clone();
    if let Some(seed) = s.seed {
        cfg.seed = seed;
    }
    let ids: Vec<String> = attrs.iter().map(|at| at.id.clone()).collect();
    let report = analysis::disentanglement_probe(&genome, &baseline, &ids, &cfg)?;
    let path = c.out.join("probe.json");
    io::write_json(&path, &report)?;
    println!(
        "probe split train/val/test = {}/{}/{}",
        report.split.train, report.split.val, report.split.test
    );
    for (l, id) in ids.iter().enumerate() {
        let (g, b) = (&report.genome[l], &report.baseline[l]);
        println!(
            "  {id:<14} genome {:.4} (majority {:.4}{})  baseline {:.4} (majority {:.4}{})",
            g.test_accuracy,
            g.majority_baseline,
            if g.degenerate { ", single class" } else { "" },
            b.test_accuracy,
            b.majority_baseline,
            if b.degenerate { ", single class" } else { "" },
        );
    }
    let (g, b) = (
        ProbeReport::mean_accuracy(&report.genome),
        ProbeReport::mean_accuracy(&report.baseline),
    );
    println!(
        "mean accuracy genome {g:.4} baseline {b:.4} (relative change {:+.1}%)",
        100.0 * (g - b) / b.max(f64::MIN_POSITIVE)
    );
    println!("report {}", path.display());
    Ok(())
}

pub fn correlate(s: &Shared, a: StatsArgs) -> Result<()> {
    let c = open(s)?;
    let mut rng = RandomStream::new(c.seed).split("correlate");
    let batch = collect_samples(&c.ckpt.model, a.samples, &c.config.attributes, &mut rng)?;
    let m = analysis::attribute_correlation(&batch);
    let path = c.out.join("correlation.csv");
    io::write_correlation_csv(&path, &m)?;
    for a in 0..m.len() {
        let row: Vec<String> = (0..m.len()).map(|b| format!("{:+.3}", m.get(a, b))).collect();
        let flag = if m.constant[a] { "  (constant)" } else { "" };
        println!("  {:<14} {}{flag}", m.attribute_ids[a], row.join(" "));
    }
    println!("correlation -> {}", path.display());
    Ok(())
}

pub fn capacity(a: CapacityArgs) -> Result<()> {
    let dims = GenomeDims::new(a.ng, a.nv, a.dg)?;
    let cap = genome_capacity(&dims);
    let digits = cap.to_string();
    println!("{digits}");
    println!("≈{}", scientific(&cap, 3));
    println!("digits {}", digits.len());
    println!("genome parameters {}", trainable_param_count(&dims));
    Ok(())
}

pub fn plot(s: &Shared, a: PlotArgs) -> Result<()> {
    let config = s.run_config()?;
    let out = s.out_dir(&config);
    let path = out.join("scatter.svg");
    if let Some(input) = &a.input {
        let pts = io::read_points_csv(input).with_context(|| format!("reading {}", input.display()))?;
        io::emit_scatter(&pts, &[], &path)?;
        println!("{} points -> {}", pts.len(), path.display());
        return Ok(());
    }
    let data = make_dataset(&config.dataset, config.dataset_seed)?;
    let mut pts: Vec<Point> = data.points.iter().take(a.n).copied().collect();
    let mut groups = vec![0; pts.len()];
    let ckpt_path = s.checkpoint_path(&out);
    if Path::new(&ckpt_path).exists() {
        let ckpt = io::load_checkpoint(&ckpt_path)?;
        let generated = generate_points(&ckpt.model, a.n, &mut sample_stream(s.seed.unwrap_or(0)))?;
        groups.extend(std::iter::repeat_n(1, generated.len()));
        pts.extend(generated);
    }
    io::emit_scatter(&pts, &groups, &path)?;
    println!("{} points -> {}", pts.len(), path.display());
    Ok(())
}
