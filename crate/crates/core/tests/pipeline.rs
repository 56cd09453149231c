//! End-to-end use of the public API on a small, briefly trained model.

use genelab::analysis::{attribute_correlation, gene_scores, prune_model, pruning_plan, realness_table};
use genelab::attributes::{
    collect_samples, conditional_distributions, estimate_stats, sample_conditional, ConditionalSpec,
};
use genelab::genome::sample_sequence;
use genelab::io::{load_checkpoint, read_stats_csv, save_checkpoint, write_stats_csv, Checkpoint, RunConfig};
use genelab::training::{make_dataset, train_gan, GanModel, MixtureSpec, TrainConfig};
use genelab::{GenomeDims, RandomStream};

fn small_model() -> (TrainConfig, GanModel) {
    let cfg = TrainConfig {
        dims: GenomeDims { n_g: 4, n_v: 8, d_g: 2 },
        steps: 400,
        generator_hidden: vec![32, 32],
        discriminator_hidden: vec![32, 32],
        seed: 11,
        ..TrainConfig::default()
    };
    let data = make_dataset(&MixtureSpec::two_modes(0.25, 2000), 5).unwrap();
    let (model, report) = train_gan(&cfg, &data).unwrap();
    assert_eq!(report.steps_completed, 400);
    (cfg, model)
}

#[test]
fn train_save_analyse_round_trip() {
    let (cfg, model) = small_model();
    let dir = tempfile::tempdir().unwrap();

    let path = dir.path().join("ck.bin");
    let ckpt = Checkpoint {
        config: cfg.clone(),
        model: model.clone(),
        step: cfg.steps,
    };
    save_checkpoint(&path, &ckpt).unwrap();
    let back = load_checkpoint(&path).unwrap();
    assert_eq!(back.model, model);
    assert_eq!(back.config, cfg);

    let attrs = RunConfig::default().attributes;
    let dims = model.dims();
    let batch = collect_samples(&model, 4000, &attrs, &mut RandomStream::new(1)).unwrap();
    let stats = estimate_stats(&batch, dims, 1.0).unwrap();

    let csv = dir.path().join("stats.csv");
    write_stats_csv(&csv, &stats).unwrap();
    let reread = read_stats_csv(&csv, dims, 1.0).unwrap();
    for (a, b) in stats.table().iter().zip(reread.table()) {
        assert!((a - b).abs() <= 1e-15);
    }

    let spec = ConditionalSpec {
        conditions: vec![("x>0".into(), true)],
        temperature: 0.0,
    };
    let d = conditional_distributions(&stats, &spec).unwrap();
    let seq = sample_conditional(&d, &mut RandomStream::new(2));
    assert_eq!(seq, d.argmax());

    let scores = gene_scores(&stats);
    assert!(scores.scores.iter().flatten().all(|s| *s >= 0.0 && s.is_finite()));

    let table = realness_table(&model, &batch).unwrap();
    let plan = pruning_plan(&table, 2).unwrap();
    let pruned = prune_model(&model, &plan).unwrap();
    assert_eq!(plan.replacements.len(), 2 * dims.n_g);
    for r in &plan.replacements {
        assert_eq!(
            pruned.genome.variant(r.position, r.victim),
            model.genome.variant(r.position, r.donor)
        );
    }

    let corr = attribute_correlation(&batch);
    for l in 0..corr.len() {
        assert_eq!(corr.get(l, l), 1.0);
    }
}

#[test]
fn training_is_reproducible() {
    let (_, a) = small_model();
    let (_, b) = small_model();
    assert_eq!(a, b);
    let dims = a.dims();
    let mut r1 = RandomStream::new(3);
    let mut r2 = RandomStream::new(3);
    for _ in 0..20 {
        let p = a.generate(&sample_sequence(&dims, &mut r1)).unwrap();
        let q = b.generate(&sample_sequence(&dims, &mut r2)).unwrap();
        assert_eq!(p[0].to_bits(), q[0].to_bits());
        assert_eq!(p[1].to_bits(), q[1].to_bits());
    }
}
