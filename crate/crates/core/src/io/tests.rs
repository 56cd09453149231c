use std::fs;

use super::*;
use crate::analysis::{attribute_correlation, gene_scores, realness_table};
use crate::attributes::{collect_samples, estimate_stats, AttributeDef};
use crate::error::Error;
use crate::genome::{Genome, GenomeDims};
use crate::numerics::RandomStream;
use crate::training::{GanModel, Prior, TrainConfig};

fn cfg(prior: Prior) -> TrainConfig {
    TrainConfig {
        dims: GenomeDims { n_g: 3, n_v: 5, d_g: 2 },
        prior,
        generator_hidden: vec![8, 8],
        discriminator_hidden: vec![8],
        seed: 11,
        ..TrainConfig::default()
    }
}

#[test]
fn genome_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.bin");
    let mut g = Genome::init(GenomeDims { n_g: 4, n_v: 7, d_g: 3 }, 99).unwrap();
    g.embeddings_mut()[0] = -0.0;
    g.embeddings_mut()[1] = f64::MIN_POSITIVE / 3.0;
    save_genome(&path, &g).unwrap();
    let back = load_genome(&path).unwrap();
    let bits = |g: &Genome| g.embeddings().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&back), bits(&g));
    assert_eq!(back, g);
    let bytes = fs::read(&path).unwrap();
    assert_eq!(&bytes[..8], MAGIC_GENOME);
    let hlen = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let header: serde_json::Value = serde_json::from_slice(&bytes[12..12 + hlen]).unwrap();
    assert_eq!(
        header,
        serde_json::json!({"format_version": 1, "n_g": 4, "n_v": 7, "d_g": 3, "seed": 99, "dtype": "f64le"})
    );
    assert_eq!(bytes.len(), 12 + hlen + 8 * 4 * 7 * 3);
}

#[test]
fn model_and_checkpoint_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for prior in [Prior::Genome, Prior::Gaussian, Prior::GaussianMapping] {
        let c = cfg(prior);
        let m = GanModel::init(&c).unwrap();
        let p = dir.path().join("m.bin");
        save_model(&p, &m).unwrap();
        assert_eq!(load_model(&p).unwrap(), m);
        let ck = Checkpoint {
            config: c,
            model: m,
            step: 17,
        };
        let p = dir.path().join("c.bin");
        save_checkpoint(&p, &ck).unwrap();
        assert_eq!(load_checkpoint(&p).unwrap(), ck);
    }
}

#[test]
fn container_errors_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.bin");
    let g = Genome::init(GenomeDims { n_g: 2, n_v: 3, d_g: 2 }, 1).unwrap();
    save_genome(&path, &g).unwrap();
    let good = fs::read(&path).unwrap();

    fs::write(&path, &good[..good.len() - 3]).unwrap();
    assert!(matches!(load_genome(&path), Err(Error::Truncated { .. })));
    fs::write(&path, &good[..10]).unwrap();
    assert!(matches!(load_genome(&path), Err(Error::Truncated { .. })));
    fs::write(&path, &good[..20]).unwrap();
    assert!(matches!(load_genome(&path), Err(Error::Truncated { .. })));

    let mut bad = good.clone();
    bad[0] = b'X';
    fs::write(&path, &bad).unwrap();
    assert!(matches!(load_genome(&path), Err(Error::BadMagic { .. })));
    // a model file is not a genome file
    let mp = dir.path().join("m.bin");
    save_model(&mp, &GanModel::init(&cfg(Prior::Genome)).unwrap()).unwrap();
    assert!(matches!(load_genome(&mp), Err(Error::BadMagic { .. })));

    let text = String::from_utf8_lossy(&good[12..]).to_string();
    let hlen = u32::from_le_bytes(good[8..12].try_into().unwrap()) as usize;
    let header = &text[..hlen];
    let bumped = header.replace("\"format_version\":1", "\"format_version\":2");
    let mut v = good[..8].to_vec();
    v.extend_from_slice(&(bumped.len() as u32).to_le_bytes());
    v.extend_from_slice(bumped.as_bytes());
    v.extend_from_slice(&good[12 + hlen..]);
    fs::write(&path, &v).unwrap();
    assert!(matches!(
        load_genome(&path),
        Err(Error::VersionMismatch { found: 2, expected: 1 })
    ));

    let mut long = good.clone();
    long.extend_from_slice(&[0; 8]);
    fs::write(&path, &long).unwrap();
    assert!(matches!(load_genome(&path), Err(Error::Header(_))));
}

#[test]
fn atomic_write_leaves_no_temp_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sub/x.txt");
    write_atomic(&path, b"one").unwrap();
    write_atomic(&path, b"two").unwrap();
    assert_eq!(fs::read(&path).unwrap(), b"two");
    let names: Vec<_> = fs::read_dir(path.parent().unwrap()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec![std::ffi::OsString::from("x.txt")]);
}

fn sample_stats() -> (GanModel, crate::attributes::SampleBatch) {
    let m = GanModel::init(&cfg(Prior::Genome)).unwrap();
    let attrs = [
        AttributeDef::half_plane("x>0", [1.0, 0.0], 0.0, 3.0),
        AttributeDef::half_plane("y>0", [0.0, 1.0], 0.1, 7.0),
    ];
    let b = collect_samples(&m, 300, &attrs, &mut RandomStream::new(4)).unwrap();
    (m, b)
}

#[test]
fn stats_csv_reloads_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let (m, b) = sample_stats();
    let s = estimate_stats(&b, m.dims(), 1.0).unwrap();
    let p = dir.path().join("stats.csv");
    write_stats_csv(&p, &s).unwrap();
    let back = read_stats_csv(&p, m.dims(), 1.0).unwrap();
    assert_eq!(back.attribute_ids, s.attribute_ids);
    assert_eq!(back.counts(), s.counts());
    for (a, b) in back.table().iter().zip(s.table()) {
        assert!((a - b).abs() <= 1e-15);
    }
    let text = fs::read_to_string(&p).unwrap();
    assert!(text.starts_with("attribute_id,position,variant,probability,count\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 5);
}

#[test]
fn analysis_tables_write() {
    let dir = tempfile::tempdir().unwrap();
    let (m, b) = sample_stats();
    let s = estimate_stats(&b, m.dims(), 0.0).unwrap();
    let gs = dir.path().join("scores.csv");
    write_gene_scores_csv(&gs, &gene_scores(&s)).unwrap();
    let text = fs::read_to_string(&gs).unwrap();
    assert!(text.starts_with("attribute,position,score,mu,sigma,sum_score\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 3);

    let rp = dir.path().join("realness.csv");
    write_realness_csv(&rp, &realness_table(&m, &b).unwrap()).unwrap();
    assert_eq!(fs::read_to_string(&rp).unwrap().lines().count(), 1 + 15);

    let cp = dir.path().join("corr.csv");
    write_correlation_csv(&cp, &attribute_correlation(&b)).unwrap();
    let text = fs::read_to_string(&cp).unwrap();
    assert_eq!(text.lines().next().unwrap(), "attribute,x>0,y>0");
    assert!(text.lines().nth(1).unwrap().starts_with("x>0,1,"));

    let sp = dir.path().join("samples.csv");
    write_samples_csv(&sp, &b).unwrap();
    let pts = read_points_csv(&sp).unwrap();
    assert_eq!(pts, b.points);
}

#[test]
fn points_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("pts.csv");
    let rows = vec![(vec!["0".to_string()], [0.1, -2.5]), (vec!["1".to_string()], [1e-300, 3.0])];
    write_points_csv(&p, &["t"], &rows).unwrap();
    assert_eq!(read_points_csv(&p).unwrap(), vec![[0.1, -2.5], [1e-300, 3.0]]);
    fs::write(&p, "a,b\n1,2\n").unwrap();
    assert!(read_points_csv(&p).is_err());
}

#[test]
fn svg_rules() {
    let empty = render_scatter(&[], &[]).unwrap();
    assert!(empty.starts_with("<svg") && empty.ends_with("</svg>\n"));
    assert!(!empty.contains("<circle"));
    assert!(empty.contains("<line"));

    let one = render_scatter(&[[0.0, 0.0]], &[]).unwrap();
    assert!(one.contains(r#"cx="240.000" cy="240.000""#), "{one}");

    let pts = [[-2.0, 0.5], [2.0, -0.5], [0.3, 0.1]];
    let svg = render_scatter(&pts, &[0, 1, 1]).unwrap();
    assert_eq!(svg, render_scatter(&pts, &[0, 1, 1]).unwrap());
    assert_eq!(svg.matches("class=\"g1\"").count(), 2);
    // the extreme x sits 5% of the span inside the plotting box
    let inner = 440.0;
    let left = 20.0 + inner * 0.05 / 1.1;
    assert!(svg.contains(&format!(r#"cx="{left:.3}""#)), "{svg}");

    assert!(render_scatter(&[[f64::NAN, 0.0]], &[]).is_err());
    assert!(render_scatter(&pts, &[0]).is_err());

    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    emit_scatter(&pts, &[], &a).unwrap();
    emit_scatter(&pts, &[], &b).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn run_config_round_trip_and_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("run.json");
    let c = RunConfig::default();
    c.save(&p).unwrap();
    assert_eq!(RunConfig::load(&p).unwrap(), c);

    let mut v: serde_json::Value = read_json(&p).unwrap();
    v["surprise"] = serde_json::json!(1);
    write_json(&p, &v).unwrap();
    assert!(RunConfig::load(&p).is_err());

    let mut v = serde_json::to_value(&c).unwrap();
    v["attributes"][0]["colour"] = serde_json::json!("red");
    write_json(&p, &v).unwrap();
    assert!(RunConfig::load(&p).is_err());

    let mut v = serde_json::to_value(&c).unwrap();
    v["schema_version"] = serde_json::json!(7);
    write_json(&p, &v).unwrap();
    assert!(matches!(RunConfig::load(&p), Err(Error::VersionMismatch { found: 7, .. })));
}
