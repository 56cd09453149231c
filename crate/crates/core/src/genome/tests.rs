use proptest::prelude::*;

use super::*;

fn tiny(dims: (usize, usize, usize), values: Vec<f64>) -> Genome {
    Genome::from_parts(GenomeDims::new(dims.0, dims.1, dims.2).unwrap(), 0, values).unwrap()
}

#[test]
fn init_is_deterministic_and_shaped() {
    let d = GenomeDims::new(1, 1, 1).unwrap();
    let a = Genome::init(d, 99).unwrap();
    let b = Genome::init(d, 99).unwrap();
    assert_eq!(a.embeddings()[0].to_bits(), b.embeddings()[0].to_bits());

    let big = Genome::init(GenomeDims::new(64, 256, 8).unwrap(), 1).unwrap();
    assert_eq!(big.embeddings().len(), 131_072);
}

#[test]
fn init_sample_mean_near_zero() {
    let g = Genome::init(GenomeDims::new(2, 3, 4).unwrap(), 7).unwrap();
    let mean = g.embeddings().iter().sum::<f64>() / 24.0;
    assert!(mean.abs() <= 3.0 / 24f64.sqrt(), "{mean}");
}

#[test]
fn invalid_dims_rejected() {
    assert!(matches!(GenomeDims::new(0, 1, 1), Err(Error::InvalidDims(_))));
    assert!(GenomeDims::new(1, 0, 1).is_err());
    assert!(GenomeDims::new(1, 1, 0).is_err());
    let bad = GenomeDims { n_g: 2, n_v: 0, d_g: 1 };
    assert!(Genome::init(bad, 0).is_err());
}

#[test]
fn single_variant_always_zero() {
    let dims = GenomeDims::new(5, 1, 2).unwrap();
    let mut rng = RandomStream::new(3);
    for _ in 0..100 {
        assert_eq!(sample_sequence(&dims, &mut rng).0, vec![0; 5]);
    }
}

#[test]
fn uniform_cell_frequencies() {
    let dims = GenomeDims::new(2, 3, 1).unwrap();
    let mut rng = RandomStream::new(12345);
    let n = 30_000;
    let mut counts = [[0usize; 3]; 2];
    for _ in 0..n {
        let s = sample_sequence(&dims, &mut rng);
        for (i, &j) in s.0.iter().enumerate() {
            counts[i][j] += 1;
        }
    }
    for row in counts {
        for c in row {
            let f = c as f64 / n as f64;
            assert!((f - 1.0 / 3.0).abs() <= 0.01, "{f}");
        }
    }
    let mut a = RandomStream::new(8);
    let mut b = a.clone();
    assert_eq!(sample_sequence(&dims, &mut a), sample_sequence(&dims, &mut b));
}

#[test]
fn assemble_direct_lookup() {
    let g = tiny((2, 2, 1), vec![1.0, 2.0, 3.0, 4.0]);
    assert_eq!(g.assemble(&GeneSequence(vec![0, 1])).unwrap().0, vec![1.0, 4.0]);
    assert_eq!(g.assemble(&GeneSequence(vec![1, 0])).unwrap().0, vec![2.0, 3.0]);
    assert!(matches!(
        g.assemble(&GeneSequence(vec![2, 0])),
        Err(Error::IndexOutOfRange(_))
    ));
    assert!(g.assemble(&GeneSequence(vec![0])).is_err());
}

#[test]
fn capacity_values() {
    let c = capacity(&GenomeDims::new(64, 256, 8).unwrap());
    let s = c.to_str_radix(10);
    assert_eq!(s.len(), 155);
    assert!(s.starts_with("134"));
    assert_eq!(scientific(&c, 3), "1.34e154");
    assert_eq!(capacity(&GenomeDims::new(1, 256, 1).unwrap()), BigUint::from(256u32));
    assert_eq!(capacity(&GenomeDims::new(2, 3, 1).unwrap()), BigUint::from(9u32));
}

#[test]
fn scientific_rounding() {
    assert_eq!(scientific(&BigUint::from(9999u32), 3), "1.00e4");
    assert_eq!(scientific(&BigUint::from(12u32), 3), "1.2e1");
    assert_eq!(scientific(&BigUint::from(7u32), 3), "7e0");
    assert_eq!(scientific(&BigUint::from(1344u32), 3), "1.34e3");
    assert_eq!(scientific(&BigUint::from(1345u32), 3), "1.35e3");
}

#[test]
fn capacity_matches_enumeration() {
    for n_g in 1..=6 {
        for n_v in 1..=10 {
            let dims = GenomeDims::new(n_g, n_v, 1).unwrap();
            if (n_v as u64).pow(n_g as u32) > 10_000 {
                continue;
            }
            let count = enumerate_sequences(dims).count();
            assert_eq!(BigUint::from(count), capacity(&dims), "{dims:?}");
        }
    }
}

#[test]
fn enumeration_is_lexicographic() {
    let seqs: Vec<_> = enumerate_sequences(GenomeDims::new(2, 3, 1).unwrap())
        .map(|s| s.0)
        .collect();
    assert_eq!(seqs[0], vec![0, 0]);
    assert_eq!(seqs[1], vec![0, 1]);
    assert_eq!(seqs[3], vec![1, 0]);
    assert_eq!(seqs[8], vec![2, 2]);
}

#[test]
fn param_counts() {
    assert_eq!(trainable_param_count(&GenomeDims::new(1, 70_000, 512).unwrap()), 35_840_000);
    let a = trainable_param_count(&GenomeDims::new(64, 256, 8).unwrap());
    let b = trainable_param_count(&GenomeDims::new(32, 256, 16).unwrap());
    assert_eq!(a, 131_072);
    assert_eq!(a, 256 * 512);
    assert_eq!(a, b);
}

#[test]
fn interpolation_endpoints_and_midpoint() {
    let g = Genome::init(GenomeDims::new(3, 4, 2).unwrap(), 5).unwrap();
    let a = GeneSequence(vec![0, 1, 2]);
    let b = GeneSequence(vec![3, 3, 0]);
    assert_eq!(g.interpolate(&a, &b, 0.0).unwrap(), g.assemble(&a).unwrap());
    assert_eq!(g.interpolate(&a, &b, 1.0).unwrap(), g.assemble(&b).unwrap());
    let line = tiny((1, 2, 1), vec![0.0, 2.0]);
    let v = line
        .interpolate(&GeneSequence(vec![0]), &GeneSequence(vec![1]), 0.25)
        .unwrap();
    assert_eq!(v.0, vec![0.5]);
    // extrapolation is allowed at this level
    assert!(line.interpolate(&GeneSequence(vec![0]), &GeneSequence(vec![1]), 1.5).is_ok());
    assert!(line.interpolate(&GeneSequence(vec![0]), &GeneSequence(vec![1]), f64::NAN).is_err());
}

#[test]
fn snap_hand_case_and_ties() {
    let g = tiny((1, 2, 2), vec![1.0, 0.0, 0.0, 1.0]);
    let (k, d) = g
        .snap_nearest(&LatentCode(vec![0.9, 0.1]), Metric::Euclidean)
        .unwrap();
    assert_eq!(k.0, vec![0]);
    assert!((d[0] - 0.02f64.sqrt()).abs() < 1e-12);
    // equidistant point
    for m in Metric::ALL {
        let (k, _) = g.snap_nearest(&LatentCode(vec![0.5, 0.5]), m).unwrap();
        assert_eq!(k.0, vec![0], "{m}");
    }
}

#[test]
fn cosine_zero_norm_is_error() {
    let g = tiny((1, 2, 2), vec![1.0, 0.0, 0.0, 1.0]);
    assert!(matches!(
        g.snap_nearest(&LatentCode(vec![0.0, 0.0]), Metric::Cosine),
        Err(Error::ZeroNorm { position: 0 })
    ));
    let z = tiny((1, 2, 2), vec![0.0, 0.0, 0.0, 1.0]);
    assert!(z.snap_nearest(&LatentCode(vec![1.0, 1.0]), Metric::Cosine).is_err());
    assert!(z.snap_nearest(&LatentCode(vec![1.0, 1.0]), Metric::Euclidean).is_ok());
}

#[test]
fn replacement_semantics() {
    let g = tiny((1, 2, 1), vec![5.0, 9.0]);
    assert_eq!(g.apply_variant_replacement(&[]).unwrap(), g);
    let r = g
        .apply_variant_replacement(&[Replacement { position: 0, victim: 1, donor: 0 }])
        .unwrap();
    assert_eq!(r.embeddings(), &[5.0, 5.0]);
    assert_eq!(g.embeddings(), &[5.0, 9.0]);
    assert!(r.distinct_capacity() <= g.distinct_capacity());
    assert_eq!(r.distinct_capacity(), BigUint::from(1u32));

    let dup = [
        Replacement { position: 0, victim: 1, donor: 0 },
        Replacement { position: 0, victim: 1, donor: 0 },
    ];
    assert!(matches!(
        g.apply_variant_replacement(&dup),
        Err(Error::DuplicateVictim { position: 0, victim: 1 })
    ));
    assert!(matches!(
        g.apply_variant_replacement(&[Replacement { position: 1, victim: 0, donor: 0 }]),
        Err(Error::IndexOutOfRange(_))
    ));
}

#[test]
fn gradient_routing_touches_only_selected() {
    let dims = GenomeDims::new(3, 4, 2).unwrap();
    let seq = GeneSequence(vec![1, 0, 3]);
    let mut grad = vec![0.0; dims.embedding_len()];
    route_gradient(&dims, &seq, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &mut grad);
    for i in 0..3 {
        for j in 0..4 {
            let off = dims.offset(i, j);
            let block = &grad[off..off + 2];
            if seq.0[i] == j {
                assert_eq!(block, &[(2 * i + 1) as f64, (2 * i + 2) as f64]);
            } else {
                assert_eq!(block, &[0.0, 0.0]);
            }
        }
    }
}

#[test]
fn sequence_text_round_trip() {
    let s = GeneSequence(vec![3, 0, 12]);
    assert_eq!(s.to_string(), "3-0-12");
    assert_eq!("3-0-12".parse::<GeneSequence>().unwrap(), s);
    assert!("3-x".parse::<GeneSequence>().is_err());
}

fn dims_strategy() -> impl Strategy<Value = GenomeDims> {
    (1usize..5, 1usize..6, 1usize..4).prop_map(|(g, v, d)| GenomeDims { n_g: g, n_v: v, d_g: d })
}

proptest! {
    #[test]
    fn snap_recovers_assembled(dims in dims_strategy(), seed in any::<u64>(), pick in any::<u64>()) {
        let g = Genome::init(dims, seed).unwrap();
        let mut rng = RandomStream::new(pick);
        let k = sample_sequence(&dims, &mut rng);
        let code = g.assemble(&k).unwrap();
        for m in Metric::ALL {
            // in one dimension every same-sign variant is cosine-equivalent
            if m == Metric::Cosine && dims.d_g == 1 {
                continue;
            }
            let (got, dist) = g.snap_nearest(&code, m).unwrap();
            prop_assert_eq!(&got, &k);
            prop_assert!(dist.iter().all(|&d| d == 0.0));
        }
    }

    #[test]
    fn interpolation_symmetry(dims in dims_strategy(), seed in any::<u64>(), t in -1.0f64..2.0) {
        let g = Genome::init(dims, seed).unwrap();
        let mut rng = RandomStream::new(seed ^ 1);
        let a = sample_sequence(&dims, &mut rng);
        let b = sample_sequence(&dims, &mut rng);
        let x = g.interpolate(&a, &b, t).unwrap();
        let y = g.interpolate(&b, &a, 1.0 - t).unwrap();
        for (p, q) in x.0.iter().zip(&y.0) {
            prop_assert!((p - q).abs() <= 1e-12 * (1.0 + p.abs()));
        }
    }

    #[test]
    fn assemble_injective_on_distinct_variants(dims in dims_strategy(), seed in any::<u64>()) {
        prop_assume!((dims.n_v as u64).pow(dims.n_g as u32) <= 500);
        let g = Genome::init(dims, seed).unwrap();
        let mut seen = std::collections::HashSet::new();
        for k in enumerate_sequences(dims) {
            let bits: Vec<u64> = g.assemble(&k).unwrap().0.iter().map(|v| v.to_bits()).collect();
            prop_assert!(seen.insert(bits));
        }
    }
}
