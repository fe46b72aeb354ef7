use proptest::prelude::*;
use vad_core::ensemble::{meta_features, partition, train_ensemble, EnsembleError};
use vad_core::{Dataset, EnsembleConfig, HyperparamChoice, Label, SvmHyperparams};

/// Rows carry their own index so parts can be mapped back to the input.
fn indexed(n: usize, speech_every: usize) -> Dataset {
    let mut ds = Dataset::new(2);
    for i in 0..n {
        let label = if i % speech_every == 0 { Label::Speech } else { Label::NonSpeech };
        ds.push(&[i as f64, (i * 7 % 5) as f64], label);
    }
    ds
}

proptest! {
    #[test]
    fn parts_are_disjoint_and_cover_the_input(n in 12usize..300, n_parts in 1usize..=6, seed in any::<u64>()) {
        let data = indexed(n, 2);
        let result = partition(&data, n_parts, seed);
        // Tiny parts can draw a single class; that is a documented error.
        prop_assume!(!matches!(result, Err(EnsembleError::SingleClassPartition { .. })));
        let parts = result.unwrap();
        prop_assert_eq!(parts.len(), n_parts);
        let mut seen: Vec<usize> = parts.iter().flat_map(|p| p.rows().map(|r| r[0] as usize).collect::<Vec<_>>()).collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
        let sizes: Vec<usize> = parts.iter().map(Dataset::len).collect();
        prop_assert!(sizes.windows(2).all(|w| w[0] >= w[1] && w[0] - w[1] <= 1));
        for p in &parts {
            for i in 0..p.len() {
                let original = p.row(i)[0] as usize;
                prop_assert_eq!(p.label(i), data.label(original));
            }
        }
        prop_assert_eq!(&parts, &partition(&data, n_parts, seed).unwrap());
    }
}

#[test]
fn permuting_members_permutes_meta_features() {
    let mut data = Dataset::new(2);
    for i in 0..120 {
        let label = if i % 2 == 0 { Label::Speech } else { Label::NonSpeech };
        let s = label.sign();
        data.push(&[s + (i as f64 * 0.37).sin(), -s + (i as f64 * 0.11).cos()], label);
    }
    let cfg = EnsembleConfig {
        n_members: 3,
        member_hp: HyperparamChoice::Fixed(SvmHyperparams::new(1.0, 0.5)),
        meta_hp: HyperparamChoice::Fixed(SvmHyperparams::new(1.0, 0.5)),
        base: SvmHyperparams::default(),
        seed: 2,
    };
    let ens = train_ensemble(&data, &cfg).unwrap();
    assert_eq!(ens.meta.dim(), 3);
    let reversed: Vec<_> = ens.members.iter().rev().cloned().collect();
    for x in [[0.2, -0.4], [1.5, 1.0], [-2.0, 0.3]] {
        let forward = meta_features(&ens.members, &x).unwrap();
        let mut backward = meta_features(&reversed, &x).unwrap();
        backward.reverse();
        assert_eq!(forward, backward);
        assert!(forward.iter().all(|&p| p > 0.0 && p < 1.0));
    }
}
