mod common;

use ievm::harness::config::{Method, ProtocolSpec};
use ievm::harness::runner::{load_data, run_on_data};
use ievm::reduction::Reduction;
use ievm::{batch_fit, EvmConfig, EvmModel};
use proptest::prelude::*;

fn assert_same_evs(a: &EvmModel, b: &EvmModel) {
    assert_eq!(a.ev_counts(), b.ev_counts());
    for (x, y) in a.extreme_vectors().zip(b.extreme_vectors()) {
        assert_eq!(x.anchor, y.anchor);
        assert_eq!(x.tail, y.tail);
        for (p, q) in [
            (x.params.shape, y.params.shape),
            (x.params.scale, y.params.scale),
            (x.params.max_tail_distance, y.params.max_tail_distance),
        ] {
            assert!((p - q).abs() <= 1e-9 * q.abs(), "{p} vs {q}");
        }
    }
    for (ca, cb) in a.classes.values().zip(b.classes.values()) {
        for (p, q) in ca.coverage.sums.iter().zip(&cb.coverage.sums) {
            assert!((p - q).abs() <= 1e-9 * q.abs().max(1.0));
        }
    }
}

#[test]
fn two_epoch_ievm_matches_cyclic_refit_with_fewer_refits() {
    let mut config = common::blob_config(Method::Ievm, Reduction::None, 4);
    config.protocol = ProtocolSpec::Two {
        known_fraction: 0.5,
        classes_per_batch: 2,
        test_samples_per_known: 5,
    };
    let data = load_data(&config).unwrap();
    let incremental = run_on_data(&config, &data).unwrap();
    assert_eq!(incremental.report.epochs.len(), 2);
    config.method = Method::Evm;
    let cyclic = run_on_data(&config, &data).unwrap();
    assert_same_evs(incremental.model.as_ref().unwrap(), cyclic.model.as_ref().unwrap());
    let refits = |r: &ievm::harness::RunReport| r.epochs.last().unwrap().counters.weibull_refits;
    assert!(refits(&incremental.report) < refits(&cyclic.report));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chained_partial_fit_equals_batch_fit(
        seed in 0u64..1000,
        tau in 1usize..12,
        cuts in prop::collection::vec(1usize..40, 1..5),
    ) {
        let data = ievm::harness::synth_blobs(3, 15, 2, 1.0, seed).unwrap();
        let mut order: Vec<usize> = (0..data.len()).collect();
        // Interleave classes so the first chunk has at least two.
        order.sort_by_key(|&i| (i % 15, i / 15));
        let data: Vec<_> = order.into_iter().map(|i| data[i].clone()).collect();
        let config = EvmConfig { tail_size: tau, ..EvmConfig::default() };
        let reference = batch_fit(&data, &config).unwrap();

        let mut model = EvmModel::new(config).unwrap();
        let mut start = 0;
        let mut bounds: Vec<usize> = cuts.iter().scan(2usize, |acc, c| { *acc += c; Some(*acc) }).collect();
        bounds.push(data.len());
        for end in bounds {
            let end = end.min(data.len());
            if end > start {
                model.partial_fit(&data[start..end]).unwrap();
                start = end;
            }
        }
        prop_assert_eq!(model.ev_count(), data.len());
        assert_same_evs(&model, &reference);
    }
}
