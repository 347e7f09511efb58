use ievm::harness::persist::{model_from_bytes, model_to_bytes};
use ievm::harness::{load_model, save_model, synth_blobs};
use ievm::{batch_fit, EvmConfig, Error, Reduction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fitted() -> ievm::EvmModel {
    let data = synth_blobs(4, 25, 3, 1.0, 12).unwrap();
    let mut model = batch_fit(
        &data[..],
        &EvmConfig {
            tail_size: 10,
            ..EvmConfig::default()
        },
    )
    .unwrap();
    model.reduce(&Reduction::Wksc { k: 8 }).unwrap();
    model
}

#[test]
fn predictions_survive_a_round_trip() {
    let model = fitted();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ievm");
    save_model(&model, &path).unwrap();
    let loaded = load_model(&path).unwrap();
    assert_eq!(loaded, model);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-15.0..15.0)).collect();
        assert_eq!(loaded.predict(&x).unwrap(), model.predict(&x).unwrap());
    }
}

#[test]
fn wrong_magic_is_rejected() {
    let mut bytes = model_to_bytes(&fitted()).unwrap();
    bytes[..4].copy_from_slice(b"EVMF");
    assert!(matches!(model_from_bytes(&bytes), Err(Error::Corrupt(_))));
}

#[test]
fn continuation_after_reload_is_identical() {
    let model = fitted();
    let more = synth_blobs(5, 6, 3, 1.0, 99).unwrap();
    let mut direct = model.clone();
    direct.partial_fit(&more).unwrap();
    let mut reloaded = model_from_bytes(&model_to_bytes(&model).unwrap()).unwrap();
    reloaded.partial_fit(&more).unwrap();
    assert_eq!(reloaded, direct);
}
