//! Feature files and model files: CSV and binary features, and a model that
//! is saved, reloaded and trained further.

use ievm::harness::{load_features, load_model, save_features, save_model, synth_blobs, FeatureFormat};
use ievm::{EvmConfig, EvmModel};

fn main() -> ievm::Result<()> {
    let dir = std::env::temp_dir().join("ievm_feature_files");
    std::fs::create_dir_all(&dir)?;
    let samples = synth_blobs(3, 40, 5, 1.0, 21)?;

    let csv = dir.join("features.csv");
    let bin = dir.join("features.evmf");
    save_features(&csv, &samples, FeatureFormat::Csv)?;
    save_features(&bin, &load_features(&csv, FeatureFormat::Csv)?, FeatureFormat::Binary)?;
    let from_bin = load_features(&bin, FeatureFormat::Binary)?;
    println!(
        "{} samples: csv {} bytes, binary {} bytes",
        from_bin.len(),
        std::fs::metadata(&csv)?.len(),
        std::fs::metadata(&bin)?.len()
    );

    let mut model = EvmModel::new(EvmConfig {
        tail_size: 15,
        ..EvmConfig::default()
    })?;
    model.partial_fit(&from_bin[..60])?;
    let path = dir.join("model.ievm");
    save_model(&model, &path)?;

    let mut restored = load_model(&path)?;
    restored.partial_fit(&from_bin[60..])?;
    model.partial_fit(&from_bin[60..])?;
    println!(
        "restored model continues identically: {} (epoch {}, {} EVs)",
        restored == model,
        restored.epoch,
        restored.ev_count()
    );
    Ok(())
}
