//! Incremental training: only extreme vectors whose tail actually changes are
//! re-estimated. Compares the work against refitting from scratch each time.

use ievm::harness::synth_blobs;
use ievm::{batch_fit_with_stats, EvmConfig, EvmModel};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ievm::Result<()> {
    let mut data = synth_blobs(6, 120, 4, 1.0, 3)?;
    data.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
    let config = EvmConfig {
        tail_size: 20,
        ..EvmConfig::default()
    };

    let mut model = EvmModel::new(config.clone())?;
    let (mut incremental, mut cyclic) = (0, 0);
    for (i, batch) in data.chunks(60).enumerate() {
        let ratio = if model.is_empty() { 0.0 } else { model.update_ratio(batch)? };
        let stats = model.partial_fit(batch)?;
        incremental += stats.weibull_refits;
        let seen = (i + 1) * 60;
        let (_, full) = batch_fit_with_stats(&data[..seen.min(data.len())], &config)?;
        cyclic += full.weibull_refits;
        println!(
            "batch {:>2}: update ratio {:.3}, refits {:>4} (cumulative {:>5} vs {:>6} retraining)",
            i + 1,
            ratio,
            stats.weibull_refits,
            incremental,
            cyclic
        );
    }
    println!("model epoch {}, {} extreme vectors", model.epoch, model.ev_count());
    Ok(())
}
